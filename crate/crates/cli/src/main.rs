use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod input;

use commands::{CliError, Output};

#[derive(Debug, Parser)]
#[command(name = "tracesynth", version, about = "Synthesize and check control-flow programs from execution traces")]
struct Cli {
    /// Human-readable tables instead of JSON where available.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that traces are paths in the state space, that named operations
    /// reproduce each row and that generalizing expressions match the literals.
    Validate {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Execute a program on one input state.
    Run {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        program: PathBuf,
        /// JSON object mapping variables to values.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        fuel: Option<u64>,
        /// Program state to start in instead of the start state.
        #[arg(long)]
        from: Option<String>,
    },
    /// Build a program from traces: a minimal one by default, one with at
    /// most `k` states, or one state per operation with `--heuristic`.
    /// Traces without operation names yield the tree-shaped witness.
    Synthesize {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(short)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "k")]
        heuristic: bool,
        /// Where to write the program; stdout if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Restricted coloring of the trace graph.
    Color {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(short)]
        k: Option<usize>,
    },
    /// Replay traces through a program and check every edge predicate.
    Verify {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        program: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Control-flow reports for a program.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
    /// Render a program.
    Export {
        #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
        format: ExportFormat,
        #[arg(short, long)]
        program: PathBuf,
        /// Model whose predicate names are used for `--dnf`.
        #[arg(short, long)]
        model: Option<PathBuf>,
        /// Write word-set predicates as disjunctions of conjunctions.
        #[arg(long, requires = "model")]
        dnf: bool,
    },
    /// Built-in example models, programs and traces.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Subcommand)]
enum ReportKind {
    /// Rows witnessing each edge, unwitnessed edges and unreached states.
    Witnesses {
        #[arg(short, long)]
        program: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Model used to read the traces; names are read leniently without it.
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Pairs of states with no connecting edge.
    Missing {
        #[arg(short, long)]
        program: PathBuf,
        /// JSON object of `"FROM->TO"` comments.
        #[arg(long)]
        comments: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum FixtureAction {
    List,
    Export { name: String, dir: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Imperative,
    Functional,
}

fn dispatch(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Validate { model, traces } => commands::validate(&model, &traces),
        Command::Run { model, program, input, fuel, from } => {
            commands::run(&model, &program, &input, fuel, from.as_deref())
        }
        Command::Synthesize { model, traces, k, heuristic, output } => {
            commands::synthesize(&model, &traces, k, heuristic, output.as_deref())
        }
        Command::Color { model, traces, k } => commands::color(&model, &traces, k),
        Command::Verify { model, program, traces } => commands::verify(&model, &program, &traces),
        Command::Report { kind: ReportKind::Witnesses { program, traces, model } } => {
            commands::witnesses(&model, &program, &traces)
        }
        Command::Report { kind: ReportKind::Missing { program, comments } } => {
            commands::missing(&program, comments.as_deref())
        }
        Command::Export { format, program, model, dnf } => {
            let format = match format {
                ExportFormat::Dot => tracesynth::export::Format::Dot,
                ExportFormat::Imperative => tracesynth::export::Format::Imperative,
                ExportFormat::Functional => tracesynth::export::Format::Functional,
            };
            commands::export(&program, model.as_deref(), format, dnf)
        }
        Command::Fixtures { action: FixtureAction::List } => commands::fixtures_list(),
        Command::Fixtures { action: FixtureAction::Export { name, dir } } => commands::fixtures_export(&name, &dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.render(pretty));
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("tracesynth: {e}");
            ExitCode::from(2)
        }
    }
}
