//! Reading inputs; `-` is stdin.

use std::io::Read;
use std::path::Path;

use tracesynth::io::LoadError;
use tracesynth::model::Model;
use tracesynth::program::Program;
use tracesynth::trace::GeneralizedTrace;

use crate::commands::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, LoadError>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|e| CliError::Load(path.display().to_string(), e))
}

pub fn model(path: &Path) -> Result<Model, CliError> {
    load(path, Model::from_json_str)
}

pub fn program(path: &Path, model: Option<&Model>) -> Result<Program, CliError> {
    let p = load(path, Program::from_json_str)?;
    if let Some(m) = model {
        p.validate(m).map_err(|e| CliError::Load(path.display().to_string(), LoadError::Program(e)))?;
    }
    Ok(p)
}

pub fn traces(model: &Model, paths: &[impl AsRef<Path>]) -> Result<Vec<GeneralizedTrace>, CliError> {
    paths.iter().map(|p| load(p.as_ref(), |s| GeneralizedTrace::from_json_str(model, s))).collect()
}

pub fn json(path: &Path) -> Result<serde_json::Value, CliError> {
    load(path, tracesynth::io::parse_json)
}

/// `TRACESYNTH_FUEL` overrides the library default; an explicit flag wins.
pub fn fuel(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match std::env::var("TRACESYNTH_FUEL") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("TRACESYNTH_FUEL is not a number: {v}"))),
        Err(_) => Ok(tracesynth::program::DEFAULT_FUEL),
    }
}
