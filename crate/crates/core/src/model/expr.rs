//! Expression language for operation right-hand sides and predicate formulas.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::types::{TypeTag, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "|",
            BinOp::And => "&",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    fn is_comparison(self) -> bool {
        self.prec() == 4
    }
}

/// Expression tree. Equality is syntactic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Str(String),
    /// Enum literal, written `#label`.
    Label(String),
    /// Empty stack literal `[]`.
    EmptyStack,
    Var(String),
    Call(String, Vec<Expr>),
    Len(Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Push(Box<Expr>, Vec<Expr>),
    Pop(Box<Expr>),
    /// 1-based component of the top row of a stack.
    Top(Box<Expr>, usize),
    /// 1-based array indexing.
    Index(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

pub const RESERVED: &[&str] = &["len", "if", "push", "pop", "top", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("read of unassigned variable `{0}`")]
    UndefinedRead(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("integer overflow")]
    Overflow,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("{name}: {message}")]
    Function { name: String, message: String },
    #[error("pop or top of an empty stack")]
    EmptyStack,
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
}

/// What an expression needs from its surroundings.
pub trait Env {
    fn lookup(&self, name: &str) -> Result<&Value, EvalError>;
    fn call(&self, name: &str, args: &[Value]) -> Result<Value, EvalError>;
}

/// Static typing information for type checking.
pub trait TypeEnv {
    fn var_type(&self, name: &str) -> Option<&TypeTag>;
    fn signature(&self, name: &str) -> Option<(&[TypeTag], &TypeTag)>;
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Str(String),
    Ident(String),
    Label(String),
    Sym(&'static str),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let err = |offset, message: &str| ParseError { offset, message: message.to_string() };
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut n: i128 = 0;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                n = n * 10 + chars[i].1.to_digit(10).unwrap() as i128;
                if n > i64::MAX as i128 + 1 {
                    return Err(err(off, "integer literal too large"));
                }
                i += 1;
            }
            if n > i64::MAX as i128 {
                // only valid right after a unary minus; the parser checks
                out.push((off, Tok::Int(i64::MIN)));
            } else {
                out.push((off, Tok::Int(n as i64)));
            }
            continue;
        }
        if is_ident_start(c) || c == '#' {
            let start = if c == '#' { i + 1 } else { i };
            let mut j = start;
            while j < chars.len() && is_ident_char(chars[j].1) {
                j += 1;
            }
            if j == start {
                return Err(err(off, "expected a label after `#`"));
            }
            let text: String = chars[start..j].iter().map(|p| p.1).collect();
            out.push((off, if c == '#' { Tok::Label(text) } else { Tok::Ident(text) }));
            i = j;
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(off, "unterminated string literal")),
                    Some((_, '"')) => break,
                    Some((_, '\\')) => {
                        let esc = chars.get(i + 1).map(|p| p.1);
                        s.push(match esc {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\\') => '\\',
                            Some('"') => '"',
                            _ => return Err(err(chars[i].0, "bad escape sequence")),
                        });
                        i += 2;
                    }
                    Some((_, ch)) => {
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((off, Tok::Str(s)));
            continue;
        }
        let next = chars.get(i + 1).map(|p| p.1);
        let (sym, width): (&'static str, usize) = match (c, next) {
            ('!', Some('=')) => ("!=", 2),
            ('<', Some('=')) => ("<=", 2),
            ('>', Some('=')) => (">=", 2),
            ('(', _) => ("(", 1),
            (')', _) => (")", 1),
            ('[', _) => ("[", 1),
            (']', _) => ("]", 1),
            (',', _) => (",", 1),
            ('+', _) => ("+", 1),
            ('-', _) | ('−', _) => ("-", 1),
            ('*', _) => ("*", 1),
            ('=', _) => ("=", 1),
            ('<', _) => ("<", 1),
            ('>', _) => (">", 1),
            ('&', _) | ('∧', _) => ("&", 1),
            ('|', _) | ('∨', _) => ("|", 1),
            ('!', _) | ('¬', _) => ("!", 1),
            ('≠', _) => ("!=", 1),
            ('≤', _) => ("<=", 1),
            ('≥', _) => (">=", 1),
            ('⊤', _) => {
                out.push((off, Tok::Ident("true".into())));
                i += 1;
                continue;
            }
            ('⊥', _) => {
                out.push((off, Tok::Ident("false".into())));
                i += 1;
                continue;
            }
            _ => return Err(err(off, &format!("unexpected character `{c}`"))),
        };
        out.push((off, Tok::Sym(sym)));
        i += width;
    }
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{sym}`"))
        }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            let rhs = self.and()?;
            lhs = Expr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not()?;
        while self.eat("&") {
            let rhs = self.not()?;
            lhs = Expr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ParseError> {
        if self.eat("!") {
            Ok(Expr::Not(Box::new(self.not()?)))
        } else {
            self.cmp()
        }
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => BinOp::Eq,
            Some(Tok::Sym("!=")) => BinOp::Ne,
            Some(Tok::Sym("<")) => BinOp::Lt,
            Some(Tok::Sym("<=")) => BinOp::Le,
            Some(Tok::Sym(">")) => BinOp::Gt,
            Some(Tok::Sym(">=")) => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.add()?;
        if matches!(self.peek(), Some(Tok::Sym(s)) if ["=", "!=", "<", "<=", ">", ">="].contains(s)) {
            return self.err("comparisons do not chain; add parentheses");
        }
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.mul()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat("*") {
            let rhs = self.unary()?;
            lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            if let Some(Tok::Int(n)) = self.peek().cloned() {
                self.pos += 1;
                let v = if n == i64::MIN { i64::MIN } else { -n };
                return self.postfix(Expr::Int(v));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let p = self.primary()?;
        self.postfix(p)
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr, ParseError> {
        while self.eat("[") {
            let idx = self.or()?;
            self.expect("]")?;
            e = Expr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            out.push(self.or()?);
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = match self.peek().cloned() {
            Some(t) => t,
            None => return self.err("unexpected end of expression"),
        };
        let at = self.offset();
        self.pos += 1;
        match tok {
            Tok::Int(n) if n == i64::MIN => Err(ParseError {
                offset: at,
                message: "integer literal too large".into(),
            }),
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Str(s) => Ok(Expr::Str(s)),
            Tok::Label(l) => Ok(Expr::Label(l)),
            Tok::Sym("(") => {
                let e = self.or()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.expect("]")?;
                Ok(Expr::EmptyStack)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                _ if self.eat("(") => {
                    let mut args = self.args()?;
                    let arity = |n: usize| -> Result<(), ParseError> {
                        if args.len() == n {
                            Ok(())
                        } else {
                            Err(ParseError {
                                offset: at,
                                message: format!("`{name}` takes {n} argument(s)"),
                            })
                        }
                    };
                    match name.as_str() {
                        "len" => {
                            arity(1)?;
                            Ok(Expr::Len(Box::new(args.remove(0))))
                        }
                        "pop" => {
                            arity(1)?;
                            Ok(Expr::Pop(Box::new(args.remove(0))))
                        }
                        "if" => {
                            arity(3)?;
                            let c = args.remove(0);
                            let a = args.remove(0);
                            let b = args.remove(0);
                            Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
                        }
                        "top" => {
                            arity(2)?;
                            match args[1] {
                                Expr::Int(i) if i >= 1 => {
                                    Ok(Expr::Top(Box::new(args.remove(0)), i as usize))
                                }
                                _ => Err(ParseError {
                                    offset: at,
                                    message: "`top` needs a positive integer literal position"
                                        .into(),
                                }),
                            }
                        }
                        "push" => {
                            if args.len() < 2 {
                                return Err(ParseError {
                                    offset: at,
                                    message: "`push` needs a stack and at least one value".into(),
                                });
                            }
                            let stk = args.remove(0);
                            Ok(Expr::Push(Box::new(stk), args))
                        }
                        _ => Ok(Expr::Call(name, args)),
                    }
                }
                _ if RESERVED.contains(&name.as_str()) => Err(ParseError {
                    offset: at,
                    message: format!("`{name}` is reserved"),
                }),
                _ => Ok(Expr::Var(name)),
            },
            Tok::Sym(s) => Err(ParseError { offset: at, message: format!("unexpected `{s}`") }),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(src: &str) -> Result<Expr, ParseError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, end: src.len() };
        let e = p.or()?;
        if p.pos < p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

// ---------------------------------------------------------------- printing

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            Expr::Not(_) => 3,
            Expr::Neg(_) => 7,
            _ => 9,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn comma_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Str(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\t' => write!(f, "\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Expr::Label(l) => write!(f, "#{l}"),
            Expr::EmptyStack => write!(f, "[]"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                comma_list(f, args)?;
                write!(f, ")")
            }
            Expr::Len(e) => write!(f, "len({e})"),
            Expr::If(c, a, b) => write!(f, "if({c}, {a}, {b})"),
            Expr::Push(s, args) => {
                write!(f, "push({s}, ")?;
                comma_list(f, args)?;
                write!(f, ")")
            }
            Expr::Pop(s) => write!(f, "pop({s})"),
            Expr::Top(s, i) => write!(f, "top({s}, {i})"),
            Expr::Index(a, i) => {
                a.fmt_child(f, 8)?;
                write!(f, "[{i}]")
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                // a bare literal after `-` would re-parse as a negative literal
                if matches!(**e, Expr::Int(_) | Expr::Neg(_)) {
                    write!(f, "({e})")
                } else {
                    e.fmt_child(f, 7)
                }
            }
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_child(f, 3)
            }
            Expr::Bin(op, l, r) => {
                let p = op.prec();
                if op.is_comparison() {
                    l.fmt_child(f, p + 1)?;
                } else {
                    l.fmt_child(f, p)?;
                }
                write!(f, " {} ", op.symbol())?;
                r.fmt_child(f, p + 1)
            }
        }
    }
}

// ---------------------------------------------------------------- typing

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    Tag(TypeTag),
    Label(String),
    EmptyStack,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Tag(t) => write!(f, "{t}"),
            Ty::Label(l) => write!(f, "#{l}"),
            Ty::EmptyStack => write!(f, "[]"),
        }
    }
}

/// Whether a slot of type `want` can hold a value of static type `got`.
fn fits(want: &TypeTag, got: &Ty) -> bool {
    match got {
        Ty::Tag(t) => want.accepts(t),
        Ty::Label(l) => matches!(want, TypeTag::Enum(ls) if ls.contains(l)),
        Ty::EmptyStack => matches!(want, TypeTag::Stack(_)),
    }
}

fn comparable(a: &Ty, b: &Ty) -> bool {
    match (a, b) {
        (Ty::Tag(x), y) => fits(x, y),
        (x, Ty::Tag(y)) => fits(y, x),
        (Ty::Label(_), Ty::Label(_)) | (Ty::EmptyStack, Ty::EmptyStack) => true,
        _ => false,
    }
}

impl Expr {
    /// Type-check against `env`, returning the static type.
    pub fn type_of(&self, env: &dyn TypeEnv) -> Result<TypeTag, EvalError> {
        match self.ty(env)? {
            Ty::Tag(t) => Ok(t),
            Ty::Label(l) => Ok(TypeTag::Enum(vec![l])),
            Ty::EmptyStack => Ok(TypeTag::Stack(Vec::new())),
        }
    }

    /// Type-check and require the result to fit in a slot of type `want`.
    pub fn check_against(&self, env: &dyn TypeEnv, want: &TypeTag) -> Result<(), EvalError> {
        let got = self.ty(env)?;
        if fits(want, &got) {
            Ok(())
        } else {
            Err(EvalError::TypeMismatch(format!("`{self}` has type {got}, expected {want}")))
        }
    }

    fn ty(&self, env: &dyn TypeEnv) -> Result<Ty, EvalError> {
        let mismatch = |msg: String| Err(EvalError::TypeMismatch(msg));
        let want = |e: &Expr, t: &TypeTag| -> Result<(), EvalError> { e.check_against(env, t) };
        Ok(match self {
            Expr::Int(_) => Ty::Tag(TypeTag::INT),
            Expr::Bool(_) => Ty::Tag(TypeTag::Bool),
            Expr::Str(_) => Ty::Tag(TypeTag::Str),
            Expr::Label(l) => Ty::Label(l.clone()),
            Expr::EmptyStack => Ty::EmptyStack,
            Expr::Var(v) => {
                Ty::Tag(env.var_type(v).cloned().ok_or_else(|| EvalError::UnknownVariable(v.clone()))?)
            }
            Expr::Call(name, args) => {
                let (params, result) =
                    env.signature(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                if params.len() != args.len() {
                    return mismatch(format!(
                        "`{name}` takes {} argument(s), got {}",
                        params.len(),
                        args.len()
                    ));
                }
                for (p, a) in params.iter().zip(args) {
                    want(a, p)?;
                }
                Ty::Tag(result.clone())
            }
            Expr::Len(e) => match e.ty(env)? {
                Ty::Tag(TypeTag::Str | TypeTag::StrArray | TypeTag::Stack(_)) | Ty::EmptyStack => {
                    Ty::Tag(TypeTag::INT)
                }
                t => return mismatch(format!("len of {t}")),
            },
            Expr::If(c, a, b) => {
                want(c, &TypeTag::Bool)?;
                let (ta, tb) = (a.ty(env)?, b.ty(env)?);
                match (&ta, &tb) {
                    (Ty::Tag(x), Ty::Tag(y)) if x.is_int() && y.is_int() => Ty::Tag(TypeTag::INT),
                    (Ty::Tag(x), y) if fits(x, y) => ta.clone(),
                    (x, Ty::Tag(y)) if fits(y, x) => tb.clone(),
                    _ if ta == tb => ta,
                    _ => return mismatch(format!("if branches have types {ta} and {tb}")),
                }
            }
            Expr::Push(s, args) => match s.ty(env)? {
                Ty::Tag(TypeTag::Stack(row)) => {
                    if row.len() != args.len() {
                        return mismatch(format!(
                            "push of {} value(s) onto rows of width {}",
                            args.len(),
                            row.len()
                        ));
                    }
                    for (t, a) in row.iter().zip(args) {
                        want(a, t)?;
                    }
                    Ty::Tag(TypeTag::Stack(row))
                }
                t => return mismatch(format!("push onto {t}")),
            },
            Expr::Pop(s) => match s.ty(env)? {
                t @ Ty::Tag(TypeTag::Stack(_)) => t,
                t => return mismatch(format!("pop of {t}")),
            },
            Expr::Top(s, i) => match s.ty(env)? {
                Ty::Tag(TypeTag::Stack(row)) if *i <= row.len() => Ty::Tag(row[*i - 1].clone()),
                t => return mismatch(format!("top(_, {i}) of {t}")),
            },
            Expr::Index(a, i) => {
                want(i, &TypeTag::INT)?;
                match a.ty(env)? {
                    Ty::Tag(TypeTag::StrArray) => Ty::Tag(TypeTag::Str),
                    t => return mismatch(format!("indexing into {t}")),
                }
            }
            Expr::Neg(e) => {
                want(e, &TypeTag::INT)?;
                Ty::Tag(TypeTag::INT)
            }
            Expr::Not(e) => {
                want(e, &TypeTag::Bool)?;
                Ty::Tag(TypeTag::Bool)
            }
            Expr::Bin(op, l, r) => match op {
                BinOp::Or | BinOp::And => {
                    want(l, &TypeTag::Bool)?;
                    want(r, &TypeTag::Bool)?;
                    Ty::Tag(TypeTag::Bool)
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    want(l, &TypeTag::INT)?;
                    want(r, &TypeTag::INT)?;
                    Ty::Tag(TypeTag::INT)
                }
                BinOp::Eq | BinOp::Ne => {
                    let (tl, tr) = (l.ty(env)?, r.ty(env)?);
                    if !comparable(&tl, &tr) {
                        return mismatch(format!("cannot compare {tl} with {tr}"));
                    }
                    Ty::Tag(TypeTag::Bool)
                }
                _ => {
                    let (tl, tr) = (l.ty(env)?, r.ty(env)?);
                    let ordered = match (&tl, &tr) {
                        (Ty::Tag(a), Ty::Tag(b)) => {
                            (a.is_int() && b.is_int()) || (*a == TypeTag::Str && *b == TypeTag::Str)
                        }
                        _ => false,
                    };
                    if !ordered {
                        return mismatch(format!("cannot order {tl} and {tr}"));
                    }
                    Ty::Tag(TypeTag::Bool)
                }
            },
        })
    }

    /// Names of all variables read by the expression.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(&v.as_str()) {
                    out.push(v.as_str());
                }
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Push(s, args) => {
                s.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            Expr::Len(e) | Expr::Pop(e) | Expr::Top(e, _) | Expr::Neg(e) | Expr::Not(e) => {
                e.walk(f)
            }
            Expr::If(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            Expr::Index(a, b) | Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    /// Replace variables for which `f` returns a substitute.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(f));
        match self {
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Call(n, args) => Expr::Call(n.clone(), args.iter().map(|a| a.substitute(f)).collect()),
            Expr::Push(s, args) => Expr::Push(sub(s), args.iter().map(|a| a.substitute(f)).collect()),
            Expr::Len(e) => Expr::Len(sub(e)),
            Expr::Pop(e) => Expr::Pop(sub(e)),
            Expr::Top(e, i) => Expr::Top(sub(e), *i),
            Expr::Neg(e) => Expr::Neg(sub(e)),
            Expr::Not(e) => Expr::Not(sub(e)),
            Expr::If(c, a, b) => Expr::If(sub(c), sub(a), sub(b)),
            Expr::Index(a, b) => Expr::Index(sub(a), sub(b)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, sub(a), sub(b)),
            _ => self.clone(),
        }
    }
}

// ---------------------------------------------------------------- evaluation

fn int(v: Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(n) => Ok(n),
        other => Err(EvalError::TypeMismatch(format!("expected int, found {}", other.kind()))),
    }
}

fn boolean(v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::TypeMismatch(format!("expected bool, found {}", other.kind()))),
    }
}

fn stack(v: Value) -> Result<Vec<Vec<Value>>, EvalError> {
    match v {
        Value::Stack(s) => Ok(s),
        other => Err(EvalError::TypeMismatch(format!("expected stack, found {}", other.kind()))),
    }
}

impl Expr {
    pub fn eval(&self, env: &dyn Env) -> Result<Value, EvalError> {
        Ok(match self {
            Expr::Int(n) => Value::Int(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::Label(l) => Value::Enum(l.clone()),
            Expr::EmptyStack => Value::Stack(Vec::new()),
            Expr::Var(v) => {
                let val = env.lookup(v)?;
                if val.is_undefined() {
                    return Err(EvalError::UndefinedRead(v.clone()));
                }
                val.clone()
            }
            Expr::Call(name, args) => {
                let vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>, _>>()?;
                env.call(name, &vals)?
            }
            Expr::Len(e) => {
                let n = match e.eval(env)? {
                    Value::Str(s) => s.chars().count(),
                    Value::StrArray(a) => a.len(),
                    Value::Stack(s) => s.len(),
                    other => {
                        return Err(EvalError::TypeMismatch(format!("len of {}", other.kind())))
                    }
                };
                Value::Int(n as i64)
            }
            Expr::If(c, a, b) => {
                if boolean(c.eval(env)?)? {
                    a.eval(env)?
                } else {
                    b.eval(env)?
                }
            }
            Expr::Push(s, args) => {
                let mut st = stack(s.eval(env)?)?;
                let row = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>, _>>()?;
                st.push(row);
                Value::Stack(st)
            }
            Expr::Pop(s) => {
                let mut st = stack(s.eval(env)?)?;
                st.pop().ok_or(EvalError::EmptyStack)?;
                Value::Stack(st)
            }
            Expr::Top(s, i) => {
                let st = stack(s.eval(env)?)?;
                let row = st.last().ok_or(EvalError::EmptyStack)?;
                row.get(i - 1)
                    .cloned()
                    .ok_or(EvalError::IndexOutOfRange { index: *i as i64, len: row.len() })?
            }
            Expr::Index(a, i) => {
                let arr = a.eval(env)?;
                let idx = int(i.eval(env)?)?;
                match arr {
                    Value::StrArray(items) => {
                        if idx < 1 || idx as usize > items.len() {
                            return Err(EvalError::IndexOutOfRange { index: idx, len: items.len() });
                        }
                        Value::Str(items[idx as usize - 1].clone())
                    }
                    other => {
                        return Err(EvalError::TypeMismatch(format!("indexing into {}", other.kind())))
                    }
                }
            }
            Expr::Neg(e) => Value::Int(int(e.eval(env)?)?.checked_neg().ok_or(EvalError::Overflow)?),
            Expr::Not(e) => Value::Bool(!boolean(e.eval(env)?)?),
            Expr::Bin(BinOp::And, l, r) => {
                Value::Bool(boolean(l.eval(env)?)? && boolean(r.eval(env)?)?)
            }
            Expr::Bin(BinOp::Or, l, r) => {
                Value::Bool(boolean(l.eval(env)?)? || boolean(r.eval(env)?)?)
            }
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(env)?, r.eval(env)?);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        let (x, y) = (int(a)?, int(b)?);
                        let res = match op {
                            BinOp::Add => x.checked_add(y),
                            BinOp::Sub => x.checked_sub(y),
                            _ => x.checked_mul(y),
                        };
                        Value::Int(res.ok_or(EvalError::Overflow)?)
                    }
                    BinOp::Eq => Value::Bool(same_kind(&a, &b)? && a == b),
                    BinOp::Ne => Value::Bool(!(same_kind(&a, &b)? && a == b)),
                    _ => {
                        let ord = match (&a, &b) {
                            (Value::Int(x), Value::Int(y)) => x.cmp(y),
                            (Value::Str(x), Value::Str(y)) => x.cmp(y),
                            _ => {
                                return Err(EvalError::TypeMismatch(format!(
                                    "cannot order {} and {}",
                                    a.kind(),
                                    b.kind()
                                )))
                            }
                        };
                        Value::Bool(match op {
                            BinOp::Lt => ord.is_lt(),
                            BinOp::Le => ord.is_le(),
                            BinOp::Gt => ord.is_gt(),
                            _ => ord.is_ge(),
                        })
                    }
                }
            }
        })
    }
}

fn same_kind(a: &Value, b: &Value) -> Result<bool, EvalError> {
    if a.kind() == b.kind() {
        Ok(true)
    } else {
        Err(EvalError::TypeMismatch(format!("cannot compare {} with {}", a.kind(), b.kind())))
    }
}
