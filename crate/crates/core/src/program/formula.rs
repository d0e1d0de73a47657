//! Boolean formulas over predicate names, used as symbolic edge predicates.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{is_label_name, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Pred(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn pred(name: &str) -> Formula {
        Formula::Pred(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; empty is `true`, a single conjunct is returned as is.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction; empty is `false`, a single disjunct is returned as is.
    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Evaluate with short-circuiting, asking `lookup` for predicate values.
    pub fn eval<E>(&self, lookup: &mut dyn FnMut(&str) -> Result<bool, E>) -> Result<bool, E> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Pred(p) => lookup(p)?,
            Formula::Not(f) => !f.eval(lookup)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(lookup)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(lookup)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Predicate names mentioned by the formula.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Pred(p) => {
                out.insert(p);
            }
            Formula::Not(f) => f.collect(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect(out)),
            _ => {}
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            Formula::Not(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, c: &Formula, above: u8) -> fmt::Result {
            // nested connectives of the same kind keep their parentheses so
            // that printing and re-parsing is the identity
            if c.prec() <= above {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Pred(p) => write!(f, "{p}"),
            Formula::Not(c) => {
                write!(f, "!")?;
                child(f, c, 2)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let (sep, p) = if matches!(self, Formula::And(_)) { (" & ", 2) } else { (" | ", 1) };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    child(f, c, p)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    And,
    Or,
    Not,
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(off, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '!' | '¬' => Tok::Not,
            '(' => Tok::Open,
            ')' => Tok::Close,
            _ => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || "&|!()∧∨¬".contains(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push((off, Tok::Atom(s)));
                continue;
            }
        };
        chars.next();
        out.push((off, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        let offset = self.toks.get(self.pos).map_or(self.end, |t| t.0);
        Err(ParseError { offset, message: message.to_string() })
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let f = self.or()?;
                if self.peek() != Some(&Tok::Close) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                Ok(match a.as_str() {
                    "true" | "⊤" => Formula::True,
                    "false" | "⊥" => Formula::False,
                    _ if is_label_name(&a) => Formula::Pred(a),
                    _ => return self.err("invalid predicate name"),
                })
            }
            Some(_) => self.err("expected a predicate name, `!` or `(`"),
            None => self.err("unexpected end of formula"),
        }
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(src: &str) -> Result<Formula, ParseError> {
        let mut p = Parser { toks: lex(src)?, pos: 0, end: src.len() };
        let f = p.or()?;
        if p.pos < p.toks.len() {
            return p.err("trailing input");
        }
        Ok(f)
    }
}
