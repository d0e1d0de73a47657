//! Shared loading helpers for the JSON file formats.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::model::ModelError;
use crate::program::ProgramError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid program: {0}")]
    Program(#[from] ProgramError),
    #[error("{0}")]
    Invalid(String),
}

pub fn parse_json<T: DeserializeOwned>(src: &str) -> Result<T, LoadError> {
    serde_json::from_str(src).map_err(|e| LoadError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Pretty JSON with a trailing newline; the canonical on-disk form.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
