//! Error type shared by the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Unsupported or malformed input data; the message names the offending
    /// feature (magic number, bit depth, maxval, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A parameter outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An image too small for the requested operation.
    #[error("image too small: {0}")]
    TooSmall(String),

    /// Malformed text input (deformation specs, keypoint files); the message
    /// names the offending token.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Attaches a file path to an I/O error, so messages surfaced to users
    /// name the offending file instead of just the OS error.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
