use thiserror::Error;

use crate::machine::ProgramError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("invalid code: {0}")]
    Code(String),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("unknown code `{name}` (known: {known})")]
    UnknownCode { name: String, known: String },

    #[error("unknown layout `{name}` (valid layouts: {valid})")]
    UnknownLayout { name: String, valid: String },

    #[error("qubit label out of range: {0}")]
    Label(String),

    #[error("exhaustive search limit exceeded: {0}")]
    SizeGuard(String),

    #[error("invalid machine program: {0}")]
    Program(#[from] ProgramError),

    #[error("layout: {0}")]
    Layout(String),

    #[error("circuit: {0}")]
    Circuit(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("noiseless verification failed: {0}")]
    Verification(String),

    #[error("decoder: {0}")]
    Decoder(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
