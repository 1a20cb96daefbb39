use std::path::PathBuf;

use collapse_lab::finite::FiniteError;
use collapse_lab::spectra::SpectraError;
use collapse_lab::stieltjes::StieltjesError;
use collapse_lab::theory::TheoryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {message}")]
    Numerical { message: String, residual: Option<f64> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 0 success, 2 configuration, 3 non-convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            CliError::Numerical { residual, .. } => *residual,
            _ => None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<StieltjesError> for CliError {
    fn from(e: StieltjesError) -> Self {
        match e {
            StieltjesError::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Numerical { residual: other.residual(), message: other.to_string() },
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Stieltjes(s) => s.into(),
            TheoryError::InvalidArgument(msg) => CliError::Config(msg),
            TheoryError::NonFinite(msg) => CliError::Numerical { message: msg, residual: None },
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Linalg(l) => CliError::Numerical { message: l.to_string(), residual: None },
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<FiniteError> for CliError {
    fn from(e: FiniteError) -> Self {
        match e {
            FiniteError::InvalidConfig(msg) => CliError::Config(msg),
            FiniteError::Dimension { .. } => CliError::Config(e.to_string()),
            FiniteError::Spectra(s) => s.into(),
            FiniteError::Stieltjes(s) => s.into(),
            FiniteError::SuspiciousRank { .. } | FiniteError::Linalg(_) => {
                CliError::Numerical { message: e.to_string(), residual: None }
            }
        }
    }
}
