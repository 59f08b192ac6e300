use std::io;

use eigenforge_core::diagnostics::DiagnosticsError;
use eigenforge_core::fock::FockError;
use eigenforge_core::kernel::KernelError;
use eigenforge_core::linalg::LinalgError;
use eigenforge_core::qpe::QpeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// A truncation, unitarity or consistency audit failed.
    #[error("numerical contract failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

macro_rules! numerical {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Numerical(e.to_string())
            }
        }
    )*};
}

numerical!(QpeError, FockError, KernelError, LinalgError, DiagnosticsError);

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(io::Error::other(e))
    }
}
