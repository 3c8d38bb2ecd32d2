//! Crate-wide error type.

use thiserror::Error;

use crate::analyzer::{AnalysisFailure, AnalyzeError};
use crate::bench::BenchError;
use crate::bits::BitsError;
use crate::circuits::CircuitError;
use crate::distribution::DistributionError;
use crate::metrics::MetricsError;
use crate::qasm::QasmError;
use crate::simulator::SimError;
use crate::tokenizer::TokenizeError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisFailure),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// A broken internal invariant, never caused by user input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by the input rather than by this crate.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Internal(_) => false,
            Error::Bench(e) => e.is_input_error(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
