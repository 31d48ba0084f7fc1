use thiserror::Error;

use crate::algebra::Party;

/// Errors raised while building or solving certification problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} is not part of the scenario")]
    UnknownSymbol { symbol: String },

    #[error("party {party}: setting {setting} / outcome {outcome} out of range")]
    IndexOutOfRange {
        party: Party,
        setting: usize,
        outcome: usize,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("party {party} has {outcomes} outcomes; dichotomic observables need 2")]
    NotDichotomic { party: Party, outcomes: usize },

    #[error("operation needs the {expected} scenario")]
    WrongScenario { expected: &'static str },

    #[error("coverage request unsatisfiable: {0}")]
    CoverageUnsatisfiable(String),

    #[error("problem assembly failed: {0}")]
    Assembly(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("problem exceeds solver limits: {0}")]
    SolverLimit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
