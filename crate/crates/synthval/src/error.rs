//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error at line {line}: {message}")]
    CsvFormat { line: usize, message: String },

    #[error("missing column {name:?}")]
    MissingColumn { name: String },

    #[error("non-numeric value {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },

    #[error("treatment value {value:?} at row {row} is not 0 or 1")]
    InvalidTreatment { row: usize, value: String },

    #[error("empty {arm} arm")]
    EmptyArm { arm: &'static str },

    #[error("dataset must have at least 2 rows, got {0}")]
    TooFewRows(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "logistic regression did not converge after {iterations} iterations \
         (max |gradient| {gradient:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        gradient: f64,
        /// Last iterate, intercept first.
        last_iterate: Vec<f64>,
    },

    #[error("quasi-separation detected in logistic regression (|coefficient| > {cap})")]
    QuasiSeparation { cap: f64 },

    #[error("infeasible direction: the equality constraint cannot be satisfied")]
    InfeasibleDirection,

    #[error("no overlap: zero matched pairs within the caliper")]
    NoOverlap,

    #[error("degenerate bootstrap: an arm was still empty after {0} redraws")]
    DegenerateBootstrap(usize),

    #[error("degenerate scenario draw: an arm was still empty after {0} redraws")]
    DegenerateScenario(usize),

    #[error("cross-validation folds left an arm empty after {0} retries")]
    FoldEmptyArm(usize),

    #[error("empty estimate list")]
    EmptyEstimates,

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("estimator returned a non-finite value")]
    NonFiniteEstimate,

    #[error("all causal methods failed: {0}")]
    AllMethodsFailed(String),

    #[error("no method is eligible for selection: {0}")]
    NoEligibleMethod(String),

    #[error("unknown method id {0:?}")]
    UnknownMethod(String),

    #[error("unknown scenario id {0}")]
    UnknownScenario(u32),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with a pipeline stage label.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
