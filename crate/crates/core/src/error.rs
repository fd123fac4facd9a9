use thiserror::Error;

/// Errors produced by the solvers and readers in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("Padé [3/3] denominator vanishes near x = {0}")]
    PoleProximity(f64),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node id {id} out of range for {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("relative entropy is infinite: P({index}) > 0 but Q({index}) = 0")]
    InfiniteDivergence { index: usize },

    #[error("operator maps the iterate to zero at step {step}")]
    NullMap { step: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("payoff matrix is not antisymmetric (max |C + C^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("series too short for a rate fit: {usable} usable entries, need {needed}")]
    SeriesTooShort { usable: usize, needed: usize },

    #[error("learning rate fell below {floor:e} at iteration {iteration}: {state}")]
    Stall {
        iteration: usize,
        floor: f64,
        state: String,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
