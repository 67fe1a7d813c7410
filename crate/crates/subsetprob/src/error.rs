use crate::rational::Rational;
use thiserror::Error;

/// Errors reported by constructors, parsers, evaluators, and the simulator.
///
/// Semantic findings about well-formed data (a table hole, a broken axiom, a
/// covariance mismatch) are not errors; they are returned as violation lists
/// by the various `validate` functions so a caller can report all of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid interval endpoints [{lo}, {hi}]: need 0 <= lo <= hi <= 1")]
    InvalidEndpoints { lo: Rational, hi: Rational },

    #[error("{what} {value} lies outside [0, 1]")]
    OutOfUnitInterval { what: &'static str, value: Rational },

    #[error("convex hull of the empty set is undefined")]
    EmptyConvexHull,

    #[error("factor {index} has an empty value, so it cannot be chosen")]
    UnperformableFactor { index: usize },

    #[error("invalid identifier {id:?}")]
    InvalidIdentifier { id: String },

    #[error("a product experiment needs at least one factor")]
    EmptyProduct,

    #[error("experiment base must contain the unit experiment `tau`")]
    MissingUnitSymbol,

    #[error("term universe over {experiments} experiments is too large to enumerate")]
    UniverseTooLarge { experiments: usize },

    #[error("a system needs at least one state")]
    NoStates,

    #[error("duplicate state {id:?}")]
    DuplicateState { id: String },

    #[error("duplicate experiment {id:?}")]
    DuplicateExperiment { id: String },

    #[error("unknown experiment {id:?}")]
    UnknownExperiment { id: String },

    #[error("unknown state {id:?}")]
    UnknownState { id: String },

    #[error("no probability entry for experiment {experiment:?} in state {state:?}")]
    MissingTableEntry { experiment: String, state: String },

    #[error("system fails validation: {summary}")]
    InvalidSystem { summary: String },

    #[error("choice weights must sum to 1, got {sum}")]
    WeightSumNotOne { sum: Rational },

    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("grid step {step} must be positive and divide 1 exactly")]
    InvalidGridStep { step: Rational },

    #[error("certainty grid with {points} points is too large to search")]
    GridTooLarge { points: usize },

    #[error("experiment `{term}` cannot be performed in state `{state}`")]
    Unperformable { term: String, state: String },

    #[error("{what} must be at least 1")]
    ZeroCount { what: &'static str },

    #[error("tolerance delta must be positive, got {delta}")]
    DeltaNotPositive { delta: f64 },

    #[error("no experiment mapping for {id:?}")]
    MissingExperimentMapping { id: String },

    #[error("no state mapping for {id:?}")]
    MissingStateMapping { id: String },

    #[error("property class of {class} has no well-defined image: {detail}")]
    IllDefinedClass { class: String, detail: String },

    #[error("{msg}")]
    Usage { msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shift the line number of a parse error, for parsers that scan a single
    /// line out of a larger file.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { col, msg, .. } => Error::Parse { line, col, msg },
            other => other,
        }
    }
}
