use thiserror::Error;

/// Errors raised by the decision-analysis engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("empty {0} set")]
    EmptySet(&'static str),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("removing the only scenario would leave an empty scenario set")]
    EmptyScenarioSet,

    #[error("`{target}` is not the unique minimizer of scenario `{pivot}`")]
    NotUniqueMinimizer { target: String, pivot: String },

    #[error("gaming construction needs at least two scenarios")]
    TooFewScenarios,

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("too many projects: {0} (at most {max})", max = crate::projects::MAX_PROJECTS)]
    TooManyProjects(usize),

    #[error("{value} is outside the bounds [{lo}, {hi}]")]
    OutOfBounds { value: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not supported for continuous decision sets")]
    UnsupportedKind(crate::RegretKind),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

impl Error {
    /// Whether the error originates in a numerical solver rather than in the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Infeasible | Error::Unbounded | Error::NumericFailure(_) | Error::IterationLimit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
