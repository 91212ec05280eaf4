use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid coordinate {value} in point {id} (coordinates must be finite and >= 0)")]
    InvalidCoordinate { id: usize, value: f64 },

    #[error("invalid utility vector: {0}")]
    InvalidUtility(String),

    #[error("duplicate point id {0}")]
    DuplicateId(usize),

    #[error("unknown point id {0}")]
    UnknownId(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("happiness ratio undefined: best utility over the dataset is zero")]
    UndefinedRatio,

    #[error("candidate point has no positive coordinate; the normalization row is unsatisfiable")]
    ZeroCandidate,

    #[error("candidate point {0} is already in the selected set")]
    CandidateInSet(usize),

    #[error("linear program is malformed: {0}")]
    MalformedProgram(String),

    #[error("simplex failed to converge within {0} iterations")]
    NumericalFailure(usize),

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("exhaustive search refused: {subsets} subsets exceed the budget of {budget}")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
