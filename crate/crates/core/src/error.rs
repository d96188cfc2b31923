use thiserror::Error;

use crate::sdp::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported scenario {0}x{1} inputs, {2}x{3} outputs (only 2 2 2 2 is supported)")]
    UnsupportedScenario(usize, usize, usize, usize),

    #[error("scenario mismatch between Bell expression and behavior")]
    ScenarioMismatch,

    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("observable does not square to the identity (deviation {0:.3e})")]
    NotInvolutive(f64),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("unknown physical quantity {0}")]
    UnknownQuantity(String),

    #[error("cases 1 and 2 need a fixed settings pair")]
    MissingFixedSettings,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver finished with status {status:?} (relative gap {gap:.3e})")]
    Solver { status: SolveStatus, gap: f64 },

    #[error("lower bound {lower} exceeds the certified upper bound {upper}")]
    SandwichViolation { lower: f64, upper: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
