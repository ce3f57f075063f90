use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("window {from}..={to} spans {got} years; at least {need} required")]
    InsufficientWindow { from: u16, to: u16, got: usize, need: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("singular system: pivot {pivot} below threshold (magnitude {magnitude})")]
    SingularSystem { pivot: usize, magnitude: f64 },

    #[error("insufficient degrees of freedom: n = {n}, k = {k} (need n > k + 1)")]
    InsufficientDof { n: usize, k: usize },

    #[error("collinear predictor column `{label}`")]
    CollinearPredictor { label: String },

    #[error("unknown predictor label `{0}`")]
    UnknownLabel(String),

    #[error("missing value for predictor `{0}`")]
    MissingPredictor(String),

    #[error("predictor `{0}` is constant; correlation undefined")]
    ConstantPredictor(String),

    #[error("year {0} not present in matrix")]
    UnknownYear(u16),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no candidate model passed the F gate: {0}")]
    NoModel(String),

    #[error("too many predictors: k = {0} exceeds the cap of 16")]
    TooManyPredictors(usize),

    #[error("fit does not match matrix: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
