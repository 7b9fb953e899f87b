use thiserror::Error;

/// Error type shared by all fallible operations in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("window mismatch: {left} vs {right} ({context})")]
    WindowMismatch {
        left: crate::seq::Window,
        right: crate::seq::Window,
        context: &'static str,
    },

    #[error("distribution support must be positive: {0}")]
    NonPositiveSupport(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("epsilon must lie in (0, 1/2), got {0}")]
    InvalidEpsilon(f64),

    #[error("derivative order {0} out of supported range 0..={1}")]
    DerivativeOrder(usize, usize),

    #[error("time step {dt} violates the stability guard dt * {omega_max} <= 1")]
    UnstableTimeStep { dt: f64, omega_max: f64 },

    #[error("non-finite state entry at t = {t} (instability or invalid input)")]
    NonFiniteState { t: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("slope fit requires strictly positive abscissae and ordinates")]
    NonPositiveFitData,

    #[error("expected at least {expected} data points, got {got}")]
    TooFewPoints { expected: usize, got: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
