use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GliderError {
    #[error("pitch {theta} rad is too close to the Euler-angle pole")]
    PitchPole { theta: f64 },
    #[error("input-gain matrix is singular (condition number {cond:e})")]
    SingularInputGain { cond: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degenerate path segment: endpoints coincide at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("non-finite state at t = {t} s ({what})")]
    NonFiniteState { t: f64, what: String },
    #[error("metric needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GliderError {
    fn from(err: std::io::Error) -> Self {
        GliderError::Io(err.to_string())
    }
}

impl From<csv::Error> for GliderError {
    fn from(err: csv::Error) -> Self {
        GliderError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GliderError>;
