use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("empty interval ({lo}, {hi})")]
    EmptyInterval { lo: String, hi: String },
    #[error("malformed rational: {0:?}")]
    Parse(String),
    #[error("infinitesimal coefficient {0} is not an integer")]
    NonIntegralSlack(String),
    #[error("exponent {0} outside [1, inf]")]
    ExponentRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("parameters fail the well-posedness gate: {0}")]
    Gate(String),
    #[error("no feasible exponents for {piece}: {reason}")]
    Infeasible { piece: String, reason: String },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("malformed certificate: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),
    #[error("Picard iteration did not converge in {iterations} iterations (last difference {last_diff:e})")]
    NonConvergence { iterations: usize, last_diff: f64, ratios: Vec<f64> },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}
