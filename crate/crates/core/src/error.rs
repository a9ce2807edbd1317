use thiserror::Error;

/// Failures raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("no positive window: the landscape function is nonpositive on (0, inf)")]
    NoPositiveWindow,
    #[error("geometry not guaranteed: found {found} critical points of the fiber map, expected {expected}")]
    GeometryNotGuaranteed { found: usize, expected: usize },
    #[error("invalid quadruple: {0}")]
    InvalidQuadruple(String),
    #[error("domain overflow: dilation by s = {s} moves relative mass {escaped:e} beyond rmax")]
    DomainOverflow { s: f64, escaped: f64 },
    #[error("truncation violated: |u(rmax)| / max|u| = {ratio:e}")]
    Truncation { ratio: f64 },
    #[error("window too noisy: fit residual {residual:e} over {points} points")]
    WindowTooNoisy { residual: f64, points: usize },
    #[error(
        "not converged after {iterations} iterations (grad {grad_norm:e}, pohozaev {pohozaev:e})"
    )]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        pohozaev: f64,
    },
    #[error("left admissible disk: sqrt(dd) = {norm} >= R0 = {r0}")]
    LeftAdmissibleDisk { norm: f64, r0: f64 },
    #[error("bound not achieved at m = {m}: margin {margin:e}")]
    BoundNotAchieved { m: f64, margin: f64 },
    #[error("singular linear system at pivot {0}")]
    Singular(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
