use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} is outside 0..=7")]
    InvalidDegree(usize),
    #[error("wedge of degrees {lhs} and {rhs} exceeds 7")]
    DegreeOverflow { lhs: usize, rhs: usize },
    #[error("expected a form of degree {expected}, found degree {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("degree {degree} needs {expected} coefficients, got {found}")]
    CoefficientCount {
        degree: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("3-form is not positive (smallest eigenvalue of B is {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("t = {t} lies outside the domain ({low}, {high}]")]
    OutsideDomain { t: f64, low: f64, high: f64 },
    #[error("supplied {which} disagrees with finite differences at t = {t} (relative error {rel:e})")]
    DerivativeMismatch { which: &'static str, t: f64, rel: f64 },
    #[error("path is not positive at t = {t}")]
    PathLeavesPositiveCone { t: f64 },
    #[error("quadrature did not converge (achieved relative change {achieved:e})")]
    NonConvergent { achieved: f64 },
    #[error("finite-difference step {step:e} is too small for a stable second difference")]
    Conditioning { step: f64 },
    #[error("path class is not affine: {0}")]
    NotAffine(String),
    #[error("spanning vectors are linearly dependent")]
    DependentVectors,
    #[error("class `{0}` is not present")]
    MissingClass(String),
    #[error("synthetic g for class `{class}` exceeds its cap {cap} at t = {t} (value {value})")]
    CapViolated {
        class: String,
        t: f64,
        value: f64,
        cap: f64,
    },
    #[error("segment leaves the positive cone at t = {t} (volume {volume:e})")]
    SegmentExitsCone { t: f64, volume: f64 },
    #[error("class has negative volume {volume:e}; it is not a boundary limit of the positive component")]
    NotBoundary { volume: f64 },
    #[error("invalid input field `{field}`: {rule}")]
    Invalid { field: String, rule: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            rule: rule.into(),
        }
    }
}
