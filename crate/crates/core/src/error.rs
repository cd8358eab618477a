use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("path set is empty")]
    EmptyPathSet,

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{samples} samples per symbol cannot resolve {subcarriers} subcarriers")]
    TooFewSamples { samples: usize, subcarriers: usize },

    #[error("phase step is ill-conditioned: |sin δ| = {sin_delta:e}")]
    IllConditionedDelta { sin_delta: f64 },

    #[error("intensities are inconsistent: discriminant {discriminant:e}")]
    InconsistentIntensities { discriminant: f64 },

    #[error("recovery circles do not intersect: radicand {radicand:e}")]
    CirclesDisjoint { radicand: f64 },

    #[error("mean of sample {index} vanishes (|μ| = {modulus:e})")]
    DegenerateMean { index: usize, modulus: f64 },

    #[error("direction is not an ascent direction (slope {slope:e})")]
    NotAscent { slope: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("information matrix is numerically singular (condition ≈ {condition:e})")]
    SingularInformation { condition: f64 },

    #[error("quadrature did not converge: estimate {estimate} with error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("true channel is zero")]
    ZeroChannel,

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
