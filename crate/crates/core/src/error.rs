use thiserror::Error;

use crate::numerics::{ode::OdeError, quad::QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("profile `{name}` is not positive at rho = {rho}")]
    NonPositiveProfile { name: String, rho: f64 },
    #[error("{what} = {value} outside domain [{lo}, {hi})")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("conjugate point reached at r = {r} (circumferential Jacobian vanishes)")]
    ConjugatePoint { r: f64 },
    #[error("second-derivative refinement failed at rho = {rho} (error estimate {error:e})")]
    RefinementFailure { rho: f64, error: f64 },
    #[error("geodesic shooting failed: {0}")]
    ShootingFailed(String),
    #[error("Riccati solution blows down at r = {radius}")]
    BlowDown { radius: f64 },
    #[error("curvature bound not integrable near the origin: g({r}) = {value}")]
    NonIntegrable { r: f64, value: f64 },
    #[error("radius window [{lo}, {hi}] must lie in (1, r_max) and span at least one decade")]
    WindowTooNarrow { lo: f64, hi: f64 },
    #[error("unstable fit: {0}")]
    UnstableFit(String),
    #[error("maximization did not converge: {0}")]
    MaximizationFailed(String),
    #[error("convexifier is not strictly increasing on the sample radii (near r = {r})")]
    NotIncreasing { r: f64 },
    #[error("maximal modulus is not positive at r = {r}")]
    NonPositiveModulus { r: f64 },
    #[error("model `{0}` is compact; quantity at infinity undefined")]
    CompactModel(String),
    #[error("order at infinity is {0}; homogeneity undefined")]
    BadOrder(String),
    #[error("not enough samples: {0}")]
    TooFewSamples(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> LabError {
    LabError::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
