use thiserror::Error;

/// Errors raised by the geometry, bound evaluators and Monte Carlo drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the open chart domain (unit disk or unit ball).
    #[error("point {point:?} is outside the open unit {chart} (|x| = {norm})")]
    OutsideDomain {
        chart: &'static str,
        point: Vec<f64>,
        norm: f64,
    },

    #[error("geodesic between coincident points is undefined")]
    DegenerateGeodesic,

    /// The positive-curvature branch of a comparison function hit its pole.
    #[error("comparison function singular at k = {k}, r = {r}")]
    Singularity { k: f64, r: f64 },

    #[error("curvature bounds must satisfy k1 < 0 and k2 < 0 (got k1 = {k1}, k2 = {k2})")]
    CurvatureSign { k1: f64, k2: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mirror coupling is not available on {0}")]
    MirrorUnsupported(&'static str),

    #[error("mirror coupling requested for coincident states; the pair is already coupled")]
    AlreadyCoupled,

    /// A holomorphic test function does not vanish at the anchor point.
    #[error("test function `{name}` does not vanish at the anchor (|f(y)| = {value})")]
    NotAnchored { name: String, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
