use thiserror::Error;

/// Errors raised by the growth-fragmentation routes.
///
/// Values are carried as `f64` regardless of the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dirac profile has no pointwise density")]
    NoPointwiseDensity,

    #[error("operation requires a dirac profile")]
    NotDirac,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series truncation cap of {cap} terms reached; remaining tail bound {bound:e}")]
    TruncationCap { cap: usize, bound: f64 },

    #[error("contour integrand decays too slowly for this profile (log-gaussian required)")]
    SlowContourDecay,

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureInaccurate { estimate: f64, tolerance: f64 },

    #[error("unsupported normalization: the asymptotic growth-fragmentation formula is written for b = 1 (got b = {0})")]
    UnsupportedNormalization(f64),

    #[error("grid upper bound {y_max} does not cover profile support edge {support_edge}")]
    GridTooSmall { y_max: f64, support_edge: f64 },

    #[error("mass leak at left boundary: t = {t}, boundary value {value:e}")]
    MassLeak { t: f64, value: f64 },

    #[error("time {0} was not snapshotted")]
    NotSnapshotted(f64),

    #[error("ray y = {0} is not tracked by this trajectory")]
    RayNotTracked(f64),

    #[error("time series unsuitable for period estimation: {0}")]
    WindowTooShort(String),

    #[error("quadrature window misses mass: {0}")]
    WindowMissesMass(String),
}

impl Error {
    /// True for numerical guards (as opposed to violated preconditions).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::TruncationCap { .. }
                | Error::QuadratureInaccurate { .. }
                | Error::MassLeak { .. }
                | Error::WindowMissesMass(_)
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
