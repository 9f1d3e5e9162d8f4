use thiserror::Error;

/// Errors raised by the geometry, spectral and series routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no sign class")]
    ZeroVector,

    #[error("matrix is not in the group (residual {residual:.3e})")]
    NotInGroup { residual: f64 },

    #[error("matrix is not square or has size < 2")]
    BadShape,

    #[error("denominator c.z + d vanishes ({modulus:.3e})")]
    DenominatorNearZero { modulus: f64 },

    #[error("point is not inside the open unit ball (|z|^2 = {norm_sqr})")]
    OutsideBall { norm_sqr: f64 },

    #[error("fiber coordinate violates |zeta| = (-<z,z>)^((n+1)/2) (defect {defect:.3e})")]
    NotOnCircleBundle { defect: f64 },

    #[error("power base {re} + {im}i lies on the principal branch cut")]
    BranchCut { re: f64, im: f64 },

    #[error("eigenvalue separation below tolerance (max modulus - 1 = {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },

    #[error("element is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("no rescaling of v puts A in SU(2,1): {0}")]
    NormalizationFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("finite-difference step {step:e} is too small")]
    StepTooSmall { step: f64 },

    #[error("quadrature did not converge (estimated error {est_error:.3e})")]
    NonConvergent { est_error: f64 },

    #[error("sum of weight exponents is odd ({0})")]
    OddWeightVector(u32),

    #[error("group enumeration exceeded the cap of {cap} elements")]
    EnumerationOverflow { cap: usize },

    #[error("curve does not close on the quotient torus")]
    CurveNotClosed,

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
