use thiserror::Error;

/// Errors produced by the library's fallible operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation mixed vectors or group elements from different algebras.
    #[error("algebra mismatch: expected {expected}, found {found}")]
    AlgebraMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// `vee` was fed a matrix with a non-negligible symmetric part.
    #[error("matrix is not skew-symmetric: symmetric part max-norm {defect:.3e} exceeds 1e-9")]
    NotSkewSymmetric { defect: f64 },

    /// A matrix could not be accepted (or repaired) as a rotation.
    #[error("matrix is not a rotation: orthogonality defect {defect:.3e}, det {det:.6}")]
    NotARotation { defect: f64, det: f64 },

    /// `log` is undefined this close to a half-turn.
    #[error("rotation angle {angle:.9} is within 1e-6 of pi; log is out of domain")]
    LogOutOfDomain { angle: f64 },

    /// A constructor rejected a physically invalid parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A quantity that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The implicit-midpoint Newton iteration failed to converge.
    #[error(
        "Newton iteration did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NewtonNonConvergence { residual: f64, iterations: usize },

    /// A finite-difference probe failed (left the domain or produced non-finite values).
    #[error("finite-difference evaluation failed: {0}")]
    FiniteDifference(String),
}

pub type Result<T> = std::result::Result<T, Error>;
