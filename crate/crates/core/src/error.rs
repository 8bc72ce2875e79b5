use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root could not be bracketed; carries the offending inputs.
    #[error("root bracketing failed after {steps} expansions (target {target}, anchor {anchor}): {context}")]
    Bracket {
        steps: usize,
        target: f64,
        anchor: f64,
        context: String,
    },

    /// Coordinate descent ran out of sweeps.
    #[error("coordinate descent did not converge in {sweeps} sweeps (KKT gap {gap:e}, tolerance {tol:e})")]
    Convergence { sweeps: usize, gap: f64, tol: f64 },

    /// Sign enumeration would exceed the configured cap.
    #[error("model size {size} exceeds sign-enumeration cap {cap}; use the sign-conditional interval instead")]
    Capacity { size: usize, cap: usize },

    /// The fit lies within float tolerance of a selection-event boundary.
    #[error("fit lies on a selection-event boundary")]
    Boundary,

    /// A matrix that must have full column rank does not.
    #[error("rank deficient: {0}")]
    RankDeficient(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
