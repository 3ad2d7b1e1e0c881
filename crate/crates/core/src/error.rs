use thiserror::Error;

use crate::geometry::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("point ({x}, {y}) lies outside the window of validity", x = .point.x, y = .point.y)]
    OutOfWindow { point: Point },

    #[error("origin is not a critical point: |grad g(0)| = {gradient_norm:e}")]
    NotCritical { gradient_norm: f64 },

    #[error("generating function not in normal form: {0}")]
    NormalFormViolated(String),

    #[error("twist bound violated: {0}")]
    TwistBound(String),

    #[error("derivative audit failed: {0}")]
    AuditFailed(String),

    #[error("vector field vanishes on the curve: |v| = {min_norm:e} below threshold {threshold:e}")]
    VanishingField { min_norm: f64, threshold: f64 },

    #[error("curve refinement exhausted the budget of {budget} samples")]
    Aliased { budget: usize },

    #[error("a fixed point lies on the index curve (min displacement {min_displacement:e})")]
    FixedPointOnCurve { min_displacement: f64 },

    #[error("fixed point is not isolated: another fixed point near ({x}, {y})", x = .other.x, y = .other.y)]
    NotIsolated { other: Point },

    #[error("index changed under radius halving: {outer} at r, {inner} at r/2")]
    IndexUnstable { outer: i64, inner: i64 },

    #[error("orbit left the window at iterate {step}")]
    OrbitEscaped { step: usize },

    #[error("orbit hit the puncture at iterate {step}")]
    PunctureHit { step: usize },

    #[error("no grid orbit satisfies the annulus membership predicate")]
    EmptySample,

    #[error("{p}/{q} is not an irreducible fraction")]
    NotIrreducible { p: i64, q: i64 },

    #[error("critical-point search stalled after {iterations} iterations (|grad| = {grad_norm:e})")]
    CriticalPointNotFound {
        iterations: usize,
        grad_norm: f64,
        best: Vec<f64>,
    },

    #[error("critical point converged to the studied fixed point")]
    ConvergedToPuncture,

    #[error("eigen-decomposition residual {residual:e} exceeds tolerance")]
    IllConditioned { residual: f64 },

    #[error("theorem hypotheses violated: {0}")]
    HypothesisViolated(String),

    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Errors that indicate a numerical solve or search failed rather than a
    /// caller mistake.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::OutOfWindow { .. }
                | Error::VanishingField { .. }
                | Error::Aliased { .. }
                | Error::FixedPointOnCurve { .. }
                | Error::NotIsolated { .. }
                | Error::IndexUnstable { .. }
                | Error::OrbitEscaped { .. }
                | Error::PunctureHit { .. }
                | Error::EmptySample
                | Error::CriticalPointNotFound { .. }
                | Error::ConvergedToPuncture
                | Error::IllConditioned { .. }
        )
    }
}
