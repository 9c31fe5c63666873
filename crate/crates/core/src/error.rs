use thiserror::Error;

use crate::bifurcation::Branch;

/// Which factor of `Q(ω)` left its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QFactor {
    /// `k1 - k3^2 < 0`.
    Numerator,
    /// `k1 |ω|^2 - (k2 + ω·λ)^2 <= 0`.
    Denominator,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("principal moments of inertia must be positive and finite, got {0:?}")]
    InvalidInertia([f64; 3]),

    #[error("parameter values must be finite")]
    NonFinite,

    #[error("non-generic gyrostat parameters: {0}")]
    NonGenericParams(String),

    #[error("Poisson vector is not on the unit sphere: |nu|^2 = {0}")]
    NotUnit(f64),

    #[error("sigma = {sigma} is at the pole a = {pole}")]
    Pole { sigma: f64, pole: f64 },

    #[error("k1 = {k1} is outside the image ({lo}, {hi}) of branch {branch:?}")]
    OutOfRange { branch: Branch, k1: f64, lo: f64, hi: f64 },

    #[error("k1(sigma) is not monotone on branch {0:?}")]
    NonMonotone(Branch),

    #[error("inconsistent level topology at k1 = {k1}: sweep over critical values ended with {components} components")]
    UnexpectedTopology { k1: f64, components: i32 },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("integration end time must be positive and finite, got {0}")]
    InvalidEndTime(f64),

    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },

    #[error("Q(omega) outside its domain ({0:?} factor)")]
    Domain(QFactor),

    #[error("admissible-velocity fiber is not isolated (the whole circle solves the level equations)")]
    DegenerateFiber,

    #[error("fiber polishing failed at nu = {nu:?} (residual {residual:e})")]
    SolveFailure { nu: [f64; 3], residual: f64 },

    #[error("level set K1 = {k1}, K2 = {k2} is empty (no seed converged)")]
    EmptyLevel { k1: f64, k2: f64 },

    #[error("curve tracing stalled at omega = {omega:?}")]
    TraceStall { omega: [f64; 3] },

    #[error("sphere grid resolution {n_lat}x{n_lon} is below the 16x32 minimum")]
    InvalidResolution { n_lat: usize, n_lon: usize },
}

impl Error {
    /// True for errors caused by invalid input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInertia(_)
                | Error::NonFinite
                | Error::NonGenericParams(_)
                | Error::NotUnit(_)
                | Error::Pole { .. }
                | Error::OutOfRange { .. }
                | Error::InvalidTolerance(_)
                | Error::InvalidEndTime(_)
                | Error::Domain(_)
                | Error::InvalidResolution { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
