//! Regions of possible motion on the Poisson sphere.
//!
//! The region `u_k` is the projection of `J_k` onto the sphere; over each of
//! its points the admissible velocities form the fiber. The generalized
//! boundary is where that fiber structure changes.

pub mod boundary;
pub mod fiber;
pub mod map;
pub mod trace;

pub use boundary::{
    boundary_from_curves, boundary_residuals, generalized_boundary, q_factor, Boundary, BoundaryCurve,
    SignPattern,
};
pub use fiber::{admissible_velocities, level_residual, FiberSolutionSet};
pub use map::{rpm_map, RpmComponent, RpmReport};
pub use trace::{trace_omega_curve, trace_omega_curve_with, OmegaCurve, TraceOptions};
