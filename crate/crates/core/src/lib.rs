//! Regions of possible motion, bifurcation sets and integral-manifold
//! topology for the free gyrostat.
//!
//! The gyrostat `A ω' + ω × (Aω + λ) = 0`, `ν' = ν × ω` on `S² × R³` has the
//! first integrals `K1 = |Aω+λ|²`, `K2 = Aω·ω`, `K3 = (Aω+λ)·ν`. This crate
//! computes, for integral constants `k`:
//!
//! - the bifurcation diagram and the region label of `k` ([`bifurcation`]);
//! - the admissible velocities over each point of the Poisson sphere, the
//!   region of possible motion and its generalized boundary ([`rpm`]);
//! - the fiber-restricted rank test for the visible contour ([`contour`]);
//! - trajectories with conservation monitoring ([`dynamics`]).

pub mod bifurcation;
pub mod contour;
pub mod dynamics;
pub mod error;
pub mod poly;
pub mod rpm;
pub mod sphere;
pub mod system;

pub use error::{Error, QFactor, Result};
pub use system::{angular_momentum, integrals, rhs, GyrostatParams, IntegralConstants, State, Tangent};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Comma-joined values with 17 significant digits.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
