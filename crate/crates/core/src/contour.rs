//! Rank criterion for the visible contour of an integral manifold.
//!
//! A point of `J_k` projects onto the generalized boundary of its region of
//! possible motion exactly when the derivative of the integral map, restricted
//! to the fiber over the base point, drops rank. For the gyrostat the fiber
//! over `ν` is the ω-space, the restricted derivative is the 3x3 matrix with
//! rows `∂K_i/∂ω`, and
//!
//! ```text
//! det V = -4 det(A) [ω × (Aω + λ)]·ν
//! ```
//!
//! so the rank test reduces to the vanishing of a triple product.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{angular_momentum, GyrostatParams, State};

/// Rank threshold relative to the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance(f64);

impl RankTolerance {
    pub fn new(relative: f64) -> Result<Self> {
        if relative.is_finite() && relative > 0.0 && relative < 1.0 {
            Ok(Self(relative))
        } else {
            Err(Error::InvalidTolerance(relative))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self(1e-10)
    }
}

/// `V(x)`: derivative of `(K1, K2, K3)` along the fiber directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberJacobian {
    pub matrix: Matrix3<f64>,
    /// Descending.
    pub singular_values: [f64; 3],
}

impl FiberJacobian {
    /// Number of singular values that do not exceed `tol` times the largest one.
    pub fn rank_defect(&self, tol: RankTolerance) -> usize {
        let cutoff = tol.0 * self.singular_values[0];
        3 - self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

pub fn fiber_jacobian(state: &State, p: &GyrostatParams) -> FiberJacobian {
    let m = angular_momentum(&state.omega, p);
    let r1 = 2.0 * p.apply_inertia(&m);
    let r2 = 2.0 * p.apply_inertia(&state.omega);
    let r3 = p.apply_inertia(&state.nu());
    let matrix = Matrix3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    let mut sv: Vec<f64> = matrix.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    FiberJacobian {
        matrix,
        singular_values: [sv[0], sv[1], sv[2]],
    }
}

pub fn rank_defect(state: &State, p: &GyrostatParams, tol: RankTolerance) -> usize {
    fiber_jacobian(state, p).rank_defect(tol)
}

/// `[ω × (Aω + λ)]·ν`; zero exactly on the preimage of the generalized boundary.
pub fn contour_condition(state: &State, p: &GyrostatParams) -> f64 {
    let m = angular_momentum(&state.omega, p);
    state.omega.cross(&m).dot(&state.nu())
}

/// The `|contour_condition|` value at which the smallest singular value
/// reaches the rank cutoff: `tol σ1² σ2 / (4 det A)`.
pub fn contour_threshold(jac: &FiberJacobian, p: &GyrostatParams, tol: RankTolerance) -> f64 {
    let [s1, s2, _] = jac.singular_values;
    tol.0 * s1 * s1 * s2 / (4.0 * p.det_inertia().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::integrals;
    use crate::Vec3;

    fn params() -> GyrostatParams {
        GyrostatParams::new([1.0, 2.0, 3.0], [0.1, 0.2, 0.3]).unwrap()
    }

    #[test]
    fn zero_state_rank_one() {
        let p = GyrostatParams::new([1.0, 2.0, 3.0], [0.0; 3]).unwrap();
        let s = State::new(Vec3::zeros(), Vec3::new(0.6, 0.8, 0.0)).unwrap();
        let j = fiber_jacobian(&s, &p);
        assert_eq!(j.matrix.row(0).norm(), 0.0);
        assert_eq!(j.matrix.row(1).norm(), 0.0);
        assert_eq!(rank_defect(&s, &p, RankTolerance::default()), 2);
    }

    #[test]
    fn rows_match_finite_differences() {
        let p = params();
        let s = State::normalized(Vec3::new(0.3, -0.7, 0.45), Vec3::new(0.1, 0.4, -0.9)).unwrap();
        let j = fiber_jacobian(&s, &p);
        let h = 1e-6;
        for c in 0..3 {
            let mut e = Vec3::zeros();
            e[c] = h;
            let fwd = integrals(&State::new(s.omega + e, s.nu()).unwrap(), &p).to_array();
            let bwd = integrals(&State::new(s.omega - e, s.nu()).unwrap(), &p).to_array();
            for r in 0..3 {
                let fd = (fwd[r] - bwd[r]) / (2.0 * h);
                assert!((fd - j.matrix[(r, c)]).abs() < 1e-6, "({r},{c})");
            }
        }
    }

    #[test]
    fn determinant_identity() {
        let p = params();
        let s = State::normalized(Vec3::new(0.9, 0.2, -0.4), Vec3::new(-0.3, 0.2, 0.5)).unwrap();
        let det = fiber_jacobian(&s, &p).determinant();
        let expected = -4.0 * p.det_inertia() * contour_condition(&s, &p);
        assert!((det - expected).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn contour_condition_trivial_zeros() {
        let p = params();
        let omega = Vec3::new(0.2, -0.5, 0.7);
        let s = State::normalized(omega, omega).unwrap();
        assert!(contour_condition(&s, &p).abs() < 1e-16);
        let q = GyrostatParams::new([1.0, 2.0, 3.0], [0.0; 3]).unwrap();
        let s = State::normalized(2.0 * Vec3::y(), Vec3::new(0.3, 0.1, 0.9)).unwrap();
        assert_eq!(contour_condition(&s, &q), 0.0);
    }

    #[test]
    fn rank_drops_on_the_contour() {
        let p = params();
        let omega = Vec3::new(0.4, -0.1, 0.3);
        let m = angular_momentum(&omega, &p);
        // ν in span(ω, m) makes the third row a combination of the others.
        let on = State::normalized(omega, 0.7 * m - 1.3 * omega).unwrap();
        assert!(rank_defect(&on, &p, RankTolerance::default()) >= 1);
        // ν along ω × m maximizes the triple product instead.
        let off = State::normalized(omega, omega.cross(&m)).unwrap();
        assert_eq!(rank_defect(&off, &p, RankTolerance::default()), 0);
        assert!((contour_condition(&off, &p) - omega.cross(&m).norm()).abs() < 1e-15);
    }

    #[test]
    fn tolerance_validation() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(-1e-10).is_err());
        assert!(RankTolerance::new(2.0).is_err());
        assert_eq!(RankTolerance::new(1e-8).unwrap().get(), 1e-8);
    }

    #[test]
    fn cyclic_axis_permutation_invariance() {
        let inertia = [1.0, 2.0, 3.0];
        let lambda = [0.1, 0.2, 0.3];
        let omega = [0.3, -0.6, 0.2];
        let nu = Vec3::new(0.2, 0.9, -0.3).normalize();
        let base = contour_condition(
            &State::new(omega.into(), nu).unwrap(),
            &GyrostatParams::new(inertia, lambda).unwrap(),
        );
        for shift in 1..3 {
            let rot = |v: [f64; 3]| [v[shift % 3], v[(shift + 1) % 3], v[(shift + 2) % 3]];
            let p = GyrostatParams::new(rot(inertia), rot(lambda)).unwrap();
            let s = State::new(rot(omega).into(), rot(nu.into()).into()).unwrap();
            assert!((contour_condition(&s, &p) - base).abs() < 1e-15);
        }
    }
}
