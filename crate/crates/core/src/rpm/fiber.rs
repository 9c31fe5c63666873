//! Admissible velocities over a point of the Poisson sphere.
//!
//! In momentum coordinates `m = Aω + λ` the level equations read
//! `|m|² = k1`, `m·ν = k3`, `Σ a_i (m_i - λ_i)² = k2`. The first two cut out
//! a circle `m(t) = k3 ν + ρ (cos t e1 + sin t e2)` with `ρ² = k1 - k3²`; on
//! it the third becomes a trigonometric quadratic in `t`, i.e. a quartic in
//! `u = tan(t/2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{self, chordal, C64};
use crate::sphere::{tangent_basis, SpherePoint};
use crate::system::{omega_integrals, GyrostatParams, IntegralConstants};
use crate::Vec3;

/// Solutions closer than this (relative to `max(1, |ω|)`) are merged.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

/// Below this chordal discriminant, with a root near the real axis, the
/// solution count is flagged uncertain.
pub const UNCERTAIN_DISCRIMINANT: f64 = 1e-10;

/// Scaled residual of the level equations every solution must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

// Roots closer than this (chordally) to their conjugate are treated as real.
const REAL_ROOT_TOLERANCE: f64 = 1e-6;
const NEAR_REAL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSolutionSet {
    pub nu: SpherePoint,
    pub omegas: Vec<Vec3>,
    /// Largest scaled residual of the level equations over `omegas`.
    pub residual: f64,
    /// Two roots of the fiber quartic nearly coincide near the real axis, so
    /// the count may be off by two (the base point is at a fold).
    pub uncertain: bool,
    pub discriminant: f64,
}

impl FiberSolutionSet {
    pub fn count(&self) -> usize {
        self.omegas.len()
    }

    fn empty(nu: SpherePoint) -> Self {
        Self { nu, omegas: Vec::new(), residual: 0.0, uncertain: false, discriminant: 1.0 }
    }
}

/// Scaled residual `max_i |K_i(ω, ν) - k_i| / max(1, |k_i|)`.
pub fn level_residual(omega: &Vec3, nu: &Vec3, k: &IntegralConstants, p: &GyrostatParams) -> f64 {
    let got = omega_integrals(omega, nu, p).to_array();
    got.iter()
        .zip(k.to_array())
        .map(|(g, want)| (g - want).abs() / want.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// The trigonometric quadratic `K2(m(t)) - k2` on the momentum circle.
struct CircleEquation {
    center: Vec3,
    e1: Vec3,
    e2: Vec3,
    // K2 - k2 = e + 2 c P + 2 s R + c² PP + s² QQ + 2 c s PQ
    e: f64,
    p: f64,
    r: f64,
    pp: f64,
    qq: f64,
    pq: f64,
}

impl CircleEquation {
    fn new(center: Vec3, e1: Vec3, e2: Vec3, rho: f64, k2: f64, params: &GyrostatParams) -> Self {
        let a = params.inv_inertia();
        let w = center - params.lambda();
        let pv = rho * e1;
        let qv = rho * e2;
        let dot = |x: &Vec3, y: &Vec3| (0..3).map(|i| a[i] * x[i] * y[i]).sum::<f64>();
        Self {
            center,
            e1: pv,
            e2: qv,
            e: dot(&w, &w) - k2,
            p: dot(&w, &pv),
            r: dot(&w, &qv),
            pp: dot(&pv, &pv),
            qq: dot(&qv, &qv),
            pq: dot(&pv, &qv),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        self.e + 2.0 * c * self.p + 2.0 * s * self.r + c * c * self.pp + s * s * self.qq + 2.0 * c * s * self.pq
    }

    fn derivative(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        -2.0 * s * self.p + 2.0 * c * self.r + 2.0 * (self.qq - self.pp) * s * c
            + 2.0 * self.pq * (c * c - s * s)
    }

    /// Ascending coefficients of `(1 + u²)² (K2 - k2)` with `u = tan(t/2)`.
    fn quartic(&self) -> [f64; 5] {
        let (e, p, r, pp, qq, pq) = (self.e, self.p, self.r, self.pp, self.qq, self.pq);
        [
            e + 2.0 * p + pp,
            4.0 * r + 4.0 * pq,
            2.0 * e - 2.0 * pp + 4.0 * qq,
            4.0 * r - 4.0 * pq,
            e - 2.0 * p + pp,
        ]
    }

    fn scale(&self) -> f64 {
        self.e.abs() + self.p.abs() + self.r.abs() + self.pp + self.qq + self.pq.abs()
    }

    fn momentum(&self, t: f64) -> Vec3 {
        let (s, c) = t.sin_cos();
        self.center + c * self.e1 + s * self.e2
    }

    fn polish(&self, mut t: f64) -> f64 {
        let mut g = self.value(t);
        for _ in 0..30 {
            let d = self.derivative(t);
            if d == 0.0 {
                break;
            }
            let next = t - g / d;
            let gn = self.value(next);
            if !(gn.abs() < g.abs()) {
                break;
            }
            let done = (next - t).abs() <= 1e-15 * (1.0 + t.abs());
            t = next;
            g = gn;
            if done {
                break;
            }
        }
        t
    }
}

/// All angular velocities `ω` with `K1 = k1`, `K2 = k2`, `K3(ω, ν) = k3`.
pub fn admissible_velocities(
    nu: &SpherePoint,
    k: &IntegralConstants,
    p: &GyrostatParams,
) -> Result<FiberSolutionSet> {
    let n = nu.vec();
    let rho2 = k.k1 - k.k3 * k.k3;
    if rho2 < 0.0 || !rho2.is_finite() {
        return Ok(FiberSolutionSet::empty(*nu));
    }
    let rho = rho2.sqrt();
    let center = k.k3 * n;

    // Tangency of the sphere |m|² = k1 with the plane m·ν = k3.
    if rho <= 1e-14 * k.k1.sqrt().max(f64::MIN_POSITIVE) {
        let omega = p.omega_from_momentum(&center);
        let residual = level_residual(&omega, &n, k, p);
        let mut set = FiberSolutionSet::empty(*nu);
        set.uncertain = true;
        set.discriminant = 0.0;
        if residual <= RESIDUAL_TOLERANCE {
            set.omegas.push(omega);
            set.residual = residual;
        }
        return Ok(set);
    }

    // Rotate the circle parametrization so that t = π (u = ∞) is far from a
    // root; that value is the leading quartic coefficient.
    let (b1, b2) = tangent_basis(&n);
    let probe = CircleEquation::new(center, b1, b2, rho, k.k2, p);
    let phi = (0..8)
        .map(|i| i as f64 * std::f64::consts::PI / 4.0)
        .max_by(|x, y| {
            probe
                .value(std::f64::consts::PI + x)
                .abs()
                .total_cmp(&probe.value(std::f64::consts::PI + y).abs())
        })
        .unwrap();
    let (sp, cp) = phi.sin_cos();
    let eq = CircleEquation::new(center, cp * b1 + sp * b2, -sp * b1 + cp * b2, rho, k.k2, p);

    let coeffs = eq.quartic();
    let cmax = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if cmax <= 1e-13 * (eq.scale() + k.k2.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateFiber);
    }
    let roots = poly::roots(&coeffs).ok_or(Error::DegenerateFiber)?;
    let discriminant = poly::chordal_discriminant(&roots);
    let realness = |u: &C64| chordal(*u, u.conj());
    let uncertain =
        discriminant < UNCERTAIN_DISCRIMINANT && roots.iter().any(|u| realness(u) < NEAR_REAL_TOLERANCE);

    let mut found: Vec<(f64, Vec3)> = Vec::new();
    let mut residual: f64 = 0.0;
    for u in roots.iter().filter(|u| realness(u) <= REAL_ROOT_TOLERANCE) {
        let t = eq.polish(2.0 * u.re.atan());
        let omega = p.omega_from_momentum(&eq.momentum(t));
        let r = level_residual(&omega, &n, k, p);
        if r > RESIDUAL_TOLERANCE {
            if uncertain {
                continue;
            }
            return Err(Error::SolveFailure { nu: n.into(), residual: r });
        }
        let tol = CLUSTER_TOLERANCE * omega.norm().max(1.0);
        if found.iter().any(|(_, w)| (w - omega).norm() <= tol) {
            continue;
        }
        residual = residual.max(r);
        found.push((t.rem_euclid(std::f64::consts::TAU), omega));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FiberSolutionSet {
        nu: *nu,
        omegas: found.into_iter().map(|(_, w)| w).collect(),
        residual,
        uncertain,
        discriminant,
    })
}
