//! The generalized boundary in closed form.
//!
//! On the contour `[ω × m]·ν = 0` the Poisson vector lies in `span(m, ω)`.
//! Imposing `m·ν = k3` and `|ν| = 1` gives
//!
//! ```text
//! ν = [k3 ± (k2 + ω·λ) Q(ω)] m / k1 ± Q(ω) ω,
//! Q(ω) = sqrt((k1 - k3²) / (k1 |ω|² - (k2 + ω·λ)²))
//! ```
//!
//! evaluated along each traced component of `{K1 = k1, K2 = k2}`. All four
//! sign combinations are tried and kept only where they pass the residual
//! checks; only the two opposite-sign combinations survive off degenerate
//! points.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, QFactor, Result};
use crate::rpm::trace::{trace_omega_curve, OmegaCurve};
use crate::sphere::{SphereCurve, SpherePoint};
use crate::system::{angular_momentum, GyrostatParams, IntegralConstants};
use crate::Vec3;

/// Residual bound for accepting a boundary candidate.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Signs in front of `(k2 + ω·λ) Q` and of `Q ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern {
    pub momentum: i8,
    pub omega: i8,
}

impl SignPattern {
    pub const ALL: [SignPattern; 4] = [
        SignPattern { momentum: 1, omega: 1 },
        SignPattern { momentum: 1, omega: -1 },
        SignPattern { momentum: -1, omega: 1 },
        SignPattern { momentum: -1, omega: -1 },
    ];
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s: i8| if s > 0 { '+' } else { '-' };
        write!(f, "{}{}", c(self.momentum), c(self.omega))
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One piece of the generalized boundary, with the ω it was generated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    /// Index of the ω-curve (torus of `J_k`) it came from.
    pub torus: usize,
    pub sign_pattern: SignPattern,
    pub curve: SphereCurve,
    pub omegas: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Boundary {
    pub curves: Vec<BoundaryCurve>,
    /// Points of the traced ω-curves where `Q` left its domain.
    pub domain_breaks: usize,
}

impl Boundary {
    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (&SpherePoint, &Vec3)> {
        self.curves.iter().flat_map(|c| c.curve.points.iter().zip(&c.omegas))
    }
}

pub fn q_factor(omega: &Vec3, k: &IntegralConstants, p: &GyrostatParams) -> Result<f64> {
    let num = k.k1 - k.k3 * k.k3;
    if num < 0.0 {
        return Err(Error::Domain(QFactor::Numerator));
    }
    let pm = k.k2 + omega.dot(&p.lambda());
    let den = k.k1 * omega.norm_squared() - pm * pm;
    if !(den > 0.0) {
        return Err(Error::Domain(QFactor::Denominator));
    }
    Ok((num / den).sqrt())
}

/// Residuals `(|ν|² - 1, K3 - k3, [ω×m]·ν)`, each scaled.
pub fn boundary_residuals(nu: &Vec3, omega: &Vec3, k: &IntegralConstants, p: &GyrostatParams) -> [f64; 3] {
    let m = angular_momentum(omega, p);
    [
        (nu.norm_squared() - 1.0).abs(),
        (m.dot(nu) - k.k3).abs() / k.k3.abs().max(1.0),
        omega.cross(&m).dot(nu).abs() / (omega.norm() * m.norm()).max(1.0),
    ]
}

fn candidate(omega: &Vec3, q: f64, sign: SignPattern, k: &IntegralConstants, p: &GyrostatParams) -> Vec3 {
    let m = angular_momentum(omega, p);
    let pm = k.k2 + omega.dot(&p.lambda());
    (k.k3 + sign.momentum as f64 * pm * q) * m / k.k1 + sign.omega as f64 * q * omega
}

/// Traces the ω-curves and maps them to the sphere. An empty level gives an
/// empty boundary.
pub fn generalized_boundary(k: &IntegralConstants, p: &GyrostatParams) -> Result<Boundary> {
    p.require_generic()?;
    if !k.is_feasible() {
        return Err(Error::Domain(QFactor::Numerator));
    }
    match trace_omega_curve(k.k1, k.k2, p) {
        Ok(curves) => boundary_from_curves(k, p, &curves),
        Err(Error::EmptyLevel { .. }) => Ok(Boundary::default()),
        Err(e) => Err(e),
    }
}

/// The boundary generated by already traced ω-curves.
pub fn boundary_from_curves(
    k: &IntegralConstants,
    p: &GyrostatParams,
    curves: &[OmegaCurve],
) -> Result<Boundary> {
    if !k.is_feasible() {
        return Err(Error::Domain(QFactor::Numerator));
    }
    let mut out = Boundary::default();
    for (torus, oc) in curves.iter().enumerate() {
        let qs: Vec<Option<f64>> = oc.points.iter().map(|w| q_factor(w, k, p).ok()).collect();
        out.domain_breaks += qs.iter().filter(|q| q.is_none()).count();
        let mut produced: Vec<BoundaryCurve> = Vec::new();
        for sign in SignPattern::ALL {
            let accepted: Vec<Option<Vec3>> = oc
                .points
                .iter()
                .zip(&qs)
                .map(|(w, q)| {
                    let nu = candidate(w, (*q)?, sign, k, p);
                    let r = boundary_residuals(&nu, w, k, p);
                    r.iter().all(|&x| x < BOUNDARY_TOLERANCE).then_some(nu)
                })
                .collect();
            for run in runs(&accepted, oc.closed) {
                let closed = run.len() == oc.points.len() && oc.closed;
                let mut curve = SphereCurve { points: Vec::with_capacity(run.len()), closed };
                let mut omegas = Vec::with_capacity(run.len());
                for i in run {
                    curve.points.push(SpherePoint::from_normalized(accepted[i].unwrap())?);
                    omegas.push(oc.points[i]);
                }
                let bc = BoundaryCurve { torus, sign_pattern: sign, curve, omegas };
                if !produced.iter().any(|other| same_points(&other.curve, &bc.curve)) {
                    produced.push(bc);
                }
            }
        }
        out.curves.extend(produced);
    }
    Ok(out)
}

/// Maximal runs of `Some`, joined across the seam of a closed sequence;
/// runs shorter than three points are dropped.
fn runs<T>(flags: &[Option<T>], cyclic: bool) -> Vec<Vec<usize>> {
    let n = flags.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for (i, f) in flags.iter().enumerate() {
        if f.is_some() {
            current.push(i);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    if cyclic && out.len() > 1 && out[0][0] == 0 && out.last().unwrap().last() == Some(&(n - 1)) {
        let first = out.remove(0);
        out.last_mut().unwrap().extend(first);
    }
    out.retain(|r| r.len() >= 3);
    out
}

fn same_points(a: &SphereCurve, b: &SphereCurve) -> bool {
    a.points.len() == b.points.len()
        && a.points.iter().zip(&b.points).all(|(x, y)| (x.vec() - y.vec()).norm() < 1e-12)
}
