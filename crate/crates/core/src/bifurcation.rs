//! The bifurcation diagram of the free gyrostat.
//!
//! Steady rotations `ω = σ m` trace, in the `(k1, k2)` plane, the curve
//!
//! ```text
//! k1(σ) = Σ a_i² λ_i² / (σ - a_i)²,   k2(σ) = σ² Σ a_i λ_i² / (σ - a_i)²
//! ```
//!
//! with `a_i` the diagonal of `A^{-1}`. The three poles split the σ line into
//! four branches. The lowest and highest ones are the graphs of `k2 = f(k1)`
//! and `k2 = g(k1)`, the minimum and maximum of `K2` over the momentum sphere
//! `|m|² = k1`. The bifurcation set is
//!
//! ```text
//! Σ = {k ∈ C1 : k1 >= k3²} ∪ {k ∈ C2 : f(k1) <= k2 <= g(k1)}
//! ```
//!
//! where `C1` is the cylinder over the curve and `C2` the parabolic cylinder
//! `k1 = k3²`.
//!
//! Away from `Σ`, the level `J_k` is a union of tori, one per component of the
//! level curve `{|m|² = k1, K2 = k2}`. That component count is obtained here
//! by a Morse sweep of `K2` over the momentum sphere, using the critical
//! points on the curve and their index.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{GyrostatParams, IntegralConstants};
use crate::Vec3;

/// Samples used to verify that `k1(σ)` is monotone on a branch.
pub const MONOTONE_SCAN_SAMPLES: usize = 1024;

/// Default distance below which a point counts as lying on `Σ`.
pub const DEFAULT_SIGMA_TOLERANCE: f64 = 1e-9;

/// How labels R1..R4 are assigned; emitted with classification output.
pub const REGION_CONVENTION: &str = "R1: J_k is one torus; R2: two tori, each level curve \
    encircling a local minimum of K2 on the momentum sphere |m|^2 = k1; R3: two tori, each \
    encircling a local maximum; R4: J_k empty";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    /// `σ < a_min`; the graph of `f`.
    Low,
    Mid1,
    Mid2,
    /// `σ > a_max`; the graph of `g`.
    High,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::Low, Branch::Mid1, Branch::Mid2, Branch::High];

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Low => "LOW",
            Branch::Mid1 => "MID1",
            Branch::Mid2 => "MID2",
            Branch::High => "HIGH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurveSample {
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    R1,
    R2,
    R3,
    R4,
    #[serde(rename = "ON_SIGMA")]
    OnSigma,
}

impl RegionLabel {
    /// Topological type of `J_k`.
    pub fn manifold_type(&self) -> &'static str {
        match self {
            RegionLabel::R1 => "T2",
            RegionLabel::R2 | RegionLabel::R3 => "2T2",
            RegionLabel::R4 => "empty",
            RegionLabel::OnSigma => "critical",
        }
    }

    /// Number of tori in `J_k`, hence of RPM components.
    pub fn torus_count(&self) -> Option<usize> {
        match self {
            RegionLabel::R1 => Some(1),
            RegionLabel::R2 | RegionLabel::R3 => Some(2),
            RegionLabel::R4 => Some(0),
            RegionLabel::OnSigma => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::R1 => "R1",
            RegionLabel::R2 => "R2",
            RegionLabel::R3 => "R3",
            RegionLabel::R4 => "R4",
            RegionLabel::OnSigma => "ON_SIGMA",
        }
    }
}

/// Morse index of a critical point of `K2` on the momentum sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Saddle,
    Max,
    Degenerate,
}

/// A steady rotation `ω = σ m` on the sphere `|m|² = k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub branch: Branch,
    pub sigma: f64,
    pub k2: f64,
    pub momentum: [f64; 3],
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTopology {
    /// Components of the curve `{|m|² = k1, K2 = k2}`.
    pub components: usize,
    /// Components of `{|m|² = k1, K2 < k2}`.
    pub sublevel_components: usize,
    pub critical_points: Vec<CriticalPoint>,
}

/// Sorted poles `a_(1) < a_(2) < a_(3)`.
fn poles(p: &GyrostatParams) -> [f64; 3] {
    let s = p.sorted_inv_inertia();
    [s[0].0, s[1].0, s[2].0]
}

fn theta_interval(branch: Branch, poles: &[f64; 3]) -> (f64, f64) {
    let t = poles.map(f64::atan);
    match branch {
        Branch::Low => (-FRAC_PI_2, t[0]),
        Branch::Mid1 => (t[0], t[1]),
        Branch::Mid2 => (t[1], t[2]),
        Branch::High => (t[2], FRAC_PI_2),
    }
}

fn interior_thetas(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / n as f64;
    (0..n).map(move |j| lo + (j as f64 + 0.5) * step)
}

/// `Σ a_i λ_i²`, the common limit of `k2` as `σ → ±∞` (where `k1 → 0`).
pub fn infinity_limit(p: &GyrostatParams) -> f64 {
    let a = p.inv_inertia();
    let l = p.lambda();
    (0..3).map(|i| a[i] * l[i] * l[i]).sum()
}

// Unchecked evaluation; callers keep σ off the poles.
fn curve_raw(sigma: f64, p: &GyrostatParams) -> (f64, f64) {
    if sigma.is_infinite() {
        return (0.0, infinity_limit(p));
    }
    let a = p.inv_inertia();
    let l = p.lambda();
    let mut k1 = 0.0;
    let mut k2 = 0.0;
    for i in 0..3 {
        let d = sigma - a[i];
        let r = sigma / d;
        k1 += (a[i] * l[i] / d).powi(2);
        k2 += a[i] * l[i] * l[i] * r * r;
    }
    (k1, k2)
}

fn k1_derivative(sigma: f64, p: &GyrostatParams) -> f64 {
    let a = p.inv_inertia();
    let l = p.lambda();
    (0..3)
        .map(|i| -2.0 * (a[i] * l[i]).powi(2) / (sigma - a[i]).powi(3))
        .sum()
}

/// A point `(k1, k2)` of the bifurcation curve.
///
/// `σ = ±∞` returns the limit `(0, Σ a_i λ_i²)`.
pub fn curve8(sigma: f64, p: &GyrostatParams) -> Result<(f64, f64)> {
    if sigma.is_nan() {
        return Err(Error::NonFinite);
    }
    let a = p.inv_inertia();
    let amax = a.max();
    if let Some(&pole) = a.iter().find(|&&ai| (sigma - ai).abs() <= 1e-12 * amax) {
        return Err(Error::Pole { sigma, pole });
    }
    Ok(curve_raw(sigma, p))
}

/// Branch that contains `sigma`, or `None` at a pole.
pub fn branch_of(sigma: f64, p: &GyrostatParams) -> Option<Branch> {
    let [p0, p1, p2] = poles(p);
    if sigma < p0 {
        Some(Branch::Low)
    } else if sigma > p0 && sigma < p1 {
        Some(Branch::Mid1)
    } else if sigma > p1 && sigma < p2 {
        Some(Branch::Mid2)
    } else if sigma > p2 {
        Some(Branch::High)
    } else {
        None
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, down to adjacent floats.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `k1(σ) = k1` on a branch on which `k1(σ)` is monotone, after a
/// sampled monotonicity check.
fn solve_monotone_branch(branch: Branch, k1: f64, p: &GyrostatParams) -> Result<f64> {
    let (lo, hi) = theta_interval(branch, &poles(p));
    let thetas: Vec<f64> = interior_thetas(lo, hi, MONOTONE_SCAN_SAMPLES).collect();
    let values: Vec<f64> = thetas.iter().map(|t| curve_raw(t.tan(), p).0).collect();
    let increasing = values.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = values.windows(2).all(|w| w[1] <= w[0]);
    if !(increasing || decreasing) {
        return Err(Error::NonMonotone(branch));
    }
    if !(k1.is_finite() && k1 > 0.0) {
        return Err(Error::OutOfRange {
            branch,
            k1,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let g = |theta: f64| curve_raw(theta.tan(), p).0 - k1;
    // Bracket between neighbouring samples, widening to the interval ends.
    let n = thetas.len();
    let pos = if increasing {
        values.partition_point(|&v| v < k1)
    } else {
        values.partition_point(|&v| v >= k1)
    };
    let a = if pos == 0 { lo } else { thetas[pos - 1] };
    let b = if pos == n { hi } else { thetas[pos] };
    // Keep strictly inside the interval so tan() stays off the poles.
    let a = if a == lo { next_inward(lo, hi) } else { a };
    let b = if b == hi { next_inward(hi, lo) } else { b };
    if g(a).signum() == g(b).signum() {
        // Target beyond what f64 can resolve near an endpoint.
        return Err(Error::OutOfRange {
            branch,
            k1,
            lo: values.iter().copied().fold(f64::INFINITY, f64::min),
            hi: values.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(bisect(g, a, b).tan())
}

fn next_inward(from: f64, towards: f64) -> f64 {
    let step = 1e-12 * (towards - from).abs().max(1e-300);
    from + step.copysign(towards - from)
}

/// `f(k1)`: minimum of `K2` over the momentum sphere `|m|² = k1`.
pub fn branch_f(k1: f64, p: &GyrostatParams) -> Result<f64> {
    let sigma = solve_monotone_branch(Branch::Low, k1, p)?;
    Ok(curve_raw(sigma, p).1)
}

/// `g(k1)`: maximum of `K2` over the momentum sphere `|m|² = k1`.
pub fn branch_g(k1: f64, p: &GyrostatParams) -> Result<f64> {
    let sigma = solve_monotone_branch(Branch::High, k1, p)?;
    Ok(curve_raw(sigma, p).1)
}

/// Momentum of the steady rotation with parameter σ: `m_i = a_i λ_i / (a_i - σ)`.
pub fn steady_momentum(sigma: f64, p: &GyrostatParams) -> Vec3 {
    let a = p.inv_inertia();
    let l = p.lambda();
    Vec3::from_fn(|i, _| a[i] * l[i] / (a[i] - sigma))
}

/// Index of the critical point from the Hessian `2 diag(a - σ)` of the
/// Lagrangian restricted to the tangent plane of the sphere.
fn critical_kind(sigma: f64, m: &Vec3, p: &GyrostatParams) -> CriticalKind {
    let h = p.inv_inertia().map(|a| a - sigma);
    let n = m.normalize();
    let helper = if n.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    let quad = |x: &Vec3, y: &Vec3| (0..3).map(|i| h[i] * x[i] * y[i]).sum::<f64>();
    let (huu, huv, hvv) = (quad(&u, &u), quad(&u, &v), quad(&v, &v));
    let det = huu * hvv - huv * huv;
    let scale = h.amax().powi(2);
    if det.abs() <= 1e-12 * scale {
        CriticalKind::Degenerate
    } else if det < 0.0 {
        CriticalKind::Saddle
    } else if huu + hvv > 0.0 {
        CriticalKind::Min
    } else {
        CriticalKind::Max
    }
}

fn critical_point(branch: Branch, sigma: f64, p: &GyrostatParams) -> CriticalPoint {
    let m = steady_momentum(sigma, p);
    CriticalPoint {
        branch,
        sigma,
        k2: curve_raw(sigma, p).1,
        momentum: m.into(),
        kind: critical_kind(sigma, &m, p),
    }
}

/// All steady rotations on the momentum sphere `|m|² = k1`, i.e. the critical
/// points of `K2` restricted to it, sorted by critical value.
pub fn critical_points(k1: f64, p: &GyrostatParams) -> Result<Vec<CriticalPoint>> {
    p.require_generic()?;
    if !(k1.is_finite() && k1 > 0.0) {
        return Ok(Vec::new());
    }
    let poles = poles(p);
    let mut out = vec![
        critical_point(Branch::Low, solve_monotone_branch(Branch::Low, k1, p)?, p),
        critical_point(Branch::High, solve_monotone_branch(Branch::High, k1, p)?, p),
    ];
    for branch in [Branch::Mid1, Branch::Mid2] {
        // k1(σ) is convex between consecutive poles; its derivative is
        // increasing, so the minimum is a sign change of the derivative.
        let (lo, hi) = theta_interval(branch, &poles);
        let (lo, hi) = (next_inward(lo, hi), next_inward(hi, lo));
        let theta_min = bisect(|t| k1_derivative(t.tan(), p), lo, hi);
        let k1_min = curve_raw(theta_min.tan(), p).0;
        if k1 < k1_min {
            continue;
        }
        if k1 == k1_min {
            out.push(critical_point(branch, theta_min.tan(), p));
            continue;
        }
        let g = |t: f64| curve_raw(t.tan(), p).0 - k1;
        for (a, b) in [(lo, theta_min), (theta_min, hi)] {
            if g(a).signum() != g(b).signum() {
                out.push(critical_point(branch, bisect(g, a, b).tan(), p));
            }
        }
    }
    out.sort_by(|a, b| a.k2.total_cmp(&b.k2));
    Ok(out)
}

/// Number of components of the level curve `{|m|² = k1, K2 = k2}` and of the
/// sublevel set below it.
///
/// The sweep adds a circle at each minimum and removes one at each maximum.
/// At a saddle it merges two circles when two are present and splits the
/// single circle otherwise; this keeps at most two circles, and a sweep that
/// does not end with zero circles is reported as inconsistent.
pub fn level_topology(k1: f64, k2: f64, p: &GyrostatParams) -> Result<LevelTopology> {
    let critical = critical_points(k1, p)?;
    let mut circles: i32 = 0;
    let mut pieces: i32 = 0;
    let mut at_level = None;
    for c in &critical {
        if at_level.is_none() && c.k2 >= k2 {
            at_level = Some((circles, pieces));
        }
        match c.kind {
            CriticalKind::Min => {
                circles += 1;
                pieces += 1;
            }
            CriticalKind::Max => circles -= 1,
            CriticalKind::Saddle if circles >= 2 => {
                circles -= 1;
                pieces -= 1;
            }
            CriticalKind::Saddle => circles += 1,
            CriticalKind::Degenerate => {}
        }
        if circles < 0 {
            return Err(Error::UnexpectedTopology { k1, components: circles });
        }
    }
    if circles != 0 {
        return Err(Error::UnexpectedTopology { k1, components: circles });
    }
    let (components, sublevel) = at_level.unwrap_or((0, 0));
    Ok(LevelTopology {
        components: components as usize,
        sublevel_components: sublevel.max(0) as usize,
        critical_points: critical,
    })
}

fn scales(k: &IntegralConstants) -> [f64; 3] {
    k.to_array().map(|v| v.abs().max(1.0))
}

/// Scaled distance from `(k1, k2)` to the bifurcation curve, with the
/// coordinates divided by `s1`, `s2`.
pub fn curve_distance(k1: f64, k2: f64, s1: f64, s2: f64, p: &GyrostatParams) -> f64 {
    const SAMPLES: usize = 512;
    let poles = poles(p);
    let dist = |theta: f64| {
        let (c1, c2) = curve_raw(theta.tan(), p);
        (((c1 - k1) / s1).powi(2) + ((c2 - k2) / s2).powi(2)).sqrt()
    };
    let mut best = f64::INFINITY;
    for branch in Branch::ALL {
        let (lo, hi) = theta_interval(branch, &poles);
        let thetas: Vec<f64> = interior_thetas(lo, hi, SAMPLES).collect();
        let d: Vec<f64> = thetas.iter().map(|&t| dist(t)).collect();
        for j in 0..SAMPLES {
            let left = if j == 0 { f64::INFINITY } else { d[j - 1] };
            let right = if j + 1 == SAMPLES { f64::INFINITY } else { d[j + 1] };
            if d[j] > left || d[j] > right {
                continue;
            }
            let a = if j == 0 { next_inward(lo, hi) } else { thetas[j - 1] };
            let b = if j + 1 == SAMPLES { next_inward(hi, lo) } else { thetas[j + 1] };
            best = best.min(golden_min(&dist, a, b));
        }
    }
    best
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    fc.min(fd).min(f(0.5 * (a + b)))
}

/// Whether `k` lies within `tol` of `Σ` (scaled coordinates `k_i / max(1, |k_i|)`).
pub fn on_sigma(k: &IntegralConstants, p: &GyrostatParams, tol: f64) -> Result<bool> {
    p.require_generic()?;
    let [s1, s2, s3] = scales(k);
    // Parabolic cylinder, to first order in the scaled coordinates.
    let para = k.k1 - k.k3 * k.k3;
    let d_c2 = para.abs() / (s1 * s1 + 4.0 * (k.k3 * s3).powi(2)).sqrt();
    if d_c2 <= tol {
        let k1 = k.k1.max(k.k3 * k.k3);
        if k1 > 0.0 {
            let f = branch_f(k1, p)?;
            let g = branch_g(k1, p)?;
            if k.k2 >= f - tol * s2 && k.k2 <= g + tol * s2 {
                return Ok(true);
            }
        }
    }
    if para >= -tol * s1 && curve_distance(k.k1, k.k2, s1, s2, p) <= tol {
        return Ok(true);
    }
    Ok(false)
}

/// Region of `k` in the complement of `Σ`, or [`RegionLabel::OnSigma`].
pub fn classify(k: &IntegralConstants, p: &GyrostatParams, tol: f64) -> Result<RegionLabel> {
    p.require_generic()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    if k.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if on_sigma(k, p, tol)? {
        return Ok(RegionLabel::OnSigma);
    }
    if !k.is_feasible() || k.k1 <= 0.0 {
        return Ok(RegionLabel::R4);
    }
    let topo = level_topology(k.k1, k.k2, p)?;
    Ok(match (topo.components, topo.sublevel_components) {
        (0, _) => RegionLabel::R4,
        (1, _) => RegionLabel::R1,
        (_, 2) => RegionLabel::R2,
        _ => RegionLabel::R3,
    })
}

/// Samples of the curve with `σ = tan θ`, `n` per branch, plus `σ = 0`.
pub fn sample_curve(n_per_branch: usize, p: &GyrostatParams) -> Vec<BifurcationCurveSample> {
    let poles = poles(p);
    let amax = poles[2];
    let mut out = Vec::with_capacity(4 * n_per_branch + 1);
    for branch in Branch::ALL {
        let (lo, hi) = theta_interval(branch, &poles);
        let mut sigmas: Vec<f64> = interior_thetas(lo, hi, n_per_branch)
            .map(f64::tan)
            .filter(|s| poles.iter().all(|a| (s - a).abs() > 1e-12 * amax))
            .collect();
        if branch == Branch::Low {
            sigmas.push(0.0);
            sigmas.sort_by(f64::total_cmp);
            sigmas.dedup();
        }
        for sigma in sigmas {
            let (k1, k2) = curve_raw(sigma, p);
            out.push(BifurcationCurveSample { sigma, k1, k2, branch });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaPolyline {
    /// `"C1"` (curve cylinder) or `"C2"` (parabolic cylinder).
    pub cylinder: &'static str,
    pub branch: Option<Branch>,
    /// `(k1, k2)` vertices.
    pub points: Vec<[f64; 2]>,
}

/// The slice `Σ ∩ {k3 = const}` as polylines in the `(k1, k2)` plane.
pub fn sigma_slice(
    k3: f64,
    n_per_branch: usize,
    p: &GyrostatParams,
) -> Result<Vec<SigmaPolyline>> {
    p.require_generic()?;
    let k1_min = k3 * k3;
    let mut out = Vec::new();
    let samples = sample_curve(n_per_branch, p);
    for branch in Branch::ALL {
        let mut current: Vec<[f64; 2]> = Vec::new();
        for s in samples.iter().filter(|s| s.branch == branch) {
            if s.k1 >= k1_min {
                current.push([s.k1, s.k2]);
            } else if !current.is_empty() {
                out.push(SigmaPolyline {
                    cylinder: "C1",
                    branch: Some(branch),
                    points: std::mem::take(&mut current),
                });
            }
        }
        if !current.is_empty() {
            out.push(SigmaPolyline { cylinder: "C1", branch: Some(branch), points: current });
        }
    }
    if k1_min > 0.0 {
        let f = branch_f(k1_min, p)?;
        let g = branch_g(k1_min, p)?;
        let n = n_per_branch.max(2);
        let points = (0..n)
            .map(|i| [k1_min, f + (g - f) * i as f64 / (n - 1) as f64])
            .collect();
        out.push(SigmaPolyline { cylinder: "C2", branch: None, points });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GyrostatParams {
        GyrostatParams::new([1.0, 2.0, 3.0], [0.1, 0.2, 0.3]).unwrap()
    }

    #[test]
    fn curve_at_zero_and_infinity() {
        let p = params();
        let (k1, k2) = curve8(0.0, &p).unwrap();
        assert!((k1 - 0.14).abs() < 1e-14);
        assert_eq!(k2, 0.0);
        let lim = infinity_limit(&p);
        assert!((lim - 0.06).abs() < 1e-15);
        for s in [1e8, -1e8] {
            let (k1, k2) = curve8(s, &p).unwrap();
            assert!(k1.abs() < 1e-6 && (k2 - lim).abs() < 1e-6);
        }
        assert_eq!(curve8(f64::INFINITY, &p).unwrap(), (0.0, lim));
    }

    #[test]
    fn pole_rejected_and_blows_up() {
        let p = params();
        assert!(matches!(curve8(1.0, &p), Err(Error::Pole { .. })));
        assert!(matches!(curve8(0.5 + 1e-14, &p), Err(Error::Pole { .. })));
        let a_min = 1.0 / 3.0;
        let below = curve8(a_min - 1e-6, &p).unwrap();
        let above = curve8(a_min + 1e-6, &p).unwrap();
        for (k1, k2) in [below, above] {
            assert!(k1 > 1e10 && k2 > 1e9, "{k1} {k2}");
        }
    }

    #[test]
    fn branches_follow_sorted_poles() {
        let p = params();
        assert_eq!(branch_of(0.0, &p), Some(Branch::Low));
        assert_eq!(branch_of(0.4, &p), Some(Branch::Mid1));
        assert_eq!(branch_of(0.7, &p), Some(Branch::Mid2));
        assert_eq!(branch_of(2.0, &p), Some(Branch::High));
        assert_eq!(branch_of(0.5, &p), None);
    }

    #[test]
    fn branch_f_at_lambda_norm() {
        // σ = 0 lies on the low branch because every a_i > 0.
        let p = params();
        let f = branch_f(0.14, &p).unwrap();
        assert!(f.abs() < 1e-12, "{f}");
    }

    #[test]
    fn branch_limits_and_errors() {
        let p = params();
        let lim = infinity_limit(&p);
        assert!((branch_f(1e-12, &p).unwrap() - lim).abs() < 1e-5);
        assert!((branch_g(1e-12, &p).unwrap() - lim).abs() < 1e-5);
        assert!(matches!(branch_f(-1.0, &p), Err(Error::OutOfRange { .. })));
        assert!(matches!(branch_g(0.0, &p), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn branch_round_trip() {
        let p = params();
        for i in 0..100 {
            let s = -10.0 + (10.0 + 1.0 / 3.0) * (i as f64 + 0.5) / 100.0;
            let (k1, k2) = curve8(s, &p).unwrap();
            let f = branch_f(k1, &p).unwrap();
            assert!((f - k2).abs() <= 1e-8 * k2.abs().max(1e-300), "σ={s}: {f} vs {k2}");
            let s = 1.0 + 9.0 * (i as f64 + 0.5) / 100.0;
            let (k1, k2) = curve8(s, &p).unwrap();
            let g = branch_g(k1, &p).unwrap();
            assert!((g - k2).abs() <= 1e-8 * k2.abs(), "σ={s}: {g} vs {k2}");
        }
    }

    #[test]
    fn critical_points_by_k1() {
        let p = params();
        let c = critical_points(0.2, &p).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].kind, CriticalKind::Min);
        assert_eq!(c[1].kind, CriticalKind::Max);
        let c = critical_points(1.0, &p).unwrap();
        let kinds: Vec<_> = c.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            [CriticalKind::Min, CriticalKind::Saddle, CriticalKind::Max, CriticalKind::Max]
        );
        let c = critical_points(10.0, &p).unwrap();
        assert_eq!(c.len(), 6);
        for cp in &c {
            let m = Vec3::from(cp.momentum);
            assert!((m.norm_squared() - 10.0).abs() < 1e-9);
            // K2 at the critical momentum equals the critical value.
            let omega = p.omega_from_momentum(&m);
            let k2 = p.apply_inertia(&omega).dot(&omega);
            assert!((k2 - cp.k2).abs() < 1e-9 * cp.k2);
        }
    }

    #[test]
    fn classify_examples() {
        let p = params();
        let tol = DEFAULT_SIGMA_TOLERANCE;
        let c = |k1, k2, k3| classify(&IntegralConstants::new(k1, k2, k3), &p, tol).unwrap();
        assert_eq!(c(1.0, 0.0, 2.0), RegionLabel::R4);
        assert_eq!(c(1.0, 0.5, 0.2), RegionLabel::R1);
        assert_eq!(c(1.0, 0.84, 0.2), RegionLabel::R3);
        assert_eq!(c(10.0, 4.2, 1.0), RegionLabel::R2);
        assert_eq!(c(10.0, 7.5, -1.0), RegionLabel::R3);
        assert_eq!(c(1.0, 5.0, 0.0), RegionLabel::R4);
        // On C2 between f and g.
        let k1 = 0.5;
        let k2 = 0.5 * (branch_f(k1, &p).unwrap() + branch_g(k1, &p).unwrap());
        assert_eq!(c(k1, k2, k1.sqrt()), RegionLabel::OnSigma);
        // On C1 with k1 >= k3^2.
        let (k1, k2) = curve8(0.8, &p).unwrap();
        assert_eq!(c(k1, k2, 0.1), RegionLabel::OnSigma);
        // On C1 but with k1 < k3^2 it is not part of Σ.
        assert_eq!(c(k1, k2, 2.0 * k1.sqrt()), RegionLabel::R4);
        assert!(matches!(
            classify(
                &IntegralConstants::new(1.0, 0.5, 0.0),
                &GyrostatParams::new([1.0, 2.0, 3.0], [0.0, 0.2, 0.3]).unwrap(),
                tol
            ),
            Err(Error::NonGenericParams(_))
        ));
    }

    #[test]
    fn slice_contains_curve_at_zero_k3() {
        let p = params();
        let slice = sigma_slice(0.0, 64, &p).unwrap();
        let total: usize = slice.iter().map(|s| s.points.len()).sum();
        assert_eq!(total, sample_curve(64, &p).len());
        let slice = sigma_slice(0.5, 64, &p).unwrap();
        let c2 = slice.iter().find(|s| s.cylinder == "C2").unwrap();
        assert!(c2.points.iter().all(|q| q[0] == 0.25));
    }
}
