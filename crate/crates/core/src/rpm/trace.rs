//! Tracing the curve `{K1 = k1} ∩ {K2 = k2}` in ω-space by predictor–corrector
//! continuation.
//!
//! The predictor steps along `∇K1 × ∇K2`; the corrector is a minimum-norm
//! Newton iteration onto both levels. Seeds come from sign changes of
//! `K2 - k2` along great circles of the momentum sphere `|m|² = k1`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{angular_momentum, GyrostatParams};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Nominal step, as a fraction of `max(a_i) sqrt(k1)`.
    pub step_fraction: f64,
    /// Great circles per axis family used for seeding.
    pub seed_circles: usize,
    /// Samples per seeding circle.
    pub seed_samples: usize,
    /// Curves are retraced with a smaller step until they have this many points.
    pub min_points: usize,
    pub max_points: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            step_fraction: 4e-3,
            seed_circles: 24,
            seed_samples: 192,
            min_points: 96,
            max_points: 500_000,
        }
    }
}

/// One connected component of the level curve, as a closed polyline in ω-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaCurve {
    pub points: Vec<Vec3>,
    pub closed: bool,
    /// Spacing used while tracing.
    pub step: f64,
}

impl OmegaCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct Level<'a> {
    k1: f64,
    k2: f64,
    p: &'a GyrostatParams,
}

impl Level<'_> {
    fn residual(&self, omega: &Vec3) -> [f64; 2] {
        let m = angular_momentum(omega, self.p);
        [m.norm_squared() - self.k1, self.p.apply_inertia(omega).dot(omega) - self.k2]
    }

    fn scaled_residual(&self, omega: &Vec3) -> f64 {
        let [f1, f2] = self.residual(omega);
        f1.abs() / self.k1.abs().max(1.0) + f2.abs() / self.k2.abs().max(1.0)
    }

    fn gradients(&self, omega: &Vec3) -> (Vec3, Vec3) {
        let m = angular_momentum(omega, self.p);
        (2.0 * self.p.apply_inertia(&m), 2.0 * self.p.apply_inertia(omega))
    }

    /// Unit tangent `∇K1 × ∇K2`, or `None` where the gradients are parallel.
    fn tangent(&self, omega: &Vec3) -> Option<Vec3> {
        let (g1, g2) = self.gradients(omega);
        let t = g1.cross(&g2);
        let n = t.norm();
        (n > 1e-12 * g1.norm() * g2.norm() && n > 0.0).then(|| t / n)
    }

    /// Minimum-norm Newton projection onto both levels.
    fn correct(&self, mut omega: Vec3) -> Option<Vec3> {
        for _ in 0..25 {
            if self.scaled_residual(&omega) < 1e-14 {
                return Some(omega);
            }
            let [f1, f2] = self.residual(&omega);
            let (g1, g2) = self.gradients(&omega);
            let (a, b, d) = (g1.dot(&g1), g1.dot(&g2), g2.dot(&g2));
            let det = a * d - b * b;
            if !(det > 1e-24 * a * d) {
                return None;
            }
            // δ = -Jᵀ (J Jᵀ)⁻¹ F
            let y1 = (d * f1 - b * f2) / det;
            let y2 = (a * f2 - b * f1) / det;
            omega -= y1 * g1 + y2 * g2;
            if !omega.iter().all(|x| x.is_finite()) {
                return None;
            }
        }
        (self.scaled_residual(&omega) < 1e-12).then_some(omega)
    }
}

struct Buckets {
    cell: f64,
    map: HashMap<[i64; 3], Vec<Vec3>>,
}

impl Buckets {
    fn key(&self, p: &Vec3) -> [i64; 3] {
        [p.x, p.y, p.z].map(|c| (c / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: Vec3) {
        let k = self.key(&p);
        self.map.entry(k).or_default().push(p);
    }

    fn any_within(&self, q: &Vec3, r: f64) -> bool {
        let k = self.key(q);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                (-1..=1).any(|dz| {
                    self.map
                        .get(&[k[0] + dx, k[1] + dy, k[2] + dz])
                        .is_some_and(|v| v.iter().any(|p| (p - q).norm() <= r))
                })
            })
        })
    }
}

/// Traces every component of the level curve with default options.
pub fn trace_omega_curve(k1: f64, k2: f64, p: &GyrostatParams) -> Result<Vec<OmegaCurve>> {
    trace_omega_curve_with(k1, k2, p, &TraceOptions::default())
}

pub fn trace_omega_curve_with(
    k1: f64,
    k2: f64,
    p: &GyrostatParams,
    opts: &TraceOptions,
) -> Result<Vec<OmegaCurve>> {
    if !(k1.is_finite() && k2.is_finite()) {
        return Err(Error::NonFinite);
    }
    if k1 <= 0.0 {
        return Err(Error::EmptyLevel { k1, k2 });
    }
    let level = Level { k1, k2, p };
    let radius = k1.sqrt();
    let step = opts.step_fraction * p.inv_inertia().max() * radius;

    let mut curves: Vec<OmegaCurve> = Vec::new();
    let mut seen = Buckets { cell: 2.0 * step, map: HashMap::new() };
    let mut any_seed = false;
    for seed in seeds(&level, radius, opts) {
        let Some(start) = level.correct(seed) else { continue };
        any_seed = true;
        if seen.any_within(&start, step) {
            continue;
        }
        let curve = trace_component(&level, start, step, opts)?;
        for q in &curve.points {
            seen.insert(*q);
        }
        curves.push(curve);
    }
    if !any_seed {
        return Err(Error::EmptyLevel { k1, k2 });
    }
    Ok(curves)
}

fn seeds(level: &Level, radius: f64, opts: &TraceOptions) -> Vec<Vec3> {
    let p = level.p;
    let a = p.inv_inertia();
    let lambda = p.lambda();
    let k2_on_sphere = |m: &Vec3| {
        let d = m - lambda;
        (0..3).map(|i| a[i] * d[i] * d[i]).sum::<f64>() - level.k2
    };
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut out = Vec::new();
    let n = opts.seed_samples;
    for j in 0..3 {
        let (pole, u, v) = (axes[j], axes[(j + 1) % 3], axes[(j + 2) % 3]);
        for l in 0..opts.seed_circles {
            let phi = std::f64::consts::PI * l as f64 / opts.seed_circles as f64;
            let dir = phi.cos() * u + phi.sin() * v;
            let point = |s: f64| radius * (s.cos() * pole + s.sin() * dir);
            let ss: Vec<f64> = (0..=n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
            let g: Vec<f64> = ss.iter().map(|&s| k2_on_sphere(&point(s))).collect();
            for i in 0..n {
                if g[i] == 0.0 || g[i].signum() != g[i + 1].signum() {
                    let (mut lo, mut hi) = (ss[i], ss[i + 1]);
                    let glo = g[i];
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if (k2_on_sphere(&point(mid)) > 0.0) == (glo > 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(p.omega_from_momentum(&point(0.5 * (lo + hi))));
                }
            }
        }
    }
    out
}

fn trace_component(level: &Level, start: Vec3, step: f64, opts: &TraceOptions) -> Result<OmegaCurve> {
    let mut h = step;
    loop {
        let curve = trace_once(level, start, h, opts)?;
        if curve.points.len() >= opts.min_points || h < 1e-9 * step {
            return Ok(curve);
        }
        h *= 0.9 * curve.points.len().max(1) as f64 / opts.min_points as f64;
    }
}

fn trace_once(level: &Level, start: Vec3, h: f64, opts: &TraceOptions) -> Result<OmegaCurve> {
    let stall = |w: &Vec3| Error::TraceStall { omega: (*w).into() };
    let mut points = vec![start];
    let mut current = start;
    let mut dir = level.tangent(&start).ok_or_else(|| stall(&start))?;
    let mut travelled = 0.0;
    loop {
        let mut hh = h;
        let next = loop {
            let t = level.tangent(&current).ok_or_else(|| stall(&current))?;
            let t = if t.dot(&dir) < 0.0 { -t } else { t };
            let candidate = level.correct(current + hh * t).and_then(|c| {
                let chord = (c - current).norm();
                let turn = level.tangent(&c).map_or(f64::INFINITY, |tc| tc.dot(&t).abs().min(1.0).acos());
                (chord <= 2.0 * hh && turn < 0.2).then_some((c, t))
            });
            match candidate {
                Some(found) => break found,
                None if hh > 1e-6 * h => hh *= 0.5,
                None => return Err(stall(&current)),
            }
        };
        let (point, t) = next;
        travelled += (point - current).norm();
        dir = t;
        current = point;
        let gap = (current - start).norm();
        if travelled > 3.0 * h && gap < 1.2 * h {
            if gap > 0.3 * h {
                points.push(current);
            }
            return Ok(OmegaCurve { points, closed: true, step: h });
        }
        points.push(current);
        if points.len() > opts.max_points {
            return Err(stall(&current));
        }
    }
}
