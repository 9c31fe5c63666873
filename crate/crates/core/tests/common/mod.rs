#![allow(dead_code)]

use gyrostat::bifurcation::{classify, RegionLabel, DEFAULT_SIGMA_TOLERANCE};
use gyrostat::rpm::Boundary;
use gyrostat::{GyrostatParams, IntegralConstants, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn prototype() -> GyrostatParams {
    GyrostatParams::new([1.0, 2.0, 3.0], [0.1, 0.2, 0.3]).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_omega(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

fn residuals(w: &Vec3, nu: &Vec3, k: &IntegralConstants, p: &GyrostatParams) -> Vec3 {
    let a = p.inertia();
    let m = a.component_mul(w) + p.lambda();
    Vec3::new(m.norm_squared() - k.k1, a.component_mul(w).dot(w) - k.k2, m.dot(nu) - k.k3)
}

/// Newton on the three level equations, with the Jacobian written out by hand.
fn newton(mut w: Vec3, nu: &Vec3, k: &IntegralConstants, p: &GyrostatParams) -> Option<Vec3> {
    let a = p.inertia();
    for _ in 0..40 {
        let f = residuals(&w, nu, k, p);
        let scale = [k.k1.abs().max(1.0), k.k2.abs().max(1.0), k.k3.abs().max(1.0)];
        if (0..3).all(|i| f[i].abs() / scale[i] < 1e-13) {
            return Some(w);
        }
        let m = a.component_mul(&w) + p.lambda();
        let jac = nalgebra::Matrix3::from_rows(&[
            (2.0 * a.component_mul(&m)).transpose(),
            (2.0 * a.component_mul(&w)).transpose(),
            a.component_mul(nu).transpose(),
        ]);
        let step = jac.lu().solve(&f)?;
        w -= step;
        if !w.iter().all(|x| x.is_finite()) || w.norm() > 1e6 {
            return None;
        }
    }
    let f = residuals(&w, nu, k, p);
    (f.norm() < 1e-10 * k.k1.abs().max(1.0)).then_some(w)
}

/// Real solutions of the level equations over `nu`, found by scanning the
/// nodes of a cubic ω-grid of the given pitch that lie in a band around the
/// plane `K3 = k3`, and polishing every node whose residuals are within the
/// reach of one cell.
pub fn grid_oracle(nu: &Vec3, k: &IntegralConstants, p: &GyrostatParams, pitch: f64) -> Vec<Vec3> {
    if k.k1 < k.k3 * k.k3 || k.k1 <= 0.0 {
        return Vec::new();
    }
    let a = p.inertia();
    let lambda = p.lambda();
    let inv = p.inv_inertia();
    let r = k.k1.sqrt();
    // |m| = sqrt(k1) bounds each ω_i.
    let lo: Vec3 = Vec3::from_fn(|i, _| inv[i] * (-r - lambda[i]) - 2.0 * pitch);
    let hi: Vec3 = Vec3::from_fn(|i, _| inv[i] * (r - lambda[i]) + 2.0 * pitch);
    let normal = a.component_mul(nu);
    let offset = k.k3 - lambda.dot(nu);
    // Solve the plane equation for the coordinate the normal is largest in.
    let z = normal.iamax();
    let (x, y) = ((z + 1) % 3, (z + 2) % 3);
    let reach = 0.5 * pitch * 3f64.sqrt();
    let band = reach * normal.norm();
    let grad_bound = |w: &Vec3| {
        let m = a.component_mul(w) + lambda;
        [
            2.0 * a.component_mul(&m).norm() * reach + a.max().powi(2) * reach * reach,
            2.0 * a.component_mul(w).norm() * reach + a.max() * reach * reach,
            band,
        ]
    };
    let n = |i: usize| ((hi[i] - lo[i]) / pitch).ceil() as i64;
    let mut found: Vec<Vec3> = Vec::new();
    for ix in 0..=n(x) {
        for iy in 0..=n(y) {
            let mut w = Vec3::zeros();
            w[x] = lo[x] + ix as f64 * pitch;
            w[y] = lo[y] + iy as f64 * pitch;
            // Range of the third index keeping the node within the band.
            let rest = offset - normal[x] * w[x] - normal[y] * w[y];
            let (za, zb) = ((rest - band) / normal[z], (rest + band) / normal[z]);
            let (za, zb) = (za.min(zb), za.max(zb));
            let ka = ((za - lo[z]) / pitch).ceil() as i64;
            let kb = ((zb - lo[z]) / pitch).floor() as i64;
            for iz in ka.max(0)..=kb.min(n(z)) {
                w[z] = lo[z] + iz as f64 * pitch;
                let f = residuals(&w, nu, k, p);
                let bound = grad_bound(&w);
                if (0..3).all(|i| f[i].abs() <= bound[i]) {
                    if let Some(s) = newton(w, nu, k, p) {
                        if !found.iter().any(|q| (q - s).norm() <= 1e-6 * s.norm().max(1.0)) {
                            found.push(s);
                        }
                    }
                }
            }
        }
    }
    found
}

/// Minimum-norm Newton projection onto `K1 = k1`, `K2 = k2`.
fn project_to_level(mut w: Vec3, k1: f64, k2: f64, p: &GyrostatParams) -> Option<Vec3> {
    let a = p.inertia();
    for _ in 0..30 {
        let m = a.component_mul(&w) + p.lambda();
        let f = nalgebra::Vector2::new(m.norm_squared() - k1, a.component_mul(&w).dot(&w) - k2);
        if f.amax() < 1e-13 * k1.max(1.0) {
            return Some(w);
        }
        let j = nalgebra::Matrix2x3::from_rows(&[
            (2.0 * a.component_mul(&m)).transpose(),
            (2.0 * a.component_mul(&w)).transpose(),
        ]);
        let y = (j * j.transpose()).lu().solve(&f)?;
        w -= j.transpose() * y;
    }
    None
}

/// Connected components of the voxels met by the curve `K1 = k1, K2 = k2`,
/// on an `n³` grid over the bounding box.
pub fn voxel_components(k1: f64, k2: f64, p: &GyrostatParams, n: usize) -> usize {
    let a = p.inertia();
    let lambda = p.lambda();
    let inv = p.inv_inertia();
    let r = k1.sqrt();
    let lo = Vec3::from_fn(|i, _| inv[i] * (-r - lambda[i]));
    let hi = Vec3::from_fn(|i, _| inv[i] * (r - lambda[i]));
    let pad = (hi - lo) * 0.02;
    let (lo, hi) = (lo - pad, hi + pad);
    let step = (hi - lo) / n as f64;
    let node = |i: usize, j: usize, l: usize| {
        let w = lo + Vec3::new(i as f64 * step.x, j as f64 * step.y, l as f64 * step.z);
        let m = a.component_mul(&w) + lambda;
        (m.norm_squared() - k1 > 0.0, a.component_mul(&w).dot(&w) - k2 > 0.0)
    };
    let m1 = n + 1;
    let signs: Vec<(bool, bool)> = (0..m1 * m1 * m1).map(|q| node(q / (m1 * m1), (q / m1) % m1, q % m1)).collect();
    let at = |i: usize, j: usize, l: usize| signs[(i * m1 + j) * m1 + l];
    let mut hit = vec![false; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let corners = [
                    at(i, j, l),
                    at(i + 1, j, l),
                    at(i, j + 1, l),
                    at(i, j, l + 1),
                    at(i + 1, j + 1, l),
                    at(i + 1, j, l + 1),
                    at(i, j + 1, l + 1),
                    at(i + 1, j + 1, l + 1),
                ];
                let mixed1 = corners.iter().any(|c| c.0) && corners.iter().any(|c| !c.0);
                let mixed2 = corners.iter().any(|c| c.1) && corners.iter().any(|c| !c.1);
                if mixed1 && mixed2 {
                    // Both surfaces cross the voxel; keep it only if the curve does.
                    let corner = lo + Vec3::new(i as f64 * step.x, j as f64 * step.y, l as f64 * step.z);
                    let center = corner + 0.5 * step;
                    hit[(i * n + j) * n + l] = project_to_level(center, k1, k2, p)
                        .is_some_and(|w| (0..3).all(|c| (w[c] - center[c]).abs() <= step[c]));
                }
            }
        }
    }
    let mut label = vec![usize::MAX; hit.len()];
    let mut count = 0;
    for start in 0..hit.len() {
        if !hit[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = count;
        while let Some(c) = stack.pop() {
            let (i, j, l) = ((c / (n * n)) as i64, ((c / n) % n) as i64, (c % n) as i64);
            for di in -1..=1 {
                for dj in -1..=1 {
                    for dl in -1..=1 {
                        let (a, b, d) = (i + di, j + dj, l + dl);
                        if a < 0 || b < 0 || d < 0 || a >= n as i64 || b >= n as i64 || d >= n as i64 {
                            continue;
                        }
                        let q = ((a as usize) * n + b as usize) * n + d as usize;
                        if hit[q] && label[q] == usize::MAX {
                            label[q] = count;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        count += 1;
    }
    count
}

/// Integral constants drawn from a box until the classifier has returned
/// `per_region` samples for each of R1..R4.
pub fn region_samples(p: &GyrostatParams, per_region: usize, rng: &mut ChaCha8Rng) -> Vec<(RegionLabel, IntegralConstants)> {
    let targets = [RegionLabel::R1, RegionLabel::R2, RegionLabel::R3, RegionLabel::R4];
    let mut out: Vec<(RegionLabel, IntegralConstants)> = Vec::new();
    for _ in 0..200_000 {
        if targets.iter().all(|t| out.iter().filter(|(l, _)| l == t).count() >= per_region) {
            break;
        }
        let k1 = rng.gen_range(0.05..12.0);
        let k = IntegralConstants::new(k1, rng.gen_range(0.0..12.0), rng.gen_range(-1.1..1.1) * k1.sqrt());
        let label = classify(&k, p, DEFAULT_SIGMA_TOLERANCE).unwrap();
        if label == RegionLabel::OnSigma || out.iter().filter(|(l, _)| *l == label).count() >= per_region {
            continue;
        }
        // Keep samples away from Σ so a coarse sphere grid resolves them.
        if classify(&k, p, 2e-2).unwrap() != label {
            continue;
        }
        out.push((label, k));
    }
    out
}

/// Unit tangent of a boundary curve at point `i`.
pub fn curve_tangent(points: &[Vec3], i: usize, closed: bool) -> Option<Vec3> {
    let n = points.len();
    let (prev, next) = match (i, closed) {
        (0, false) => (0, 1),
        (_, false) if i + 1 == n => (i - 1, i),
        _ => ((i + n - 1) % n, (i + 1) % n),
    };
    let t = points[next] - points[prev];
    let t = t - t.dot(&points[i]) * points[i];
    (t.norm() > 0.0).then(|| t.normalize())
}

/// Smallest distance from `q` to boundary points not belonging to curve `skip`.
pub fn distance_to_other_curves(boundary: &Boundary, skip: usize, q: &Vec3) -> f64 {
    boundary
        .curves
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != skip)
        .flat_map(|(_, c)| c.curve.points.iter())
        .map(|s| (s.vec() - q).norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn great_circle(base: &Vec3, dir: &Vec3, s: f64) -> Vec3 {
    (s.cos() * base + s.sin() * dir).normalize()
}
