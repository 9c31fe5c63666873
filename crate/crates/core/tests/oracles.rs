mod common;

use common::*;
use gyrostat::bifurcation::{classify, level_topology, RegionLabel, DEFAULT_SIGMA_TOLERANCE};
use gyrostat::contour::contour_condition;
use gyrostat::dynamics::{integrate, project};
use gyrostat::rpm::{
    admissible_velocities, generalized_boundary, q_factor, rpm_map, trace_omega_curve, level_residual,
};
use gyrostat::sphere::{GridSpec, SpherePoint};
use gyrostat::{integrals, GyrostatParams, IntegralConstants, State, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[test]
fn fiber_counts_match_grid_oracle() {
    let p = prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<(Vec3, IntegralConstants)> = (0..150)
        .map(|_| {
            let s = State::new(random_omega(&mut rng, 1.0), random_unit(&mut rng)).unwrap();
            (random_unit(&mut rng), integrals(&s, &p))
        })
        .collect();
    let mismatches: Vec<String> = cases
        .par_iter()
        .filter_map(|(nu, k)| {
            let fiber = admissible_velocities(&SpherePoint::new(*nu).unwrap(), k, &p).unwrap();
            let oracle = grid_oracle(nu, k, &p, 0.01);
            (!fiber.uncertain && fiber.count() != oracle.len())
                .then(|| format!("nu={nu:?} k={k:?}: {} vs {}", fiber.count(), oracle.len()))
        })
        .collect();
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn fiber_solutions_reproduce_k() {
    let p = prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let s = State::new(random_omega(&mut rng, 2.0), random_unit(&mut rng)).unwrap();
        let k = integrals(&s, &p);
        let fiber = admissible_velocities(&SpherePoint::new(s.nu()).unwrap(), &k, &p).unwrap();
        assert!(fiber.omegas.iter().any(|w| (w - s.omega).norm() < 1e-6 * s.omega.norm().max(1.0)));
        for w in &fiber.omegas {
            assert!(level_residual(w, &s.nu(), &k, &p) < 1e-8);
        }
        for (i, a) in fiber.omegas.iter().enumerate() {
            for b in &fiber.omegas[i + 1..] {
                assert!((a - b).norm() > 1e-6);
            }
        }
    }
}

#[test]
fn traced_components_match_voxel_oracle_and_morse_count() {
    let p = prototype();
    for (k1, k2) in [(1.0, 0.5), (1.0, 0.84), (10.0, 4.2), (10.0, 5.0), (10.0, 7.0), (10.0, 10.0), (0.2, 0.1)] {
        let traced = trace_omega_curve(k1, k2, &p).unwrap().len();
        let voxels = voxel_components(k1, k2, &p, 200);
        let morse = level_topology(k1, k2, &p).unwrap().components;
        assert_eq!(traced, voxels, "k = ({k1}, {k2})");
        assert_eq!(traced, morse, "k = ({k1}, {k2})");
    }
}

#[test]
fn trace_is_centrally_symmetric_without_rotor() {
    let p = GyrostatParams::new([1.0, 2.0, 3.0], [0.0; 3]).unwrap();
    let curves = trace_omega_curve(4.0, 2.5, &p).unwrap();
    let points: Vec<Vec3> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
    let step = curves.iter().map(|c| c.step).fold(0.0, f64::max);
    for w in &points {
        let mirror = -w;
        // The mirror image lies on the level set and within one step of a traced point.
        let m = p.apply_inertia(&mirror);
        assert!((m.norm_squared() - 4.0).abs() < 1e-8);
        assert!((m.dot(&mirror) - 2.5).abs() < 1e-8);
        let near = points.iter().map(|q| (q - mirror).norm()).fold(f64::INFINITY, f64::min);
        assert!(near <= step);
    }
}

#[test]
fn contour_sign_change_brackets_boundary() {
    let p = prototype();
    let k = IntegralConstants::new(1.0, 0.5, 0.3);
    let boundary = generalized_boundary(&k, &p).unwrap();
    let mut checked = 0;
    for (ci, c) in boundary.curves.iter().enumerate() {
        let pts: Vec<Vec3> = c.curve.points.iter().map(|s| s.vec()).collect();
        for i in (0..pts.len()).step_by(pts.len() / 10) {
            let base = pts[i];
            if distance_to_other_curves(&boundary, ci, &base) < 0.05 {
                continue;
            }
            let Some(t) = curve_tangent(&pts, i, c.curve.closed) else { continue };
            let dir = base.cross(&t);
            let count = |s: f64| {
                let f = admissible_velocities(&SpherePoint::new(great_circle(&base, &dir, s)).unwrap(), &k, &p).unwrap();
                f.count()
            };
            let (mut lo, mut hi) = (-1e-3, 1e-3);
            let (clo, chi) = (count(lo), count(hi));
            if clo == chi {
                continue;
            }
            // Inside, the two solutions that merge at the fold carry opposite contour signs.
            let inside = if clo > chi { lo } else { hi };
            let nu_in = great_circle(&base, &dir, inside);
            let f = admissible_velocities(&SpherePoint::new(nu_in).unwrap(), &k, &p).unwrap();
            let mut by_dist: Vec<&Vec3> = f.omegas.iter().collect();
            by_dist.sort_by(|a, b| (*a - c.omegas[i]).norm().total_cmp(&(*b - c.omegas[i]).norm()));
            let signs: Vec<f64> = by_dist[..2]
                .iter()
                .map(|w| contour_condition(&State::new(**w, nu_in).unwrap(), &p).signum())
                .collect();
            assert_eq!(signs[0], -signs[1]);
            while hi - lo > 1e-9 {
                let mid = 0.5 * (lo + hi);
                if count(mid) == clo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!(lo.abs() < 1e-6 && hi.abs() < 1e-6, "fold at {lo}");
            checked += 1;
        }
    }
    assert!(checked >= 10);
}

#[test]
fn empty_label_iff_zero_counts() {
    let p = prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let grid = GridSpec::new(64, 128).unwrap();
    let mut n = 0;
    while n < 200 {
        let k1 = rng.gen_range(0.05..12.0);
        let k = IntegralConstants::new(k1, rng.gen_range(0.0..12.0), rng.gen_range(-1.2..1.2) * k1.sqrt());
        let label = classify(&k, &p, DEFAULT_SIGMA_TOLERANCE).unwrap();
        if label == RegionLabel::OnSigma {
            continue;
        }
        // A grid only resolves regions wider than a cell; skip k within that of Σ.
        if classify(&k, &p, 1e-2).unwrap() != label {
            continue;
        }
        let report = rpm_map(&k, &p, grid).unwrap();
        assert_eq!(label == RegionLabel::R4, report.is_empty(), "k = {k:?}");
        n += 1;
    }
}

#[test]
fn trajectories_stay_in_their_region() {
    let p = prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..3 {
        let s = State::new(random_omega(&mut rng, 1.0), random_unit(&mut rng)).unwrap();
        let k = integrals(&s, &p);
        let traj = integrate(&s, &p, 20.0, 1e-12).unwrap();
        for nu in project(&traj).points.iter().step_by(5) {
            assert!(admissible_velocities(nu, &k, &p).unwrap().count() >= 1);
        }
    }
}

fn params_strategy() -> impl Strategy<Value = GyrostatParams> {
    (
        prop::array::uniform3(0.5f64..4.0),
        prop::array::uniform3(prop_oneof![-1.0f64..-0.05, 0.05f64..1.0]),
    )
        .prop_filter_map("generic", |(a, l)| GyrostatParams::new(a, l).ok().filter(|p| p.is_generic()))
}

fn vec_strategy(r: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-r..r).prop_map(Vec3::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_factor_defining_identity(p in params_strategy(), w in vec_strategy(2.0), k2 in -1.0f64..1.0, k3 in -1.0f64..1.0, extra in 0.0f64..3.0) {
        let k = IntegralConstants::new(k3 * k3 + extra, k2, k3);
        if let Ok(q) = q_factor(&w, &k, &p) {
            let pm = k.k2 + w.dot(&p.lambda());
            let den = k.k1 * w.norm_squared() - pm * pm;
            let num = k.k1 - k.k3 * k.k3;
            prop_assert!((q * q * den - num).abs() <= 1e-12 * num.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn fibers_contain_their_generating_state(p in params_strategy(), w in vec_strategy(1.5), nu in vec_strategy(1.0)) {
        prop_assume!(nu.norm() > 0.1);
        let s = State::normalized(w, nu).unwrap();
        let k = integrals(&s, &p);
        let fiber = admissible_velocities(&SpherePoint::new(s.nu()).unwrap(), &k, &p).unwrap();
        prop_assert!(fiber.count() <= 4);
        prop_assert!(fiber.uncertain || fiber.omegas.iter().any(|o| (o - w).norm() < 1e-6 * w.norm().max(1.0)));
    }

    #[test]
    fn classification_is_locally_constant(k1 in 0.05f64..12.0, k2 in 0.0f64..12.0, t in -1.2f64..1.2) {
        let p = prototype();
        let k = IntegralConstants::new(k1, k2, t * k1.sqrt());
        let tol = 1e-6;
        let label = classify(&k, &p, tol).unwrap();
        prop_assume!(label != RegionLabel::OnSigma);
        for d in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -1.0, 1.0]] {
            let e = tol / 10.0;
            let q = IntegralConstants::new(k.k1 + e * d[0], k.k2 + e * d[1], k.k3 + e * d[2]);
            prop_assert_eq!(classify(&q, &p, tol).unwrap(), label);
        }
    }
}
