//! Adaptive integration of the gyrostat equations with conservation monitoring.
//!
//! Dormand–Prince 5(4) with a PI step-size controller. The Poisson vector is
//! pulled back onto the unit sphere after every accepted step; the drift of
//! `|ν|²` is measured before that projection.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{SphereCurve, SpherePoint};
use crate::system::{integrals, omega_integrals, vector_field, GyrostatParams, IntegralConstants, State};
use crate::Vec3;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus the embedded 4th-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
// PI controller exponents (Hairer & Wanner, DOPRI5).
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.04;

/// Largest relative deviation from the initial values over a trajectory.
///
/// `K1` and `K2` are measured relative to their initial magnitudes, `K3`
/// relative to `sqrt(K1)` (its natural bound), and `|ν|²` absolutely, before
/// each renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drift {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub nu_norm: f64,
}

impl Drift {
    pub fn max_integral(&self) -> f64 {
        self.k1.max(self.k2).max(self.k3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub drift: Drift,
}

/// Time direction of the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// Integrates `x' = -X(x)`, retracing the flow backwards in time.
    Reversed,
}

type Y = [f64; 6];

fn field(y: &Y, p: &GyrostatParams, sign: f64) -> Y {
    let omega = Vec3::new(y[0], y[1], y[2]);
    let nu = Vec3::new(y[3], y[4], y[5]);
    let t = vector_field(&omega, &nu, p);
    [
        sign * t.d_omega.x,
        sign * t.d_omega.y,
        sign * t.d_omega.z,
        sign * t.d_nu.x,
        sign * t.d_nu.y,
        sign * t.d_nu.z,
    ]
}

fn to_y(s: &State) -> Y {
    let nu = s.nu();
    [s.omega.x, s.omega.y, s.omega.z, nu.x, nu.y, nu.z]
}

fn error_norm(err: &Y, y0: &Y, y1: &Y, tol: f64) -> f64 {
    let sum: f64 = (0..6)
        .map(|i| {
            let sc = tol + tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 6.0).sqrt()
}

struct DriftMeter {
    k0: IntegralConstants,
    scale: [f64; 3],
    drift: Drift,
}

impl DriftMeter {
    fn new(k0: IntegralConstants) -> Self {
        let tiny = f64::MIN_POSITIVE;
        Self {
            k0,
            scale: [k0.k1.abs().max(tiny), k0.k2.abs().max(tiny), k0.k3.abs().max(k0.k1.sqrt()).max(tiny)],
            drift: Drift::default(),
        }
    }

    fn record(&mut self, y: &Y, p: &GyrostatParams) {
        let omega = Vec3::new(y[0], y[1], y[2]);
        let nu = Vec3::new(y[3], y[4], y[5]);
        let n2 = nu.norm_squared();
        let k = omega_integrals(&omega, &(nu / n2.sqrt()), p);
        let d = &mut self.drift;
        d.k1 = d.k1.max((k.k1 - self.k0.k1).abs() / self.scale[0]);
        d.k2 = d.k2.max((k.k2 - self.k0.k2).abs() / self.scale[1]);
        d.k3 = d.k3.max((k.k3 - self.k0.k3).abs() / self.scale[2]);
        d.nu_norm = d.nu_norm.max((n2 - 1.0).abs());
    }
}

/// Integrates from `state0` over `[0, t_end]` with local error tolerance `tol`
/// (used as both absolute and relative tolerance).
pub fn integrate(state0: &State, p: &GyrostatParams, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_directed(state0, p, t_end, tol, Direction::Forward)
}

pub fn integrate_directed(
    state0: &State,
    p: &GyrostatParams,
    t_end: f64,
    tol: f64,
    direction: Direction,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidEndTime(t_end));
    }
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::InvalidTolerance(tol));
    }
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Reversed => -1.0,
    };

    let mut y = to_y(state0);
    let mut meter = DriftMeter::new(integrals(state0, p));
    let mut times = vec![0.0];
    let mut states = vec![*state0];

    let mut k1 = field(&y, p, sign);
    let mut h = initial_step(&y, &k1, t_end, tol);
    let mut t = 0.0;
    let mut prev_err: f64 = 1e-4;
    let mut k = [[0.0; 6]; 7];

    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepFailure { t });
        }
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..6 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = field(&ys, p, sign);
        }
        let mut y_new = y;
        let mut err = [0.0; 6];
        for i in 0..6 {
            let incr: f64 = (0..6).map(|s| A[6][s] * k[s][i]).sum();
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum();
            y_new[i] += h * incr;
            err[i] = h * e;
        }
        let en = error_norm(&err, &y, &y_new, tol);
        if !en.is_finite() {
            h *= MIN_FACTOR;
            continue;
        }
        if en <= 1.0 {
            t = if t_end - (t + h) <= 1e-15 * t_end { t_end } else { t + h };
            meter.record(&y_new, p);
            let nu = Vec3::new(y_new[3], y_new[4], y_new[5]).normalize();
            y_new[3] = nu.x;
            y_new[4] = nu.y;
            y_new[5] = nu.z;
            y = y_new;
            // After renormalization the FSAL stage no longer matches y.
            k1 = field(&y, p, sign);
            times.push(t);
            states.push(State::new(Vec3::new(y[0], y[1], y[2]), nu)?);
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-ALPHA) * prev_err.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            prev_err = en.max(1e-4);
            h *= factor;
        } else {
            h *= (SAFETY * en.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
        }
    }
    Ok(Trajectory { times, states, drift: meter.drift })
}

fn initial_step(y: &Y, f: &Y, t_end: f64, tol: f64) -> f64 {
    let scale = |i: usize| tol + tol * y[i].abs();
    let d0 = (0..6).map(|i| (y[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..6).map(|i| (f[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_end)
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_constants(&self, p: &GyrostatParams) -> IntegralConstants {
        integrals(&self.states[0], p)
    }

    /// Linear interpolation between accepted steps, clamped to the time span.
    pub fn state_at(&self, t: f64) -> State {
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            return self.states[0];
        }
        if i >= self.times.len() {
            return *self.states.last().unwrap();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        let (s0, s1) = (&self.states[i - 1], &self.states[i]);
        let omega = s0.omega * (1.0 - w) + s1.omega * w;
        let nu = s0.nu() * (1.0 - w) + s1.nu() * w;
        State::normalized(omega, nu).unwrap_or(*s0)
    }

    /// CSV with columns `t, omega1..3, nu1..3, K1..K3`.
    pub fn write_csv<W: Write>(&self, p: &GyrostatParams, mut out: W) -> io::Result<()> {
        writeln!(out, "t,omega1,omega2,omega3,nu1,nu2,nu3,K1,K2,K3")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let k = integrals(s, p);
            let nu = s.nu();
            let row = [*t, s.omega.x, s.omega.y, s.omega.z, nu.x, nu.y, nu.z, k.k1, k.k2, k.k3];
            writeln!(out, "{}", crate::csv_row(&row))?;
        }
        Ok(())
    }
}

/// The trajectory's image on the Poisson sphere.
pub fn project(traj: &Trajectory) -> SphereCurve {
    SphereCurve {
        points: traj
            .states
            .iter()
            .map(|s| SpherePoint::new(s.nu()).expect("trajectory states are unit"))
            .collect(),
        closed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> GyrostatParams {
        GyrostatParams::new([1.0, 2.0, 3.0], [0.1, 0.2, 0.3]).unwrap()
    }

    #[test]
    fn symmetric_top_precession() {
        let p = GyrostatParams::new([1.0; 3], [0.0; 3]).unwrap();
        let s0 = State::new(Vec3::z(), Vec3::x()).unwrap();
        let tr = integrate(&s0, &p, 2.0 * PI, 1e-12).unwrap();
        let last = tr.states.last().unwrap();
        assert_eq!(*tr.times.last().unwrap(), 2.0 * PI);
        assert!((last.omega - Vec3::z()).norm() < 1e-14);
        assert!((last.nu() - Vec3::x()).norm() < 1e-8);
    }

    #[test]
    fn steady_rotation_stays_put() {
        let p = params();
        let sigma = 1.7;
        let a = p.inv_inertia();
        let m = Vec3::from_fn(|i, _| a[i] * p.lambda()[i] / (a[i] - sigma));
        let s0 = State::new(sigma * m, Vec3::new(0.0, 0.6, 0.8)).unwrap();
        let tr = integrate(&s0, &p, 10.0, 1e-12).unwrap();
        for s in &tr.states {
            assert!((s.omega - s0.omega).norm() < 1e-9);
        }
    }

    #[test]
    fn generic_drift() {
        let p = params();
        let s0 = State::normalized(Vec3::new(0.4, -0.3, 0.25), Vec3::new(0.3, -0.5, 0.8)).unwrap();
        let tr = integrate(&s0, &p, 100.0, 1e-12).unwrap();
        assert!(tr.drift.max_integral() < 1e-9, "{:?}", tr.drift);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.times.len(), tr.states.len());
        let curve = project(&tr);
        assert!(curve.points.iter().all(|q| (q.vec().norm_squared() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn reversal_returns() {
        let p = params();
        let s0 = State::normalized(Vec3::new(-0.2, 0.5, 0.1), Vec3::new(1.0, 1.0, 0.2)).unwrap();
        let fwd = integrate(&s0, &p, 20.0, 1e-12).unwrap();
        let back =
            integrate_directed(fwd.states.last().unwrap(), &p, 20.0, 1e-12, Direction::Reversed).unwrap();
        let end = back.states.last().unwrap();
        assert!((end.omega - s0.omega).norm() < 1e-6);
        assert!((end.nu() - s0.nu()).norm() < 1e-6);
    }

    #[test]
    fn constant_nu_projects_to_one_point() {
        let p = GyrostatParams::new([1.0; 3], [0.0; 3]).unwrap();
        let s0 = State::new(Vec3::z(), Vec3::z()).unwrap();
        let tr = integrate(&s0, &p, 1.0, 1e-10).unwrap();
        let c = project(&tr);
        assert!(c.points.iter().all(|q| (q.vec() - Vec3::z()).norm() < 1e-15));
    }

    #[test]
    fn interpolation_and_validation() {
        let p = params();
        let s0 = State::new(Vec3::new(0.1, 0.2, 0.3), Vec3::z()).unwrap();
        assert!(matches!(integrate(&s0, &p, -1.0, 1e-9), Err(Error::InvalidEndTime(_))));
        assert!(matches!(integrate(&s0, &p, 1.0, 1e-2), Err(Error::InvalidTolerance(_))));
        let tr = integrate(&s0, &p, 1.0, 1e-10).unwrap();
        let mid = 0.5 * (tr.times[1] + tr.times[2]);
        let s = tr.state_at(mid);
        let lo = tr.states[1].omega;
        let hi = tr.states[2].omega;
        assert!((s.omega - 0.5 * (lo + hi)).norm() < 1e-15);
        assert_eq!(tr.state_at(-5.0), tr.states[0]);
    }

    #[test]
    fn csv_layout() {
        let p = params();
        let s0 = State::new(Vec3::new(0.1, 0.2, 0.3), Vec3::z()).unwrap();
        let tr = integrate(&s0, &p, 0.1, 1e-8).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,omega1,omega2,omega3,nu1,nu2,nu3,K1,K2,K3");
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 10);
        assert_eq!(first[3], 0.3);
    }
}
