//! The free gyrostat: parameters, phase-space states, the three first
//! integrals and the equations of motion
//!
//! ```text
//! A ω' + ω × (Aω + λ) = 0,    ν' = ν × ω,    |ν| = 1
//! ```
//!
//! in principal axes, with `m = Aω + λ` the total angular momentum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Tolerance on `|ν|^2 - 1` accepted when constructing a [`State`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Principal moments of inertia and gyrostatic moment of a free gyrostat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct GyrostatParams {
    inertia: Vec3,
    lambda: Vec3,
    // Diagonal of A^{-1}, fixed once at construction.
    inv_inertia: Vec3,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(rename = "A")]
    inertia: [f64; 3],
    lambda: [f64; 3],
}

impl TryFrom<ParamsRepr> for GyrostatParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        GyrostatParams::new(r.inertia, r.lambda)
    }
}

impl From<GyrostatParams> for ParamsRepr {
    fn from(p: GyrostatParams) -> Self {
        ParamsRepr {
            inertia: p.inertia.into(),
            lambda: p.lambda.into(),
        }
    }
}

impl GyrostatParams {
    pub fn new(inertia: [f64; 3], lambda: [f64; 3]) -> Result<Self> {
        if inertia.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidInertia(inertia));
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite);
        }
        let inertia = Vec3::from(inertia);
        Ok(Self {
            inertia,
            lambda: Vec3::from(lambda),
            inv_inertia: inertia.map(|a| 1.0 / a),
        })
    }

    /// Diagonal `(A1, A2, A3)` of the inertia tensor.
    pub fn inertia(&self) -> Vec3 {
        self.inertia
    }

    pub fn lambda(&self) -> Vec3 {
        self.lambda
    }

    /// Diagonal `(a1, a2, a3)` of `A^{-1}`, in the original axis order.
    pub fn inv_inertia(&self) -> Vec3 {
        self.inv_inertia
    }

    pub fn det_inertia(&self) -> f64 {
        self.inertia.x * self.inertia.y * self.inertia.z
    }

    /// `A v` for the diagonal tensor.
    pub fn apply_inertia(&self, v: &Vec3) -> Vec3 {
        self.inertia.component_mul(v)
    }

    /// `A^{-1} v` for the diagonal tensor.
    pub fn apply_inv_inertia(&self, v: &Vec3) -> Vec3 {
        self.inv_inertia.component_mul(v)
    }

    /// Angular velocity carrying the angular momentum `m`: `ω = A^{-1}(m - λ)`.
    pub fn omega_from_momentum(&self, m: &Vec3) -> Vec3 {
        self.apply_inv_inertia(&(m - self.lambda))
    }

    /// The `a_i` sorted ascending, with the axis index each came from.
    pub fn sorted_inv_inertia(&self) -> [(f64, usize); 3] {
        let mut s = [
            (self.inv_inertia.x, 0),
            (self.inv_inertia.y, 1),
            (self.inv_inertia.z, 2),
        ];
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s
    }

    /// Checks the generic case: every `λ_i != 0` (λ off the principal planes)
    /// and pairwise distinct `a_i`.
    pub fn require_generic(&self) -> Result<()> {
        if let Some(i) = (0..3).find(|&i| self.lambda[i] == 0.0) {
            return Err(Error::NonGenericParams(format!(
                "lambda_{} = 0 puts the gyrostatic moment in a principal plane",
                i + 1
            )));
        }
        let s = self.sorted_inv_inertia();
        if s[0].0 == s[1].0 || s[1].0 == s[2].0 {
            return Err(Error::NonGenericParams(
                "principal moments must be pairwise distinct".into(),
            ));
        }
        Ok(())
    }

    pub fn is_generic(&self) -> bool {
        self.require_generic().is_ok()
    }
}

/// A phase-space point: body-frame angular velocity and Poisson vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct State {
    pub omega: Vec3,
    nu: Vec3,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRepr {
    omega: [f64; 3],
    nu: [f64; 3],
}

impl TryFrom<StateRepr> for State {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        State::new(r.omega.into(), r.nu.into())
    }
}

impl From<State> for StateRepr {
    fn from(s: State) -> Self {
        StateRepr {
            omega: s.omega.into(),
            nu: s.nu.into(),
        }
    }
}

impl State {
    /// Fails unless `|ν|^2 = 1` to [`UNIT_TOLERANCE`].
    pub fn new(omega: Vec3, nu: Vec3) -> Result<Self> {
        if omega.iter().chain(nu.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = nu.norm_squared();
        if (n2 - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit(n2));
        }
        Ok(Self { omega, nu })
    }

    /// Builds a state after projecting `nu` onto the unit sphere.
    pub fn normalized(omega: Vec3, nu: Vec3) -> Result<Self> {
        let n = nu.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(n * n));
        }
        Self::new(omega, nu / n)
    }

    pub fn nu(&self) -> Vec3 {
        self.nu
    }
}

/// A point `k = (k1, k2, k3)` in the space of integral values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl IntegralConstants {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Self {
        Self { k1, k2, k3 }
    }

    /// Necessary condition `k1 >= k3^2` for a nonempty level.
    pub fn is_feasible(&self) -> bool {
        self.k1 >= self.k3 * self.k3
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }
}

impl From<[f64; 3]> for IntegralConstants {
    fn from(k: [f64; 3]) -> Self {
        Self::new(k[0], k[1], k[2])
    }
}

/// Time derivative of a [`State`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub d_omega: Vec3,
    pub d_nu: Vec3,
}

/// `m = Aω + λ`.
pub fn angular_momentum(omega: &Vec3, p: &GyrostatParams) -> Vec3 {
    p.apply_inertia(omega) + p.lambda
}

/// `K1 = |Aω+λ|^2`, `K2 = Aω·ω`, `K3 = (Aω+λ)·ν`.
pub fn integrals(state: &State, p: &GyrostatParams) -> IntegralConstants {
    omega_integrals(&state.omega, &state.nu, p)
}

/// [`integrals`] without requiring `|ν| = 1`.
pub(crate) fn omega_integrals(omega: &Vec3, nu: &Vec3, p: &GyrostatParams) -> IntegralConstants {
    let m = angular_momentum(omega, p);
    IntegralConstants {
        k1: m.norm_squared(),
        k2: p.apply_inertia(omega).dot(omega),
        k3: m.dot(nu),
    }
}

pub fn rhs(state: &State, p: &GyrostatParams) -> Tangent {
    vector_field(&state.omega, &state.nu, p)
}

pub(crate) fn vector_field(omega: &Vec3, nu: &Vec3, p: &GyrostatParams) -> Tangent {
    let m = angular_momentum(omega, p);
    Tangent {
        d_omega: -p.apply_inv_inertia(&omega.cross(&m)),
        d_nu: nu.cross(omega),
    }
}
