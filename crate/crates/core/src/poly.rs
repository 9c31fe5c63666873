//! Polynomial roots through companion-matrix eigenvalues.

use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;

/// Evaluates `Σ coeffs[i] z^i` and its derivative (Horner).
pub fn eval_with_derivative(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of `Σ coeffs[i] x^i` (ascending powers).
///
/// Leading coefficients below `1e-14` of the largest one are dropped before
/// building the companion matrix; each eigenvalue then gets Newton polishing
/// on the original polynomial. Returns `None` when every coefficient is zero.
pub fn roots(coeffs: &[f64]) -> Option<Vec<C64>> {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].abs() <= 1e-14 * scale {
        degree -= 1;
    }
    if degree == 0 {
        return Some(Vec::new());
    }
    let lead = coeffs[degree];
    let n = degree;
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    let poly = &coeffs[..=degree];
    Some(eig.iter().map(|&z| polish(poly, z)).collect())
}

fn polish(coeffs: &[f64], mut z: C64) -> C64 {
    let (mut p, _) = eval_with_derivative(coeffs, z);
    for _ in 0..4 {
        let (_, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let (pn, _) = eval_with_derivative(coeffs, next);
        // Only keep steps that reduce the residual; near multiple roots
        // Newton can wander.
        if !(pn.norm() < p.norm()) {
            break;
        }
        z = next;
        p = pn;
    }
    z
}

/// Chordal distance on the Riemann sphere; bounded by 2 and finite at infinity.
pub fn chordal(a: C64, b: C64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

/// Scale-free discriminant `Π_{i<j} chordal(r_i, r_j)^2`; near zero when two
/// roots nearly coincide.
pub fn chordal_discriminant(roots: &[C64]) -> f64 {
    let mut d = 1.0;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let c = chordal(roots[i], roots[j]);
            d *= c * c;
        }
    }
    d
}
