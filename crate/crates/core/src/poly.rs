//! Polynomial helpers: evaluation, interpolation, companion-matrix roots.
//!
//! Coefficients are stored lowest degree first.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::C64;

/// Horner evaluation.
pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

/// Value and first derivative.
pub fn eval_with_derivative(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Product of two polynomials.
pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn mul_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of the polynomial through `(k, values[k])`, `k = 0..n`.
///
/// Newton divided differences on the integer nodes, then expansion to monomials.
pub fn interpolate_integer_nodes(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut dd: Vec<C64> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (level as f64);
        }
    }
    // Horner-style expansion of sum dd[k] prod_{j<k} (x - j)
    let mut coeffs = alloc::vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        // coeffs = coeffs * (x - k) + dd[k]
        let mut next = alloc::vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            if i + 1 < n {
                next[i + 1] += coeffs[i];
            }
            next[i] -= coeffs[i] * (k as f64);
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}

/// Drops trailing coefficients whose magnitude is below `tol * max|c|`.
pub fn trim(coeffs: &[C64], tol: f64) -> Vec<C64> {
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut v = coeffs.to_vec();
    while v.len() > 1 && v.last().map(|z| z.norm() <= tol * scale).unwrap_or(false) {
        v.pop();
    }
    v
}

/// All complex roots as eigenvalues of the companion matrix, each refined by
/// `polish` Newton steps.
pub fn roots(coeffs: &[C64], polish: usize) -> Vec<C64> {
    let coeffs = trim(coeffs, 0.0);
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = m.schur();
    let (_, t) = schur.unpack();
    let mut out: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    for z in out.iter_mut() {
        *z = newton_polish(&coeffs, *z, polish);
    }
    out
}

/// Roots of a real polynomial via the real companion matrix.
pub fn roots_real(coeffs: &[f64], polish: usize) -> Vec<C64> {
    let cc: Vec<C64> = coeffs.iter().map(|&a| C64::new(a, 0.0)).collect();
    let cc = trim(&cc, 0.0);
    let n = cc.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = cc[n].re;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -cc[i].re / lead;
    }
    let ev = m.complex_eigenvalues();
    ev.iter().map(|&z| newton_polish(&cc, z, polish)).collect()
}

/// Newton steps that are kept only while they reduce the residual.
pub fn newton_polish(coeffs: &[C64], mut z: C64, steps: usize) -> C64 {
    for _ in 0..steps {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 || !p.is_finite() {
            break;
        }
        let cand = z - p / dp;
        if eval(coeffs, cand).norm() <= p.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// Real roots of `a x^3 + b x^2 + c x + d`, descending, when all three are real.
/// Returns `None` if the cubic has a complex pair.
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Option<[f64; 3]> {
    let ev = roots_real(&[d, c, b, a], 3);
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if ev.iter().any(|z| z.im.abs() > 1e-7 * scale) {
        return None;
    }
    let mut r = [ev[0].re, ev[1].re, ev[2].re];
    r.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    // one more real Newton step each
    let coeffs = [d, c, b, a];
    for x in r.iter_mut() {
        let p = eval_real(&coeffs, *x);
        let dp = (3.0 * a * *x + 2.0 * b) * *x + c;
        if dp != 0.0 {
            let cand = *x - p / dp;
            if eval_real(&coeffs, cand).abs() <= p.abs() {
                *x = cand;
            }
        }
    }
    r.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    Some(r)
}
