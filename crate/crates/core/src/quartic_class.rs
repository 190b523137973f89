//! Reality of the roots of `R(x) = -x^4 + 6 l1 x^2 + 4 l0 x + k0`.
//!
//! The decision uses the invariants `g2, g3`, the discriminant-like
//! `G = g2^3 - 27 g3^2` and the two auxiliary signs; a companion-matrix root
//! finder serves as the oracle.

use alloc::vec::Vec;

use crate::{c, poly, C64};

/// Quartic `A x^4 + 4B x^3 + 6C x^2 + 4B' x + A'` and its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticInvariants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub b_prime: f64,
    pub a_prime: f64,
    pub g2: f64,
    pub g3: f64,
    /// `B^2 - AC`.
    pub d: f64,
    /// `A^2 B' - 3ABC + 2B^3`.
    pub e: f64,
    /// `g2^3 - 27 g3^2`.
    pub big_g: f64,
}

impl QuarticInvariants {
    /// Residual of `4(D/A)^3 - g2 (D/A) - g3 = E^2/A^3`, relative.
    pub fn cubic_relation_residual(&self) -> f64 {
        let t = self.d / self.a;
        let lhs = 4.0 * t * t * t - self.g2 * t - self.g3;
        let rhs = self.e * self.e / (self.a * self.a * self.a);
        (lhs - rhs).abs() / (4.0 * (t * t * t).abs() + (self.g2 * t).abs() + self.g3.abs() + rhs.abs()).max(1.0)
    }

    /// `12 (B^2 - AC)^2 - A^2 g2`.
    pub fn second_sign(&self) -> f64 {
        12.0 * self.d * self.d - self.a * self.a * self.g2
    }

    /// Scale against which `G` is judged to vanish.
    pub fn g_scale(&self) -> f64 {
        (self.g2 * self.g2 * self.g2).abs() + 27.0 * self.g3 * self.g3
    }
}

/// Invariants of the general quartic.
pub fn general_invariants(a: f64, b: f64, cc: f64, b_prime: f64, a_prime: f64) -> QuarticInvariants {
    let g2 = a * a_prime - 4.0 * b * b_prime + 3.0 * cc * cc;
    let g3 = a * cc * a_prime + 2.0 * b * cc * b_prime - a * b_prime * b_prime - a_prime * b * b - cc * cc * cc;
    QuarticInvariants {
        a,
        b,
        c: cc,
        b_prime,
        a_prime,
        g2,
        g3,
        d: b * b - a * cc,
        e: a * a * b_prime - 3.0 * a * b * cc + 2.0 * b * b * b,
        big_g: g2 * g2 * g2 - 27.0 * g3 * g3,
    }
}

/// Invariants for `A = -1, B = 0, C = l1, B' = l0, A' = k0`.
pub fn invariants(l1: f64, k0: f64, l0: f64) -> QuarticInvariants {
    general_invariants(-1.0, 0.0, l1, l0, k0)
}

/// `-27 (l0^4 - 2 l1 (k0 + l1^2) l0^2 + k0 (k0 + 9 l1^2)^2 / 27)`.
pub fn g_expanded(l1: f64, k0: f64, l0: f64) -> f64 {
    let l02 = l0 * l0;
    let t = k0 + 9.0 * l1 * l1;
    -27.0 * (l02 * l02 - 2.0 * l1 * (k0 + l1 * l1) * l02 + k0 * t * t / 27.0)
}

/// Root pattern of the quartic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootClass {
    FourReal,
    FourImaginary,
    TwoRealTwoImaginary,
    Degenerate,
}

impl RootClass {
    pub fn real_root_count(&self) -> Option<usize> {
        match self {
            RootClass::FourReal => Some(4),
            RootClass::TwoRealTwoImaginary => Some(2),
            RootClass::FourImaginary => Some(0),
            RootClass::Degenerate => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RootClass::FourReal => "FourReal",
            RootClass::FourImaginary => "FourImaginary",
            RootClass::TwoRealTwoImaginary => "TwoRealTwoImaginary",
            RootClass::Degenerate => "Degenerate",
        }
    }
}

/// Relative margin below which `G` counts as zero.
pub const DEGENERATE_MARGIN: f64 = 1e-9;

pub fn classify_invariants(inv: &QuarticInvariants) -> RootClass {
    let scale = inv.g_scale();
    if scale == 0.0 || inv.big_g.abs() <= DEGENERATE_MARGIN * scale {
        return RootClass::Degenerate;
    }
    if inv.big_g < 0.0 {
        RootClass::TwoRealTwoImaginary
    } else if inv.d > 0.0 && inv.second_sign() > 0.0 {
        RootClass::FourReal
    } else {
        RootClass::FourImaginary
    }
}

pub fn classify(l1: f64, k0: f64, l0: f64) -> RootClass {
    classify_invariants(&invariants(l1, k0, l0))
}

/// The two roots `l0'^2`, `l0''^2` of the quadratic in `l0^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair {
    pub l0p_sq: C64,
    pub l0pp_sq: C64,
}

/// Thresholds with the radical `((-k0 + 3 l1^2)/3)^(3/2)` positive when real.
pub fn thresholds(l1: f64, k0: f64) -> ThresholdPair {
    let base = l1 * (k0 + l1 * l1);
    let t = (-k0 + 3.0 * l1 * l1) / 3.0;
    let rad = if t >= 0.0 {
        c(t * libm::sqrt(t), 0.0)
    } else {
        let s = c(t, 0.0).sqrt();
        s * s * s
    };
    ThresholdPair { l0p_sq: rad + base, l0pp_sq: -rad + base }
}

/// Residual of `l1^2 (k0 + l1^2)^2 = k0 (k0 + 9 l1^2)^2 / 27 + ((-k0 + 3 l1^2)/3)^3`.
pub fn threshold_identity_residual(l1: f64, k0: f64) -> f64 {
    let lhs = l1 * l1 * (k0 + l1 * l1) * (k0 + l1 * l1);
    let t = k0 + 9.0 * l1 * l1;
    let u = (-k0 + 3.0 * l1 * l1) / 3.0;
    let rhs = k0 * t * t / 27.0 + u * u * u;
    (lhs - rhs).abs() / lhs.abs().max((k0 * t * t / 27.0).abs()).max((u * u * u).abs()).max(1.0)
}

/// The four roots from the companion matrix, each polished by one Newton step.
pub fn numeric_roots(l1: f64, k0: f64, l0: f64) -> Vec<C64> {
    poly::roots_real(&[k0, 4.0 * l0, 6.0 * l1, 0.0, -1.0], 1)
}

/// Number of roots whose imaginary part is negligible.
pub fn real_root_count(roots: &[C64]) -> usize {
    roots.iter().filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.norm())).count()
}
