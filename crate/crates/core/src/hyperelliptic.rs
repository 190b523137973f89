//! Genus-2 machinery for `w^2 = R1(s)`: periods, the period matrix, theta
//! functions with half-integer characteristics, the Abel map, and the theta
//! quotients for the radical functions `P_a`, `P_ab`.
//!
//! Square-root convention on the real axis:
//! `sqrt R1(x) = A0^3 prod sqrt((x - a_i)/A0)` with `A0 = -4` and principal
//! factors. Basis differentials are `x dx / sqrt R1` and `dx / sqrt R1`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::Matrix2;

use crate::error::Error;
use crate::euler_poisson::Trajectory;
use crate::quadrature::{Ladder, Rule};
use crate::reconstruction::{PValues, RealCaseContext};
use crate::separation::{quadrature_residuals, s_series, BranchTracker};
use crate::{c, C64};

/// Leading coefficient of `R1`.
pub const A0: f64 = -4.0;

/// Real 2x2 matrix used for the period matrices.
pub type Mat2 = Matrix2<f64>;

/// Relative tolerance of the period and Abel-map quadratures.
pub const QUAD_TOL: f64 = 1e-12;

/// Branch points `a0 < a1 < a2 < a3 < a4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperellipticCurve {
    pub a: [f64; 5],
    /// Sign flag of the square-root convention (`-1` since `A0 < 0`).
    pub eps: f64,
}

impl HyperellipticCurve {
    /// `(a0..a4) = (e3, k2, e2, e1, k1)`.
    pub fn from_context(ctx: &RealCaseContext) -> Result<Self, Error> {
        Self::new([ctx.e[2], ctx.k2, ctx.e[1], ctx.e[0], ctx.k1])
    }

    pub fn new(a: [f64; 5]) -> Result<Self, Error> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite branch point"));
        }
        if a.windows(2).any(|w| !(w[1] - w[0] > 1e-10)) {
            return Err(Error::InvalidInput("branch points must increase with gaps above 1e-10"));
        }
        Ok(Self { a, eps: -1.0 })
    }

    /// `1 / sqrt R1(x)` from the five differences `x - a_i`, supplied exactly.
    pub fn inv_sqrt_r(&self, d: &[f64; 5]) -> C64 {
        let mut re_mag = A0 * A0 * A0;
        let mut i_count = 0;
        for &di in d {
            let v = di / A0;
            if v >= 0.0 {
                re_mag *= libm::sqrt(v);
            } else {
                re_mag *= libm::sqrt(-v);
                i_count += 1;
            }
        }
        let w = match i_count % 4 {
            0 => c(re_mag, 0.0),
            1 => c(0.0, re_mag),
            2 => c(-re_mag, 0.0),
            _ => c(0.0, -re_mag),
        };
        c(1.0, 0.0) / w
    }

    /// `sqrt R1(x)` in the curve's convention.
    pub fn sqrt_r(&self, x: f64) -> C64 {
        c(1.0, 0.0) / self.inv_sqrt_r(&self.diffs(x))
    }

    fn diffs(&self, x: f64) -> [f64; 5] {
        [x - self.a[0], x - self.a[1], x - self.a[2], x - self.a[3], x - self.a[4]]
    }

    /// `[x, 1] / sqrt R1` with endpoint differences overridden.
    fn integrand(&self, x: f64, over: &[(usize, f64)]) -> [C64; 2] {
        let mut d = self.diffs(x);
        for &(i, v) in over {
            d[i] = v;
        }
        let w = self.inv_sqrt_r(&d);
        [w * x, w]
    }

    /// `int_{a_i}^{a_j}` for adjacent branch points.
    pub fn segment(&self, i: usize, j: usize, ladder: &Ladder) -> Result<[C64; 2], Error> {
        let (lo, hi) = (self.a[i], self.a[j]);
        ladder
            .refine_vec(QUAD_TOL, 1.0, |r: &Rule| {
                let mut s = [c(0.0, 0.0); 2];
                let v0 = r.sine_segment(lo, hi, |x, dl, dh| self.integrand(x, &[(i, dl), (j, -dh)])[0]);
                let v1 = r.sine_segment(lo, hi, |x, dl, dh| self.integrand(x, &[(i, dl), (j, -dh)])[1]);
                s[0] = v0;
                s[1] = v1;
                s
            })
            .map(|(v, _)| v)
    }

    /// `int_{a_i}^{a_i + width}` with the only singularity at `a_i`.
    pub fn one_sided(&self, i: usize, width: f64, ladder: &Ladder) -> Result<[C64; 2], Error> {
        if width == 0.0 {
            return Ok([c(0.0, 0.0); 2]);
        }
        let lo = self.a[i];
        ladder
            .refine_vec(QUAD_TOL, 1.0, |r: &Rule| {
                [
                    r.one_sided(lo, width, |x, d| self.integrand(x, &[(i, d)])[0]),
                    r.one_sided(lo, width, |x, d| self.integrand(x, &[(i, d)])[1]),
                ]
            })
            .map(|(v, _)| v)
    }

    /// `int_start^(dir * inf)` with no singularity on the path.
    pub fn tail(&self, start: f64, dir: f64, scale: f64, ladder: &Ladder) -> Result<[C64; 2], Error> {
        ladder
            .refine_vec(QUAD_TOL, 1.0, |r: &Rule| {
                [
                    r.tail(start, dir, scale, |x| self.integrand(x, &[])[0]),
                    r.tail(start, dir, scale, |x| self.integrand(x, &[])[1]),
                ]
            })
            .map(|(v, _)| v)
    }
}

/// Period matrices and the normalized period matrix `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodData {
    /// `K[alpha][beta] = int_{a_(2 beta + 1)}^{a_(2 beta + 2)} F_alpha / sqrt R1`.
    pub k: Matrix2<f64>,
    /// `i Kbar[alpha][beta] = int_{a_(2 beta)}^{a_(2 beta + 1)} F_alpha / sqrt R1`.
    pub k_bar: Matrix2<f64>,
    /// Column sums `K'[., beta] = sum_{j <= beta} Kbar[., j]`.
    pub k_prime: Matrix2<f64>,
    /// `G = (2K)^-1`, so that `v = G u`.
    pub g: Matrix2<f64>,
    pub tau: Matrix2<C64>,
    /// Largest part of the period integrals off their expected axis.
    pub axis_defect: f64,
}

impl PeriodData {
    pub fn symmetry_defect(&self) -> f64 {
        (self.tau[(0, 1)] - self.tau[(1, 0)]).norm()
    }

    /// Eigenvalues of the symmetric part of `Im tau`, ascending.
    pub fn im_tau_eigenvalues(&self) -> [f64; 2] {
        let t = self.im_tau();
        let (a, b, d) = (t[(0, 0)], 0.5 * (t[(0, 1)] + t[(1, 0)]), t[(1, 1)]);
        let m = 0.5 * (a + d);
        let r = libm::hypot(0.5 * (a - d), b);
        [m - r, m + r]
    }

    pub fn im_tau(&self) -> Matrix2<f64> {
        self.tau.map(|z| z.im)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.im_tau_eigenvalues()[0] > 0.0
    }
}

/// Periods by endpoint-regularized Gauss–Legendre with doubling refinement.
pub fn periods(curve: &HyperellipticCurve) -> Result<PeriodData, Error> {
    periods_with(curve, &Ladder::default())
}

pub fn periods_with(curve: &HyperellipticCurve, ladder: &Ladder) -> Result<PeriodData, Error> {
    let k12 = curve.segment(1, 2, ladder)?;
    let k34 = curve.segment(3, 4, ladder)?;
    let b01 = curve.segment(0, 1, ladder)?;
    let b23 = curve.segment(2, 3, ladder)?;
    let mut axis_defect: f64 = 0.0;
    for z in k12.iter().chain(k34.iter()) {
        axis_defect = axis_defect.max(z.im.abs() / z.norm().max(1e-300));
    }
    for z in b01.iter().chain(b23.iter()) {
        axis_defect = axis_defect.max(z.re.abs() / z.norm().max(1e-300));
    }
    let k = Matrix2::new(k12[0].re, k34[0].re, k12[1].re, k34[1].re);
    // i Kbar = integral, so Kbar = integral / i = Im(integral)
    let k_bar = Matrix2::new(b01[0].im, b23[0].im, b01[1].im, b23[1].im);
    let k_prime = Matrix2::new(k_bar[(0, 0)], k_bar[(0, 0)] + k_bar[(0, 1)], k_bar[(1, 0)], k_bar[(1, 0)] + k_bar[(1, 1)]);
    let g = (k * 2.0).try_inverse().ok_or(Error::NotConvergent)?;
    let t = g * k_prime * 2.0;
    let tau = t.map(|x| c(0.0, x));
    Ok(PeriodData { k, k_bar, k_prime, g, tau, axis_defect })
}

/// Integer characteristic `(m; n)`; the theta series uses `m/2`, `n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Characteristic {
    pub m: [i8; 2],
    pub n: [i8; 2],
}

impl Characteristic {
    pub const ZERO: Characteristic = Characteristic { m: [0, 0], n: [0, 0] };

    /// Reduction of the sum to `m in {0, -1}`, `n in {0, 1}`.
    pub fn pair(&self, other: &Characteristic) -> Characteristic {
        let rm = |x: i8| -(x.rem_euclid(2));
        let rn = |x: i8| x.rem_euclid(2);
        Characteristic {
            m: [rm(self.m[0] + other.m[0]), rm(self.m[1] + other.m[1])],
            n: [rn(self.n[0] + other.n[0]), rn(self.n[1] + other.n[1])],
        }
    }

    /// `+1` for even, `-1` for odd theta functions.
    pub fn parity(&self) -> f64 {
        let s = self.m[0] as i32 * self.n[0] as i32 + self.m[1] as i32 * self.n[1] as i32;
        if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 }
    }

    pub fn is_normalized(&self) -> bool {
        self.m.iter().all(|&x| x == 0 || x == -1) && self.n.iter().all(|&x| x == 0 || x == 1)
    }
}

/// Labels of the sixteen characteristics: the five branch points, the zero
/// characteristic `"5"`, and the ten pairs.
pub const LABELS: [&str; 16] =
    ["0", "1", "2", "3", "4", "5", "01", "02", "03", "04", "12", "13", "14", "23", "24", "34"];

/// Branch-point characteristic with the rounding error of its computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCharacteristic {
    pub label: u8,
    pub ch: Characteristic,
    pub roundoff: f64,
}

/// Characteristics from `-int_inf^{a_lambda}` decomposed in the period lattice.
pub fn branch_characteristics(curve: &HyperellipticCurve, pd: &PeriodData, ladder: &Ladder) -> Result<[BranchCharacteristic; 5], Error> {
    let a4 = curve.a[4];
    let near = curve.one_sided(4, 1.0, ladder)?;
    let far = curve.tail(a4 + 1.0, 1.0, 1.0, ladder)?;
    let segs = [
        curve.segment(0, 1, ladder)?,
        curve.segment(1, 2, ladder)?,
        curve.segment(2, 3, ladder)?,
        curve.segment(3, 4, ladder)?,
    ];
    let kinv = pd.k.try_inverse().ok_or(Error::NotConvergent)?;
    let kpinv = pd.k_prime.try_inverse().ok_or(Error::NotConvergent)?;
    let mut out = [BranchCharacteristic { label: 0, ch: Characteristic::ZERO, roundoff: 0.0 }; 5];
    for (lam, slot) in out.iter_mut().enumerate() {
        let mut tot = [near[0] + far[0], near[1] + far[1]];
        for s in &segs[lam..4] {
            tot[0] += s[0];
            tot[1] += s[1];
        }
        let re = nalgebra::Vector2::new(-tot[0].re, -tot[1].re);
        let im = nalgebra::Vector2::new(-tot[0].im, -tot[1].im);
        let m = kinv * re;
        let n = kpinv * im;
        let mut roundoff: f64 = 0.0;
        let mut ch = Characteristic::ZERO;
        for i in 0..2 {
            let (mr, nr) = (libm::round(m[i]), libm::round(n[i]));
            roundoff = roundoff.max((m[i] - mr).abs()).max((n[i] - nr).abs());
            ch.m[i] = mr as i8;
            ch.n[i] = nr as i8;
        }
        if roundoff > 1e-6 {
            return Err(Error::NonIntegralCharacteristic { label: lam as u8, roundoff });
        }
        *slot = BranchCharacteristic { label: lam as u8, ch, roundoff };
    }
    Ok(out)
}

/// All sixteen characteristics in [`LABELS`] order.
pub fn characteristics(branch: &[BranchCharacteristic; 5]) -> [Characteristic; 16] {
    let mut out = [Characteristic::ZERO; 16];
    for (k, lab) in LABELS.iter().enumerate() {
        let b = lab.as_bytes();
        out[k] = match b.len() {
            1 if b[0] == b'5' => Characteristic::ZERO,
            1 => branch[(b[0] - b'0') as usize].ch,
            _ => branch[(b[0] - b'0') as usize].ch.pair(&branch[(b[1] - b'0') as usize].ch),
        };
    }
    out
}

/// Truncation half-width and centre for the theta series at `v`.
fn theta_box(pd: &PeriodData, v: [C64; 2]) -> Result<([i64; 2], i64), Error> {
    let lmin = pd.im_tau_eigenvalues()[0];
    if !(lmin > 0.0) {
        return Err(Error::NotConvergent);
    }
    let t = pd.im_tau();
    let tinv = t.try_inverse().ok_or(Error::NotConvergent)?;
    let iv = nalgebra::Vector2::new(v[0].im, v[1].im);
    let centre = -(tinv * iv);
    // exp(-pi lmin r^2) < 1e-14
    let r = libm::sqrt(14.0 * core::f64::consts::LN_10 / (PI * lmin));
    let n = (libm::ceil(r) as i64 + 2).max(8);
    Ok(([libm::round(centre[0]) as i64, libm::round(centre[1]) as i64], n))
}

/// `sum_nu exp(pi i [(nu + n/2)' tau (nu + n/2) + 2 (nu + n/2)' (v + m/2)])`.
pub fn theta(pd: &PeriodData, v: [C64; 2], ch: &Characteristic) -> Result<C64, Error> {
    let (centre, n) = theta_box(pd, v)?;
    let tau = &pd.tau;
    let hm = [ch.m[0] as f64 * 0.5, ch.m[1] as f64 * 0.5];
    let hn = [ch.n[0] as f64 * 0.5, ch.n[1] as f64 * 0.5];
    let w = [v[0] + hm[0], v[1] + hm[1]];
    let i_pi = c(0.0, PI);
    let mut s = c(0.0, 0.0);
    for j0 in (centre[0] - n)..=(centre[0] + n) {
        let x0 = j0 as f64 + hn[0];
        for j1 in (centre[1] - n)..=(centre[1] + n) {
            let x1 = j1 as f64 + hn[1];
            let quad = tau[(0, 0)] * (x0 * x0) + (tau[(0, 1)] + tau[(1, 0)]) * (x0 * x1) + tau[(1, 1)] * (x1 * x1);
            let lin = (w[0] * x0 + w[1] * x1) * 2.0;
            s += (i_pi * (quad + lin)).exp();
        }
    }
    Ok(s)
}

/// Periods, characteristics and theta constants for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaContext {
    pub real: RealCaseContext,
    pub curve: HyperellipticCurve,
    pub periods: PeriodData,
    pub branch: [BranchCharacteristic; 5],
    pub chars: [Characteristic; 16],
    /// `c_lambda = theta_lambda(0, 0)` in [`LABELS`] order.
    pub constants: [C64; 16],
    /// `(a3 - a1)^(3/2) c01 c03 c12 c23 c14 c34 / (c0^2 c2^2 c4^2)`.
    pub big_c: C64,
}

/// Index of a label in [`LABELS`].
pub fn label_index(label: &str) -> usize {
    LABELS.iter().position(|l| *l == label).expect("unknown theta label")
}

/// `l1 > k > c0 > 0` and `l^2 < (3 l1 - k)/2`.
pub fn admissible(l1: f64, l: f64, c0: f64, k: f64) -> bool {
    l1 > k && k > c0 && c0 > 0.0 && l * l < (3.0 * l1 - k) / 2.0
}

impl ThetaContext {
    pub fn new(l1: f64, l: f64, c0: f64, k: f64) -> Result<Self, Error> {
        Self::with_ladder(l1, l, c0, k, &Ladder::default())
    }

    pub fn with_ladder(l1: f64, l: f64, c0: f64, k: f64, ladder: &Ladder) -> Result<Self, Error> {
        if !admissible(l1, l, c0, k) {
            return Err(Error::RegimeViolated);
        }
        let real = crate::reconstruction::context(l1, l, c0, k)?;
        let curve = HyperellipticCurve::from_context(&real)?;
        let periods = periods_with(&curve, ladder)?;
        if !periods.is_positive_definite() {
            return Err(Error::NotConvergent);
        }
        let branch = branch_characteristics(&curve, &periods, ladder)?;
        let chars = characteristics(&branch);
        let mut constants = [c(0.0, 0.0); 16];
        for (slot, ch) in constants.iter_mut().zip(chars.iter()) {
            *slot = theta(&periods, [c(0.0, 0.0); 2], ch)?;
        }
        let cc = |l: &str| constants[label_index(l)];
        let a = curve.a;
        let big_c = cc("01") * cc("03") * cc("12") * cc("23") * cc("14") * cc("34")
            / (cc("0") * cc("0") * cc("2") * cc("2") * cc("4") * cc("4"))
            * libm::pow(a[3] - a[1], 1.5);
        Ok(Self { real, curve, periods, branch, chars, constants, big_c })
    }

    pub fn constant(&self, label: &str) -> C64 {
        self.constants[label_index(label)]
    }

    pub fn characteristic(&self, label: &str) -> Characteristic {
        self.chars[label_index(label)]
    }

    pub fn theta(&self, label: &str, v: [C64; 2]) -> Result<C64, Error> {
        theta(&self.periods, v, &self.characteristic(label))
    }
}

/// Residuals of the six relations between root differences and theta constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantIdentities {
    /// `(e1 - e2)/k`, `(e1 - e3)/k`, `(e2 - e3)/k`, `(l1 + e1)/k`, `(l1 + e2)/k`, `(l1 + e3)/k`.
    pub lhs: [f64; 6],
    pub rhs: [C64; 6],
    pub residuals: [f64; 6],
}

impl ConstantIdentities {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the six relations; residuals are relative to the left side.
pub fn theta_constants(ctx: &ThetaContext) -> ConstantIdentities {
    let cc = |l: &str| ctx.constant(l);
    let sq = |z: C64| z * z;
    let e = ctx.real.e;
    let (l1, k) = (ctx.real.qd.l1, ctx.real.qd.k);
    let den = sq(cc("4")) * sq(cc("01")) * sq(cc("12"));
    let common = sq(cc("5")) * sq(cc("23")) / (sq(cc("4")) * sq(cc("01")));
    let last = sq(cc("0")) * sq(cc("2")) / (sq(cc("01")) * sq(cc("12")));
    let rhs = [
        sq(cc("2")) * sq(cc("03")) * sq(cc("34")) / den,
        sq(cc("0")) * sq(cc("23")) * sq(cc("34")) / den,
        sq(cc("5")) * sq(cc("14")) * sq(cc("34")) / den,
        common - sq(cc("2")) * sq(cc("14")) / (sq(cc("4")) * sq(cc("12"))),
        common - last,
        sq(cc("5")) * sq(cc("03")) / (sq(cc("4")) * sq(cc("12"))) - last,
    ];
    let lhs = [(e[0] - e[1]) / k, (e[0] - e[2]) / k, (e[1] - e[2]) / k, (l1 + e[0]) / k, (l1 + e[1]) / k, (l1 + e[2]) / k];
    let mut residuals = [0.0; 6];
    for i in 0..6 {
        residuals[i] = (rhs[i] - lhs[i]).norm() / lhs[i].abs();
    }
    ConstantIdentities { lhs, rhs, residuals }
}

/// `int_{a3}^{s1}` and `int_{a1}^{s2}` of `(x, 1)/sqrt R1` on the principal sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelLegs {
    pub u_s1: [C64; 2],
    pub u_s2: [C64; 2],
}

/// Fixed integrals used by the Abel map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelConstants {
    /// `int_{a3}^{a4}`.
    pub full1: [C64; 2],
    /// `int_{a0}^{a1}`.
    pub seg01: [C64; 2],
    /// `int_{a0}^{-inf}`.
    pub full2: [C64; 2],
}

impl AbelConstants {
    pub fn new(curve: &HyperellipticCurve, ladder: &Ladder) -> Result<Self, Error> {
        let a0 = curve.a[0];
        let near = curve.one_sided(0, -1.0, ladder)?;
        let far = curve.tail(a0 - 1.0, -1.0, 1.0, ladder)?;
        Ok(Self {
            full1: curve.segment(3, 4, ladder)?,
            seg01: curve.segment(0, 1, ladder)?,
            full2: [near[0] + far[0], near[1] + far[1]],
        })
    }
}

fn add2(a: [C64; 2], b: [C64; 2]) -> [C64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub2(a: [C64; 2], b: [C64; 2]) -> [C64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale2(a: [C64; 2], s: f64) -> [C64; 2] {
    [a[0] * s, a[1] * s]
}

/// Distance beyond `a0` past which the `s2` leg switches to the tail at infinity.
const FAR_LEG: f64 = 0.5;

/// The two legs for `s1 in [a3, a4]`, `s2 <= a1`.
pub fn abel_legs(curve: &HyperellipticCurve, k: &AbelConstants, s1: f64, s2: f64, ladder: &Ladder) -> Result<AbelLegs, Error> {
    let a = curve.a;
    let slack = 1e-12 * (1.0 + a[4].abs());
    if !(s1 >= a[3] - slack && s1 <= a[4] + slack && s2 <= a[1] + slack) || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::OutsideWindow);
    }
    let s1 = s1.clamp(a[3], a[4]);
    let s2 = s2.min(a[1]);
    let u_s1 = if s1 - a[3] <= a[4] - s1 {
        curve.one_sided(3, s1 - a[3], ladder)?
    } else {
        add2(k.full1, curve.one_sided(4, s1 - a[4], ladder)?)
    };
    let u_s2 = if s2 >= a[0] {
        if a[1] - s2 <= s2 - a[0] {
            curve.one_sided(1, s2 - a[1], ladder)?
        } else {
            sub2(curve.one_sided(0, s2 - a[0], ladder)?, k.seg01)
        }
    } else if s2 >= a[0] - FAR_LEG {
        sub2(curve.one_sided(0, s2 - a[0], ladder)?, k.seg01)
    } else {
        let w = (a[0] - s2).max(1.0);
        sub2(sub2(k.full2, curve.tail(s2, -1.0, w, ladder)?), k.seg01)
    };
    Ok(AbelLegs { u_s1, u_s2 })
}

/// `v = G u` with `u = int_{a3}^{s1} + int_{a1}^{s2}` on the principal sheet.
pub fn abel_map(ctx: &ThetaContext, s1: f64, s2: f64) -> Result<[C64; 2], Error> {
    let ladder = Ladder::default();
    let k = AbelConstants::new(&ctx.curve, &ladder)?;
    let legs = abel_legs(&ctx.curve, &k, s1, s2, &ladder)?;
    Ok(apply_g(&ctx.periods, add2(legs.u_s1, legs.u_s2)))
}

pub fn apply_g(pd: &PeriodData, u: [C64; 2]) -> [C64; 2] {
    let g = &pd.g;
    [u[0] * g[(0, 0)] + u[1] * g[(0, 1)], u[0] * g[(1, 0)] + u[1] * g[(1, 1)]]
}

/// Abel images of a trajectory with the sheet followed continuously.
#[derive(Debug, Clone)]
pub struct AbelSeries {
    pub times: Vec<f64>,
    pub u: Vec<[C64; 2]>,
    pub v: Vec<[C64; 2]>,
    /// Sheet changes absorbed at the far end of a leg.
    pub unwraps: usize,
}

/// Least-squares line through each real and imaginary component of `v(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    /// `dv/dt` for `v1`, `v2`.
    pub slope: [C64; 2],
    pub intercept: [C64; 2],
    pub max_residual: f64,
}

impl AbelSeries {
    pub fn fit(&self) -> LinearFit {
        fit_lines(&self.times, &self.v)
    }

    pub fn fit_u(&self) -> LinearFit {
        fit_lines(&self.times, &self.u)
    }
}

fn fit_lines(t: &[f64], y: &[[C64; 2]]) -> LinearFit {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tm) * (x - tm)).sum();
    let mut slope = [c(0.0, 0.0); 2];
    let mut intercept = [c(0.0, 0.0); 2];
    let mut max_residual: f64 = 0.0;
    for k in 0..2 {
        let ym = y.iter().map(|v| v[k]).sum::<C64>() / n;
        let sty: C64 = t.iter().zip(y.iter()).map(|(x, v)| (v[k] - ym) * (x - tm)).sum();
        let b = if stt > 0.0 { sty / stt } else { c(0.0, 0.0) };
        let a = ym - b * tm;
        for (x, v) in t.iter().zip(y.iter()) {
            let r = v[k] - (a + b * *x);
            max_residual = max_residual.max(r.re.abs()).max(r.im.abs());
        }
        slope[k] = b;
        intercept[k] = a;
    }
    LinearFit { slope, intercept, max_residual }
}

/// Abel map along a uniformly sampled trajectory.
///
/// The continued roots give `sqrt R1(s_i) = sigma_i * (curve convention)` up to a
/// constant sign per variable, fixed from the quadrature relations so that
/// `du/dt = (1, 0)`. The
/// leg integrals are weighted by `sigma_i`, and whenever `sigma_i` changes at the
/// far end of a leg (`s1` near `a4`, `s2` near `-inf`) the full leg integral is
/// added so that `u(t)` stays continuous.
pub fn abel_series(ctx: &ThetaContext, traj: &Trajectory, stride: usize) -> Result<AbelSeries, Error> {
    let ladder = Ladder::default();
    let k = AbelConstants::new(&ctx.curve, &ladder)?;
    let qd = &ctx.real.qd;
    let (eps1, eps2) = quadrature_residuals(qd, traj)?.initial_signs;
    let series = s_series(qd, traj)?;
    let mut tracker = BranchTracker::new(ctx.real.quintic.roots());
    let a = ctx.curve.a;
    let mut out = AbelSeries { times: Vec::new(), u: Vec::new(), v: Vec::new(), unwraps: 0 };
    let mut off1 = [c(0.0, 0.0); 2];
    let mut off2 = [c(0.0, 0.0); 2];
    let mut prev: Option<(f64, f64)> = None;
    let stride = stride.max(1);
    for (i, (sv, cc)) in series.iter().enumerate() {
        let dx = cc.x1 - cc.x2;
        if dx.norm() == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        // the tracker must see every sample to keep continuity
        let rs = tracker.push(sv.s1, sv.s2, dx, i)?;
        let (s1, s2) = (sv.s1.re, sv.s2.re);
        let sg1 = eps1 * (rs.sqrt_r1_s1() / ctx.curve.sqrt_r(s1)).re.signum();
        let sg2 = eps2 * (rs.sqrt_r1_s2() / ctx.curve.sqrt_r(s2)).re.signum();
        if let Some((p1, p2)) = prev {
            if p1 != sg1 && s1 - a[3] > a[4] - s1 {
                off1 = add2(off1, scale2(k.full1, p1 - sg1));
                out.unwraps += 1;
            }
            if p2 != sg2 && s2 < a[0] - 1.0 {
                off2 = add2(off2, scale2(k.full2, p2 - sg2));
                out.unwraps += 1;
            }
        }
        prev = Some((sg1, sg2));
        if i % stride != 0 {
            continue;
        }
        let legs = abel_legs(&ctx.curve, &k, s1, s2, &ladder)?;
        // int_{a1}^{s2} = -seg01 + int_{a0}^{s2}; only the a0 part changes sheet
        let j2 = add2(legs.u_s2, k.seg01);
        let u = add2(
            add2(off1, scale2(legs.u_s1, sg1)),
            add2(sub2(off2, k.seg01), scale2(j2, sg2)),
        );
        out.times.push(traj.times[i]);
        out.u.push(u);
        out.v.push(apply_g(&ctx.periods, u));
    }
    Ok(out)
}

/// The five `P_a` and ten `P_ab` (without the factor `2i`) as theta quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaP {
    pub pa: [C64; 5],
    pub pab: [[C64; 5]; 5],
}

/// Signs relating the theta quotients to [`PValues`] built from principal roots,
/// in the orders `P1..P5` and `P12, P13, P14, P15, P23, P24, P25, P34, P35, P45`.
pub const PA_SIGNS: [f64; 5] = [-1.0, -1.0, -1.0, 1.0, -1.0];
pub const PAB_SIGNS: [f64; 10] = [-1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0];

/// Index pairs in the order of [`PAB_SIGNS`].
pub const PAIRS: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Theta quotients as printed (before the sign table).
pub fn p_via_theta_raw(ctx: &ThetaContext, v: [C64; 2]) -> Result<ThetaP, Error> {
    let t5 = ctx.theta("5", v)?;
    let scale = ctx.constant("5").norm();
    if t5.norm() <= 1e-12 * scale {
        return Err(Error::ThetaZeroDenominator);
    }
    let t = |l: &str| -> Result<C64, Error> { Ok(ctx.theta(l, v)? / t5) };
    let cc = |l: &str| ctx.constant(l);
    let big = ctx.big_c;
    let sq = libm::sqrt(ctx.curve.a[3] - ctx.curve.a[1]);
    let i = c(0.0, 1.0);
    let cs = big / sq;
    let pa = [
        -i * cs * cc("0") * cc("2") * cc("4") / (cc("01") * cc("12") * cc("14")) * t("3")?,
        -i * cs * cc("5") * cc("2") / (cc("12") * cc("23")) * t("2")?,
        cs * cc("5") * cc("0") / (cc("01") * cc("03")) * t("0")?,
        -cs * cc("5") * cc("4") / (cc("14") * cc("34")) * t("4")?,
        cs * cc("0") * cc("2") * cc("4") / (cc("03") * cc("23") * cc("34")) * t("1")?,
    ];
    let vals = [
        i * big * cc("5") / cc("12") * t("23")?,
        -big * cc("5") / cc("01") * t("03")?,
        -big * cc("5") / cc("14") * t("34")?,
        -big * t("13")?,
        big * cc("5") / cc("4") * t("02")?,
        -big * cc("5") / cc("0") * t("24")?,
        big * cc("5") / cc("23") * t("12")?,
        -i * big * cc("5") / cc("2") * t("04")?,
        -i * big * cc("5") / cc("03") * t("01")?,
        -i * big * cc("5") / cc("34") * t("14")?,
    ];
    let mut pab = [[c(0.0, 0.0); 5]; 5];
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        pab[a][b] = vals[k];
        pab[b][a] = vals[k];
    }
    Ok(ThetaP { pa, pab })
}

/// Theta quotients with the sign table applied, comparable to principal-root
/// [`PValues`] (with `P_ab` divided by `2i`).
pub fn p_via_theta(ctx: &ThetaContext, v: [C64; 2]) -> Result<ThetaP, Error> {
    let mut p = p_via_theta_raw(ctx, v)?;
    for k in 0..5 {
        p.pa[k] *= PA_SIGNS[k];
    }
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        p.pab[a][b] *= PAB_SIGNS[k];
        p.pab[b][a] = p.pab[a][b];
    }
    Ok(p)
}

/// Comparison of theta quotients with direct radicals at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCheck {
    /// Max relative mismatch of squares.
    pub squares: f64,
    /// Max relative mismatch after the sign table.
    pub signed: f64,
    /// Ratios theta/direct (raw quotients), `P1..P5` then the pairs.
    pub ratios: [C64; 15],
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `p_via_theta(abel_map(s1, s2))` against the principal radicals.
pub fn theta_check(ctx: &ThetaContext, s1: f64, s2: f64) -> Result<ThetaCheck, Error> {
    let v = abel_map(ctx, s1, s2)?;
    let raw = p_via_theta_raw(ctx, v)?;
    let pv = crate::reconstruction::p_values(&ctx.real, s1, s2)?;
    Ok(compare(&raw, &pv))
}

/// Compares raw theta quotients with radicals built from principal roots.
pub fn compare(raw: &ThetaP, pv: &PValues) -> ThetaCheck {
    let two_i = c(0.0, 2.0);
    let mut squares: f64 = 0.0;
    let mut signed: f64 = 0.0;
    let mut ratios = [c(0.0, 0.0); 15];
    for k in 0..5 {
        let d = pv.pa[k];
        squares = squares.max(rel(raw.pa[k] * raw.pa[k], d * d));
        signed = signed.max(rel(raw.pa[k] * PA_SIGNS[k], d));
        ratios[k] = raw.pa[k] / d;
    }
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let d = pv.pab[a][b] / two_i;
        let t = raw.pab[a][b];
        squares = squares.max(rel(t * t, d * d));
        signed = signed.max(rel(t * PAB_SIGNS[k], d));
        ratios[5 + k] = t / d;
    }
    ThetaCheck { squares, signed, ratios }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn reference() -> ThetaContext {
        ThetaContext::new(2.0, 0.3, 0.5, 1.0).unwrap()
    }

    #[test]
    fn period_matrix() {
        let ctx = reference();
        let pd = &ctx.periods;
        assert!(pd.symmetry_defect() < 1e-10);
        assert!(pd.is_positive_definite());
        assert!(pd.axis_defect < 1e-12);
        let fine = periods_with(&ctx.curve, &Ladder::new(40, 6)).unwrap();
        assert!((fine.k - pd.k).abs().max() < 1e-11);
        assert!((fine.k_prime - pd.k_prime).abs().max() < 1e-11);
    }

    #[test]
    fn characteristics_are_half_periods() {
        let ctx = reference();
        for (ch, lab) in ctx.chars.iter().zip(LABELS.iter()) {
            assert!(ch.is_normalized(), "{lab}: {ch:?}");
        }
        for b in &ctx.branch {
            assert!(b.roundoff < 1e-6);
            assert_eq!(b.ch.pair(&b.ch), Characteristic::ZERO);
        }
        let want = [([-1, -1], [0, 0]), ([-1, -1], [1, 0]), ([0, -1], [1, 0]), ([0, -1], [0, 1]), ([0, 0], [0, 1])];
        for (b, (m, n)) in ctx.branch.iter().zip(want.iter()) {
            assert_eq!((b.ch.m, b.ch.n), (*m, *n));
        }
        let again = branch_characteristics(&ctx.curve, &ctx.periods, &Ladder::new(40, 6)).unwrap();
        for (a, b) in again.iter().zip(ctx.branch.iter()) {
            assert_eq!(a.ch, b.ch);
        }
    }

    #[test]
    fn theta_functional_equations_and_parity() {
        let ctx = reference();
        let pd = &ctx.periods;
        let z = Characteristic::ZERO;
        let mut rng = crate::seeded_rng(77);
        for _ in 0..100 {
            let v = [c(rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5)), c(rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5))];
            let t0 = theta(pd, v, &z).unwrap();
            for al in 0..2 {
                let mut w = v;
                w[al] += 1.0;
                assert!(rel(theta(pd, w, &z).unwrap(), t0) < 1e-12);
                let mut w = v;
                w[0] += pd.tau[(0, al)];
                w[1] += pd.tau[(1, al)];
                let factor = (c(0.0, -PI) * (v[al] * 2.0 + pd.tau[(al, al)])).exp();
                assert!(rel(theta(pd, w, &z).unwrap(), t0 * factor) < 1e-12);
            }
            for ch in &ctx.chars {
                let a = theta(pd, v, ch).unwrap();
                let b = theta(pd, [-v[0], -v[1]], ch).unwrap();
                assert!((b - a * ch.parity()).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn constant_identities() {
        let ctx = reference();
        let id = theta_constants(&ctx);
        assert!(id.max_residual() < 1e-8, "{id:?}");
        assert!(ThetaContext::new(2.0, 0.3, 1.5, 1.0).is_err());
    }

    #[test]
    fn abel_origin_and_theta_quotients() {
        let ctx = reference();
        let a = ctx.curve.a;
        let v = abel_map(&ctx, a[3], a[1]).unwrap();
        assert!(v[0].norm() < 1e-14 && v[1].norm() < 1e-14);
        let p = p_via_theta(&ctx, v).unwrap();
        assert!(p.pa[0].norm() < 1e-8);
        let mut rng = crate::seeded_rng(3);
        for _ in 0..10 {
            let s1 = rng.random_range(a[3]..a[4]);
            let s2 = a[0] - rng.random_range(0.0..8.0);
            let chk = theta_check(&ctx, s1, s2).unwrap();
            assert!(chk.squares < 1e-8 && chk.signed < 1e-6, "{chk:?}");
        }
    }

    #[test]
    fn abel_image_is_linear_in_time() {
        use crate::euler_poisson::{integrate_kovalevskaya, IntegrateOptions};
        use crate::reconstruction::{canonical_signs, reconstruct};
        let ctx = reference();
        let a = ctx.curve.a;
        let signs = canonical_signs(&ctx.real).unwrap();
        let st = reconstruct(&ctx.real, 0.5 * (a[3] + a[4]), a[0] - 1.0, &signs).unwrap().state;
        let traj = integrate_kovalevskaya(0.5, st, 6.0, 1e-12, &IntegrateOptions::every(0.01)).unwrap();
        let ser = abel_series(&ctx, &traj, 5).unwrap();
        let fu = ser.fit_u();
        assert!(fu.max_residual < 1e-6, "{fu:?}");
        assert!((fu.slope[0] - c(1.0, 0.0)).norm() < 1e-6 && fu.slope[1].norm() < 1e-6, "{fu:?}");
        let want_u = [c(1.0, 0.0), c(0.0, 0.0)];
        for j in [10usize, 40, 90] {
            let h = ser.times[j + 1] - ser.times[j - 1];
            let d = sub2(ser.u[j + 1], ser.u[j - 1]);
            assert!((d[0] / h - want_u[0]).norm() < 1e-8 && (d[1] / h - want_u[1]).norm() < 1e-8);
        }
        let fv = ser.fit();
        let want = apply_g(&ctx.periods, [c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((fv.slope[0] - want[0]).norm() < 1e-6 && (fv.slope[1] - want[1]).norm() < 1e-6);
    }
}
