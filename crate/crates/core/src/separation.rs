//! Complex coordinates, the quartic `R` and its companions, the separation
//! variables `s1, s2`, the quintic `R1(s)` and the quadrature check along
//! trajectories.

use alloc::vec::Vec;

use crate::error::Error;
use crate::euler_poisson::{rhs_kovalevskaya, MotionState, Trajectory};
use crate::{c, poly, C64};

/// `x = p +- qi`, `y = gamma +- gamma' i`, `xi = x^2 + c0 y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexCoordinates {
    pub x1: C64,
    pub x2: C64,
    pub y1: C64,
    pub y2: C64,
    pub xi1: C64,
    pub xi2: C64,
}

pub fn to_complex_coords(s: &MotionState, c0: f64) -> ComplexCoordinates {
    let x1 = c(s.p, s.q);
    let x2 = c(s.p, -s.q);
    let y1 = c(s.gamma, s.gamma1);
    let y2 = c(s.gamma, -s.gamma1);
    ComplexCoordinates { x1, x2, y1, y2, xi1: x1 * x1 + y1 * c0, xi2: x2 * x2 + y2 * c0 }
}

/// Constants of motion and the quartic built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticData {
    pub l1: f64,
    pub l: f64,
    pub c0: f64,
    pub k: f64,
}

impl QuarticData {
    pub fn new(l1: f64, l: f64, c0: f64, k: f64) -> Self {
        Self { l1, l, c0, k }
    }

    /// `k0 = c0^2 - k^2`.
    pub fn k0(&self) -> f64 {
        self.c0 * self.c0 - self.k * self.k
    }

    /// `l0 = c0 l`.
    pub fn l0(&self) -> f64 {
        self.c0 * self.l
    }

    /// Coefficients of `R`, lowest degree first.
    pub fn r_coeffs(&self) -> [f64; 5] {
        [self.k0(), 4.0 * self.l0(), 6.0 * self.l1, 0.0, -1.0]
    }

    /// `R(x) = -x^4 + 6 l1 x^2 + 4 l c0 x + c0^2 - k^2`.
    pub fn r(&self, x: C64) -> C64 {
        let x2 = x * x;
        -x2 * x2 + x2 * (6.0 * self.l1) + x * (4.0 * self.l0()) + self.k0()
    }

    /// `R'(x)`.
    pub fn r_prime(&self, x: C64) -> C64 {
        -x * x * x * 4.0 + x * (12.0 * self.l1) + 4.0 * self.l0()
    }

    /// The coefficients `(A, B, C)` (gothic letters) of the quadratic forms.
    pub fn frak(&self, x1: C64, x2: C64) -> (C64, C64, C64) {
        let s = x1 + x2;
        let p = x1 * x2;
        (-s * s + 6.0 * self.l1, p * s + 2.0 * self.l0(), -p * p + self.k0())
    }

    /// Symmetric companion `R(x1 x2)`.
    pub fn r_sym(&self, x1: C64, x2: C64) -> C64 {
        let p = x1 * x2;
        -p * p + p * (6.0 * self.l1) + (x1 + x2) * (2.0 * self.l0()) + self.k0()
    }

    /// `R1(x1 x2)` in closed form.
    pub fn r1_sym(&self, x1: C64, x2: C64) -> C64 {
        let s = x1 + x2;
        let p = x1 * x2;
        -p * p * (6.0 * self.l1) - s * s * self.k0() - s * p * (4.0 * self.l0())
            + 6.0 * self.l1 * self.k0()
            - 4.0 * self.l0() * self.l0()
    }

    /// `R1(x1 x2)` as `A C - B^2`.
    pub fn r1_sym_frak(&self, x1: C64, x2: C64) -> C64 {
        let (a, b, cc) = self.frak(x1, x2);
        a * cc - b * b
    }

    pub fn k1(&self) -> f64 {
        0.5 * (self.l1 + self.k)
    }

    pub fn k2(&self) -> f64 {
        0.5 * (self.l1 - self.k)
    }

    pub fn quintic(&self) -> Result<QuinticData, Error> {
        quintic_from_constants(self.l1, self.l, self.c0, self.k)
    }
}

/// `R(x1) R(x2) - R(x1 x2)^2 - (x1 - x2)^2 R1(x1 x2)`.
pub fn quartic_identity_residual(qd: &QuarticData, x1: C64, x2: C64) -> C64 {
    let d = x1 - x2;
    qd.r(x1) * qd.r(x2) - qd.r_sym(x1, x2).powi(2) - d * d * qd.r1_sym(x1, x2)
}

/// Natural size of the identity's terms, for relative residuals.
pub fn quartic_identity_scale(qd: &QuarticData, x1: C64, x2: C64) -> f64 {
    let d = x1 - x2;
    (qd.r(x1) * qd.r(x2)).norm() + qd.r_sym(x1, x2).norm_sqr() + (d * d * qd.r1_sym(x1, x2)).norm()
}

/// Evaluation route for `W^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WRoute {
    /// `(R1 + k^2 d^2)^2 - 4 k^2 R(x1) R(x2)`.
    Direct,
    /// The four-factor product through `sqrt R(x1) sqrt R(x2)`.
    Factored,
    /// `16 d^4 (s1 - k1)(s2 - k1)(s1 - k2)(s2 - k2)`.
    Separated,
}

pub fn w_squared(qd: &QuarticData, x1: C64, x2: C64, route: WRoute) -> Result<C64, Error> {
    let d = x1 - x2;
    let d2 = d * d;
    let k = qd.k;
    match route {
        WRoute::Direct => {
            let t = qd.r1_sym(x1, x2) + d2 * (k * k);
            Ok(t * t - qd.r(x1) * qd.r(x2) * (4.0 * k * k))
        }
        WRoute::Factored => {
            if d.norm() == 0.0 {
                return Err(Error::CoincidentPoints);
            }
            let rs = qd.r_sym(x1, x2);
            let pr = qd.r(x1).sqrt() * qd.r(x2).sqrt();
            let m = (rs - pr) / d2;
            let p = (rs + pr) / d2;
            Ok(d2 * d2 * (m - k) * (m + k) * (p + k) * (p - k))
        }
        WRoute::Separated => {
            let sv = s_from_x(qd, &coords_from_x(qd, x1, x2), None)?;
            Ok(w_squared_separated(qd, d, sv.s1, sv.s2))
        }
    }
}

/// `16 d^4 (s1 - k1)(s2 - k1)(s1 - k2)(s2 - k2)` with `d = x1 - x2`.
pub fn w_squared_separated(qd: &QuarticData, d: C64, s1: C64, s2: C64) -> C64 {
    let d2 = d * d;
    let (k1, k2) = (qd.k1(), qd.k2());
    d2 * d2 * 16.0 * (s1 - k1) * (s2 - k1) * (s1 - k2) * (s2 - k2)
}

fn coords_from_x(_qd: &QuarticData, x1: C64, x2: C64) -> ComplexCoordinates {
    let z = C64::new(0.0, 0.0);
    ComplexCoordinates { x1, x2, y1: z, y2: z, xi1: z, xi2: z }
}

/// Separation variables with the square-root branches used to form them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationVariables {
    pub s1: C64,
    pub s2: C64,
    /// Branch of `sqrt R(x1)`.
    pub sqrt_r1: C64,
    /// Branch of `sqrt R(x2)`.
    pub sqrt_r2: C64,
    pub k1: f64,
    pub k2: f64,
}

impl SeparationVariables {
    /// Residuals of `s1 + s2 - l1 = R(x1x2)/d^2` and `s2 - s1 = sqrt R(x1) sqrt R(x2) / d^2`,
    /// relative to the size of the right-hand sides.
    pub fn invariant_residuals(&self, qd: &QuarticData, x1: C64, x2: C64) -> (f64, f64) {
        let d2 = (x1 - x2) * (x1 - x2);
        let a = qd.r_sym(x1, x2) / d2;
        let b = self.sqrt_r1 * self.sqrt_r2 / d2;
        let r_sum = (self.s1 + self.s2 - qd.l1 - a).norm() / a.norm().max(1.0);
        let r_diff = (self.s2 - self.s1 - b).norm() / b.norm().max(1.0);
        (r_sum, r_diff)
    }
}

/// `s1, s2` from the roots of the quadratic.
///
/// With `prev`, each square root keeps the sign nearest to the previous one.
/// Without it, principal roots are taken and the product's sign is chosen so
/// that `Re s1 >= Re s2`, which is the ordering of the real regime's windows
/// (`s1` between `e1` and `k1`, `s2` below `e3`).
pub fn s_from_x(
    qd: &QuarticData,
    coords: &ComplexCoordinates,
    prev: Option<&SeparationVariables>,
) -> Result<SeparationVariables, Error> {
    let (x1, x2) = (coords.x1, coords.x2);
    let d = x1 - x2;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let d2 = d * d;
    let mut w1 = qd.r(x1).sqrt();
    let mut w2 = qd.r(x2).sqrt();
    match prev {
        Some(pv) => {
            if (w1 - pv.sqrt_r1).norm() > (w1 + pv.sqrt_r1).norm() {
                w1 = -w1;
            }
            if (w2 - pv.sqrt_r2).norm() > (w2 + pv.sqrt_r2).norm() {
                w2 = -w2;
            }
        }
        None => {
            // s1 - s2 = -w1 w2 / d^2
            if (-(w1 * w2) / d2).re < 0.0 {
                w2 = -w2;
            }
        }
    }
    let rs = qd.r_sym(x1, x2);
    let pr = w1 * w2;
    let half = 0.5 * qd.l1;
    Ok(SeparationVariables {
        s1: (rs - pr) / (d2 * 2.0) + half,
        s2: (rs + pr) / (d2 * 2.0) + half,
        sqrt_r1: w1,
        sqrt_r2: w2,
        k1: qd.k1(),
        k2: qd.k2(),
    })
}

/// `xi1, xi2` recovered from `s1, s2`; `sign` selects the relative sign of the
/// two square roots `sqrt((s1-k1)(s2-k1))` and `sqrt((s1-k2)(s2-k2))`.
pub fn xi_from_s(qd: &QuarticData, s1: C64, s2: C64, x1: C64, x2: C64, sign: f64) -> (C64, C64) {
    let d2 = (x1 - x2) * (x1 - x2);
    let a = ((s1 - qd.k1()) * (s2 - qd.k1())).sqrt();
    let b = ((s1 - qd.k2()) * (s2 - qd.k2())).sqrt() * sign;
    let k2 = qd.k * qd.k;
    let xi1 = d2 / qd.r(x2) * ((a + b) * (a + b) - k2);
    let xi2 = d2 / qd.r(x1) * ((a - b) * (a - b) - k2);
    (xi1, xi2)
}

/// `-4 (dx1/dt)^2 - R(x1) - (x1 - x2)^2 xi1`, with `dx1/dt` from the equations of motion.
pub fn velocity_identity_residual(qd: &QuarticData, s: &MotionState) -> (C64, f64) {
    let d = rhs_kovalevskaya(qd.c0, s);
    let dx1 = c(d.p, d.q);
    let cc = to_complex_coords(s, qd.c0);
    let lhs = dx1 * dx1 * -4.0;
    let dd = cc.x1 - cc.x2;
    let rhs = qd.r(cc.x1) + dd * dd * cc.xi1;
    (lhs - rhs, lhs.norm().max(qd.r(cc.x1).norm()).max(1.0))
}

/// Weierstrass-type data of the quintic `R1(s) = -4 (s-e1)(s-e2)(s-e3)(s-k1)(s-k2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticData {
    pub g2: f64,
    pub g3: f64,
    /// Cubic roots; sorted descending when real.
    pub e: [C64; 3],
    pub k1: f64,
    pub k2: f64,
}

impl QuinticData {
    /// The three cubic roots as reals, if they are.
    pub fn real_e(&self) -> Option<[f64; 3]> {
        let scale = self.e.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if self.e.iter().all(|z| z.im.abs() <= 1e-12 * scale) {
            Some([self.e[0].re, self.e[1].re, self.e[2].re])
        } else {
            None
        }
    }

    /// `S(s) = 4 s^3 - g2 s - g3`.
    pub fn cubic(&self, s: C64) -> C64 {
        s * s * s * 4.0 - s * self.g2 - self.g3
    }

    /// `R1(s)` in factored form.
    pub fn r1(&self, s: C64) -> C64 {
        (s - self.e[0]) * (s - self.e[1]) * (s - self.e[2]) * (s - self.k1) * (s - self.k2) * -4.0
    }

    /// `R1(s) = -S(s)(s - k1)(s - k2)` through the cubic.
    pub fn r1_from_cubic(&self, s: C64) -> C64 {
        -self.cubic(s) * (s - self.k1) * (s - self.k2)
    }

    /// Coefficients of `R1`, lowest degree first.
    pub fn r1_coeffs(&self) -> Vec<C64> {
        let s = [c(-self.g3, 0.0), c(-self.g2, 0.0), c(0.0, 0.0), c(4.0, 0.0)];
        let q = [c(self.k1 * self.k2, 0.0), c(-(self.k1 + self.k2), 0.0), c(1.0, 0.0)];
        poly::mul(&s, &q).into_iter().map(|z| -z).collect()
    }

    /// The five roots in the order `(e1, e2, e3, k1, k2)`.
    pub fn roots(&self) -> [C64; 5] {
        [self.e[0], self.e[1], self.e[2], c(self.k1, 0.0), c(self.k2, 0.0)]
    }
}

/// Relative tolerance below which two roots of the quintic count as equal.
pub const QUINTIC_DEGENERACY_TOL: f64 = 1e-10;

/// `g2, g3`, the cubic roots and `k1, k2`.
pub fn quintic_from_constants(l1: f64, l: f64, c0: f64, k: f64) -> Result<QuinticData, Error> {
    if ![l1, l, c0, k].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite constant"));
    }
    let g2 = k * k - c0 * c0 + 3.0 * l1 * l1;
    let g3 = l1 * (k * k - c0 * c0 - l1 * l1) + l * l * c0 * c0;
    let k1 = 0.5 * (l1 + k);
    let k2 = 0.5 * (l1 - k);
    // repeated cubic roots: discriminant of 4s^3 - g2 s - g3 is 16 (g2^3 - 27 g3^2)
    let disc = g2 * g2 * g2 - 27.0 * g3 * g3;
    let dscale = (g2 * g2 * g2).abs() + 27.0 * g3 * g3;
    if disc.abs() <= QUINTIC_DEGENERACY_TOL * dscale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateQuintic);
    }
    if k.abs() <= QUINTIC_DEGENERACY_TOL * l1.abs().max(1.0) {
        return Err(Error::DegenerateQuintic);
    }
    for kk in [k1, k2] {
        let s = 4.0 * kk * kk * kk - g2 * kk - g3;
        let sc = (4.0 * kk * kk * kk).abs() + (g2 * kk).abs() + g3.abs();
        if s.abs() <= QUINTIC_DEGENERACY_TOL * sc.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateQuintic);
        }
    }
    let e = if disc > 0.0 {
        let r = poly::real_cubic_roots(4.0, 0.0, -g2, -g3).ok_or(Error::DegenerateQuintic)?;
        [c(r[0], 0.0), c(r[1], 0.0), c(r[2], 0.0)]
    } else {
        let mut r = poly::roots_real(&[-g3, -g2, 0.0, 4.0], 3);
        // real root first, then the conjugate pair with positive imaginary part first
        r.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap().then(b.im.partial_cmp(&a.im).unwrap()));
        let re0 = C64::new(r[0].re, 0.0);
        [re0, r[1], r[2]]
    };
    Ok(QuinticData { g2, g3, e, k1, k2 })
}

/// Square roots `sqrt(s1 - a)` and `sqrt(s2 - a)` over the five branch points
/// `(e1, e2, e3, k1, k2)`, continued along a sampled path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSet {
    pub rho1: [C64; 5],
    pub rho2: [C64; 5],
}

impl RootSet {
    /// Principal roots.
    pub fn principal(branch: &[C64; 5], s1: C64, s2: C64) -> Self {
        let mut rho1 = [C64::new(0.0, 0.0); 5];
        let mut rho2 = rho1;
        for i in 0..5 {
            rho1[i] = (s1 - branch[i]).sqrt();
            rho2[i] = (s2 - branch[i]).sqrt();
        }
        Self { rho1, rho2 }
    }

    /// `sqrt R1(s1) = 2i prod rho1`.
    pub fn sqrt_r1_s1(&self) -> C64 {
        self.rho1.iter().fold(c(0.0, 2.0), |acc, z| acc * z)
    }

    /// `sqrt R1(s2) = 2i prod rho2`.
    pub fn sqrt_r1_s2(&self) -> C64 {
        self.rho2.iter().fold(c(0.0, 2.0), |acc, z| acc * z)
    }
}

/// Sign continuation of the ten roots by linear extrapolation.
///
/// The `s2` roots are continued after multiplying by `x1 - x2`, which keeps them
/// finite where `s2` passes through infinity.
#[derive(Debug, Clone)]
pub struct BranchTracker {
    pub branch: [C64; 5],
    hist: Vec<[C64; 10]>,
    pub flips: usize,
}

impl BranchTracker {
    pub fn new(branch: [C64; 5]) -> Self {
        Self { branch, hist: Vec::new(), flips: 0 }
    }

    /// Feeds the next sample; returns the continued roots.
    pub fn push(&mut self, s1: C64, s2: C64, dx: C64, index: usize) -> Result<RootSet, Error> {
        let p = RootSet::principal(&self.branch, s1, s2);
        let mut cur = [C64::new(0.0, 0.0); 10];
        for i in 0..5 {
            cur[i] = p.rho1[i];
            cur[5 + i] = p.rho2[i] * dx;
        }
        let n = self.hist.len();
        if n >= 1 {
            let last = self.hist[n - 1];
            for i in 0..10 {
                let (pred, step) = if n >= 2 {
                    let ll = self.hist[n - 2];
                    (last[i] * 2.0 - ll[i], (last[i] - ll[i]).norm())
                } else {
                    (last[i], 0.0)
                };
                let keep = (cur[i] - pred).norm();
                let flip = (cur[i] + pred).norm();
                if flip < keep {
                    cur[i] = -cur[i];
                    self.flips += 1;
                }
                let dev = keep.min(flip);
                if n >= 2 && dev > 0.5 * cur[i].norm().max(last[i].norm()) && dev > 4.0 * step {
                    return Err(Error::BranchJump { index });
                }
            }
        }
        self.hist.push(cur);
        if self.hist.len() > 2 {
            self.hist.remove(0);
        }
        let mut out = RootSet { rho1: [C64::new(0.0, 0.0); 5], rho2: [C64::new(0.0, 0.0); 5] };
        for i in 0..5 {
            out.rho1[i] = cur[i];
            out.rho2[i] = cur[5 + i] / dx;
        }
        Ok(out)
    }
}

/// Per-sample outcome of the quadrature check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleStatus {
    /// Residuals of `ds1/w1 + ds2/w2 = 0` and `s1 ds1/w1 + s2 ds2/w2 = dt`.
    Checked { r0: f64, r1: f64 },
    /// Too close to `x1 = x2` or a root of `R`.
    NearBranchPoint,
    /// Stencil runs off the ends of the series.
    Boundary,
}

/// Quadrature check over a trajectory.
#[derive(Debug, Clone)]
pub struct QuadratureReport {
    pub samples: Vec<SampleStatus>,
    /// Signs relating continued `sqrt R1(s_i)` to the relation, fitted at the first checked sample.
    pub initial_signs: (f64, f64),
    pub max_residual: f64,
    pub checked: usize,
    pub excluded: usize,
    /// Largest imaginary part seen in `s1, s2`.
    pub max_s_imag: f64,
}

impl QuadratureReport {
    pub fn fraction_below(&self, tol: f64) -> f64 {
        let ok = self
            .samples
            .iter()
            .filter(|s| matches!(s, SampleStatus::Checked { r0, r1 } if *r0 < tol && *r1 < tol))
            .count();
        if self.checked == 0 { 0.0 } else { ok as f64 / self.checked as f64 }
    }
}

/// Margin in `|x1 - x2|` below which samples are excluded.
pub const DX_MARGIN: f64 = 1e-6;

/// Separation variables along a trajectory, continued sample to sample.
pub fn s_series(qd: &QuarticData, traj: &Trajectory) -> Result<Vec<(SeparationVariables, ComplexCoordinates)>, Error> {
    let mut out: Vec<(SeparationVariables, ComplexCoordinates)> = Vec::with_capacity(traj.len());
    for st in &traj.states {
        let cc = to_complex_coords(st, qd.c0);
        let prev = out.last().map(|p| &p.0);
        let sv = s_from_x(qd, &cc, prev)?;
        out.push((sv, cc));
    }
    Ok(out)
}

/// Checks the quadrature relations by 5-point finite differences on a uniformly
/// sampled trajectory.
///
/// `ds2/dt` is taken from the series of `1/s2`, which stays bounded where `s2`
/// runs off to infinity.
pub fn quadrature_residuals(qd: &QuarticData, traj: &Trajectory) -> Result<QuadratureReport, Error> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::InvalidInput("trajectory needs at least five samples"));
    }
    let h = traj.times[1] - traj.times[0];
    if !(h > 0.0) || traj.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::InvalidInput("trajectory must be uniformly sampled"));
    }
    let quint = qd.quintic()?;
    let series = s_series(qd, traj)?;
    let mut tracker = BranchTracker::new(quint.roots());
    let mut rs = Vec::with_capacity(n);
    let mut near = Vec::with_capacity(n);
    let rscale = 1.0 + qd.k0().abs() + qd.l1.abs() * qd.l1.abs() + qd.l0().abs();
    let mut max_s_imag: f64 = 0.0;
    for (i, (sv, cc)) in series.iter().enumerate() {
        let dx = cc.x1 - cc.x2;
        let rt = tracker.push(sv.s1, sv.s2, dx, i)?;
        rs.push(rt);
        let r1 = qd.r(cc.x1).norm();
        near.push(dx.norm() < DX_MARGIN || r1 < 1e-12 * rscale * rscale);
        max_s_imag = max_s_imag.max(sv.s1.im.abs()).max(sv.s2.im.abs() / sv.s2.norm().max(1.0));
    }
    if near.iter().all(|b| *b) {
        return Err(Error::CoincidentPoints);
    }
    let s1: Vec<f64> = series.iter().map(|p| p.0.s1.re).collect();
    let inv2: Vec<f64> = series.iter().map(|p| 1.0 / p.0.s2.re).collect();
    let fd = |v: &[f64], i: usize| (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        if i < 2 || i + 2 >= n {
            terms.push(None);
            continue;
        }
        if (i - 2..=i + 2).any(|j| near[j]) {
            terms.push(Some(None));
            continue;
        }
        let ds1 = fd(&s1, i);
        let s2 = series[i].0.s2.re;
        let ds2 = -s2 * s2 * fd(&inv2, i);
        let a = ds1 / rs[i].sqrt_r1_s1();
        let b = ds2 / rs[i].sqrt_r1_s2();
        terms.push(Some(Some((a, b, s1[i], s2))));
    }
    // fit the two constant signs at the first checked sample
    let first = terms.iter().flatten().flatten().next().copied().ok_or(Error::CoincidentPoints)?;
    let mut best = (1.0, 1.0);
    let mut best_err = f64::INFINITY;
    for sg1 in [1.0, -1.0] {
        for sg2 in [1.0, -1.0] {
            let (a, b, x, y) = first;
            let e0 = (a * sg1 + b * sg2).norm();
            let e1 = (a * sg1 * x + b * sg2 * y - 1.0).norm();
            if e0 + e1 < best_err {
                best_err = e0 + e1;
                best = (sg1, sg2);
            }
        }
    }
    let mut samples = Vec::with_capacity(n);
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut excluded = 0;
    for t in terms {
        match t {
            None => samples.push(SampleStatus::Boundary),
            Some(None) => {
                excluded += 1;
                samples.push(SampleStatus::NearBranchPoint)
            }
            Some(Some((a, b, x, y))) => {
                let r0 = (a * best.0 + b * best.1).norm();
                let r1 = (a * best.0 * x + b * best.1 * y - 1.0).norm();
                max_residual = max_residual.max(r0).max(r1);
                checked += 1;
                samples.push(SampleStatus::Checked { r0, r1 });
            }
        }
    }
    Ok(QuadratureReport { samples, initial_signs: best, max_residual, checked, excluded, max_s_imag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn qd() -> QuarticData {
        QuarticData::new(2.0, 0.3, 0.5, 1.0)
    }

    #[test]
    fn coordinates_of_simple_states() {
        let c0 = 0.7;
        let cc = to_complex_coords(&MotionState::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0), c0);
        assert_eq!(cc.x1, c(1.0, 0.0));
        assert_eq!(cc.x2, c(1.0, 0.0));
        assert_eq!(cc.xi1, c(1.0 + c0, 0.0));
        assert_eq!(cc.xi2, c(1.0 + c0, 0.0));
        let cc = to_complex_coords(&MotionState::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0), c0);
        assert_eq!((cc.x1, cc.x2), (c(0.0, 1.0), c(0.0, -1.0)));
        assert_eq!((cc.xi1, cc.xi2), (c(-1.0, 0.0), c(-1.0, 0.0)));
    }

    #[test]
    fn xi_product_matches_integral() {
        let mut rng = crate::seeded_rng(21);
        for _ in 0..10_000 {
            let s = MotionState::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let c0 = rng.random_range(0.1..2.0);
            let cc = to_complex_coords(&s, c0);
            let k2 = crate::euler_poisson::first_integrals(c0, &s).k_sq;
            let p = cc.xi1 * cc.xi2;
            assert!((p.re - k2).abs() <= 1e-12 * k2.abs().max(1.0));
            assert_eq!(cc.x2, cc.x1.conj());
        }
    }

    #[test]
    fn quartic_identity_holds() {
        let q = qd();
        let mut rng = crate::seeded_rng(22);
        for _ in 0..10_000 {
            let x1 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let x2 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let r = quartic_identity_residual(&q, x1, x2).norm();
            assert!(r <= 1e-9 * quartic_identity_scale(&q, x1, x2));
            let a = q.r1_sym(x1, x2);
            assert!((a - q.r1_sym_frak(x1, x2)).norm() <= 1e-12 * a.norm().max(1.0) * 100.0);
        }
        let x = c(0.3, -1.2);
        assert_eq!(quartic_identity_residual(&q, x, x).norm(), 0.0);
    }

    #[test]
    fn quartic_frak_form() {
        let q = qd();
        let x1 = c(0.4, 1.1);
        let x2 = c(-0.2, 0.5);
        let (a, b, cc) = q.frak(x1, x2);
        let r = a * x1 * x1 + b * x1 * 2.0 + cc;
        assert!((r - q.r(x1)).norm() < 1e-12);
        let rs = a * x1 * x2 + b * (x1 + x2) + cc;
        assert!((rs - q.r_sym(x1, x2)).norm() < 1e-12);
        // x2 = 0 specialization
        let z = c(0.0, 0.0);
        let (_, b0, c0) = q.frak(x1, z);
        let lhs = q.r(x1) * q.r(z) - (b0 * x1 + c0).powi(2) - x1 * x1 * q.r1_sym(x1, z);
        assert!(lhs.norm() < 1e-11);
    }

    #[test]
    fn w_routes_agree() {
        let q = qd();
        let mut rng = crate::seeded_rng(23);
        for _ in 0..10_000 {
            let x1 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let x2 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let a = w_squared(&q, x1, x2, WRoute::Direct).unwrap();
            let b = w_squared(&q, x1, x2, WRoute::Factored).unwrap();
            let cc = w_squared(&q, x1, x2, WRoute::Separated).unwrap();
            let sc = a.norm().max(b.norm()).max(1e-300);
            assert!((a - b).norm() <= 1e-9 * sc && (a - cc).norm() <= 1e-9 * sc);
        }
        assert_eq!(w_squared(&q, c(1.0, 1.0), c(1.0, 1.0), WRoute::Factored), Err(Error::CoincidentPoints));
    }

    #[test]
    fn w_with_zero_k() {
        let q = QuarticData::new(1.0, 0.2, 0.8, 0.0);
        let (x1, x2) = (c(0.3, 0.4), c(-1.0, 0.2));
        let w = w_squared(&q, x1, x2, WRoute::Direct).unwrap();
        assert!((w - q.r1_sym(x1, x2).powi(2)).norm() < 1e-13);
    }

    #[test]
    fn quintic_examples() {
        assert_eq!(quintic_from_constants(1.0, 0.0, 0.7, 0.7), Err(Error::DegenerateQuintic));
        let qq = quintic_from_constants(2.0, 0.3, 0.5, 1.0).unwrap();
        let e = qq.real_e().unwrap();
        assert!(qq.k1 > e[0] && e[0] > e[1] && e[1] > qq.k2 && qq.k2 > e[2]);
        assert_eq!(qq.k1 - qq.k2, 1.0);
        for ei in qq.e {
            assert!(qq.cubic(ei).norm() < 1e-10);
        }
        let s = c(0.37, -0.2);
        assert!((qq.r1(s) - qq.r1_from_cubic(s)).norm() < 1e-12);
        assert!((poly::eval(&qq.r1_coeffs(), s) - qq.r1(s)).norm() < 1e-12);
    }

    #[test]
    fn s_invariants() {
        let q = qd();
        let mut rng = crate::seeded_rng(24);
        for _ in 0..1000 {
            let x1 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let x2 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let cc = coords_from_x(&q, x1, x2);
            let sv = s_from_x(&q, &cc, None).unwrap();
            let (a, b) = sv.invariant_residuals(&q, x1, x2);
            assert!(a < 1e-10 && b < 1e-10);
        }
    }

    #[test]
    fn separated_route_vanishes_at_k1() {
        let q = qd();
        let w = w_squared_separated(&q, c(0.0, 1.4), c(q.k1(), 0.0), c(-3.0, 0.0));
        assert_eq!(w.norm(), 0.0);
        assert!(w_squared_separated(&q, c(0.0, 1.4), c(1.3, 0.0), c(-3.0, 0.0)).norm() > 0.0);
    }
}
