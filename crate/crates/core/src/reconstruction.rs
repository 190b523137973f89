//! The motion expressed through the separation variables in the regime where the
//! quartic has four real roots.
//!
//! With `(a1..a5) = (e1, e2, e3, k1, k2)` and `rho_ia = sqrt(s_i - a_a)`:
//!
//! * `P_a = rho_1a rho_2a`,
//! * `P_ab = 2i (rho_1c rho_1d rho_1e rho_2a rho_2b - rho_1a rho_1b rho_2c rho_2d rho_2e) / (s1 - s2)`
//!   where `{c, d, e}` is the complement of `{a, b}`.
//!
//! `p, q, r, gamma''` are ratios of linear forms in these with the coefficient
//! families `L, M, N` (and `L1.., L2..`); `gamma'` is quadratic in the `P_ab`.

use alloc::vec::Vec;

use crate::error::Error;
use crate::euler_poisson::{first_integrals, MotionState, Trajectory};
use crate::quartic_class::{classify, RootClass};
use crate::separation::{
    s_series, to_complex_coords, BranchTracker, QuarticData, QuinticData, RootSet,
};
use crate::{c, C64};

/// Leading coefficient of `R1`, the constant in the product identities.
pub const R0: f64 = -4.0;

/// Coefficient families for one choice of the signs `tau_i` in
/// `sigma_i / sigma = i tau_i sqrt(l1 + e_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Families {
    pub l: C64,
    pub m: C64,
    pub n: C64,
    pub l1: C64,
    pub m1: C64,
    pub n1: C64,
    pub l2: C64,
    pub m2: C64,
    pub n2: C64,
}

/// Constants of the real four-root regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealCaseContext {
    pub qd: QuarticData,
    pub quintic: QuinticData,
    /// `e1 > e2 > e3`.
    pub e: [f64; 3],
    pub k1: f64,
    pub k2: f64,
    /// Branch points in the order `(e1, e2, e3, k1, k2)`.
    pub a: [f64; 5],
    /// `(e2 - e3)(e3 - e1)(e1 - e2)`.
    pub big_e: f64,
    /// `sqrt(l1 + e_i)`.
    pub sq: [f64; 3],
    /// Families with all `tau_i = +1`.
    pub base: Families,
}

/// Validates the regime and builds the constant families.
pub fn context(l1: f64, l: f64, c0: f64, k: f64) -> Result<RealCaseContext, Error> {
    let qd = QuarticData::new(l1, l, c0, k);
    if classify(l1, qd.k0(), qd.l0()) != RootClass::FourReal {
        return Err(Error::NotFourRealRegime);
    }
    let quintic = qd.quintic()?;
    let e = quintic.real_e().ok_or(Error::NotFourRealRegime)?;
    if !(e[0] > e[1] && e[1] > e[2] && e[2] > -l1) {
        return Err(Error::NotFourRealRegime);
    }
    let (k1, k2) = (quintic.k1, quintic.k2);
    if !(k1 > e[0] && e[0] > k2) {
        return Err(Error::RealityWindowViolated);
    }
    let sq = [libm::sqrt(l1 + e[0]), libm::sqrt(l1 + e[1]), libm::sqrt(l1 + e[2])];
    let big_e = (e[1] - e[2]) * (e[2] - e[0]) * (e[0] - e[1]);
    Ok(RealCaseContext {
        qd,
        quintic,
        e,
        k1,
        k2,
        a: [e[0], e[1], e[2], k1, k2],
        big_e,
        sq,
        base: families_for(&e, &sq, [1.0; 3]),
    })
}

fn families_for(e: &[f64; 3], sq: &[f64; 3], tau: [f64; 3]) -> Families {
    let s = [c(0.0, tau[0] * sq[0]), c(0.0, tau[1] * sq[1]), c(0.0, tau[2] * sq[2])];
    let (d1, d2, d3) = (e[1] - e[2], e[2] - e[0], e[0] - e[1]);
    let (q1, q2, q3) = (e[1] * e[1] - e[2] * e[2], e[2] * e[2] - e[0] * e[0], e[0] * e[0] - e[1] * e[1]);
    Families {
        l: s[0] * d1,
        m: s[1] * d2,
        n: s[2] * d3,
        l1: s[1] * s[2] * d1,
        m1: s[2] * s[0] * d2,
        n1: s[0] * s[1] * d3,
        l2: s[0] * q1,
        m2: s[1] * q2,
        n2: s[2] * q3,
    }
}

impl RealCaseContext {
    pub fn families(&self, tau: [f64; 3]) -> Families {
        families_for(&self.e, &self.sq, tau)
    }

    pub fn c0(&self) -> f64 {
        self.qd.c0
    }

    /// `h1 = sum (e2 - e3) sigma_1/sigma`, which equals `L + M + N`.
    pub fn h1(&self, tau: [f64; 3]) -> C64 {
        let e = &self.e;
        c(0.0, 1.0)
            * ((e[1] - e[2]) * tau[0] * self.sq[0]
                + (e[2] - e[0]) * tau[1] * self.sq[1]
                + (e[0] - e[1]) * tau[2] * self.sq[2])
    }

    /// Whether `(s1, s2)` lies in `[e1, k1] x (-inf, min(e3, k2)]`, up to `1e-9`
    /// relative slack.
    pub fn in_window(&self, s1: f64, s2: f64) -> bool {
        let slack = 1e-9 * (1.0 + self.k1.abs() + self.e[2].abs());
        s1 >= self.e[0] - slack && s1 <= self.k1 + slack && s2 <= self.e[2].min(self.k2) + slack
    }
}

/// The fifteen radical functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValues {
    pub s1: f64,
    pub s2: f64,
    /// The roots the values were built from.
    pub roots: RootSet,
    /// `P_1 .. P_5`.
    pub pa: [C64; 5],
    /// Symmetric table `P_ab`, zero diagonal.
    pub pab: [[C64; 5]; 5],
}

impl PValues {
    /// Builds all values from given square roots.
    pub fn from_roots(roots: &RootSet, s1: f64, s2: f64) -> Self {
        let (r1, r2) = (&roots.rho1, &roots.rho2);
        let mut pa = [c(0.0, 0.0); 5];
        for i in 0..5 {
            pa[i] = r1[i] * r2[i];
        }
        let mut pab = [[c(0.0, 0.0); 5]; 5];
        let den = s1 - s2;
        for a in 0..5 {
            for b in (a + 1)..5 {
                let mut t1 = r2[a] * r2[b];
                let mut t2 = r1[a] * r1[b];
                for o in (0..5).filter(|&o| o != a && o != b) {
                    t1 *= r1[o];
                    t2 *= r2[o];
                }
                let v = c(0.0, 2.0) * (t1 - t2) / den;
                pab[a][b] = v;
                pab[b][a] = v;
            }
        }
        Self { s1, s2, roots: *roots, pa, pab }
    }

    /// `P_ab` with one-based indices.
    pub fn p2(&self, a: usize, b: usize) -> C64 {
        self.pab[a - 1][b - 1]
    }

    /// `P_a` with a one-based index.
    pub fn p1(&self, a: usize) -> C64 {
        self.pa[a - 1]
    }

    /// Flips the root signs.
    pub fn with_signs(&self, rho1: &[f64; 5], rho2: &[f64; 5]) -> Self {
        let mut r = self.roots;
        for i in 0..5 {
            r.rho1[i] *= rho1[i];
            r.rho2[i] *= rho2[i];
        }
        Self::from_roots(&r, self.s1, self.s2)
    }
}

/// Values from principal roots; fails outside the admissible windows.
pub fn p_values(ctx: &RealCaseContext, s1: f64, s2: f64) -> Result<PValues, Error> {
    if !(s1.is_finite() && s2.is_finite()) {
        return Err(Error::InvalidInput("non-finite separation variable"));
    }
    if !ctx.in_window(s1, s2) {
        return Err(Error::OutsideWindow);
    }
    let roots = RootSet::principal(&ctx.quintic.roots(), c(s1, 0.0), c(s2, 0.0));
    Ok(PValues::from_roots(&roots, s1, s2))
}

/// Discrete choices left open by the formulas: a sign on each of the ten roots
/// and on each `sigma_i / sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSigns {
    pub rho1: [f64; 5],
    pub rho2: [f64; 5],
    pub tau: [f64; 3],
}

impl Default for BranchSigns {
    fn default() -> Self {
        Self { rho1: [1.0; 5], rho2: [1.0; 5], tau: [1.0; 3] }
    }
}

impl BranchSigns {
    /// The `2^9 * 8` combinations with `rho1[0] = +1`; flipping that root as
    /// well only duplicates another set.
    pub fn all() -> impl Iterator<Item = BranchSigns> {
        (0u32..(1 << 12)).map(|bits| {
            let sg = |k: u32| if bits >> k & 1 == 0 { 1.0 } else { -1.0 };
            let mut rho1 = [1.0; 5];
            let mut rho2 = [1.0; 5];
            for i in 1..5 {
                rho1[i] = sg(i as u32 - 1);
            }
            for i in 0..5 {
                rho2[i] = sg(4 + i as u32);
            }
            let tau = [sg(9), sg(10), sg(11)];
            BranchSigns { rho1, rho2, tau }
        })
    }
}

/// Which formula was replaced by the route through the algebraic integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Fallbacks {
    pub gamma: bool,
    pub gamma1: bool,
}

/// A reconstructed state with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub state: MotionState,
    /// Largest imaginary part among the six components before taking real parts.
    pub max_imag: f64,
    pub fallbacks: Fallbacks,
    /// Disagreement between the closed-form `gamma` and the energy route.
    pub gamma_routes_gap: f64,
    /// Disagreement between the closed-form `gamma'` and the area route.
    pub gamma1_routes_gap: f64,
}

/// Relative disagreement above which a closed form is replaced by the integral route.
pub const FALLBACK_TOL: f64 = 1e-8;

/// `(p, q, r, gamma, gamma', gamma'')` from the radical functions.
pub fn reconstruct_from(ctx: &RealCaseContext, pv: &PValues, tau: [f64; 3]) -> Result<Reconstruction, Error> {
    let f = ctx.families(tau);
    let c0 = ctx.c0();
    let l1 = ctx.qd.l1;
    let i = c(0.0, 1.0);
    let (p1, p2, p3) = (pv.p1(1), pv.p1(2), pv.p1(3));
    let d = f.l * p1 + f.m * p2 + f.n * p3;
    let dscale = (f.l * p1).norm() + (f.m * p2).norm() + (f.n * p3).norm();
    if d.norm() <= 1e-13 * dscale || d.norm() == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let (p23, p13, p12) = (pv.p2(2, 3), pv.p2(1, 3), pv.p2(1, 2));
    let p = -i * (f.l1 * p1 + f.m1 * p2 + f.n1 * p3) / d;
    let q = c(ctx.big_e, 0.0) / d;
    let x = f.l * p23 + f.m * p13 + f.n * p12;
    let r = -i * x / d;
    let g2 = (f.l1 * p23 + f.m1 * p13 + f.n1 * p12) / d / c0;

    let (ea, eb, ec) = (ctx.e[0], ctx.e[1], ctx.e[2]);
    let br = f.l * f.l * pv.p2(1, 4) * pv.p2(1, 5)
        + f.m * f.m * pv.p2(2, 4) * pv.p2(2, 5)
        + f.n * f.n * pv.p2(3, 4) * pv.p2(3, 5)
        + f.m * f.n * (pv.p2(2, 4) * pv.p2(3, 5) + pv.p2(2, 5) * pv.p2(3, 4) + p1 * (R0 * (eb - ec) * (eb - ec)))
        + f.n * f.l * (pv.p2(3, 4) * pv.p2(1, 5) + pv.p2(3, 5) * pv.p2(1, 4) + p2 * (R0 * (ec - ea) * (ec - ea)))
        + f.l * f.m * (pv.p2(1, 4) * pv.p2(2, 5) + pv.p2(1, 5) * pv.p2(2, 4) + p3 * (R0 * (ea - eb) * (ea - eb)));
    let g1_formula = -i * br / (d * d * 2.0) / c0;
    let g_formula = (-(f.l2 * p1 + f.m2 * p2 + f.n2 * p3) / d * R0 - x * x / (d * d) - 4.0 * l1) / (2.0 * c0);

    // integral routes: energy for gamma, area for gamma'
    let g_energy = ((p * p + q * q) * 2.0 + r * r - 6.0 * l1) / (2.0 * c0);
    let gap_g = (g_formula - g_energy).norm() / g_energy.norm().max(1.0);
    let mut fb = Fallbacks::default();
    let g = if gap_g > FALLBACK_TOL {
        fb.gamma = true;
        g_energy
    } else {
        g_formula
    };
    let g1_area = (2.0 * ctx.qd.l - r * g2 - p * g * 2.0) / (q * 2.0);
    let gap_g1 = (g1_formula - g1_area).norm() / g1_area.norm().max(1.0);
    let g1 = if gap_g1 > FALLBACK_TOL {
        fb.gamma1 = true;
        g1_area
    } else {
        g1_formula
    };
    let comps = [p, q, r, g, g1, g2];
    let max_imag = comps.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(Reconstruction {
        state: MotionState::new(p.re, q.re, r.re, g.re, g1.re, g2.re),
        max_imag,
        fallbacks: fb,
        gamma_routes_gap: gap_g,
        gamma1_routes_gap: gap_g1,
    })
}

/// Reconstruction at an in-window point with principal roots adjusted by `signs`.
pub fn reconstruct(ctx: &RealCaseContext, s1: f64, s2: f64, signs: &BranchSigns) -> Result<Reconstruction, Error> {
    let pv = p_values(ctx, s1, s2)?.with_signs(&signs.rho1, &signs.rho2);
    reconstruct_from(ctx, &pv, signs.tau)
}

/// Sign set minimizing the max-abs error against `target` for the given values.
pub fn fit_signs(ctx: &RealCaseContext, pv: &PValues, target: &MotionState) -> (BranchSigns, f64) {
    let mut best = (BranchSigns::default(), f64::INFINITY);
    for sg in BranchSigns::all() {
        let v = pv.with_signs(&sg.rho1, &sg.rho2);
        if let Ok(rc) = reconstruct_from(ctx, &v, sg.tau) {
            let err = rc.state.max_abs_diff(target).max(rc.max_imag);
            if err < best.1 {
                best = (sg, err);
            }
        }
    }
    best
}

/// A sign set whose output is real and carries the context's integrals, found
/// at an interior point of the window.
pub fn canonical_signs(ctx: &RealCaseContext) -> Result<BranchSigns, Error> {
    let s1 = 0.5 * (ctx.e[0] + ctx.k1);
    let s2 = ctx.e[2].min(ctx.k2) - 1.0;
    let pv = p_values(ctx, s1, s2)?;
    let k_sq = ctx.qd.k * ctx.qd.k;
    for sg in BranchSigns::all() {
        let v = pv.with_signs(&sg.rho1, &sg.rho2);
        let Ok(rc) = reconstruct_from(ctx, &v, sg.tau) else { continue };
        if rc.max_imag > 1e-9 {
            continue;
        }
        let it = first_integrals(ctx.c0(), &rc.state);
        let ok = (it.l1 - ctx.qd.l1).abs() < 1e-8
            && (it.l - ctx.qd.l).abs() < 1e-8
            && (it.k_sq - k_sq).abs() < 1e-8 * k_sq.max(1.0)
            && (it.norm - 1.0).abs() < 1e-8;
        if ok {
            return Ok(sg);
        }
    }
    Err(Error::NotFound)
}

/// Residual of the three algebraic integrals and `xi1 xi2 = k^2` on a state.
pub fn integral_residual(ctx: &RealCaseContext, s: &MotionState) -> f64 {
    let it = first_integrals(ctx.c0(), s);
    let k_sq = ctx.qd.k * ctx.qd.k;
    [
        (it.l1 - ctx.qd.l1).abs(),
        (it.l - ctx.qd.l).abs(),
        (it.k_sq - k_sq).abs() / k_sq.max(1.0),
        (it.norm - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Round trip along a trajectory.
#[derive(Debug, Clone)]
pub struct RoundTripReport {
    /// Max-abs error per sample; `None` where reconstruction was not possible.
    pub errors: Vec<Option<f64>>,
    pub signs: BranchSigns,
    /// Index of the sample used to fit the signs.
    pub fit_index: usize,
    /// Samples on which a closed form was replaced by the integral route.
    pub gamma_fallbacks: usize,
    pub gamma1_fallbacks: usize,
    pub max_imag: f64,
    /// Samples outside the windows by more than the slack.
    pub window_violations: usize,
}

impl RoundTripReport {
    pub fn fraction_below(&self, tol: f64) -> f64 {
        let n = self.errors.len();
        let ok = self.errors.iter().filter(|e| matches!(e, Some(v) if *v < tol)).count();
        if n == 0 { 0.0 } else { ok as f64 / n as f64 }
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Names of the formulas that fell back to the integral route at least once.
    pub fn fallback_components(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.gamma_fallbacks > 0 {
            v.push("gamma");
        }
        if self.gamma1_fallbacks > 0 {
            v.push("gamma1");
        }
        v
    }
}

/// Margin in `|x1 - x2|` below which a sample is not used to fit signs.
pub const FIT_MARGIN: f64 = 1e-3;

/// `reconstruct(s_from_x(state))` along a trajectory, with roots continued
/// sample to sample and signs fitted once at the first well-separated sample.
pub fn round_trip(ctx: &RealCaseContext, traj: &Trajectory) -> Result<RoundTripReport, Error> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory"));
    }
    let series = s_series(&ctx.qd, traj)?;
    let mut tracker = BranchTracker::new(ctx.quintic.roots());
    let mut pvs = Vec::with_capacity(series.len());
    let mut window_violations = 0;
    for (idx, (sv, cc)) in series.iter().enumerate() {
        let dx = cc.x1 - cc.x2;
        if dx.norm() == 0.0 {
            pvs.push(None);
            continue;
        }
        let rs = tracker.push(sv.s1, sv.s2, dx, idx)?;
        if !ctx.in_window(sv.s1.re, sv.s2.re) {
            window_violations += 1;
        }
        pvs.push(Some(PValues::from_roots(&rs, sv.s1.re, sv.s2.re)));
    }
    let fit_index = series
        .iter()
        .position(|(_, cc)| (cc.x1 - cc.x2).norm() > FIT_MARGIN)
        .ok_or(Error::CoincidentPoints)?;
    let pv0 = pvs[fit_index].as_ref().ok_or(Error::CoincidentPoints)?;
    let (signs, _) = fit_signs(ctx, pv0, &traj.states[fit_index]);
    let mut rep = RoundTripReport {
        errors: Vec::with_capacity(series.len()),
        signs,
        fit_index,
        gamma_fallbacks: 0,
        gamma1_fallbacks: 0,
        max_imag: 0.0,
        window_violations,
    };
    for (pv, st) in pvs.iter().zip(traj.states.iter()) {
        let Some(pv) = pv else {
            rep.errors.push(None);
            continue;
        };
        let v = pv.with_signs(&signs.rho1, &signs.rho2);
        match reconstruct_from(ctx, &v, signs.tau) {
            Ok(rc) => {
                rep.gamma_fallbacks += rc.fallbacks.gamma as usize;
                rep.gamma1_fallbacks += rc.fallbacks.gamma1 as usize;
                rep.max_imag = rep.max_imag.max(rc.max_imag);
                rep.errors.push(Some(rc.state.max_abs_diff(st)));
            }
            Err(_) => rep.errors.push(None),
        }
    }
    Ok(rep)
}

/// Separation variables of a single state, as reals.
pub fn s_of_state(ctx: &RealCaseContext, st: &MotionState) -> Result<(f64, f64), Error> {
    let cc = to_complex_coords(st, ctx.c0());
    let sv = crate::separation::s_from_x(&ctx.qd, &cc, None)?;
    Ok((sv.s1.re, sv.s2.re))
}

/// Maximum relative residuals of the six product identities over all index
/// assignments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub per_identity: [f64; 6],
    pub assignments: usize,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.per_identity.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the six identities for every ordering `(alpha..epsilon)` of the
/// five indices.
pub fn identity_suite(ctx: &RealCaseContext, s1: f64, s2: f64) -> Result<IdentityReport, Error> {
    let pv = p_values(ctx, s1, s2)?;
    Ok(identity_residuals(&ctx.a, &pv))
}

/// As [`identity_suite`] for arbitrary values (no window check).
pub fn identity_residuals(a: &[f64; 5], pv: &PValues) -> IdentityReport {
    let mut worst = [0.0f64; 6];
    let mut count = 0;
    for perm in permutations5() {
        let [al, be, ga, de, ep] = perm;
        let p = |i: usize| pv.pa[i];
        let b = |i: usize, j: usize| pv.pab[i][j];
        let d = |i: usize, j: usize| a[i] - a[j];
        let ppp = p(al) * p(be) * p(ga) * R0;
        let terms: [[C64; 3]; 6] = [
            [ppp, -b(be, ga) * (p(ga) * b(al, ga) - p(be) * b(al, be)) / d(be, ga), -b(al, de) * b(al, ep)],
            [ppp, -b(al, ga) * (p(al) * b(al, be) - p(ga) * b(be, ga)) / d(ga, al), -b(be, de) * b(be, ep)],
            [ppp, -b(al, be) * (p(be) * b(be, ga) - p(al) * b(al, ga)) / d(al, be), -b(ga, de) * b(ga, ep)],
            [
                (p(be) * p(be) + p(ga) * p(ga)) * p(al) * R0
                    - b(al, ga) * (p(be) * b(be, ga) - p(al) * b(al, ga)) / d(al, be),
                -b(al, be) * (p(al) * b(al, be) - p(ga) * b(be, ga)) / d(ga, al),
                -(b(be, de) * b(ga, ep) + b(be, ep) * b(ga, de) + p(al) * (R0 * d(be, ga) * d(be, ga))),
            ],
            [
                (p(ga) * p(ga) + p(al) * p(al)) * p(be) * R0
                    - b(al, be) * (p(ga) * b(al, ga) - p(be) * b(al, be)) / d(be, ga),
                -b(be, ga) * (p(be) * b(be, ga) - p(al) * b(al, ga)) / d(al, be),
                -(b(ga, de) * b(al, ep) + b(al, de) * b(ga, ep) + p(be) * (R0 * d(ga, al) * d(ga, al))),
            ],
            [
                (p(al) * p(al) + p(be) * p(be)) * p(ga) * R0
                    - b(be, ga) * (p(al) * b(al, be) - p(ga) * b(be, ga)) / d(ga, al),
                -b(al, ga) * (p(ga) * b(al, ga) - p(be) * b(al, be)) / d(be, ga),
                -(b(al, de) * b(be, ep) + b(al, ep) * b(be, de) + p(ga) * (R0 * d(al, be) * d(al, be))),
            ],
        ];
        for (w, t) in worst.iter_mut().zip(terms.iter()) {
            let sum: C64 = t.iter().sum();
            let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            *w = w.max(sum.norm() / scale);
        }
        count += 1;
    }
    IdentityReport { per_identity: worst, assignments: count }
}

fn permutations5() -> Vec<[usize; 5]> {
    let mut out = Vec::with_capacity(120);
    for a in 0..5 {
        for b in 0..5 {
            for c_ in 0..5 {
                for d in 0..5 {
                    for e in 0..5 {
                        let v = [a, b, c_, d, e];
                        let distinct = (0..5).all(|i| (0..i).all(|j| v[i] != v[j]));
                        if distinct {
                            out.push(v);
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn reference() -> RealCaseContext {
        context(2.0, 0.3, 0.5, 1.0).unwrap()
    }

    #[test]
    fn reference_context() {
        let ctx = reference();
        assert!((ctx.e[0] - 1.43489953).abs() < 1e-7);
        assert!((ctx.e[2] + 1.99936142).abs() < 1e-7);
        assert_eq!((ctx.k1, ctx.k2), (1.5, 0.5));
        let f = ctx.base;
        for z in [f.l, f.m, f.n, f.l2, f.m2, f.n2] {
            assert_eq!(z.re, 0.0);
        }
        for z in [f.l1, f.m1, f.n1] {
            assert_eq!(z.im, 0.0);
        }
        assert!((f.l + f.m + f.n - ctx.h1([1.0; 3])).norm() < 1e-15);
    }

    #[test]
    fn regime_errors() {
        // complex roots of the quartic
        assert_eq!(context(-1.0, 0.0, 1.0, 0.5), Err(Error::NotFourRealRegime));
        // raising c0 at l = 0.3 leaves the four-real regime before e1 reaches k1;
        // raising l does push e1 past k1
        assert_eq!(context(2.0, 0.3, 1.5, 1.0), Err(Error::NotFourRealRegime));
        let mut seen = false;
        for i in 1..400 {
            let l = 0.3 + 0.01 * i as f64;
            if let Err(Error::RealityWindowViolated) = context(2.0, l, 0.5, 1.0) {
                seen = true;
                break;
            }
        }
        assert!(seen);
    }

    #[test]
    fn p_value_signs() {
        let ctx = reference();
        let pv = p_values(&ctx, ctx.e[0], -3.0).unwrap();
        assert_eq!(pv.pa[0], c(0.0, 0.0));
        let pv = p_values(&ctx, 1.45, -3.0).unwrap();
        for i in 0..3 {
            assert!(pv.pa[i].re.abs() < 1e-15 && pv.pa[i].im != 0.0);
        }
        for (a, b) in [(1, 2), (0, 2), (0, 1)] {
            assert!(pv.pab[a][b].im.abs() < 1e-12 * pv.pab[a][b].norm());
        }
        assert_eq!(p_values(&ctx, 1.6, -3.0).unwrap_err(), Error::OutsideWindow);
        assert_eq!(p_values(&ctx, 1.45, 0.0).unwrap_err(), Error::OutsideWindow);
    }

    #[test]
    fn identities_hold() {
        let ctx = reference();
        let mut rng = crate::seeded_rng(5);
        for _ in 0..200 {
            let s1 = rng.random_range(ctx.e[0]..ctx.k1);
            let s2 = ctx.e[2] - rng.random_range(0.0..10.0);
            let rep = identity_suite(&ctx, s1, s2).unwrap();
            assert_eq!(rep.assignments, 120);
            assert!(rep.max_residual() < 1e-9, "{rep:?}");
        }
    }

    #[test]
    fn reconstruction_is_real_and_on_the_level_set() {
        let ctx = reference();
        let sg = canonical_signs(&ctx).unwrap();
        let mut rng = crate::seeded_rng(9);
        for _ in 0..200 {
            let s1 = rng.random_range(ctx.e[0]..ctx.k1);
            let s2 = ctx.e[2] - rng.random_range(1e-3..20.0);
            let rc = reconstruct(&ctx, s1, s2, &sg).unwrap();
            assert!(rc.max_imag < 1e-9, "{rc:?}");
            assert!(integral_residual(&ctx, &rc.state) < 1e-8);
            assert_eq!(rc.fallbacks, Fallbacks::default(), "{rc:?}");
            let (t1, t2) = s_of_state(&ctx, &rc.state).unwrap();
            assert!((t1 - s1).abs() < 1e-8 && (t2 - s2).abs() < 1e-8 * s2.abs());
        }
    }

    #[test]
    fn continuous_at_the_turning_point() {
        let ctx = reference();
        let sg = canonical_signs(&ctx).unwrap();
        let a = reconstruct(&ctx, ctx.e[0], -3.0, &sg).unwrap();
        let b = reconstruct(&ctx, ctx.e[0] + 1e-8, -3.0, &sg).unwrap();
        assert!(a.state.max_abs_diff(&b.state) < 1e-3);
        assert!(a.state.q.abs() > 0.0);
    }
}
