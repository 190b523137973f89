//! Equations of motion of the heavy rigid body, first integrals, direction-cosine
//! propagation, and a seeded search for states with prescribed integrals.

use alloc::vec::Vec;
use nalgebra::{Matrix3, Matrix4, Matrix4x6, Vector4};
use rand::Rng;

use crate::error::Error;
use crate::ode::{dopri5, Dopri5Options, SolverStats};
use crate::{c, C64};

/// Inertia moments, weight factor and center of gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParameters {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mg: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
}

/// Relative tolerance for `A = B = 2C` style equality tests.
pub const PARAM_EQ_TOL: f64 = 1e-12;

pub(crate) fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

impl BodyParameters {
    /// Normalized Kovalevskaya body: `A = B = 2`, `C = 1`, `Mg = 1`, `x0 = c0`.
    pub fn kovalevskaya(c0: f64) -> Self {
        Self { a: 2.0, b: 2.0, c: 1.0, mg: 1.0, x0: c0, y0: 0.0, z0: 0.0 }
    }

    /// Torque-free body.
    pub fn euler(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, mg: 1.0, x0: 0.0, y0: 0.0, z0: 0.0 }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let all = [self.a, self.b, self.c, self.mg, self.x0, self.y0, self.z0];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite body parameter"));
        }
        if self.a <= 0.0 || self.b <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidInput("inertia moments must be positive"));
        }
        Ok(())
    }

    /// Physical inertia tensor (warning level only).
    pub fn triangle_ok(&self) -> bool {
        self.a <= self.b + self.c && self.b <= self.c + self.a && self.c <= self.a + self.b
    }

    pub fn is_kovalevskaya_tol(&self, tol: f64) -> bool {
        rel_eq(self.a, self.b, tol)
            && rel_eq(self.a, 2.0 * self.c, tol)
            && self.z0.abs() <= tol * (self.x0.abs() + self.y0.abs()).max(f64::MIN_POSITIVE)
            && (self.x0 != 0.0 || self.y0 != 0.0)
    }

    pub fn is_kovalevskaya(&self) -> bool {
        self.is_kovalevskaya_tol(PARAM_EQ_TOL)
    }

    /// `c0 = Mg x0` once the body is in the normalized frame (`y0 = 0`, `C = 1`).
    pub fn c0(&self) -> f64 {
        self.mg * libm::hypot(self.x0, self.y0) / self.c
    }

    /// Converts a Kovalevskaya body to the normalized constant `c0` with `C = 1`.
    ///
    /// Rotates the xy axes to put the center on the x axis and rescales time so that
    /// `C = 1`. Returns `None` if the body is not in the Kovalevskaya case.
    pub fn normalized_c0(&self) -> Option<f64> {
        if self.is_kovalevskaya() { Some(self.c0()) } else { None }
    }
}

/// Angular velocity and vertical unit vector in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionState {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl MotionState {
    pub const fn new(p: f64, q: f64, r: f64, gamma: f64, gamma1: f64, gamma2: f64) -> Self {
        Self { p, q, r, gamma, gamma1, gamma2 }
    }
    pub fn to_array(&self) -> [f64; 6] {
        [self.p, self.q, self.r, self.gamma, self.gamma1, self.gamma2]
    }
    pub fn from_array(y: &[f64; 6]) -> Self {
        Self::new(y[0], y[1], y[2], y[3], y[4], y[5])
    }
    pub fn gamma_norm_sq(&self) -> f64 {
        self.gamma * self.gamma + self.gamma1 * self.gamma1 + self.gamma2 * self.gamma2
    }
    pub fn max_abs_diff(&self, other: &MotionState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..6).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

/// The four conserved quantities of the Kovalevskaya case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralSet {
    pub l1: f64,
    pub l: f64,
    pub k_sq: f64,
    pub norm: f64,
    /// Imaginary part of `xi1 * xi2`, a numerical health metric.
    pub k_sq_imag: f64,
}

impl IntegralSet {
    pub fn target(l1: f64, l: f64, k_sq: f64) -> Self {
        Self { l1, l, k_sq, norm: 1.0, k_sq_imag: 0.0 }
    }
    pub fn as_array(&self) -> [f64; 4] {
        [self.l1, self.l, self.k_sq, self.norm]
    }
}

/// Full direction-cosine matrix; rows are `(alpha, alpha', alpha'')`,
/// `(beta, beta', beta'')` and `(gamma, gamma', gamma'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationState {
    pub m: [[f64; 3]; 3],
}

impl OrientationState {
    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Completes a unit vertical `gamma` to a proper rotation.
    pub fn from_gamma(g: [f64; 3]) -> Self {
        let n = libm::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        let g = [g[0] / n, g[1] / n, g[2] / n];
        // pick the axis least aligned with g
        let mut e = [0.0; 3];
        let idx = (0..3).min_by(|&i, &j| g[i].abs().partial_cmp(&g[j].abs()).unwrap()).unwrap_or(0);
        e[idx] = 1.0;
        let d = e[0] * g[0] + e[1] * g[1] + e[2] * g[2];
        let mut a = [e[0] - d * g[0], e[1] - d * g[1], e[2] - d * g[2]];
        let na = libm::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        for v in a.iter_mut() {
            *v /= na;
        }
        // beta = gamma x alpha so that (alpha, beta, gamma) is right-handed
        let b = [g[1] * a[2] - g[2] * a[1], g[2] * a[0] - g[0] * a[2], g[0] * a[1] - g[1] * a[0]];
        Self { m: [a, b, g] }
    }

    fn mat(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.m[i][j])
    }

    /// `max |M M^T - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = self.mat();
        let d = m * m.transpose() - Matrix3::identity();
        d.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.mat().determinant()
    }
}

/// Sampled solution with solver metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MotionState>,
    pub orientations: Option<Vec<OrientationState>>,
    pub stats: SolverStats,
    pub tol: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Right-hand side of the general equations of motion.
pub fn rhs_general(pr: &BodyParameters, s: &MotionState) -> MotionState {
    let a1 = pr.b - pr.c;
    let b1 = pr.c - pr.a;
    let c1 = pr.a - pr.b;
    let (x0, y0, z0) = (pr.mg * pr.x0, pr.mg * pr.y0, pr.mg * pr.z0);
    MotionState {
        p: (a1 * s.q * s.r + (y0 * s.gamma2 - z0 * s.gamma1)) / pr.a,
        q: (b1 * s.r * s.p + (z0 * s.gamma - x0 * s.gamma2)) / pr.b,
        r: (c1 * s.p * s.q + (x0 * s.gamma1 - y0 * s.gamma)) / pr.c,
        gamma: s.r * s.gamma1 - s.q * s.gamma2,
        gamma1: s.p * s.gamma2 - s.r * s.gamma,
        gamma2: s.q * s.gamma - s.p * s.gamma1,
    }
}

/// Right-hand side in the normalized Kovalevskaya form.
pub fn rhs_kovalevskaya(c0: f64, s: &MotionState) -> MotionState {
    MotionState {
        p: 0.5 * s.q * s.r,
        q: -0.5 * (s.p * s.r + c0 * s.gamma2),
        r: c0 * s.gamma1,
        gamma: s.r * s.gamma1 - s.q * s.gamma2,
        gamma1: s.p * s.gamma2 - s.r * s.gamma,
        gamma2: s.q * s.gamma - s.p * s.gamma1,
    }
}

/// Integration settings.
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    /// Sample times; if empty, samples every `sample_step` from 0 to `t_end`.
    pub sample_times: Vec<f64>,
    pub sample_step: f64,
    /// Renormalize `gamma` after each accepted step.
    pub project_gamma: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { sample_times: Vec::new(), sample_step: 0.0, project_gamma: false }
    }
}

impl IntegrateOptions {
    pub fn every(step: f64) -> Self {
        Self { sample_step: step, ..Self::default() }
    }
}

fn sample_grid(t_end: f64, opts: &IntegrateOptions) -> Vec<f64> {
    if !opts.sample_times.is_empty() {
        return opts.sample_times.clone();
    }
    if opts.sample_step > 0.0 {
        let n = libm::round(t_end.abs() / opts.sample_step) as usize;
        let sgn = if t_end >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (0..=n).map(|k| sgn * k as f64 * opts.sample_step).collect();
        if let Some(last) = v.last_mut() {
            if (*last - t_end).abs() < 1e-9 * opts.sample_step {
                *last = t_end;
            }
        }
        return v;
    }
    alloc::vec![0.0, t_end]
}

fn check_tol(tol: f64) -> Result<(), Error> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::InvalidInput("tol must lie in [1e-14, 1e-3]"));
    }
    Ok(())
}

fn project(y: &mut [f64], at: usize) {
    let n = libm::sqrt(y[at] * y[at] + y[at + 1] * y[at + 1] + y[at + 2] * y[at + 2]);
    if n > 0.0 {
        y[at] /= n;
        y[at + 1] /= n;
        y[at + 2] /= n;
    }
}

/// Adaptive integration of the general equations from `t = 0` to `t_end`.
pub fn integrate(
    params: &BodyParameters,
    state0: MotionState,
    t_end: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, Error> {
    check_tol(tol)?;
    params.validate()?;
    let times = sample_grid(t_end, opts);
    let pr = *params;
    let f = move |_t: f64, y: &[f64; 6]| rhs_general(&pr, &MotionState::from_array(y)).to_array();
    let proj = opts.project_gamma;
    let (ys, stats) = dopri5(f, 0.0, state0.to_array(), t_end, &times, Dopri5Options::with_tol(tol), |y| {
        if proj {
            project(y, 3)
        }
    })?;
    Ok(Trajectory {
        times,
        states: ys.iter().map(MotionState::from_array).collect(),
        orientations: None,
        stats,
        tol,
    })
}

/// Adaptive integration in the normalized Kovalevskaya form.
pub fn integrate_kovalevskaya(
    c0: f64,
    state0: MotionState,
    t_end: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, Error> {
    integrate(&BodyParameters::kovalevskaya(c0), state0, t_end, tol, opts)
}

/// Time derivative of the direction-cosine matrix.
pub fn cosine_rhs(s: &MotionState, o: &OrientationState) -> OrientationState {
    let (p, q, r) = (s.p, s.q, s.r);
    let row = |v: [f64; 3]| [v[1] * r - v[2] * q, v[2] * p - v[0] * r, v[0] * q - v[1] * p];
    OrientationState { m: [row(o.m[0]), row(o.m[1]), row(o.m[2])] }
}

/// Integrates the motion together with the two remaining rows of the rotation.
///
/// The gamma row of `orient0` is replaced by the state's gamma.
pub fn integrate_with_orientation(
    params: &BodyParameters,
    state0: MotionState,
    orient0: OrientationState,
    t_end: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, Error> {
    check_tol(tol)?;
    params.validate()?;
    let times = sample_grid(t_end, opts);
    let pr = *params;
    let mut y0 = [0.0; 12];
    y0[..6].copy_from_slice(&state0.to_array());
    y0[6..9].copy_from_slice(&orient0.m[0]);
    y0[9..12].copy_from_slice(&orient0.m[1]);
    let f = move |_t: f64, y: &[f64; 12]| {
        let s = MotionState::new(y[0], y[1], y[2], y[3], y[4], y[5]);
        let ds = rhs_general(&pr, &s);
        let o = OrientationState { m: [[y[6], y[7], y[8]], [y[9], y[10], y[11]], [y[3], y[4], y[5]]] };
        let d = cosine_rhs(&s, &o);
        let mut out = [0.0; 12];
        out[..6].copy_from_slice(&ds.to_array());
        out[6..9].copy_from_slice(&d.m[0]);
        out[9..12].copy_from_slice(&d.m[1]);
        out
    };
    let proj = opts.project_gamma;
    let (ys, stats) = dopri5(f, 0.0, y0, t_end, &times, Dopri5Options::with_tol(tol), |y| {
        if proj {
            project(y, 3)
        }
    })?;
    let states = ys.iter().map(|y| MotionState::new(y[0], y[1], y[2], y[3], y[4], y[5])).collect();
    let orients = ys
        .iter()
        .map(|y| OrientationState { m: [[y[6], y[7], y[8]], [y[9], y[10], y[11]], [y[3], y[4], y[5]]] })
        .collect();
    Ok(Trajectory { times, states, orientations: Some(orients), stats, tol })
}

/// `xi1 = (p + qi)^2 + c0 (gamma + i gamma')` and its conjugate partner.
pub fn xi_pair(c0: f64, s: &MotionState) -> (C64, C64) {
    let x1 = c(s.p, s.q);
    let x2 = c(s.p, -s.q);
    (x1 * x1 + c0 * c(s.gamma, s.gamma1), x2 * x2 + c0 * c(s.gamma, -s.gamma1))
}

/// The four integrals of the Kovalevskaya case.
pub fn first_integrals(c0: f64, s: &MotionState) -> IntegralSet {
    let l1 = (2.0 * (s.p * s.p + s.q * s.q) + s.r * s.r - 2.0 * c0 * s.gamma) / 6.0;
    let l = (2.0 * (s.p * s.gamma + s.q * s.gamma1) + s.r * s.gamma2) / 2.0;
    let (xi1, xi2) = xi_pair(c0, s);
    let k = xi1 * xi2;
    IntegralSet { l1, l, k_sq: k.re, norm: s.gamma_norm_sq(), k_sq_imag: k.im }
}

/// Largest drift of each integral relative to `max(|I0|, 1)` along a trajectory.
pub fn integral_drift(c0: f64, traj: &Trajectory) -> [f64; 4] {
    let mut out = [0.0; 4];
    let Some(first) = traj.states.first() else { return out };
    let i0 = first_integrals(c0, first).as_array();
    for s in &traj.states {
        let i = first_integrals(c0, s).as_array();
        for k in 0..4 {
            out[k] = f64::max(out[k], (i[k] - i0[k]).abs() / i0[k].abs().max(1.0));
        }
    }
    out
}

/// Energy, area integral and `|gamma|^2` of the general equations.
pub fn general_integrals(pr: &BodyParameters, s: &MotionState) -> [f64; 3] {
    let energy = 0.5 * (pr.a * s.p * s.p + pr.b * s.q * s.q + pr.c * s.r * s.r)
        - pr.mg * (pr.x0 * s.gamma + pr.y0 * s.gamma1 + pr.z0 * s.gamma2);
    let area = pr.a * s.p * s.gamma + pr.b * s.q * s.gamma1 + pr.c * s.r * s.gamma2;
    [energy, area, s.gamma_norm_sq()]
}

/// [`integral_drift`] for the three classical integrals.
pub fn general_drift(pr: &BodyParameters, traj: &Trajectory) -> [f64; 3] {
    let mut out = [0.0; 3];
    let Some(first) = traj.states.first() else { return out };
    let i0 = general_integrals(pr, first);
    for s in &traj.states {
        let i = general_integrals(pr, s);
        for k in 0..3 {
            out[k] = f64::max(out[k], (i[k] - i0[k]).abs() / i0[k].abs().max(1.0));
        }
    }
    out
}

fn integral_residual(c0: f64, y: &[f64; 6], t: &IntegralSet) -> Vector4<f64> {
    let i = first_integrals(c0, &MotionState::from_array(y));
    Vector4::new(i.l1 - t.l1, i.l - t.l, i.k_sq - t.k_sq, i.norm - t.norm)
}

fn integral_jacobian(c0: f64, y: &[f64; 6]) -> Matrix4x6<f64> {
    let (p, q, r, g, g1, g2) = (y[0], y[1], y[2], y[3], y[4], y[5]);
    // k^2 = |xi|^2, xi = (p^2 - q^2 + c0 g) + i (2 p q + c0 g1)
    let u = p * p - q * q + c0 * g;
    let v = 2.0 * p * q + c0 * g1;
    Matrix4x6::from_row_slice(&[
        4.0 * p / 6.0, 4.0 * q / 6.0, 2.0 * r / 6.0, -2.0 * c0 / 6.0, 0.0, 0.0,
        g, g1, g2 / 2.0, p, q, r / 2.0,
        2.0 * u * 2.0 * p + 2.0 * v * 2.0 * q, 2.0 * u * (-2.0 * q) + 2.0 * v * 2.0 * p, 0.0, 2.0 * u * c0, 2.0 * v * c0, 0.0,
        0.0, 0.0, 0.0, 2.0 * g, 2.0 * g1, 2.0 * g2,
    ])
}

/// Seeded damped Gauss–Newton search with random restarts for a state whose
/// integrals match `target` within `1e-10`.
pub fn state_from_invariants(c0: f64, target: &IntegralSet, seed: u64) -> Result<MotionState, Error> {
    if !target.norm.is_finite() || (target.norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("target norm must be 1"));
    }
    if target.k_sq < 0.0 {
        // product of complex conjugates is nonnegative for real states
        return Err(Error::NotFound);
    }
    let mut rng = crate::seeded_rng(seed);
    let scale = 1.0 + target.l1.abs().max(target.l.abs()).max(libm::sqrt(target.k_sq.abs())).max(c0.abs());
    let wsc = libm::sqrt(scale);
    for _restart in 0..400 {
        let mut y = [0.0; 6];
        for v in y.iter_mut().take(3) {
            *v = rng.random_range(-1.5..1.5) * wsc;
        }
        let mut g = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = libm::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).max(1e-3);
        for v in g.iter_mut() {
            *v /= n;
        }
        y[3..].copy_from_slice(&g);
        let mut res = integral_residual(c0, &y, target);
        for _it in 0..200 {
            let rn = res.norm();
            if rn < 1e-13 * scale {
                break;
            }
            let j = integral_jacobian(c0, &y);
            let jjt: Matrix4<f64> = j * j.transpose();
            let Some(sol) = (jjt + Matrix4::identity() * 1e-14 * jjt.norm()).lu().solve(&res) else { break };
            let step = j.transpose() * sol;
            let mut lam = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let mut cand = y;
                for k in 0..6 {
                    cand[k] -= lam * step[k];
                }
                let r2 = integral_residual(c0, &cand, target);
                if r2.norm() < rn {
                    y = cand;
                    res = r2;
                    improved = true;
                    break;
                }
                lam *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let ok = res[0].abs() < 1e-10 && res[1].abs() < 1e-10 && res[2].abs() < 1e-10 * (1.0 + target.k_sq) && res[3].abs() < 1e-10;
        if ok {
            return Ok(MotionState::from_array(&y));
        }
    }
    Err(Error::NotFound)
}
