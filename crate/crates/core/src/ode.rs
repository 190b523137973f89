//! Dormand–Prince 5(4) with PI step control and the standard 4th-order dense output.

use alloc::vec::Vec;

use crate::error::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Zero means "choose automatically".
    pub h0: f64,
    pub max_steps: usize,
}

impl Dopri5Options {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h0: 0.0, max_steps: 50_000_000 }
    }
}

/// Step counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` and reports the solution at the
/// requested output times (monotone in the direction of integration).
///
/// `after_step` may modify the state after each accepted step (projection).
pub fn dopri5<const N: usize, F, P>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    outputs: &[f64],
    opts: Dopri5Options,
    mut after_step: P,
) -> Result<(Vec<[f64; N]>, SolverStats), Error>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    P: FnMut(&mut [f64; N]),
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut stats = SolverStats::default();
    let mut out = Vec::with_capacity(outputs.len());
    let mut next_out = 0usize;
    while next_out < outputs.len() && (outputs[next_out] - t0) * dir <= 0.0 {
        out.push(y0);
        next_out += 1;
    }
    if span == 0.0 {
        while next_out < outputs.len() {
            out.push(y0);
            next_out += 1;
        }
        return Ok((out, stats));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = if opts.h0 > 0.0 { opts.h0 } else { initial_step(&f, t, &y, &k1, dir, opts) };
    stats.evaluations += 1;
    h = h.min(span);

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let fac_min = 0.2;
    let fac_max = 10.0;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if h < 1e-14 * span.max(f64::MIN_POSITIVE) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = (t + dir * h - t_end) * dir >= 0.0;
        if last {
            h = (t_end - t).abs();
        }
        let hs = dir * h;

        let mut yt = [0.0; N];
        for i in 0..N {
            yt[i] = y[i] + hs * A21 * k1[i];
        }
        let k2 = f(t + C2 * hs, &yt);
        for i in 0..N {
            yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + C3 * hs, &yt);
        for i in 0..N {
            yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + C4 * hs, &yt);
        for i in 0..N {
            yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + C5 * hs, &yt);
        for i in 0..N {
            yt[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + hs, &yt);
        let mut ynew = [0.0; N];
        for i in 0..N {
            ynew[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = f(t + hs, &ynew);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = libm::sqrt(err / N as f64);

        let fac11 = libm::pow(err, expo1);
        let mut fac = fac11 / libm::pow(err_old, beta);
        fac = (fac / safe).clamp(1.0 / fac_max, 1.0 / fac_min);
        let hnew = h / fac;

        if err <= 1.0 {
            err_old = err.max(1e-4);
            stats.accepted += 1;
            let t_new = t + hs;
            // dense output on [t, t_new]
            while next_out < outputs.len() && (outputs[next_out] - t_new) * dir <= 0.0 {
                let theta = (outputs[next_out] - t) / hs;
                let th1 = 1.0 - theta;
                let mut yo = [0.0; N];
                for i in 0..N {
                    let ydiff = ynew[i] - y[i];
                    let bspl = hs * k1[i] - ydiff;
                    let r4 = hs
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                    let r3 = ydiff - hs * k7[i] - bspl;
                    yo[i] = y[i] + theta * (ydiff + th1 * (bspl + theta * (r3 + th1 * r4)));
                }
                out.push(yo);
                next_out += 1;
            }
            y = ynew;
            after_step(&mut y);
            k1 = if y == ynew { k7 } else { stats.evaluations += 1; f(t_new, &y) };
            t = t_new;
            if last {
                break;
            }
            h = if last_rejected { hnew.min(h) } else { hnew };
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / safe).min(1.0 / fac_min);
            last_rejected = true;
        }
    }
    while next_out < outputs.len() {
        out.push(y);
        next_out += 1;
    }
    Ok((out, stats))
}

fn initial_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], dir: f64, o: Dopri5Options) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = o.atol + o.rtol * y[i].abs();
        dnf += (k1[i] / sk) * (k1[i] / sk);
        dny += (y[i] / sk) * (y[i] / sk);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { libm::sqrt(dny / dnf) * 0.01 };
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y[i] + dir * h * k1[i];
    }
    let k2 = f(t + dir * h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = o.atol + o.rtol * y[i].abs();
        der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    let der2 = libm::sqrt(der2) / h;
    let der12 = der2.max(libm::sqrt(dnf));
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { libm::pow(0.01 / der12, 0.2) };
    h = (100.0 * h).min(h1);
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let outs: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let (ys, st) = dopri5(f, 0.0, [1.0, 0.0], 10.0, &outs, Dopri5Options::with_tol(1e-11), |_| {}).unwrap();
        for (t, y) in outs.iter().zip(ys.iter()) {
            assert!((y[0] - libm::cos(*t)).abs() < 1e-9, "t={t}");
        }
        assert!(st.accepted > 10);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let (ys, _) = dopri5(f, 1.0, [libm::exp(1.0)], 0.0, &[0.5, 0.0], Dopri5Options::with_tol(1e-12), |_| {}).unwrap();
        assert!((ys[0][0] - libm::exp(0.5)).abs() < 1e-10);
        assert!((ys[1][0] - 1.0).abs() < 1e-10);
    }
}
