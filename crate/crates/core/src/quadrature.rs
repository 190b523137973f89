//! Gauss–Legendre rules and the endpoint substitutions used for integrals with
//! inverse-square-root singularities.
//!
//! Integrands receive the abscissa together with exact distances to the
//! singular endpoints so that no accuracy is lost to cancellation near them.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Error;
use crate::C64;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn gauss_legendre(n: usize) -> Self {
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Plain rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            s += f(m + h * x) * *w;
        }
        s * h
    }

    /// `int_lo^hi f(x) dx` for `f` with inverse-square-root singularities at both
    /// ends, via `x = mid + half sin(theta)`.
    ///
    /// `f` receives `(x, x - lo, hi - x)`.
    pub fn sine_segment<F: FnMut(f64, f64, f64) -> C64>(&self, lo: f64, hi: f64, mut f: F) -> C64 {
        let h = 0.5 * (hi - lo);
        let mut s = C64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(self.weights.iter()) {
            // phi = (pi/4)(1 - t) keeps 1 +- sin(theta) free of cancellation
            let phi = 0.25 * PI * (1.0 - t);
            let (sp, cp) = (libm::sin(phi), libm::cos(phi));
            let d_hi = 2.0 * h * sp * sp;
            let d_lo = 2.0 * h * cp * cp;
            let x = if d_lo < d_hi { lo + d_lo } else { hi - d_hi };
            let jac = 2.0 * h * sp * cp;
            s += f(x, d_lo, d_hi) * (jac * w);
        }
        // d theta = (pi/2) dt
        s * (0.5 * PI)
    }

    /// `int_lo^(lo + width) f(x) dx` (width may be negative) for `f` singular like
    /// `|x - lo|^(-1/2)` at `lo` only, via `x = lo + width sin^2(theta)`.
    ///
    /// `f` receives `(x, x - lo)`.
    pub fn one_sided<F: FnMut(f64, f64) -> C64>(&self, lo: f64, width: f64, mut f: F) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(self.weights.iter()) {
            let th = 0.25 * PI * (1.0 + t);
            let (st, ct) = (libm::sin(th), libm::cos(th));
            let d = width * st * st;
            s += f(lo + d, d) * (2.0 * width * st * ct * w);
        }
        s * (0.25 * PI)
    }

    /// `int_(start)^(+-inf) f(x) dx` via `x = start + dir * W (1/u^2 - 1)`,
    /// `u in (0, 1]`; `dir = +1` integrates to `+inf`, `-1` to `-inf`.
    ///
    /// The integrand must decay at least like `|x|^(-3/2)`.
    pub fn tail<F: FnMut(f64) -> C64>(&self, start: f64, dir: f64, scale: f64, mut f: F) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(self.weights.iter()) {
            let u = 0.5 * (1.0 + t);
            let x = start + dir * scale * (1.0 / (u * u) - 1.0);
            s += f(x) * (2.0 * scale / (u * u * u) * w);
        }
        // du = dt/2, orientation from start outward
        s * (0.5 * dir)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Ladder of rules `n0, 2 n0, 4 n0, ...` for doubling refinement.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub rules: Vec<Rule>,
}

impl Ladder {
    pub fn new(n0: usize, levels: usize) -> Self {
        Self { rules: (0..levels).map(|k| Rule::gauss_legendre(n0 << k)).collect() }
    }

    /// Doubles the node count until successive results agree to
    /// `tol * max(|I|, floor)`. Returns the value and the node count used.
    pub fn refine<F: FnMut(&Rule) -> C64>(&self, tol: f64, floor: f64, mut eval: F) -> Result<(C64, usize), Error> {
        let mut prev = eval(&self.rules[0]);
        for r in &self.rules[1..] {
            let cur = eval(r);
            if (cur - prev).norm() <= tol * cur.norm().max(floor) {
                return Ok((cur, r.len()));
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergent)
    }

    /// [`Ladder::refine`] for several integrals sharing the same nodes; all
    /// components must converge.
    pub fn refine_vec<const N: usize, F: FnMut(&Rule) -> [C64; N]>(
        &self,
        tol: f64,
        floor: f64,
        mut eval: F,
    ) -> Result<([C64; N], usize), Error> {
        let mut prev = eval(&self.rules[0]);
        for r in &self.rules[1..] {
            let cur = eval(r);
            if cur.iter().zip(prev.iter()).all(|(a, b)| (a - b).norm() <= tol * a.norm().max(floor)) {
                return Ok((cur, r.len()));
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergent)
    }
}

impl Default for Ladder {
    fn default() -> Self {
        Self::new(20, 7)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let r = Rule::gauss_legendre(10);
        let v = r.integrate(0.0, 2.0, |x| c(x.powi(19), 0.0));
        assert!((v.re - 2f64.powi(20) / 20.0).abs() < 1e-9);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn arcsine_density() {
        // int_a^b dx / sqrt((x-a)(b-x)) = pi
        let r = Rule::gauss_legendre(8);
        let v = r.sine_segment(1.0, 4.0, |_, dl, dh| c(1.0 / libm::sqrt(dl * dh), 0.0));
        assert!((v.re - PI).abs() < 1e-13);
    }

    #[test]
    fn one_sided_and_tail() {
        let r = Rule::gauss_legendre(40);
        // int_0^2 dx / sqrt(x) = 2 sqrt 2
        let v = r.one_sided(0.0, 2.0, |_, d| c(1.0 / libm::sqrt(d), 0.0));
        assert!((v.re - 2.0 * libm::sqrt(2.0)).abs() < 1e-13);
        // int_0^-3 dx / sqrt(-x) = -2 sqrt 3
        let v = r.one_sided(0.0, -3.0, |_, d| c(1.0 / libm::sqrt(-d), 0.0));
        assert!((v.re + 2.0 * libm::sqrt(3.0)).abs() < 1e-13);
        // int_1^inf x^-2 = 1 and int_-1^-inf x^-2 = -1
        let v = r.tail(1.0, 1.0, 1.0, |x| c(1.0 / (x * x), 0.0));
        assert!((v.re - 1.0).abs() < 1e-13);
        let v = r.tail(-1.0, -1.0, 1.0, |x| c(1.0 / (x * x), 0.0));
        assert!((v.re + 1.0).abs() < 1e-13);
    }

    #[test]
    fn ladder_converges() {
        let l = Ladder::default();
        let (v, n) = l.refine(1e-13, 1.0, |r| r.integrate(0.0, 1.0, |x| c(libm::exp(x), 0.0))).unwrap();
        assert!((v.re - (libm::exp(1.0) - 1.0)).abs() < 1e-14);
        assert!(n <= 80);
    }
}
