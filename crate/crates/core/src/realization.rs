//! Mount point for a body given its central inertia triple.

use alloc::vec::Vec;

use crate::error::Error;

/// Relative tolerance on `A1 = 2 (B1 - C1)`.
pub const RATIO_TOL: f64 = 1e-10;

/// Central principal moments and total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTriple {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub m: f64,
}

impl InertiaTriple {
    pub fn new(a1: f64, b1: f64, c1: f64, m: f64) -> Result<Self, Error> {
        let t = Self { a1, b1, c1, m };
        if [a1, b1, c1, m].iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::InvalidInput("inertia and mass must be positive and finite"));
        }
        Ok(t)
    }

    /// Triangle inequalities of a physical body; a violation is only a warning.
    pub fn triangle_ok(&self) -> bool {
        self.a1 <= self.b1 + self.c1 && self.b1 <= self.a1 + self.c1 && self.c1 <= self.a1 + self.b1
    }
}

/// Fixed point at `(a, b, c)` from the centre of gravity along the central axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountSpec {
    pub offset: [f64; 3],
    /// Principal moments `(A, B, C)` about the fixed point.
    pub moments: [f64; 3],
}

impl MountSpec {
    pub fn a(&self) -> f64 {
        self.offset[0]
    }
}

/// Moments and products of inertia about a point displaced by `d` from the centre.
pub fn moments_at(t: &InertiaTriple, d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let [a, b, c] = d;
    let m = t.m;
    let moments = [t.a1 + m * (b * b + c * c), t.b1 + m * (a * a + c * c), t.c1 + m * (a * a + b * b)];
    // D' (yz), E' (xz), F' (xy)
    let products = [m * b * c, m * a * c, m * a * b];
    (moments, products)
}

/// `a = sqrt((A1 - B1)/M)` on the first axis.
pub fn design_mount(t: &InertiaTriple) -> Result<MountSpec, Error> {
    let want = 2.0 * (t.b1 - t.c1);
    if (t.a1 - want).abs() > RATIO_TOL * t.a1.abs().max(want.abs()) {
        return Err(Error::ConditionViolated);
    }
    if t.b1 <= 2.0 * t.c1 {
        return Err(Error::NotRealizable);
    }
    let a = libm::sqrt((t.a1 - t.b1) / t.m);
    let (moments, _) = moments_at(t, [a, 0.0, 0.0]);
    Ok(MountSpec { offset: [a, 0.0, 0.0], moments })
}

/// Why an off-axis mount cannot give `A = B = 2C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// `b != 0`: the centre of gravity leaves the first axis and `F' = M a b` no longer vanishes.
    OffsetB,
    /// `c != 0`: `z0 != 0` and `E' = M a c` no longer vanishes.
    OffsetC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MountReport {
    pub moments: [f64; 3],
    pub products: [f64; 3],
    /// Centre of gravity relative to the fixed point.
    pub centre: [f64; 3],
    /// `B1 + M a^2 - A1`.
    pub b_defect: f64,
    /// `C1 + M a^2 - A1/2`.
    pub c_defect: f64,
    /// `A - B` and `A - 2C` at the fixed point.
    pub equal_defect: f64,
    pub half_defect: f64,
    pub witnesses: Vec<Witness>,
}

impl MountReport {
    pub fn max_defect(&self) -> f64 {
        [self.b_defect, self.c_defect, self.equal_defect, self.half_defect, self.products[0], self.products[1], self.products[2], self.centre[1], self.centre[2]]
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn verified(&self, tol: f64) -> bool {
        self.witnesses.is_empty() && self.max_defect() <= tol
    }
}

pub fn verify_mount(t: &InertiaTriple, spec: &MountSpec) -> MountReport {
    let [a, b, c] = spec.offset;
    let (moments, products) = moments_at(t, spec.offset);
    let mut witnesses = Vec::new();
    if b != 0.0 {
        witnesses.push(Witness::OffsetB);
    }
    if c != 0.0 {
        witnesses.push(Witness::OffsetC);
    }
    MountReport {
        moments,
        products,
        centre: [-a, -b, -c],
        b_defect: t.b1 + t.m * a * a - t.a1,
        c_defect: t.c1 + t.m * a * a - t.a1 / 2.0,
        equal_defect: moments[0] - moments[1],
        half_defect: moments[0] - 2.0 * moments[2],
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn reference_mount() {
        let t = InertiaTriple::new(4.0, 3.0, 1.0, 1.0).unwrap();
        let s = design_mount(&t).unwrap();
        assert_eq!(s.a(), 1.0);
        assert_eq!(s.moments, [4.0, 4.0, 2.0]);
        let r = verify_mount(&t, &s);
        assert_eq!(r.max_defect(), 0.0);
        assert!(r.verified(1e-14));
    }

    #[test]
    fn rejections() {
        let t = InertiaTriple::new(4.0, 3.0, 1.5, 1.0).unwrap();
        assert_eq!(design_mount(&t), Err(Error::ConditionViolated));
        let t = InertiaTriple::new(2.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(design_mount(&t), Err(Error::NotRealizable));
        assert!(InertiaTriple::new(-1.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sensitivity_and_witnesses() {
        let t = InertiaTriple::new(4.0, 3.0, 1.0, 2.0).unwrap();
        let mut s = design_mount(&t).unwrap();
        let a = s.a();
        s.offset[0] += 1e-3;
        let r = verify_mount(&t, &s);
        assert!((r.b_defect - 2.0 * t.m * a * 1e-3).abs() < 1e-5);
        s.offset = [a, 0.1, 0.2];
        let r = verify_mount(&t, &s);
        assert_eq!(r.witnesses, [Witness::OffsetB, Witness::OffsetC]);
        assert!(!r.verified(1e-6));
    }

    #[test]
    fn round_trip_random() {
        let mut rng = crate::seeded_rng(8);
        for _ in 0..1000 {
            let c1 = rng.random_range(0.1..2.0);
            let b1 = 2.0 * c1 + rng.random_range(0.01..3.0);
            let m = rng.random_range(0.1..5.0);
            let t = InertiaTriple::new(2.0 * (b1 - c1), b1, c1, m).unwrap();
            let s = design_mount(&t).unwrap();
            let r = verify_mount(&t, &s);
            assert!(r.max_defect() <= 1e-14 * t.a1.max(1.0), "{r:?}");
            // boundary: NotRealizable exactly when B1 <= 2 C1
            let u = InertiaTriple::new(2.0 * c1, 2.0 * c1, c1, m).unwrap();
            assert_eq!(design_mount(&u), Err(Error::NotRealizable));
        }
    }
}
