use proptest::prelude::*;

use kovtop_core::euler_poisson::{
    first_integrals, integrate, rhs_general, rhs_kovalevskaya, BodyParameters, IntegrateOptions, MotionState,
};
use kovtop_core::quartic_class::{self, RootClass};
use kovtop_core::realization::{design_mount, verify_mount, InertiaTriple};
use kovtop_core::separation::{quartic_identity_residual, quartic_identity_scale, w_squared, QuarticData, WRoute};
use kovtop_core::Complex64 as C64;

fn state(p: [f64; 3], g: [f64; 3]) -> MotionState {
    let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    MotionState { p: p[0], q: p[1], r: p[2], gamma: g[0] / n, gamma1: g[1] / n, gamma2: g[2] / n }
}

fn unit_dir() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("nonzero", |g| g.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn specialised_rhs_matches_general(c0 in 0.1..3.0f64, p in prop::array::uniform3(-2.0..2.0f64), g in unit_dir()) {
        let s = state(p, g);
        let a = rhs_kovalevskaya(c0, &s).to_array();
        let b = rhs_general(&BodyParameters::kovalevskaya(c0), &s).to_array();
        for i in 0..6 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-13 * (1.0 + a[i].abs()));
        }
    }

    #[test]
    fn integrals_survive_short_runs(c0 in 0.2..2.0f64, p in prop::array::uniform3(-1.5..1.5f64), g in unit_dir()) {
        let s0 = state(p, g);
        let traj = integrate(&BodyParameters::kovalevskaya(c0), s0, 2.0, 1e-12, &IntegrateOptions::every(0.5)).unwrap();
        let i0 = first_integrals(c0, &s0).as_array();
        let i1 = first_integrals(c0, traj.states.last().unwrap()).as_array();
        for k in 0..4 {
            prop_assert!((i0[k] - i1[k]).abs() <= 1e-8 * (1.0 + i0[k].abs()), "integral {} drifted", k);
        }
    }

    #[test]
    fn quartic_identity_for_any_constants(
        l1 in -3.0..3.0f64, l in -1.0..1.0f64, c0 in 0.1..2.0f64, k in 0.0..2.0f64,
        z in prop::array::uniform4(-3.0..3.0f64),
    ) {
        let q = QuarticData::new(l1, l, c0, k);
        let (x1, x2) = (C64::new(z[0], z[1]), C64::new(z[2], z[3]));
        prop_assert!(quartic_identity_residual(&q, x1, x2).norm() <= 1e-9 * quartic_identity_scale(&q, x1, x2));
    }

    #[test]
    fn w_routes_coincide(z in prop::array::uniform4(-3.0..3.0f64)) {
        let q = QuarticData::new(2.0, 0.3, 0.5, 1.0);
        let (x1, x2) = (C64::new(z[0], z[1]), C64::new(z[2], z[3]));
        let d = w_squared(&q, x1, x2, WRoute::Direct).unwrap();
        for route in [WRoute::Factored, WRoute::Separated] {
            let w = w_squared(&q, x1, x2, route).unwrap();
            prop_assert!((w - d).norm() <= 1e-9 * d.norm().max(w.norm()).max(1e-300));
        }
    }

    #[test]
    fn classification_matches_numeric_roots(l1 in -3.0..3.0f64, k0 in -3.0..3.0f64, l0 in -3.0..3.0f64) {
        let class = quartic_class::classify(l1, k0, l0);
        prop_assume!(class != RootClass::Degenerate);
        let n = quartic_class::real_root_count(&quartic_class::numeric_roots(l1, k0, l0));
        prop_assert_eq!(class.real_root_count(), Some(n));
    }

    #[test]
    fn threshold_identity(l1 in -3.0..3.0f64, k0 in -3.0..3.0f64) {
        prop_assert!(quartic_class::threshold_identity_residual(l1, k0) < 1e-12);
    }

    #[test]
    fn admissible_mounts_verify(c1 in 0.1..5.0f64, extra in 0.01..5.0f64, m in 0.1..5.0f64) {
        // B1 > 2 C1 and A1 = 2 (B1 - C1)
        let b1 = 2.0 * c1 + extra;
        let t = InertiaTriple::new(2.0 * (b1 - c1), b1, c1, m).unwrap();
        let spec = design_mount(&t).unwrap();
        let r = verify_mount(&t, &spec);
        prop_assert!(r.verified(1e-12), "defect {:e}", r.max_defect());
        let [a, b, c] = spec.moments;
        prop_assert!((a - b).abs() <= 1e-12 * a && (a - 2.0 * c).abs() <= 1e-12 * a);
    }

    #[test]
    fn non_admissible_mounts_rejected(c1 in 0.1..5.0f64, short in 0.0..1.0f64, m in 0.1..5.0f64) {
        let b1 = c1 + short * c1;
        let t = InertiaTriple::new(2.0 * (b1 - c1), b1, c1, m);
        if let Ok(t) = t {
            prop_assert!(design_mount(&t).is_err());
        }
    }
}
