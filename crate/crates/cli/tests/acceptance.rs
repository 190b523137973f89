//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::time::Instant;

use rand::Rng;

use kovtop::{run, Command};
use kovtop_core::euler_poisson::{
    integral_drift, integrate, integrate_with_orientation, state_from_invariants, BodyParameters, IntegralSet,
    IntegrateOptions, OrientationState,
};
use kovtop_core::hyperelliptic::{self, ThetaContext, LABELS};
use kovtop_core::painleve::{painleve_test, random_parameter_sets, Verdict};
use kovtop_core::quartic_class::{self, RootClass};
use kovtop_core::realization::{design_mount, verify_mount, InertiaTriple};
use kovtop_core::reconstruction::{self, canonical_signs, identity_suite, reconstruct, round_trip};
use kovtop_core::separation::{quadrature_residuals, quartic_identity_residual, quartic_identity_scale, w_squared, QuarticData, WRoute};
use kovtop_core::{seeded_rng, Complex64 as C64, Error};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Result<Outcome, Error> {
    Ok(Outcome { pass, detail })
}

fn random_state(seed: u64) -> kovtop_core::euler_poisson::MotionState {
    kovtop::commands::random_state(seed)
}

fn conservation() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let s0 = random_state(11);
    let traj = integrate(&BodyParameters::kovalevskaya(1.0), s0, 100.0, 1e-12, &IntegrateOptions::every(0.1))?;
    let d = integral_drift(1.0, &traj);
    let secs = t0.elapsed().as_secs_f64();
    let worst = d.iter().copied().fold(0.0, f64::max);
    check(worst < 1e-8 && secs < 5.0, format!("drift l1 {:.1e} l {:.1e} k^2 {:.1e} |g|^2 {:.1e}; {secs:.2} s", d[0], d[1], d[2], d[3]))
}

fn painleve_gate() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let named = [
        ("Euler", BodyParameters::euler(3.0, 2.0, 1.0), Verdict::Euler),
        ("Lagrange", BodyParameters { a: 2.0, b: 2.0, c: 1.0, mg: 1.0, x0: 0.0, y0: 0.0, z0: 0.5 }, Verdict::Lagrange),
        ("Kovalevskaya", BodyParameters::kovalevskaya(1.0), Verdict::Kovalevskaya),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, p, want) in named {
        let r = painleve_test(&p);
        ok &= r.verdict == want;
        notes.push(format!("{name}: {:?} {:?}", r.verdict, r.nonnegative_union));
    }
    let kov = painleve_test(&BodyParameters::kovalevskaya(1.0));
    ok &= kov.nonnegative_union.len() >= 5;
    let generic = random_parameter_sets(2024, 100);
    let failing = generic.iter().filter(|p| painleve_test(p).verdict == Verdict::Fails).count();
    ok &= failing == 100;
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    check(ok, format!("{}; generic failing {failing}/100; {secs:.2} s", notes.join("; ")))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn identity_suite_criterion() -> Result<Outcome, Error> {
    let q = QuarticData::new(2.0, 0.3, 0.5, 1.0);
    let mut rng = seeded_rng(606);
    let (mut quartic, mut routes): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let x1 = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let x2 = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        quartic = quartic.max(quartic_identity_residual(&q, x1, x2).norm() / quartic_identity_scale(&q, x1, x2));
        let a = w_squared(&q, x1, x2, WRoute::Direct)?;
        let b = w_squared(&q, x1, x2, WRoute::Factored)?;
        let c = w_squared(&q, x1, x2, WRoute::Separated)?;
        routes = routes.max(rel(a, b)).max(rel(a, c)).max(rel(b, c));
    }
    let ctx = reconstruction::context(2.0, 0.3, 0.5, 1.0)?;
    let top = ctx.e[2].min(ctx.k2);
    let mut p_ids: f64 = 0.0;
    for _ in 0..10_000 {
        let s1 = rng.random_range(ctx.e[0]..ctx.k1);
        let s2 = top - rng.random_range(0.0..10.0);
        p_ids = p_ids.max(identity_suite(&ctx, s1, s2)?.max_residual());
    }
    check(
        quartic < 1e-9 && routes < 1e-9 && p_ids < 1e-9,
        format!("quartic identity {quartic:.1e}; W^2 routes {routes:.1e}; P identities {p_ids:.1e} (10^4 samples each)"),
    )
}

fn classification() -> Result<Outcome, Error> {
    let mut rng = seeded_rng(404);
    let (mut used, mut agree) = (0, 0);
    while used < 10_000 {
        let (l1, k0, l0) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let class = quartic_class::classify(l1, k0, l0);
        if class == RootClass::Degenerate {
            continue;
        }
        used += 1;
        if class.real_root_count() == Some(quartic_class::real_root_count(&quartic_class::numeric_roots(l1, k0, l0))) {
            agree += 1;
        }
    }
    check(agree == used, format!("{agree}/{used} agree with the companion-matrix roots"))
}

fn level_set_trajectory() -> Result<kovtop_core::euler_poisson::Trajectory, Error> {
    let s0 = state_from_invariants(0.5, &IntegralSet::target(2.0, 0.3, 1.0), 3)?;
    integrate(&BodyParameters::kovalevskaya(0.5), s0, 10.0, 1e-12, &IntegrateOptions::every(1e-3))
}

fn separation_quadrature() -> Result<Outcome, Error> {
    let traj = level_set_trajectory()?;
    let rep = quadrature_residuals(&QuarticData::new(2.0, 0.3, 0.5, 1.0), &traj)?;
    let f = rep.fraction_below(1e-6);
    check(f >= 0.99, format!("{:.2}% of {} checked samples below 1e-6 ({} excluded)", 100.0 * f, rep.checked, rep.excluded))
}

fn round_trip_criterion() -> Result<Outcome, Error> {
    let traj = level_set_trajectory()?;
    let ctx = reconstruction::context(2.0, 0.3, 0.5, 1.0)?;
    let rep = round_trip(&ctx, &traj)?;
    let f = rep.fraction_below(1e-6);
    let fb = rep.fallback_components();
    check(
        f >= 0.99,
        format!(
            "{:.2}% of {} samples below 1e-6 (max {:.1e}); fallbacks: {}",
            100.0 * f,
            rep.errors.len(),
            rep.max_error(),
            if fb.is_empty() { "none".to_string() } else { fb.join(", ") }
        ),
    )
}

fn theta_machinery() -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let ctx = ThetaContext::new(2.0, 0.3, 0.5, 1.0)?;
    let pd = &ctx.periods;
    let sym = pd.symmetry_defect();
    let pos = pd.is_positive_definite();
    let mut rng = seeded_rng(707);
    let mut fe: f64 = 0.0;
    let z = hyperelliptic::Characteristic::ZERO;
    for _ in 0..100 {
        let v = [
            C64::new(rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5)),
            C64::new(rng.random_range(0.0..1.0), rng.random_range(-0.5..0.5)),
        ];
        let t = hyperelliptic::theta(pd, v, &z)?;
        for al in 0..2 {
            let mut w = v;
            w[al] += 1.0;
            fe = fe.max(rel(hyperelliptic::theta(pd, w, &z)?, t));
            let mut w = v;
            w[0] += pd.tau[(0, al)];
            w[1] += pd.tau[(1, al)];
            let f = (C64::new(0.0, -std::f64::consts::PI) * (v[al] * 2.0 + pd.tau[(al, al)])).exp();
            fe = fe.max(rel(hyperelliptic::theta(pd, w, &z)?, t * f));
        }
    }
    let chars_ok = ctx.chars.iter().all(|c| c.is_normalized()) && ctx.branch.iter().all(|b| b.roundoff < 1e-6) && ctx.chars.len() == LABELS.len();
    let ids = hyperelliptic::theta_constants(&ctx).max_residual();
    let a = ctx.curve.a;
    let mut quot: f64 = 0.0;
    for _ in 0..100 {
        let s1 = rng.random_range(a[3]..a[4]);
        let s2 = a[0] - rng.random_range(0.0..8.0);
        let c = hyperelliptic::theta_check(&ctx, s1, s2)?;
        quot = quot.max(c.signed).max(c.squares);
    }
    let signs = canonical_signs(&ctx.real)?;
    let st = reconstruct(&ctx.real, 0.5 * (a[3] + a[4]), a[0] - 1.0, &signs)?.state;
    let traj = integrate(&BodyParameters::kovalevskaya(0.5), st, 5.0, 1e-12, &IntegrateOptions::every(0.01))?;
    let fit = hyperelliptic::abel_series(&ctx, &traj, 1)?.fit();
    let secs = t0.elapsed().as_secs_f64();
    check(
        sym < 1e-10 && pos && fe < 1e-12 && chars_ok && ids < 1e-8 && quot < 1e-6 && fit.max_residual < 1e-6 && secs < 60.0,
        format!(
            "tau symmetry {sym:.1e}; Im tau pos. def. {pos}; functional eqs {fe:.1e}; characteristics ok {chars_ok}; \
             constant identities {ids:.1e}; theta vs radicals {quot:.1e}; Abel fit {:.1e}; {secs:.1} s",
            fit.max_residual
        ),
    )
}

fn realization() -> Result<Outcome, Error> {
    let t = InertiaTriple::new(4.0, 3.0, 1.0, 1.0)?;
    let s = design_mount(&t)?;
    let r = verify_mount(&t, &s);
    let boundary = design_mount(&InertiaTriple::new(2.0, 2.0, 1.0, 1.0)?) == Err(Error::NotRealizable);
    check(
        s.a() == 1.0 && r.b_defect.abs() < 1e-14 && r.c_defect.abs() < 1e-14 && boundary,
        format!("a = {}; B1+Ma^2-A1 = {:e}; C1+Ma^2-A1/2 = {:e}; B1 = 2C1 rejected {boundary}", s.a(), r.b_defect, r.c_defect),
    )
}

fn orientation() -> Result<Outcome, Error> {
    let s0 = random_state(19);
    let o = OrientationState::from_gamma([s0.gamma, s0.gamma1, s0.gamma2]);
    let traj = integrate_with_orientation(&BodyParameters::kovalevskaya(1.0), s0, o, 100.0, 1e-12, &IntegrateOptions::every(0.1))?;
    let os = traj.orientations.as_ref().ok_or(Error::NotFound)?;
    let orth = os.iter().map(|m| m.orthogonality_defect()).fold(0.0, f64::max);
    let det = os.iter().map(|m| (m.determinant() - 1.0).abs()).fold(0.0, f64::max);
    check(orth < 1e-8 && det < 1e-8, format!("max |MM^T - I| {orth:.1e}; max |det - 1| {det:.1e}"))
}

fn cli_determinism() -> Result<Outcome, Error> {
    let dir = tempfile::tempdir().map_err(|_| Error::InvalidInput("tempdir"))?;
    let cfg = r#"{"body": {"c0": 1.0}, "t_end": 20.0, "sample_step": 0.05, "orientation": true, "separation": true}"#;
    let mut same = true;
    let mut detail = Vec::new();
    for (cmd, cfg) in [
        (Command::Simulate, cfg),
        (Command::PainleveTest, r#"{"painleve": {"generic_samples": 20}}"#),
        (Command::ThetaCheck, r#"{"theta": {"l1": 2.0, "l": 0.3, "c0": 0.5, "k": 1.0, "samples": 10}}"#),
    ] {
        let a = run(cmd, cfg, &dir.path().join("a"), Some(42)).map_err(|_| Error::InvalidInput("run"))?;
        let b = run(cmd, cfg, &dir.path().join("b"), Some(42)).map_err(|_| Error::InvalidInput("run"))?;
        let read = |p: &std::path::Path| fs::read(p).unwrap_or_default();
        let eq_report = read(&a.report) == read(&b.report);
        let eq_csv = match (&a.csv, &b.csv) {
            (Some(x), Some(y)) => read(x) == read(y) && !read(x).is_empty(),
            _ => false,
        };
        same &= eq_report && eq_csv;
        detail.push(format!("{}: report {eq_report}, csv {eq_csv}", cmd.name()));
    }
    check(same, detail.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome, Error>); 10] = [
        ("1 conservation", conservation),
        ("2 painleve gate", painleve_gate),
        ("3 algebraic identities", identity_suite_criterion),
        ("4 quartic classification", classification),
        ("5 separation quadrature", separation_quadrature),
        ("6 round-trip reconstruction", round_trip_criterion),
        ("7 theta machinery", theta_machinery),
        ("8 realization", realization),
        ("9 orientation", orientation),
        ("10 cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
