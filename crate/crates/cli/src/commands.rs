//! The seven batch commands.

use clap::ValueEnum;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use kovtop_core::euler_poisson::{
    first_integrals, general_drift, integral_drift, integrate, integrate_with_orientation, state_from_invariants,
    BodyParameters, IntegrateOptions, MotionState, OrientationState, Trajectory,
};
use kovtop_core::hyperelliptic::{self, ThetaContext, LABELS};
use kovtop_core::painleve::{painleve_test, random_parameter_sets, PainleveReport};
use kovtop_core::quartic_class::{self, RootClass};
use kovtop_core::realization::{design_mount, verify_mount, InertiaTriple};
use kovtop_core::reconstruction::{self, RealCaseContext};
use kovtop_core::separation::{quadrature_residuals, s_series, QuarticData, SampleStatus};
use kovtop_core::{seeded_rng, C64};

use crate::config::{RunConfig, TargetConfig};
use crate::error::CliError;
use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    PainleveTest,
    Classify,
    SeparateCheck,
    ReconstructCheck,
    ThetaCheck,
    DesignModel,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::PainleveTest => "painleve-test",
            Command::Classify => "classify",
            Command::SeparateCheck => "separate-check",
            Command::ReconstructCheck => "reconstruct-check",
            Command::ThetaCheck => "theta-check",
            Command::DesignModel => "design-model",
        }
    }
}

/// Results of one command before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
}

pub fn execute(cmd: Command, cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    match cmd {
        Command::Simulate => simulate(cfg, seed),
        Command::PainleveTest => painleve(cfg, seed),
        Command::Classify => classify(cfg, seed),
        Command::SeparateCheck => separate_check(cfg, seed),
        Command::ReconstructCheck => reconstruct_check(cfg, seed),
        Command::ThetaCheck => theta_check(cfg, seed),
        Command::DesignModel => design_model(cfg),
    }
}

fn cplx(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Uniform `p, q, r` in `[-1, 1)` and a uniformly drawn unit `gamma`.
pub fn random_state(seed: u64) -> MotionState {
    let mut rng = seeded_rng(seed);
    let (p, q, r) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    loop {
        let g: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return MotionState::new(p, q, r, g[0] / n, g[1] / n, g[2] / n);
        }
    }
}

fn require_c0(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.body
        .as_ref()
        .and_then(|b| b.c0_form())
        .ok_or_else(|| CliError::value("body", "this command needs the normalized body form `{\"c0\": ..}`"))
}

fn require_target(cfg: &RunConfig) -> Result<TargetConfig, CliError> {
    cfg.target.ok_or_else(|| CliError::value("target", "this command needs `target` with `l1`, `l`, `k`"))
}

fn level_set_trajectory(cfg: &RunConfig, seed: u64) -> Result<(f64, TargetConfig, MotionState, Trajectory), CliError> {
    let c0 = require_c0(cfg)?;
    let t = require_target(cfg)?;
    let s0 = state_from_invariants(c0, &t.integrals(), seed)?;
    let traj = integrate(&BodyParameters::kovalevskaya(c0), s0, cfg.t_end, cfg.tol, &IntegrateOptions::every(cfg.sample_step))?;
    Ok((c0, t, s0, traj))
}

fn state_json(s: &MotionState) -> Value {
    json!({"p": s.p, "q": s.q, "r": s.r, "gamma": s.gamma, "gamma1": s.gamma1, "gamma2": s.gamma2})
}

fn simulate(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let body = cfg.body.as_ref().ok_or_else(|| CliError::value("body", "required"))?;
    let params = body.params()?;
    let c0 = body.c0_form();
    let (s0, origin) = if let Some(s) = &cfg.initial_state {
        (s.state(), "config")
    } else if let Some(t) = &cfg.target {
        let c0 = c0.ok_or_else(|| CliError::value("target", "needs the normalized body form `{\"c0\": ..}`"))?;
        (state_from_invariants(c0, &t.integrals(), seed)?, "target")
    } else {
        (random_state(seed), "seeded")
    };
    let opts = IntegrateOptions::every(cfg.sample_step);
    let traj = if cfg.orientation {
        let o = OrientationState::from_gamma([s0.gamma, s0.gamma1, s0.gamma2]);
        integrate_with_orientation(&params, s0, o, cfg.t_end, cfg.tol, &opts)?
    } else {
        integrate(&params, s0, cfg.t_end, cfg.tol, &opts)?
    };
    let mut header = vec!["t", "p", "q", "r", "gamma", "gamma1", "gamma2"];
    let mut s_cols: Option<Vec<(f64, f64)>> = None;
    let mut sep = Value::Null;
    if cfg.separation {
        let c0 = c0.ok_or_else(|| CliError::value("separation", "needs the normalized body form `{\"c0\": ..}`"))?;
        let it = first_integrals(c0, &s0);
        let qd = QuarticData::new(it.l1, it.l, c0, it.k_sq.max(0.0).sqrt());
        let series = s_series(&qd, &traj)?;
        let mut max_imag: f64 = 0.0;
        let cols = series
            .iter()
            .map(|(sv, _)| {
                max_imag = max_imag.max(sv.s1.im.abs()).max(sv.s2.im.abs());
                (sv.s1.re, sv.s2.re)
            })
            .collect();
        s_cols = Some(cols);
        header.extend(["s1", "s2"]);
        sep = json!({"max_imag": max_imag, "quartic": {"l1": qd.l1, "l": qd.l, "c0": qd.c0, "k": qd.k}});
    }
    let mut table = Table::new(&header);
    for (i, (t, s)) in traj.times.iter().zip(traj.states.iter()).enumerate() {
        let mut row = vec![*t, s.p, s.q, s.r, s.gamma, s.gamma1, s.gamma2];
        if let Some(c) = &s_cols {
            row.extend([c[i].0, c[i].1]);
        }
        table.push(row);
    }
    let drift = match c0 {
        Some(c0) => {
            let d = integral_drift(c0, &traj);
            let i0 = first_integrals(c0, &s0);
            json!({
                "integrals": "l1, l, k_sq, norm",
                "initial": {"l1": i0.l1, "l": i0.l, "k_sq": i0.k_sq, "norm": i0.norm},
                "relative_drift": {"l1": d[0], "l": d[1], "k_sq": d[2], "norm": d[3]},
            })
        }
        None => {
            let d = general_drift(&params, &traj);
            json!({
                "integrals": "energy, area, norm",
                "relative_drift": {"energy": d[0], "area": d[1], "norm": d[2]},
            })
        }
    };
    let orient = match &traj.orientations {
        Some(os) => {
            let orth = os.iter().map(|o| o.orthogonality_defect()).fold(0.0, f64::max);
            let det = os.iter().map(|o| (o.determinant() - 1.0).abs()).fold(0.0, f64::max);
            json!({"max_orthogonality_defect": orth, "max_determinant_defect": det})
        }
        None => Value::Null,
    };
    let results = json!({
        "body": {"a": params.a, "b": params.b, "c": params.c, "mg": params.mg, "x0": params.x0, "y0": params.y0, "z0": params.z0},
        "initial_state": state_json(&s0),
        "initial_state_origin": origin,
        "samples": traj.len(),
        "solver": {"accepted": traj.stats.accepted, "rejected": traj.stats.rejected, "evaluations": traj.stats.evaluations, "tol": traj.tol},
        "drift": drift,
        "orientation": orient,
        "separation": sep,
    });
    Ok(Outcome { results, table: Some(table) })
}

fn painleve_json(name: &str, p: &BodyParameters, rep: &PainleveReport) -> Value {
    let balances: Vec<Value> = rep
        .balances
        .iter()
        .map(|(b, sp)| {
            json!({
                "family": format!("{:?}", b.family),
                "eps": b.eps,
                "lambda": cplx(b.lambda),
                "max_residual": b.max_residual(),
                "resonances": sp.roots.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
                "integers": sp.integer_roots,
                "interpolation_check": sp.interpolation_check,
            })
        })
        .collect();
    json!({
        "name": name,
        "params": {"a": p.a, "b": p.b, "c": p.c, "mg": p.mg, "x0": p.x0, "y0": p.y0, "z0": p.z0},
        "verdict": format!("{:?}", rep.verdict),
        "passes": rep.passes(),
        "structure": rep.structure.map(|v| format!("{v:?}")),
        "nonnegative_union": rep.nonnegative_union,
        "balances": balances,
        "notes": rep.notes,
        "failure": rep.failure,
    })
}

fn painleve(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let mut sets: Vec<(String, BodyParameters)> = Vec::new();
    if let Some(b) = &cfg.body {
        sets.push(("body".into(), b.params()?));
    }
    let generic = cfg.painleve.as_ref().map_or(0, |p| p.generic_samples);
    if let Some(p) = &cfg.painleve {
        sets.extend(p.sets.iter().map(|b| (b.name.clone(), b.params())));
    }
    for (i, p) in random_parameter_sets(seed, generic).into_iter().enumerate() {
        sets.push((format!("generic-{i}"), p));
    }
    if sets.is_empty() {
        return Err(CliError::value("painleve", "no parameter sets given"));
    }
    let reports: Vec<PainleveReport> = sets.par_iter().map(|(_, p)| painleve_test(p)).collect();
    let mut table = Table::new(&["index", "passes", "distinct_nonnegative_integers"]);
    let mut entries = Vec::new();
    let mut generic_failing = 0;
    for (i, ((name, p), rep)) in sets.iter().zip(reports.iter()).enumerate() {
        if name.starts_with("generic-") && !rep.passes() {
            generic_failing += 1;
        }
        table.push(vec![i as f64, if rep.passes() { 1.0 } else { 0.0 }, rep.nonnegative_union.len() as f64]);
        entries.push(painleve_json(name, p, rep));
    }
    let results = json!({
        "sets": entries,
        "summary": {
            "total": sets.len(),
            "passing": reports.iter().filter(|r| r.passes()).count(),
            "generic": generic,
            "generic_failing": generic_failing,
        },
    });
    Ok(Outcome { results, table: Some(table) })
}

fn class_code(c: RootClass) -> f64 {
    c.real_root_count().map_or(-1.0, |n| n as f64)
}

fn classify(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let cc = cfg.classify.clone().unwrap_or_default();
    if cc.cases.is_empty() && cc.random_samples == 0 {
        return Err(CliError::value("classify", "give `cases` or `random_samples`"));
    }
    let mut table = Table::new(&["l1", "k0", "l0", "class_real_roots", "numeric_real_roots"]);
    let mut cases = Vec::new();
    for q in &cc.cases {
        let inv = quartic_class::invariants(q.l1, q.k0, q.l0);
        let class = quartic_class::classify_invariants(&inv);
        let roots = quartic_class::numeric_roots(q.l1, q.k0, q.l0);
        let n = quartic_class::real_root_count(&roots);
        table.push(vec![q.l1, q.k0, q.l0, class_code(class), n as f64]);
        cases.push(json!({
            "l1": q.l1, "k0": q.k0, "l0": q.l0,
            "class": class.name(),
            "g2": inv.g2, "g3": inv.g3, "G": inv.big_g, "D": inv.d, "second_sign": inv.second_sign(),
            "numeric_roots": roots.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
            "numeric_real_roots": n,
            "agrees": class.real_root_count().is_none_or(|k| k == n),
        }));
    }
    let mut rng = seeded_rng(seed);
    let draws: Vec<[f64; 3]> =
        (0..cc.random_samples).map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]).collect();
    let verdicts: Vec<(RootClass, usize)> = draws
        .par_iter()
        .map(|d| {
            let class = quartic_class::classify(d[0], d[1], d[2]);
            (class, quartic_class::real_root_count(&quartic_class::numeric_roots(d[0], d[1], d[2])))
        })
        .collect();
    let degenerate = verdicts.iter().filter(|(c, _)| *c == RootClass::Degenerate).count();
    let agree = verdicts.iter().filter(|(c, n)| c.real_root_count() == Some(*n)).count();
    let results = json!({
        "cases": cases,
        "random": {
            "samples": cc.random_samples,
            "degenerate_excluded": degenerate,
            "agreeing": agree,
            "agreement": if cc.random_samples > degenerate { agree as f64 / (cc.random_samples - degenerate) as f64 } else { 1.0 },
        },
    });
    Ok(Outcome { results, table: Some(table) })
}

fn separate_check(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let (c0, t, s0, traj) = level_set_trajectory(cfg, seed)?;
    let qd = QuarticData::new(t.l1, t.l, c0, t.k);
    let rep = quadrature_residuals(&qd, &traj)?;
    let series = s_series(&qd, &traj)?;
    let mut table = Table::new(&["t", "s1", "s2", "r0", "r1"]);
    for ((tt, (sv, _)), st) in traj.times.iter().zip(series.iter()).zip(rep.samples.iter()) {
        let (r0, r1) = match st {
            SampleStatus::Checked { r0, r1 } => (*r0, *r1),
            _ => (f64::NAN, f64::NAN),
        };
        table.push(vec![*tt, sv.s1.re, sv.s2.re, r0, r1]);
    }
    let results = json!({
        "initial_state": state_json(&s0),
        "samples": traj.len(),
        "checked": rep.checked,
        "excluded_near_branch_points": rep.excluded,
        "fraction_below_1e-6": rep.fraction_below(1e-6),
        "max_residual": rep.max_residual,
        "initial_signs": [rep.initial_signs.0, rep.initial_signs.1],
        "max_s_imag": rep.max_s_imag,
    });
    Ok(Outcome { results, table: Some(table) })
}

fn identity_samples(ctx: &RealCaseContext, n: usize, seed: u64) -> Result<f64, CliError> {
    let mut rng = seeded_rng(seed ^ 0x1d);
    let top = ctx.e[2].min(ctx.k2);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(ctx.e[0]..ctx.k1), top - rng.random_range(0.0..5.0))).collect();
    let res: Result<Vec<f64>, _> = pts.par_iter().map(|(a, b)| reconstruction::identity_suite(ctx, *a, *b).map(|r| r.max_residual())).collect();
    Ok(res?.into_iter().fold(0.0, f64::max))
}

fn reconstruct_check(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let (c0, t, s0, traj) = level_set_trajectory(cfg, seed)?;
    let ctx = reconstruction::context(t.l1, t.l, c0, t.k)?;
    let rep = reconstruction::round_trip(&ctx, &traj)?;
    let mut table = Table::new(&["t", "max_abs_error"]);
    for (tt, e) in traj.times.iter().zip(rep.errors.iter()) {
        table.push(vec![*tt, e.unwrap_or(f64::NAN)]);
    }
    let results = json!({
        "initial_state": state_json(&s0),
        "samples": traj.len(),
        "fraction_below_1e-6": rep.fraction_below(1e-6),
        "max_error": rep.max_error(),
        "sign_fit_index": rep.fit_index,
        "signs": {"rho1": rep.signs.rho1, "rho2": rep.signs.rho2, "tau": rep.signs.tau},
        "fallbacks": {
            "components": rep.fallback_components(),
            "gamma_samples": rep.gamma_fallbacks,
            "gamma1_samples": rep.gamma1_fallbacks,
        },
        "max_imag": rep.max_imag,
        "window_violations": rep.window_violations,
        "identity_suite_max_residual": identity_samples(&ctx, 100, seed)?,
    });
    Ok(Outcome { results, table: Some(table) })
}

fn theta_check(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let tc = cfg.theta.clone().ok_or_else(|| CliError::value("theta", "required"))?;
    let ctx = ThetaContext::new(tc.l1, tc.l, tc.c0, tc.k)?;
    let pd = &ctx.periods;
    let ids = hyperelliptic::theta_constants(&ctx);
    let chars: Vec<Value> = LABELS
        .iter()
        .zip(ctx.chars.iter())
        .zip(ctx.constants.iter())
        .map(|((l, ch), c)| json!({"label": l, "m": ch.m, "n": ch.n, "parity": ch.parity(), "constant": cplx(*c)}))
        .collect();
    let branch: Vec<Value> = ctx.branch.iter().map(|b| json!({"label": b.label, "branch_point": ctx.curve.a[b.label as usize], "roundoff": b.roundoff})).collect();
    let a = ctx.curve.a;
    let mut rng = seeded_rng(seed);
    let pts: Vec<(f64, f64)> = (0..tc.samples).map(|_| (rng.random_range(a[3]..a[4]), a[0] - rng.random_range(0.0..8.0))).collect();
    let checks: Result<Vec<_>, _> = pts.par_iter().map(|(s1, s2)| hyperelliptic::theta_check(&ctx, *s1, *s2)).collect();
    let checks = checks?;
    let mut table = Table::new(&["s1", "s2", "squares_rel", "signed_rel"]);
    for ((s1, s2), c) in pts.iter().zip(checks.iter()) {
        table.push(vec![*s1, *s2, c.squares, c.signed]);
    }
    let abel = if tc.trajectory_t_end > 0.0 {
        let signs = reconstruction::canonical_signs(&ctx.real)?;
        let st = reconstruction::reconstruct(&ctx.real, 0.5 * (a[3] + a[4]), a[0] - 1.0, &signs)?.state;
        let traj = integrate(&BodyParameters::kovalevskaya(tc.c0), st, tc.trajectory_t_end, cfg.tol, &IntegrateOptions::every(cfg.sample_step))?;
        let ser = hyperelliptic::abel_series(&ctx, &traj, 1)?;
        let fv = ser.fit();
        let fu = ser.fit_u();
        let want = hyperelliptic::apply_g(pd, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        json!({
            "samples": ser.times.len(),
            "unwraps": ser.unwraps,
            "v_fit_max_residual": fv.max_residual,
            "v_slope": [cplx(fv.slope[0]), cplx(fv.slope[1])],
            "expected_v_slope": [cplx(want[0]), cplx(want[1])],
            "u_slope": [cplx(fu.slope[0]), cplx(fu.slope[1])],
        })
    } else {
        Value::Null
    };
    let mat = |m: &kovtop_core::hyperelliptic::Mat2| json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]);
    let results = json!({
        "curve": {"branch_points": a, "leading_coefficient": hyperelliptic::A0},
        "periods": {
            "K": mat(&pd.k),
            "K_prime": mat(&pd.k_prime),
            "G": mat(&pd.g),
            "im_tau": mat(&pd.im_tau()),
            "symmetry_defect": pd.symmetry_defect(),
            "im_tau_eigenvalues": pd.im_tau_eigenvalues(),
            "axis_defect": pd.axis_defect,
        },
        "characteristics": chars,
        "branch_characteristics": branch,
        "big_c": cplx(ctx.big_c),
        "constant_identities": {
            "relations": ["(e1-e2)/k", "(e1-e3)/k", "(e2-e3)/k", "(l1+e1)/k", "(l1+e2)/k", "(l1+e3)/k"],
            "lhs": ids.lhs,
            "rhs": ids.rhs.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
            "residuals": ids.residuals,
            "max_residual": ids.max_residual(),
        },
        "sign_table": {"p_a": hyperelliptic::PA_SIGNS, "p_ab": hyperelliptic::PAB_SIGNS},
        "theta_vs_radicals": {
            "samples": checks.len(),
            "max_squares_rel": checks.iter().map(|c| c.squares).fold(0.0, f64::max),
            "max_signed_rel": checks.iter().map(|c| c.signed).fold(0.0, f64::max),
        },
        "abel": abel,
    });
    Ok(Outcome { results, table: Some(table) })
}

fn design_model(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.mount.ok_or_else(|| CliError::value("mount", "required"))?;
    let t = InertiaTriple::new(m.a1, m.b1, m.c1, m.m)?;
    let spec = design_mount(&t)?;
    let rep = verify_mount(&t, &spec);
    let results = json!({
        "triangle_ok": t.triangle_ok(),
        "offset": spec.offset,
        "moments_at_mount": spec.moments,
        "verification": {
            "b_defect": rep.b_defect,
            "c_defect": rep.c_defect,
            "equal_defect": rep.equal_defect,
            "half_defect": rep.half_defect,
            "products": rep.products,
            "centre": rep.centre,
            "max_defect": rep.max_defect(),
            "verified": rep.verified(1e-14 * t.a1.max(1.0)),
        },
    });
    Ok(Outcome { results, table: None })
}
