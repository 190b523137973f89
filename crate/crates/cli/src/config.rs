//! Run configuration: a JSON document, strictly typed, unknown keys rejected.

use serde::{Deserialize, Serialize};

use kovtop_core::euler_poisson::{BodyParameters, IntegralSet, MotionState};

use crate::error::CliError;

fn d_t_end() -> f64 {
    10.0
}
fn d_tol() -> f64 {
    1e-12
}
fn d_step() -> f64 {
    0.01
}
fn d_theta_samples() -> usize {
    100
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the command given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_step")]
    pub sample_step: f64,
    /// Also integrate the two remaining rows of the rotation matrix.
    #[serde(default)]
    pub orientation: bool,
    /// Add `s1, s2` columns to the trajectory CSV.
    #[serde(default)]
    pub separation: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub painleve: Option<PainleveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mount: Option<MountConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either `{"c0": ..}` (normalized Kovalevskaya body) or the general form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
}

impl BodyConfig {
    /// `Some(c0)` for the normalized form.
    pub fn c0_form(&self) -> Option<f64> {
        self.c0
    }

    pub fn params(&self) -> Result<BodyParameters, CliError> {
        let general = [self.a, self.b, self.c, self.mg, self.x0, self.y0, self.z0];
        match (self.c0, self.a, self.b, self.c) {
            (Some(c0), None, None, None) if general.iter().all(|v| v.is_none()) => Ok(BodyParameters::kovalevskaya(c0)),
            (None, Some(a), Some(b), Some(c)) => Ok(BodyParameters {
                a,
                b,
                c,
                mg: self.mg.unwrap_or(1.0),
                x0: self.x0.unwrap_or(0.0),
                y0: self.y0.unwrap_or(0.0),
                z0: self.z0.unwrap_or(0.0),
            }),
            _ => Err(CliError::value("body", "give either `c0` alone or all of `a`, `b`, `c`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl StateConfig {
    pub fn state(&self) -> MotionState {
        MotionState::new(self.p, self.q, self.r, self.gamma, self.gamma1, self.gamma2)
    }
}

/// Level set `l1, l, k` of the Kovalevskaya integrals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub l1: f64,
    pub l: f64,
    pub k: f64,
}

impl TargetConfig {
    pub fn integrals(&self) -> IntegralSet {
        IntegralSet::target(self.l1, self.l, self.k * self.k)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default)]
    pub cases: Vec<QuarticCase>,
    /// Extra seeded samples in `[-3, 3]^3` checked against the root finder.
    #[serde(default)]
    pub random_samples: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarticCase {
    pub l1: f64,
    pub k0: f64,
    pub l0: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PainleveConfig {
    #[serde(default)]
    pub sets: Vec<NamedBody>,
    /// Seeded generic parameter sets added to the run.
    #[serde(default)]
    pub generic_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedBody {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub mg: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub z0: f64,
}

fn one() -> f64 {
    1.0
}

impl NamedBody {
    pub fn params(&self) -> BodyParameters {
        BodyParameters { a: self.a, b: self.b, c: self.c, mg: self.mg, x0: self.x0, y0: self.y0, z0: self.z0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    pub l1: f64,
    pub l: f64,
    pub c0: f64,
    pub k: f64,
    /// Points `(s1, s2)` for the theta-versus-radicals comparison.
    #[serde(default = "d_theta_samples")]
    pub samples: usize,
    /// Length of the trajectory used for the Abel-map linearity check; `0` skips it.
    #[serde(default)]
    pub trajectory_t_end: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountConfig {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "d_csv")]
    pub csv: String,
    #[serde(default = "d_report")]
    pub report: String,
    #[serde(default = "d_plot")]
    pub plot: String,
}

fn d_csv() -> String {
    "data.csv".into()
}
fn d_report() -> String {
    "report.json".into()
}
fn d_plot() -> String {
    "plot.gp".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv: d_csv(), report: d_report(), plot: d_plot() }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(CliError::from_json)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn finite(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::value(key, "must be finite"))
    }
}

fn finite_opt(key: &str, v: Option<f64>) -> Result<(), CliError> {
    v.map_or(Ok(()), |x| finite(key, x))
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    finite("t_end", cfg.t_end)?;
    finite("tol", cfg.tol)?;
    finite("sample_step", cfg.sample_step)?;
    if !(1e-14..=1e-3).contains(&cfg.tol) {
        return Err(CliError::value("tol", "must lie in [1e-14, 1e-3]"));
    }
    if cfg.t_end <= 0.0 {
        return Err(CliError::value("t_end", "must be positive"));
    }
    if cfg.sample_step <= 0.0 || cfg.sample_step > cfg.t_end {
        return Err(CliError::value("sample_step", "must be positive and at most t_end"));
    }
    if cfg.t_end / cfg.sample_step > 1e7 {
        return Err(CliError::value("sample_step", "more than 1e7 samples requested"));
    }
    if let Some(b) = &cfg.body {
        for (k, v) in [
            ("body.c0", b.c0),
            ("body.a", b.a),
            ("body.b", b.b),
            ("body.c", b.c),
            ("body.mg", b.mg),
            ("body.x0", b.x0),
            ("body.y0", b.y0),
            ("body.z0", b.z0),
        ] {
            finite_opt(k, v)?;
        }
        let p = b.params()?;
        if p.a <= 0.0 || p.b <= 0.0 || p.c <= 0.0 {
            return Err(CliError::value("body", "inertia moments must be positive"));
        }
    }
    if let Some(s) = &cfg.initial_state {
        for (k, v) in [("p", s.p), ("q", s.q), ("r", s.r), ("gamma", s.gamma), ("gamma1", s.gamma1), ("gamma2", s.gamma2)] {
            finite(&format!("initial_state.{k}"), v)?;
        }
        let n = s.state().gamma_norm_sq();
        if (n - 1.0).abs() > 1e-9 {
            return Err(CliError::value("initial_state", "gamma must be a unit vector"));
        }
    }
    if cfg.initial_state.is_some() && cfg.target.is_some() {
        return Err(CliError::value("target", "give either `initial_state` or `target`, not both"));
    }
    if let Some(t) = &cfg.target {
        finite("target.l1", t.l1)?;
        finite("target.l", t.l)?;
        finite("target.k", t.k)?;
        if t.k < 0.0 {
            return Err(CliError::value("target.k", "must be nonnegative"));
        }
    }
    if let Some(c) = &cfg.classify {
        for (i, q) in c.cases.iter().enumerate() {
            finite(&format!("classify.cases[{i}].l1"), q.l1)?;
            finite(&format!("classify.cases[{i}].k0"), q.k0)?;
            finite(&format!("classify.cases[{i}].l0"), q.l0)?;
        }
    }
    if let Some(p) = &cfg.painleve {
        for (i, b) in p.sets.iter().enumerate() {
            for (k, v) in [("a", b.a), ("b", b.b), ("c", b.c), ("mg", b.mg), ("x0", b.x0), ("y0", b.y0), ("z0", b.z0)] {
                finite(&format!("painleve.sets[{i}].{k}"), v)?;
            }
            if b.a <= 0.0 || b.b <= 0.0 || b.c <= 0.0 {
                return Err(CliError::value(&format!("painleve.sets[{i}]"), "inertia moments must be positive"));
            }
        }
    }
    if let Some(t) = &cfg.theta {
        for (k, v) in [("l1", t.l1), ("l", t.l), ("c0", t.c0), ("k", t.k), ("trajectory_t_end", t.trajectory_t_end)] {
            finite(&format!("theta.{k}"), v)?;
        }
        if t.trajectory_t_end < 0.0 {
            return Err(CliError::value("theta.trajectory_t_end", "must be nonnegative"));
        }
    }
    if let Some(m) = &cfg.mount {
        for (k, v) in [("a1", m.a1), ("b1", m.b1), ("c1", m.c1), ("m", m.m)] {
            finite(&format!("mount.{k}"), v)?;
        }
    }
    for (k, v) in [("output.csv", &cfg.output.csv), ("output.report", &cfg.output.report), ("output.plot", &cfg.output.plot)] {
        if v.is_empty() || v.contains('/') || v.contains('\\') || v == "." || v == ".." {
            return Err(CliError::value(k, "must be a plain file name"));
        }
    }
    Ok(())
}
