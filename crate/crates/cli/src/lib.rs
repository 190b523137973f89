//! Batch front end: one JSON configuration in, a CSV table, a JSON report and a
//! gnuplot script out.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numerical failure,
//! `4` parameters outside the admissible regime.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde_json::json;

pub use commands::{execute, Command, Outcome};
pub use config::{parse_config, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kovtop", version, about = "Heavy rigid body experiments around the Kovalevskaya case")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: PathBuf,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub timing: PathBuf,
}

/// Worker count from `KOVTOP_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>, CliError> {
    match std::env::var("KOVTOP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::value("KOVTOP_THREADS", "must be a positive integer")),
        },
        Err(_) => Ok(None),
    }
}

/// The deterministic report: everything except wall time.
pub fn report(cmd: Command, cfg: &RunConfig, seed: u64, outcome: &Outcome) -> serde_json::Value {
    json!({
        "tool": "kovtop",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "seed": seed,
        "tolerances": {"tol": cfg.tol, "sample_step": cfg.sample_step, "t_end": cfg.t_end},
        "config": serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null),
        "artifacts": {
            "csv": outcome.table.as_ref().map(|_| cfg.output.csv.clone()),
            "plot": outcome.table.as_ref().map(|_| cfg.output.plot.clone()),
        },
        "results": outcome.results,
    })
}

/// Parses, executes and writes all artifacts.
pub fn run(cmd: Command, config_text: &str, out: &Path, seed_override: Option<u64>) -> Result<Artifacts, CliError> {
    let started = Instant::now();
    let cfg = parse_config(config_text)?;
    if let Some(c) = &cfg.command {
        if c != cmd.name() {
            return Err(CliError::value("command", &format!("config is for `{c}`, not `{}`", cmd.name())));
        }
    }
    let seed = seed_override.unwrap_or(cfg.seed);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    let outcome = pool.install(|| execute(cmd, &cfg, seed))?;
    fs::create_dir_all(out)?;
    let mut arts = Artifacts { report: out.join(&cfg.output.report), csv: None, plot: None, timing: out.join("timing.json") };
    if let Some(t) = &outcome.table {
        let csv_path = out.join(&cfg.output.csv);
        output::write_csv(&csv_path, t)?;
        let plot_path = out.join(&cfg.output.plot);
        fs::write(&plot_path, output::plot_script(&cfg.output.csv, t, cmd.name()))?;
        arts.csv = Some(csv_path);
        arts.plot = Some(plot_path);
    }
    output::write_json(&arts.report, &report(cmd, &cfg, seed, &outcome))?;
    let timing = json!({"command": cmd.name(), "wall_seconds": started.elapsed().as_secs_f64()});
    output::write_json(&arts.timing, &timing)?;
    Ok(arts)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return 2;
        }
    };
    match run(cli.command, &text, &cli.out, cli.seed) {
        Ok(a) => {
            println!("wrote {}", a.report.display());
            if let Some(c) = &a.csv {
                println!("wrote {}", c.display());
            }
            0
        }
        Err(e) => {
            eprintln!("kovtop: {e}");
            e.exit_code()
        }
    }
}
