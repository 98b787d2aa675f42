//! Command-line orchestration: configuration, runs and result files.

pub mod config;
pub mod output;
pub mod sweep;
pub mod validate;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toda_core::diagnostics::{self, probe};
use toda_core::problem::check_conditions;
use toda_core::solver::{BlowUpPoint, Solver, Status};
use toda_core::{equation::Equation, Error};

pub use config::{RunConfig, RunMode, SCHEMA_VERSION};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "TODA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Validation(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Validation(m) => write!(f, "validation failed: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateField(_)
            | Error::WeightOverflow { .. }
            | Error::AnnuliOutsideGrid(_)
            | Error::BelowResolution { .. } => RunError::Numerical(e.to_string()),
            Error::Io(_) => RunError::Io(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

/// Summary of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub schema_version: u32,
    pub status: Status,
    pub residual: f64,
    pub iterations: usize,
    pub nodes: usize,
    pub beta: Vec<f64>,
    pub targets: Vec<f64>,
    pub masses: Vec<f64>,
    pub c: Vec<f64>,
    pub gauge: Option<f64>,
    pub blow_up: Option<BlowUpPoint>,
}

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub message: String,
}

pub struct Invocation {
    pub mode: RunMode,
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub refine: u32,
}

pub fn run(inv: &Invocation) -> Result<Outcome, RunError> {
    let cfg = &inv.config;
    cfg.require(inv.mode)?;
    let dir = inv
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let grid = cfg.grid.refined(inv.refine);
    let mut files = Vec::new();
    let message = match inv.mode {
        RunMode::Check => {
            let report = check_conditions(cfg.problem.as_ref().unwrap());
            files.push(output::write_json(&dir, "conditions.json", &report)?);
            serde_json::to_string_pretty(&report).map_err(|e| RunError::Io(e.to_string()))?
        }
        RunMode::Solve => solve(cfg, &grid, &dir, &mut files)?,
        RunMode::Sweep => {
            let rows = sweep::run(cfg, &grid)?;
            files.push(output::write_text(&dir, "sweep.csv", &sweep::csv(&rows))?);
            format!("{} cells", rows.len())
        }
        RunMode::Probe => {
            let spec = cfg.probe.as_ref().unwrap();
            let report = probe::nonexistence_probe(spec, &grid, &cfg.iteration)?;
            files.push(output::write_json(&dir, "probe.json", &report)?);
            files.push(output::write_text(&dir, "trajectory.csv", &probe::trajectory_csv(&report))?);
            let mut lines = vec![format!("verdict: {}", report.verdict.label())];
            for r in &report.runs {
                lines.push(format!(
                    "s = {}: {} after {} iterations, slope error {:.4}",
                    r.scale,
                    r.status.label(),
                    r.iterations,
                    r.slope_error
                ));
            }
            lines.join("\n")
        }
        RunMode::Validate => {
            let table = validate::run(&cfg.validate, &grid, &cfg.iteration)?;
            files.push(output::write_text(&dir, "validation.csv", &validate::csv(&table))?);
            let text = validate::render(&table);
            if table.iter().any(|r| !r.pass) {
                return Err(RunError::Validation(text));
            }
            text
        }
    };
    Ok(Outcome { files, message })
}

fn solve(
    cfg: &RunConfig,
    grid: &toda_core::discretization::GridConfig,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let set = cfg.problem.as_ref().unwrap();
    let solver = Solver::new(Equation::from_sources(set)?, grid, &cfg.iteration)?;
    let sol = solver.solve(&cfg.iteration)?;
    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        status: sol.status,
        residual: sol.residual,
        iterations: sol.iterations(),
        nodes: solver.disc.grid.len(),
        beta: solver.eq.beta.clone(),
        targets: solver.eq.targets.clone(),
        masses: solver.masses(&sol.v, &sol.c),
        c: sol.c.clone(),
        gauge: sol.gauge,
        blow_up: sol.blow_up.clone(),
    };
    files.push(output::write_json(dir, "summary.json", &summary)?);
    files.push(output::write_text(dir, "field.csv", &output::field_csv(&solver.disc.grid, &sol.u))?);
    files.push(output::write_text(dir, "history.csv", &sol.history_csv())?);
    // A field that did not converge may be too irregular to diagnose; that is not an error.
    match diagnostics::report(&solver, &sol) {
        Ok(report) => files.push(output::write_json(dir, "diagnostics.json", &report)?),
        Err(e) if sol.status == Status::Converged => return Err(e.into()),
        Err(_) => {}
    }
    Ok(format!(
        "{} after {} iterations, residual {:.3e}, masses {:?}",
        sol.status.label(),
        sol.iterations(),
        sol.residual,
        summary.masses
    ))
}

/// Applies the thread-count override, if set.
pub fn configure_threads() -> Result<(), RunError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| RunError::Config(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(e.to_string()))?;
    }
    Ok(())
}
