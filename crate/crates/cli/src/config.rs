//! Run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toda_core::diagnostics::probe::ProbeSpec;
use toda_core::discretization::GridConfig;
use toda_core::problem::SourceSet;
use toda_core::solver::IterationConfig;

use crate::RunError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Check,
    Solve,
    Sweep,
    Probe,
    Validate,
}

impl RunMode {
    pub fn label(&self) -> &'static str {
        match self {
            RunMode::Check => "check",
            RunMode::Solve => "solve",
            RunMode::Sweep => "sweep",
            RunMode::Probe => "probe",
            RunMode::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Optional; must agree with the mode given on the command line.
    #[serde(default)]
    pub mode: Option<RunMode>,
    #[serde(default)]
    pub problem: Option<SourceSet>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seeds sweep sampling only.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
    #[serde(default)]
    pub validate: ValidateSpec,
}

/// Cartesian product of `values` over the weight entries `entries`; the
/// remaining weights come from the problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `[component, source]` pairs.
    pub entries: Vec<[usize; 2]>,
    pub values: Vec<f64>,
    /// Draw this many distinct cells at random instead of visiting all.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Solve every cell; otherwise only the conditions are evaluated.
    #[serde(default = "yes")]
    pub solve: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSpec {
    pub three_d: bool,
    /// Core cells of the coarse 3D grid.
    pub three_d_cells: usize,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec {
            three_d: true,
            three_d_cells: 20,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            RunError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!(
                "{origin}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.iteration
            .validate()
            .map_err(|e| RunError::Config(format!("{origin}: iteration: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Checks the fields the mode needs.
    pub fn require(&self, mode: RunMode) -> Result<(), RunError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(RunError::Config(format!(
                    "config is for mode {} but {} was requested",
                    m.label(),
                    mode.label()
                )));
            }
        }
        let missing = |field: &str| {
            Err(RunError::Config(format!("mode {} requires `{field}`", mode.label())))
        };
        match mode {
            RunMode::Check | RunMode::Solve if self.problem.is_none() => missing("problem"),
            RunMode::Sweep if self.problem.is_none() => missing("problem"),
            RunMode::Sweep if self.sweep.is_none() => missing("sweep"),
            RunMode::Probe if self.probe.is_none() => missing("probe"),
            _ => Ok(()),
        }
    }
}
