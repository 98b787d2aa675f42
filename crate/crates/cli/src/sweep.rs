//! Weight-grid sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toda_core::diagnostics::{default_annuli, slope_fit};
use toda_core::discretization::GridConfig;
use toda_core::equation::Equation;
use toda_core::problem::{check_conditions, ConditionReport, SourceSet};
use toda_core::solver::{fmt17, Solver};

use crate::config::RunConfig;
use crate::RunError;

pub struct SweepRow {
    pub weights: Vec<Vec<f64>>,
    pub conditions: ConditionReport,
    /// `None` when the cell was not solved.
    pub status: Option<String>,
    pub masses: Vec<f64>,
    pub slopes: Vec<f64>,
}

/// Indices into the value list for every cell, or a seeded sample of them.
pub fn cells(entries: usize, values: usize, samples: Option<usize>, seed: u64) -> Vec<Vec<usize>> {
    let total = values.checked_pow(entries as u32).unwrap_or(usize::MAX);
    let decode = |mut k: usize| {
        let mut idx = vec![0; entries];
        for slot in idx.iter_mut().rev() {
            *slot = k % values;
            k /= values;
        }
        idx
    };
    match samples {
        Some(n) if n < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, total, n).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(decode).collect()
        }
        _ => (0..total).map(decode).collect(),
    }
}

pub fn run(cfg: &RunConfig, grid: &GridConfig) -> Result<Vec<SweepRow>, RunError> {
    let base = cfg.problem.as_ref().unwrap();
    let spec = cfg.sweep.as_ref().unwrap();
    if spec.entries.is_empty() || spec.values.is_empty() {
        return Err(RunError::Config("sweep needs at least one entry and one value".into()));
    }
    for &[i, l] in &spec.entries {
        if i >= base.components() || l >= base.len() {
            return Err(RunError::Config(format!("sweep entry [{i}, {l}] is outside the weight matrix")));
        }
    }
    let mut rows = Vec::new();
    for idx in cells(spec.entries.len(), spec.values.len(), spec.samples, cfg.seed) {
        let mut w = base.weights().to_vec();
        for (k, &[i, l]) in spec.entries.iter().enumerate() {
            w[i][l] = spec.values[idx[k]];
        }
        let set = SourceSet::new(base.dim(), base.points().to_vec(), w.clone())?;
        let conditions = check_conditions(&set);
        let (status, masses, slopes) = if spec.solve {
            let solver = Solver::new(Equation::from_sources(&set)?, grid, &cfg.iteration)?;
            let sol = solver.solve(&cfg.iteration)?;
            let annuli = default_annuli(&solver.disc.grid);
            let slopes = sol
                .u
                .iter()
                .map(|u| slope_fit(&solver.disc.grid, u, &annuli).map(|f| f.slope).unwrap_or(f64::NAN))
                .collect();
            (Some(sol.status.label().to_string()), solver.masses(&sol.v, &sol.c), slopes)
        } else {
            (None, vec![], vec![])
        };
        rows.push(SweepRow {
            weights: w,
            conditions,
            status,
            masses,
            slopes,
        });
    }
    Ok(rows)
}

fn flag(c: &Option<toda_core::problem::Check>) -> &'static str {
    match c {
        Some(c) if c.holds => "true",
        Some(_) => "false",
        None => "",
    }
}

/// Columns: weights, condition flags, status, masses, slopes.
pub fn csv(rows: &[SweepRow]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let k = first.weights.len();
    let m = first.weights[0].len();
    let mut head: Vec<String> = Vec::new();
    for i in 1..=k {
        for l in 1..=m {
            head.push(format!("b{i}_{l}"));
        }
    }
    head.extend(
        ["luo_tian", "toda_existence", "beta_like", "barbeta_form", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    head.extend((1..=k).map(|i| format!("mass{i}")));
    head.extend((1..=k).map(|i| format!("slope{i}")));
    let mut out = head.join(",") + "\n";
    for r in rows {
        let mut row: Vec<String> = r.weights.iter().flatten().map(|w| fmt17(*w)).collect();
        let c = &r.conditions;
        for f in [&c.luo_tian, &c.toda_existence, &c.beta_like, &c.barbeta_form] {
            row.push(flag(f).into());
        }
        row.push(r.status.clone().unwrap_or_else(|| "unsolved".into()));
        for i in 0..k {
            row.push(r.masses.get(i).map(|x| fmt17(*x)).unwrap_or_default());
        }
        for i in 0..k {
            row.push(r.slopes.get(i).map(|x| fmt17(*x)).unwrap_or_default());
        }
        out += &row.join(",");
        out.push('\n');
    }
    out
}
