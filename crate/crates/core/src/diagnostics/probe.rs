//! Solver runs over configurations for which no continuum solution exists once
//! a scale parameter is large, next to a sanity leg where one does.

use serde::{Deserialize, Serialize};

use super::sigma::{resolution_at, sigma_estimate, SigmaTable};
use super::slope::{default_annuli, slope_fit};
use crate::discretization::GridConfig;
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::problem::{assumptions_a, counterexample_family_at, counterexample_weights, Assumptions, SourceSet};
use crate::solver::{IterationConfig, Solver, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Four-source scalar problem with far exponent 2β₄ and |P₄| = s.
    Scalar,
    /// Seven-source two-component family with |P₆| = |P₇|/2 = s.
    Toda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    /// Weights from the ε-family.
    Violating,
    /// Weights for which the limit problem is solvable.
    Sanity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub family: Family,
    pub leg: Leg,
    pub epsilon: f64,
    pub scales: Vec<f64>,
    /// |P₄| for the two-component family.
    pub anchor: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            family: Family::Scalar,
            leg: Leg::Violating,
            epsilon: 0.1,
            scales: vec![5.0, 10.0, 20.0],
            anchor: 20.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithNonexistence,
    Converged,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithNonexistence => "consistent-with-nonexistence",
            Verdict::Converged => "converged",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub stage: f64,
    pub iteration: usize,
    pub residual: f64,
    pub peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub scale: f64,
    pub nodes: usize,
    pub status: Status,
    pub residual: f64,
    pub iterations: usize,
    pub masses: Vec<f64>,
    pub slopes: Vec<f64>,
    /// max_i |slope_i − β_i| / β_i.
    pub slope_error: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Local mass tables at the candidate concentration points.
    pub candidates: Vec<(usize, usize, SigmaTable)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub spec: ProbeSpec,
    pub weights: Vec<Vec<f64>>,
    /// A1–A6 on the seven ε-family weights (two-component family only).
    pub assumptions: Option<Assumptions>,
    /// β₄ + β₅ < 1.
    pub a5: Option<bool>,
    pub runs: Vec<ProbeRun>,
    pub verdict: Verdict,
}

fn triangle() -> Vec<[f64; 2]> {
    (0..3)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Scalar weights (β₁..β₄). The violating leg satisfies A1–A3; the sanity leg
/// keeps A1 and A3 but has β₂ + β₃ > β₁.
pub fn scalar_weights(eps: f64, leg: Leg) -> Result<[f64; 4]> {
    let b = counterexample_weights(eps)?;
    Ok(match leg {
        Leg::Violating => [b[0], b[1], b[2], b[3]],
        Leg::Sanity => {
            let b1 = 0.5;
            let rest = 0.5 * (2.0 - 2.0 * b[3] - b1);
            [b1, rest, rest, b[3]]
        }
    })
}

pub fn scalar_equation(w: [f64; 4], s: f64) -> Result<Equation> {
    let mut points: Vec<Vec<f64>> = triangle().iter().map(|p| p.to_vec()).collect();
    points.push(vec![s, 0.0]);
    Equation::scalar(2, points, w.to_vec(), 2.0 * w[3])
}

/// P₁..P₃ on the unit circle, P₄ = (0, anchor), P₅ = (0, −1), P₆ = (s, 0), P₇ = (−2s, 0).
pub fn toda_points(s: f64, anchor: f64) -> Vec<[f64; 2]> {
    let mut p = triangle();
    p.push([0.0, anchor]);
    p.push([0.0, -1.0]);
    p.push([s, 0.0]);
    p.push([-2.0 * s, 0.0]);
    p
}

pub fn toda_sources(eps: f64, leg: Leg, s: f64, anchor: f64) -> Result<SourceSet> {
    let pts = toda_points(s, anchor);
    match leg {
        Leg::Violating => counterexample_family_at(eps, pts),
        Leg::Sanity => SourceSet::toda(pts, vec![0.25; 7], vec![0.25; 7]),
    }
}

fn check_scalar(w: &[f64; 4], leg: Leg) -> Result<()> {
    let a1 = (w[3] + w.iter().sum::<f64>() - 2.0).abs() <= 1e-12;
    let a2 = w[1] + w[2] < w[0];
    let a3 = w[3] < 1.0 / 3.0;
    let ok = a1 && a3 && (a2 == (leg == Leg::Violating));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("scalar probe weights {w:?} break A1–A3 for the {leg:?} leg")))
    }
}

pub fn nonexistence_probe(spec: &ProbeSpec, grid: &GridConfig, iter: &IterationConfig) -> Result<ProbeReport> {
    if spec.scales.is_empty() || spec.scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("probe scales must be positive".into()));
    }
    let mut runs = Vec::new();
    let (weights, assumptions, a5) = match spec.family {
        Family::Scalar => {
            let w = scalar_weights(spec.epsilon, spec.leg)?;
            check_scalar(&w, spec.leg)?;
            (vec![w.to_vec()], None, None)
        }
        Family::Toda => {
            let b = counterexample_weights(spec.epsilon)?;
            let a = assumptions_a(&b);
            if !a.all() {
                return Err(Error::InvalidInput("ε-family weights break A1–A6".into()));
            }
            let set = toda_sources(spec.epsilon, spec.leg, spec.scales[0], spec.anchor)?;
            let a5 = a.holds[4];
            (set.weights().to_vec(), Some(a), Some(a5))
        }
    };
    for &s in &spec.scales {
        let eq = match spec.family {
            Family::Scalar => scalar_equation(scalar_weights(spec.epsilon, spec.leg)?, s)?,
            Family::Toda => Equation::from_sources(&toda_sources(spec.epsilon, spec.leg, s, spec.anchor)?)?,
        };
        let candidates: Vec<(usize, usize)> = match spec.family {
            Family::Scalar => vec![(0, 0)],
            Family::Toda => vec![(1, 4), (0, 0), (0, 1), (0, 2), (0, 3)],
        };
        let solver = Solver::new(eq, grid, iter)?;
        let sol = solver.solve(iter)?;
        let g = &solver.disc.grid;
        let annuli = default_annuli(g);
        let slopes = (0..solver.eq.components())
            .map(|i| slope_fit(g, &sol.u[i], &annuli).map(|f| f.slope))
            .collect::<Result<Vec<_>>>()?;
        let slope_error = slopes
            .iter()
            .zip(&solver.eq.beta)
            .map(|(s, b)| (s - b).abs() / b)
            .fold(0.0, f64::max);
        let dens = solver.densities(&sol.v, &sol.c);
        let tables = candidates
            .iter()
            .filter_map(|&(i, l)| {
                let p = &solver.eq.points[l];
                let rho = g.patch_radii[l];
                let res = resolution_at(g, p);
                let radii: Vec<f64> = (0..12).map(|j| rho * 0.5f64.powi(j)).filter(|r| *r >= res).collect();
                sigma_estimate(g, &dens[i], p, &radii).ok().map(|t| (i, l, t))
            })
            .collect();
        runs.push(ProbeRun {
            scale: s,
            nodes: g.len(),
            status: sol.status,
            residual: sol.residual,
            iterations: sol.iterations(),
            masses: solver.masses(&sol.v, &sol.c),
            slopes,
            slope_error,
            trajectory: sol
                .history
                .iter()
                .map(|r| TrajectoryPoint {
                    stage: r.stage,
                    iteration: r.iteration,
                    residual: r.residual.iter().copied().fold(0.0, f64::max),
                    peak: r.peak,
                })
                .collect(),
            candidates: tables,
        });
    }
    let verdict = verdict(&runs);
    Ok(ProbeReport {
        spec: spec.clone(),
        weights,
        assumptions,
        a5,
        runs,
        verdict,
    })
}

/// No convergence at the largest scale, or converged runs whose slope error
/// grows strictly with the scale, are consistent with non-existence;
/// convergence at every scale without that trend is `Converged`.
pub fn verdict(runs: &[ProbeRun]) -> Verdict {
    let Some(last) = runs.last() else {
        return Verdict::Inconclusive;
    };
    if last.status != Status::Converged {
        return Verdict::ConsistentWithNonexistence;
    }
    if runs.iter().all(|r| r.status == Status::Converged) {
        let growing = runs.windows(2).all(|w| w[1].slope_error > w[0].slope_error);
        if runs.len() > 1 && growing {
            return Verdict::ConsistentWithNonexistence;
        }
        return Verdict::Converged;
    }
    Verdict::Inconclusive
}

/// Trajectory rows: scale, stage, iteration, residual, peak.
pub fn trajectory_csv(report: &ProbeReport) -> String {
    let mut out = String::from("scale,stage,iteration,residual,peak\n");
    for r in &report.runs {
        for p in &r.trajectory {
            out += &format!(
                "{},{},{},{},{}\n",
                crate::solver::fmt17(r.scale),
                crate::solver::fmt17(p.stage),
                p.iteration,
                crate::solver::fmt17(p.residual),
                crate::solver::fmt17(p.peak)
            );
        }
    }
    out
}
