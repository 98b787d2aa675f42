//! Post-solve checks: masses, far-field slopes, local masses, Kelvin round trip,
//! the Pohozaev identity, finite-difference residuals and non-existence probes.

pub mod kelvin;
pub mod pohozaev;
pub mod probe;
pub mod residual;
pub mod sigma;
pub mod slope;

use serde::{Deserialize, Serialize};

pub use kelvin::{kelvin_transform, two_point_defect, KelvinField};
pub use pohozaev::{pohozaev_residual, sigma1_roots, PohozaevCheck};
pub use residual::{fd_residual, FdResidual};
pub use sigma::{resolution_at, sigma_estimate, SigmaTable, Trend};
pub use slope::{default_annuli, log_annuli, slope_fit, SlopeFit};

use crate::discretization::Chart;
use crate::error::{Error, Result};
use crate::solver::{Solution, Solver, Status};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub masses: Vec<f64>,
    pub targets: Vec<f64>,
    /// |m_i − target_i| / target_i.
    pub relative: Vec<f64>,
}

pub fn mass_check(masses: &[f64], targets: &[f64]) -> Result<MassCheck> {
    if masses.len() != targets.len() {
        return Err(Error::InvalidInput("mass and target counts differ".into()));
    }
    if let Some(t) = targets.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidInput(format!("target mass {t} is degenerate")));
    }
    Ok(MassCheck {
        masses: masses.to_vec(),
        targets: targets.to_vec(),
        relative: masses.iter().zip(targets).map(|(m, t)| (m - t).abs() / t).collect(),
    })
}

/// ∫ K_i e^{n u_i} on the grid for assembled fields u_i.
pub fn masses_of(solver: &Solver, u: &[Vec<f64>]) -> Vec<f64> {
    let d = &solver.disc;
    let n = solver.eq.dim as f64;
    (0..solver.eq.components())
        .map(|i| {
            (0..d.grid.len())
                .map(|k| {
                    let log_k = d.weights.log_kbar[i][k] - n * solver.eq.beta[i] * d.u0[k];
                    d.grid.weights[k] * (log_k + n * u[i][k]).exp()
                })
                .sum()
        })
        .collect()
}

/// log K_i at every node.
pub fn log_weights(solver: &Solver, i: usize) -> Vec<f64> {
    let d = &solver.disc;
    let n = solver.eq.dim as f64;
    (0..d.grid.len())
        .map(|k| d.weights.log_kbar[i][k] - n * solver.eq.beta[i] * d.u0[k])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub status: Status,
    pub residual: f64,
    pub iterations: usize,
    pub beta: Vec<f64>,
    pub c: Vec<f64>,
    pub mass: MassCheck,
    pub slopes: Vec<SlopeFit>,
    /// Per component, per source.
    pub local_masses: Vec<Vec<SigmaTable>>,
    /// max |v_i| on the outermost ring of the far chart.
    pub far_ring: Vec<f64>,
    /// Largest error of two Kelvin transforms on far-chart nodes.
    pub kelvin_roundtrip: f64,
    pub fd: Option<FdResidual>,
    pub gauge: Option<f64>,
}

pub fn report(solver: &Solver, sol: &Solution) -> Result<DiagnosticsReport> {
    let g = &solver.disc.grid;
    let k = solver.eq.components();
    let mass = mass_check(&solver.masses(&sol.v, &sol.c), &solver.eq.targets)?;
    let annuli = default_annuli(g);
    let slopes = (0..k)
        .map(|i| slope_fit(g, &sol.u[i], &annuli))
        .collect::<Result<Vec<_>>>()?;
    let dens = solver.densities(&sol.v, &sol.c);
    let local_masses = (0..k)
        .map(|i| {
            solver
                .eq
                .points
                .iter()
                .zip(&g.patch_radii)
                .filter_map(|(p, rho)| {
                    let res = resolution_at(g, p);
                    let radii: Vec<f64> = (0..5)
                        .map(|j| rho * 0.5f64.powi(j))
                        .filter(|r| *r >= res)
                        .collect();
                    sigma_estimate(g, &dens[i], p, &radii).ok()
                })
                .collect()
        })
        .collect();
    let outer: Vec<usize> = (0..g.len()).filter(|&n| g.charts[n] == Chart::Outer).collect();
    let rmax = outer.iter().map(|&n| g.radius(n)).fold(0.0, f64::max);
    let far_ring = (0..k)
        .map(|i| {
            outer
                .iter()
                .filter(|&&n| g.radius(n) >= rmax * (1.0 - 1e-9))
                .map(|&n| sol.v[i][n].abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let pts: Vec<Vec<f64>> = outer.iter().map(|&n| g.point(n).to_vec()).collect();
    let mut kelvin_roundtrip = 0.0f64;
    for i in 0..k {
        let lk = log_weights(solver, i);
        let u: Vec<f64> = outer.iter().map(|&n| sol.u[i][n]).collect();
        let w: Vec<f64> = outer.iter().map(|&n| lk[n]).collect();
        let b = solver.eq.beta[i];
        let once = kelvin_transform(&pts, &u, &w, b)?;
        let twice = kelvin_transform(&once.points, &once.values, &once.log_weight, b)?;
        for (a, c) in twice.values.iter().zip(&u) {
            kelvin_roundtrip = kelvin_roundtrip.max((a - c).abs());
        }
    }
    let fd = if g.dim == 2 {
        fd_residual(solver, &sol.u, 0.5 * g.split_radius).ok()
    } else {
        None
    };
    Ok(DiagnosticsReport {
        status: sol.status,
        residual: sol.residual,
        iterations: sol.iterations(),
        beta: solver.eq.beta.clone(),
        c: sol.c.clone(),
        mass,
        slopes,
        local_masses,
        far_ring,
        kelvin_roundtrip,
        fd,
        gauge: sol.gauge,
    })
}
