//! Five-point finite-difference residual of −Δu_i = Σ_j a_ij K_j e^{2u_j} on the
//! uniform core of a planar grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::discretization::Chart;
use crate::error::{Error, Result};
use crate::problem::distance;
use crate::solver::Solver;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdResidual {
    pub spacing: f64,
    /// Sup over stencil centers and components.
    pub max: f64,
    pub rms: f64,
    pub nodes: usize,
    pub max_at: Vec<f64>,
}

/// Residual on core nodes with |x| ≤ `radius` whose four neighbours are grid
/// nodes and whose stencil stays clear of every source patch.
pub fn fd_residual(solver: &Solver, u: &[Vec<f64>], radius: f64) -> Result<FdResidual> {
    let g = &solver.disc.grid;
    let eq = &solver.eq;
    if g.dim != 2 {
        return Err(Error::InvalidInput("finite-difference residual needs n = 2".into()));
    }
    let h = g.core_spacing;
    let key = |x: &[f64]| ((x[0] / h - 0.5).round() as i64, (x[1] / h - 0.5).round() as i64);
    let core: Vec<usize> = (0..g.len())
        .filter(|&k| g.charts[k] == Chart::Inner && (g.spacing[k] - h).abs() < 1e-12 * h)
        .collect();
    let index: HashMap<(i64, i64), usize> = core.iter().map(|&k| (key(g.point(k)), k)).collect();
    let factor = 2.0 * std::f64::consts::PI * eq.kernel_scale;
    let n = eq.components();
    let (mut max, mut sum, mut count, mut at) = (0.0f64, 0.0, 0usize, vec![0.0; 2]);
    for &k in &core {
        let x = g.point(k);
        if g.radius(k) > radius {
            continue;
        }
        let clear = eq
            .points
            .iter()
            .zip(&g.patch_radii)
            .all(|(p, rho)| distance(x, p) > rho + 2.0 * h);
        if !clear {
            continue;
        }
        let (a, b) = key(x);
        let nb: Option<Vec<usize>> = [(a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)]
            .iter()
            .map(|c| index.get(c).copied())
            .collect();
        let Some(nb) = nb else { continue };
        let rhs: Vec<f64> = (0..n)
            .map(|j| {
                let log_k = solver.disc.weights.log_kbar[j][k] - 2.0 * eq.beta[j] * solver.disc.u0[k];
                (log_k + 2.0 * u[j][k]).exp()
            })
            .collect();
        for i in 0..n {
            let lap = (nb.iter().map(|&m| u[i][m]).sum::<f64>() - 4.0 * u[i][k]) / (h * h);
            let f: f64 = (0..n).map(|j| eq.coupling[i][j] * rhs[j]).sum::<f64>() * factor;
            let r = (-lap - f).abs();
            sum += r * r;
            count += 1;
            if r > max {
                max = r;
                at = x.to_vec();
            }
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput("no interior stencil centers".into()));
    }
    Ok(FdResidual {
        spacing: h,
        max,
        rms: (sum / count as f64).sqrt(),
        nodes: count / n,
        max_at: at,
    })
}
