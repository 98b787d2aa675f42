//! Local masses (1/γ_n)∫_{B_r(P)} K e^{nu} on shrinking balls.

use serde::{Deserialize, Serialize};

use crate::discretization::QuadratureGrid;
use crate::error::{Error, Result};
use crate::liouville::gamma_n;
use crate::problem::distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    /// Local mass extrapolates to zero.
    Vanishing,
    /// Local mass settles at a positive value.
    Concentrating,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaTable {
    pub point: Vec<f64>,
    /// Radii in decreasing order.
    pub radii: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Value at the smallest radius.
    pub limit: f64,
    /// Geometric extrapolation of the last three values.
    pub extrapolated: f64,
    pub trend: Trend,
    /// σ is nonincreasing as r decreases.
    pub monotone: bool,
}

/// Smallest radius the grid resolves around `point`: twice the cell radius of
/// the nearest node, and at a source twice the radius of its lumped tail ball,
/// inside which the mass profile is not resolved.
pub fn resolution_at(grid: &QuadratureGrid, point: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, 0);
    for k in 0..grid.len() {
        let d = distance(grid.point(k), point);
        if d < best.0 {
            best = (d, k);
        }
    }
    let tail = grid
        .sources
        .iter()
        .zip(&grid.tail_radii)
        .filter(|(p, _)| distance(p, point) <= 1e-12 * (1.0 + p.iter().map(|x| x * x).sum::<f64>().sqrt()))
        .map(|(_, t)| 2.0 * t)
        .fold(0.0, f64::max);
    (2.0 * grid.ball_radius(best.1)).max(tail)
}

/// `masses` are node masses K e^{nu}·w.
pub fn sigma_estimate(
    grid: &QuadratureGrid,
    masses: &[f64],
    point: &[f64],
    radii: &[f64],
) -> Result<SigmaTable> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("no radii given".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let res = resolution_at(grid, point);
    let smallest = radii[radii.len() - 1];
    if smallest < res {
        return Err(Error::BelowResolution {
            radius: smallest,
            resolution: res,
        });
    }
    let scale = 1.0 / gamma_n(grid.dim);
    let dist: Vec<f64> = (0..grid.len()).map(|k| distance(grid.point(k), point)).collect();
    let sigma: Vec<f64> = radii
        .iter()
        .map(|r| {
            scale
                * (0..grid.len())
                    .filter(|&k| dist[k] < *r)
                    .map(|k| masses[k])
                    .sum::<f64>()
        })
        .collect();
    Ok(table(point.to_vec(), radii, sigma))
}

pub(crate) fn table(point: Vec<f64>, radii: Vec<f64>, sigma: Vec<f64>) -> SigmaTable {
    let j = sigma.len();
    let limit = sigma[j - 1];
    let monotone = sigma.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let (extrapolated, trend) = if j < 3 {
        (limit, Trend::Undetermined)
    } else {
        let d1 = sigma[j - 3] - sigma[j - 2];
        let d2 = sigma[j - 2] - sigma[j - 1];
        let top = sigma[j - 3].abs().max(f64::MIN_POSITIVE);
        let ext = if d2 <= 0.0 || d1 <= 0.0 {
            limit
        } else {
            let rho = d2 / d1;
            if rho < 1.0 {
                limit - d2 * rho / (1.0 - rho)
            } else {
                f64::NEG_INFINITY
            }
        };
        let trend = if limit <= 1e-12 * top || ext <= 0.1 * top {
            Trend::Vanishing
        } else if ext >= 0.5 * limit && limit > 0.0 {
            Trend::Concentrating
        } else {
            Trend::Undetermined
        };
        (ext.max(0.0), trend)
    };
    SigmaTable {
        point,
        radii,
        sigma,
        limit,
        extrapolated,
        trend,
        monotone,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_density_vanishes() {
        let radii = vec![0.8, 0.4, 0.2, 0.1];
        let sigma: Vec<f64> = radii.iter().map(|r| 3.0 * r * r).collect();
        let t = table(vec![0.0, 0.0], radii, sigma);
        assert_eq!(t.trend, Trend::Vanishing);
        assert!(t.extrapolated < 1e-12 && t.monotone);
    }

    #[test]
    fn plateau_concentrates() {
        let radii = vec![0.8, 0.4, 0.2, 0.1];
        let sigma: Vec<f64> = radii.iter().map(|r| 1.5 + 1e-4 * r).collect();
        let t = table(vec![0.0, 0.0], radii, sigma);
        assert_eq!(t.trend, Trend::Concentrating);
        assert!((t.extrapolated - 1.5).abs() < 1e-9);
    }
}
