//! Least-squares fit of u ≈ −β log|x| + h over far-field annuli.

use serde::{Deserialize, Serialize};

use crate::discretization::QuadratureGrid;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Fitted β in u ≈ −β log|x| + h.
    pub slope: f64,
    /// Fitted h.
    pub intercept: f64,
    /// max − min of u + β log|x| over the nodes used.
    pub spread: f64,
    /// Weighted mean of log|x| and of u per annulus.
    pub log_radii: Vec<f64>,
    pub means: Vec<f64>,
}

/// Six logarithmically spaced annuli between 2R/3 and R, R the chart split radius.
pub fn default_annuli(grid: &QuadratureGrid) -> Vec<(f64, f64)> {
    log_annuli(2.0 * grid.split_radius / 3.0, grid.split_radius, 6)
}

pub fn log_annuli(inner: f64, outer: f64, count: usize) -> Vec<(f64, f64)> {
    let q = (outer / inner).powf(1.0 / count as f64);
    (0..count)
        .map(|j| (inner * q.powi(j as i32), inner * q.powi(j as i32 + 1)))
        .collect()
}

/// Fit on grid nodes, weighting each annulus average by quadrature weights.
pub fn slope_fit(grid: &QuadratureGrid, u: &[f64], annuli: &[(f64, f64)]) -> Result<SlopeFit> {
    let radii: Vec<f64> = (0..grid.len()).map(|k| grid.radius(k)).collect();
    fit(&radii, &grid.weights, u, annuli)
}

/// Fit on arbitrary radial samples with weights.
pub fn fit(radii: &[f64], weights: &[f64], u: &[f64], annuli: &[(f64, f64)]) -> Result<SlopeFit> {
    if annuli.len() < 2 {
        return Err(Error::AnnuliOutsideGrid("need at least two annuli".into()));
    }
    let mut xs = Vec::with_capacity(annuli.len());
    let mut ys = Vec::with_capacity(annuli.len());
    let mut used = Vec::new();
    for &(a, b) in annuli {
        if !(a > 0.0 && b > a) {
            return Err(Error::AnnuliOutsideGrid(format!("annulus [{a}, {b}] is empty")));
        }
        let (mut w, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for k in 0..radii.len() {
            if radii[k] >= a && radii[k] < b {
                w += weights[k];
                sx += weights[k] * radii[k].ln();
                sy += weights[k] * u[k];
                used.push(k);
            }
        }
        if w == 0.0 {
            return Err(Error::AnnuliOutsideGrid(format!("no nodes in annulus [{a}, {b}]")));
        }
        xs.push(sx / w);
        ys.push(sy / w);
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::AnnuliOutsideGrid("annuli share one radius".into()));
    }
    let slope = -sxy / sxx;
    let intercept = my + slope * mx;
    let rem = used.iter().map(|&k| u[k] + slope * radii[k].ln());
    let (lo, hi) = rem.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    Ok(SlopeFit {
        slope,
        intercept,
        spread: hi - lo,
        log_radii: xs,
        means: ys,
    })
}
