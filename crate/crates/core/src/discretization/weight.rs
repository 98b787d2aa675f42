//! K̄_i = K_i e^{nβ_i u₀} on grid nodes, stored as logarithms.

use super::grid::{log_singular_factor, Chart, QuadratureGrid};
use super::profile::u0;
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::problem::distance;

#[derive(Clone, Debug)]
pub struct WeightField {
    /// `log_kbar[i][node]`.
    pub log_kbar: Vec<Vec<f64>>,
}

impl WeightField {
    pub fn new(grid: &QuadratureGrid, eq: &Equation, cap: f64) -> Result<Self> {
        if grid.sources != eq.points {
            return Err(Error::InvalidInput("grid was built for different sources".into()));
        }
        let n = eq.dim as f64;
        let mut log_kbar = Vec::with_capacity(eq.components());
        for i in 0..eq.components() {
            let mut row = Vec::with_capacity(grid.len());
            for k in 0..grid.len() {
                let x = grid.point(k);
                let mut v = n * eq.beta[i] * u0(grid.radius(k));
                for (l, p) in eq.points.iter().enumerate() {
                    let e = eq.exponents[i][l];
                    if e == 0.0 {
                        continue;
                    }
                    v += if grid.charts[k] == Chart::Patch(l) {
                        log_singular_factor(
                            eq.dim,
                            distance(x, p),
                            grid.layers[k],
                            grid.tail_radii[l],
                            n * e,
                            grid.patch_gauss,
                        )
                    } else {
                        -n * e * distance(x, p).ln()
                    };
                }
                if !v.is_finite() || v > cap {
                    return Err(Error::WeightOverflow { node: k, value: v, cap });
                }
                row.push(v);
            }
            log_kbar.push(row);
        }
        Ok(WeightField { log_kbar })
    }

    pub fn kbar(&self, i: usize, node: usize) -> f64 {
        self.log_kbar[i][node].exp()
    }
}

/// Pointwise K̄_i at x, in log form.
pub fn log_kbar_at(eq: &Equation, i: usize, x: &[f64]) -> f64 {
    let n = eq.dim as f64;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = n * eq.beta[i] * u0(r);
    for (l, p) in eq.points.iter().enumerate() {
        v -= n * eq.exponents[i][l] * distance(x, p).ln();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::GridConfig;
    use crate::problem::SourceSet;

    #[test]
    fn single_source_value() {
        let s = SourceSet::scalar(2, vec![vec![0.0, 0.0]], vec![0.5]).unwrap();
        let eq = Equation::from_sources(&s).unwrap();
        let v = log_kbar_at(&eq, 0, &[2.0, 0.0]).exp();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn far_field_normalized() {
        let pts = vec![[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]];
        let s = SourceSet::toda(pts, vec![0.6; 3], vec![0.3, 0.5, 0.7]).unwrap();
        let eq = Equation::from_sources(&s).unwrap();
        let g = QuadratureGrid::build(2, &eq.points, &GridConfig::default()).unwrap();
        let w = WeightField::new(&g, &eq, 500.0).unwrap();
        let far = (0..g.len())
            .filter(|&k| g.charts[k] == Chart::Outer)
            .max_by(|&a, &b| g.radius(a).total_cmp(&g.radius(b)))
            .unwrap();
        let r = g.radius(far);
        for i in 0..2 {
            let scaled = w.log_kbar[i][far] + 4.0 * r.ln();
            assert!(scaled.abs() < 1e-3, "{scaled} at {r}");
        }
    }

    #[test]
    fn cap_triggers_error() {
        let s = SourceSet::scalar(2, vec![vec![0.0, 0.0]], vec![0.9]).unwrap();
        let eq = Equation::from_sources(&s).unwrap();
        let g = QuadratureGrid::build(2, &eq.points, &GridConfig::default()).unwrap();
        assert!(matches!(
            WeightField::new(&g, &eq, 1.0),
            Err(Error::WeightOverflow { .. })
        ));
    }
}
