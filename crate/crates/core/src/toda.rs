//! SU(3) Toda system in the plane, solved through the fixed-point map T.

use crate::discretization::GridConfig;
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::problem::{Mode, SourceSet};
use crate::solver::{IterationConfig, Solution, Solver};

pub fn toda_solver(set: &SourceSet, grid: &GridConfig, iter: &IterationConfig) -> Result<Solver> {
    if set.mode() != Mode::Toda {
        return Err(Error::InvalidInput("expected a two-component source set".into()));
    }
    Solver::new(Equation::from_sources(set)?, grid, iter)
}

pub fn solve(set: &SourceSet, grid: &GridConfig, iter: &IterationConfig) -> Result<(Solver, Solution)> {
    let solver = toda_solver(set, grid, iter)?;
    let sol = solver.solve(iter)?;
    Ok((solver, sol))
}

/// Equilateral triangle of side `side` centred at the origin.
pub fn equilateral(side: f64) -> Vec<[f64; 2]> {
    let r = side / 3f64.sqrt();
    (0..3)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_has_equal_sides() {
        let p = equilateral(2.0);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let d = ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt();
            assert!((d - 2.0).abs() < 1e-14);
        }
        let c: f64 = p.iter().map(|q| q[0] + q[1]).sum();
        assert!(c.abs() < 1e-14);
    }

    #[test]
    fn scalar_set_is_rejected() {
        let set = SourceSet::scalar(2, vec![vec![0.0, 0.0]], vec![0.5]).unwrap();
        assert!(toda_solver(&set, &GridConfig::default(), &IterationConfig::default()).is_err());
    }
}
