//! Scalar Liouville equation in R^n: (−Δ)^{n/2} w = (n−1)! K e^{nw}.

use serde::{Deserialize, Serialize};

use crate::discretization::{quadrature::unit_sphere_area, GridConfig};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::problem::{Mode, SourceSet};
use crate::solver::{IterationConfig, Solution, Solver};

/// γ_n = ((n−1)!/2)|S^n|.
pub fn gamma_n(n: usize) -> f64 {
    let fact: f64 = (1..n).map(|k| k as f64).product();
    0.5 * fact * unit_sphere_area(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    pub n: usize,
    pub gamma_n: f64,
    /// |S^n|.
    pub sphere_area: f64,
    /// Total mass of the standard bubble, 2γ_n.
    pub lambda1: f64,
    /// Grids in n ≥ 4 are only practical at coarse resolution.
    pub coarse_only: bool,
}

pub fn constants(n: usize) -> DimensionalConstants {
    let g = gamma_n(n);
    DimensionalConstants {
        n,
        gamma_n: g,
        sphere_area: unit_sphere_area(n),
        lambda1: 2.0 * g,
        coarse_only: n >= 4,
    }
}

pub fn scalar_solver(set: &SourceSet, grid: &GridConfig, iter: &IterationConfig) -> Result<Solver> {
    if set.mode() != Mode::Scalar {
        return Err(Error::InvalidInput("expected a scalar source set".into()));
    }
    Solver::new(Equation::from_sources(set)?, grid, iter)
}

pub fn solve_n(eq: Equation, grid: &GridConfig, iter: &IterationConfig) -> Result<(Solver, Solution)> {
    let solver = Solver::new(eq, grid, iter)?;
    let sol = solver.solve(iter)?;
    Ok((solver, sol))
}
