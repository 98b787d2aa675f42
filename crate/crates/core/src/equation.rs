//! The discretization-independent description of a system to solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::gamma_n;
use crate::problem::{derive_exponents, Mode, SourceSet, CARTAN};

/// `K_i = Π_l |x − P_l|^{−n·exponents[i][l]}`, far-field exponents `beta`,
/// and `v_i = kernel_scale · Σ_j coupling[i][j] · (log kernel * K̄_j e^{n(v_j+c_j)}) − β_i u₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub dim: usize,
    pub mode: Mode,
    pub points: Vec<Vec<f64>>,
    pub exponents: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub targets: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
    pub kernel_scale: f64,
}

impl Equation {
    pub fn from_sources(set: &SourceSet) -> Result<Self> {
        let d = derive_exponents(set);
        let eq = match set.mode() {
            Mode::Scalar => Equation {
                dim: set.dim(),
                mode: Mode::Scalar,
                points: set.points().to_vec(),
                exponents: set.weights().to_vec(),
                beta: d.beta,
                targets: d.target_mass,
                coupling: vec![vec![1.0]],
                kernel_scale: 1.0 / gamma_n(set.dim()),
            },
            Mode::Toda => Equation {
                dim: 2,
                mode: Mode::Toda,
                points: set.points().to_vec(),
                exponents: set.weights().to_vec(),
                beta: d.beta,
                targets: d.target_mass,
                coupling: CARTAN.iter().map(|r| r.to_vec()).collect(),
                kernel_scale: 0.5 / std::f64::consts::PI,
            },
        };
        eq.validate()?;
        Ok(eq)
    }

    /// Scalar equation with an explicit far-field exponent; target mass βγ_n.
    /// Exponents may be negative (vanishing weights).
    pub fn scalar(dim: usize, points: Vec<Vec<f64>>, exponents: Vec<f64>, beta: f64) -> Result<Self> {
        let eq = Equation {
            dim,
            mode: Mode::Scalar,
            points,
            exponents: vec![exponents],
            beta: vec![beta],
            targets: vec![beta * gamma_n(dim)],
            coupling: vec![vec![1.0]],
            kernel_scale: 1.0 / gamma_n(dim),
        };
        eq.validate()?;
        Ok(eq)
    }

    /// Weight |x|^{nα} and total mass 2γ_n(1+α).
    pub fn validation(dim: usize, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::InvalidInput(format!("alpha {alpha} must exceed -1")));
        }
        if alpha == 0.0 {
            Equation::scalar(dim, vec![], vec![], 2.0)
        } else {
            Equation::scalar(dim, vec![vec![0.0; dim]], vec![-alpha], 2.0 * (1.0 + alpha))
        }
    }

    pub fn components(&self) -> usize {
        self.beta.len()
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidInput("dimension must be at least 2".into()));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.is_finite() && *t > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "target mass {t} of component {i} is not positive"
                )));
            }
        }
        for (i, row) in self.exponents.iter().enumerate() {
            if row.len() != self.points.len() {
                return Err(Error::InvalidInput("exponent row length mismatch".into()));
            }
            if let Some(e) = row.iter().find(|e| !(**e < 1.0) || !e.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "exponent {e} of component {i} is not integrable"
                )));
            }
            let total: f64 = row.iter().sum();
            if total + self.beta[i] <= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "weight of component {i} is not integrable at infinity"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_masses() {
        let e = Equation::validation(2, 0.5).unwrap();
        assert!((e.targets[0] - 6.0 * std::f64::consts::PI).abs() < 1e-12);
        let e = Equation::validation(3, 0.0).unwrap();
        assert!((e.targets[0] - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_targets() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        let s = SourceSet::toda(
            pts.iter().map(|p| [p[0], p[1]]).collect(),
            vec![0.9, 0.9, 0.9],
            vec![0.9, 0.9, 0.9],
        )
        .unwrap();
        assert!(Equation::from_sources(&s).is_err());
    }
}
