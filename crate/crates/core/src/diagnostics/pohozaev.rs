//! The local Pohozaev identity for blow-up values of the two-component system.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PohozaevCheck {
    /// σ₁² + σ₂² − σ₁σ₂ − σ₁(1 − α₁) − σ₂(1 − α₂).
    pub residual: f64,
    /// σ₁ ≥ 1 − α₁ or σ₂ ≥ 1 − α₂; `None` when both values vanish.
    pub dichotomy: Option<bool>,
}

pub fn pohozaev_residual(s1: f64, s2: f64, a1: f64, a2: f64) -> PohozaevCheck {
    // grouped so that swapping the components is exact in floating point
    let residual = (s1 * s1 + s2 * s2) - s1 * s2 - (s1 * (1.0 - a1) + s2 * (1.0 - a2));
    let dichotomy = (s1 != 0.0 || s2 != 0.0).then(|| s1 >= 1.0 - a1 || s2 >= 1.0 - a2);
    PohozaevCheck {
        residual,
        dichotomy,
    }
}

/// Real roots σ₁ of the identity for a given σ₂, in increasing order.
pub fn sigma1_roots(s2: f64, a1: f64, a2: f64) -> Vec<f64> {
    // σ₁² − (σ₂ + 1 − α₁)σ₁ + σ₂² − σ₂(1 − α₂) = 0
    let b = s2 + 1.0 - a1;
    let c = s2 * s2 - s2 * (1.0 - a2);
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = disc.sqrt();
    if q == 0.0 {
        return vec![0.5 * b];
    }
    vec![0.5 * (b - q), 0.5 * (b + q)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_blow_up_is_a_root() {
        for a in [-0.5, 0.0, 0.3, 0.9] {
            let s = 2.0 * (1.0 - a);
            assert!(pohozaev_residual(s, s, a, a).residual.abs() < 1e-14);
        }
        let zero = pohozaev_residual(0.0, 0.0, 0.2, 0.4);
        assert_eq!(zero.residual, 0.0);
        assert_eq!(zero.dichotomy, None);
    }

    #[test]
    fn half_blow_up_root() {
        let r = sigma1_roots(0.0, 0.25, 0.6);
        assert_eq!(r.len(), 2);
        assert!(r[0].abs() < 1e-15 && (r[1] - 0.75).abs() < 1e-15);
        let c = pohozaev_residual(0.75, 0.0, 0.25, 0.6);
        assert!(c.residual.abs() < 1e-15 && c.dichotomy == Some(true));
        assert!(pohozaev_residual(0.5, 0.0, 0.25, 0.6).residual.abs() > 0.1);
    }

    #[test]
    fn swap_symmetry() {
        let a = pohozaev_residual(0.7, 1.3, 0.1, -0.4);
        let b = pohozaev_residual(1.3, 0.7, -0.4, 0.1);
        assert_eq!(a.residual, b.residual);
    }
}
