//! Inversion x ↦ x/|x|² of a field with far-field exponent β.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KelvinField {
    pub points: Vec<Vec<f64>>,
    /// ũ(y) = u(y/|y|²) − β log|y|.
    pub values: Vec<f64>,
    /// log K̃(y) = log K̄(y/|y|²) − 2n log|y|.
    pub log_weight: Vec<f64>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn invert(x: &[f64]) -> Vec<f64> {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    x.iter().map(|a| a / r2).collect()
}

/// Transform values and log-weights given at `points`; the result lives at the
/// inverted points. Applying it twice with the same β returns the input.
pub fn kelvin_transform(
    points: &[Vec<f64>],
    values: &[f64],
    log_weight: &[f64],
    beta: f64,
) -> Result<KelvinField> {
    if values.len() != points.len() || log_weight.len() != points.len() {
        return Err(Error::InvalidInput("field length mismatch".into()));
    }
    let mut out = KelvinField {
        points: Vec::with_capacity(points.len()),
        values: Vec::with_capacity(points.len()),
        log_weight: Vec::with_capacity(points.len()),
    };
    for (k, x) in points.iter().enumerate() {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::InvalidInput(format!("node {k} sits at the origin")));
        }
        let n = x.len() as f64;
        // |y| = 1/r
        out.points.push(invert(x));
        out.values.push(values[k] + beta * r.ln());
        out.log_weight.push(log_weight[k] + 2.0 * n * r.ln());
    }
    Ok(out)
}

/// | |x||y||x/|x|² − y/|y|²| − |x − y| |.
pub fn two_point_defect(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = invert(x).iter().zip(invert(y)).map(|(a, b)| a - b).collect();
    let lhs = norm(x) * norm(y) * norm(&d);
    let rhs = norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
    (lhs - rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution() {
        let pts = vec![vec![0.3, -2.0], vec![5.0, 1.0], vec![0.01, 0.02]];
        let u = vec![0.5, -1.0, 2.0];
        let lk = vec![0.0, -3.0, 1.0];
        let once = kelvin_transform(&pts, &u, &lk, 1.4).unwrap();
        let twice = kelvin_transform(&once.points, &once.values, &once.log_weight, 1.4).unwrap();
        for k in 0..3 {
            assert!((twice.values[k] - u[k]).abs() < 1e-14);
            assert!((twice.log_weight[k] - lk[k]).abs() < 1e-13);
            for d in 0..2 {
                assert!((twice.points[k][d] - pts[k][d]).abs() < 1e-15 * (1.0 + pts[k][d].abs()));
            }
        }
    }

    #[test]
    fn far_exponent_is_removed() {
        // u = −β log|x| + 0.7 becomes the constant 0.7
        let pts: Vec<Vec<f64>> = (1..6).map(|k| vec![3.0 * k as f64, 1.0]).collect();
        let u: Vec<f64> = pts.iter().map(|p| -1.5 * norm(p).ln() + 0.7).collect();
        let t = kelvin_transform(&pts, &u, &vec![0.0; 5], 1.5).unwrap();
        assert!(t.values.iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn origin_rejected() {
        assert!(kelvin_transform(&[vec![0.0, 0.0]], &[0.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn two_point_identity() {
        assert!(two_point_defect(&[1.0, 2.0], &[-0.5, 0.25]) < 1e-14);
    }
}
