//! Reference solutions: closed-form bubbles and a radial solver for a single
//! source at the origin.

use serde::{Deserialize, Serialize};

use crate::discretization::{profile::u0, quadrature::unit_sphere_area, GridConfig};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::liouville::{gamma_n, solve_n};
use crate::solver::{log_sum_exp, IterationConfig, Status};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// log(2/(1+|x|²)), a solution of −Δu = e^{2u} with mass 4π.
pub fn bubble_2d(x: &[f64]) -> f64 {
    (2.0 / (1.0 + x.iter().map(|a| a * a).sum::<f64>())).ln()
}

/// Normal solution with weight |x|^{nα} and mass 2γ_n(1+α), when it is known in
/// closed form: n = 2 for any α > −1, or α = 0 in any dimension.
pub fn bubble(n: usize, alpha: f64, x: &[f64]) -> Option<f64> {
    let r = norm(x);
    if n == 2 {
        let k = 1.0 + alpha;
        return Some((2.0 * k / (1.0 + r.powf(2.0 * k))).ln());
    }
    if alpha != 0.0 {
        return None;
    }
    let fact: f64 = (1..n).map(|k| k as f64).product();
    Some((2.0 / (1.0 + r * r)).ln() + fact.ln() / n as f64)
}

/// Angular mean of log(1/|x − y|) over |x| = r, |y| = s.
pub fn radial_kernel(n: usize, r: f64, s: f64) -> Result<f64> {
    let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
    match n {
        2 => Ok(-hi.ln()),
        3 => {
            // ½ − [(1+q)² log(1+q) − (1−q)² log(1−q)] / (4q), q = lo/hi
            let q = lo / hi;
            let g = if q == 0.0 {
                0.0
            } else if q == 1.0 {
                0.5 - 2f64.ln()
            } else {
                0.5 - ((1.0 + q).powi(2) * q.ln_1p() - (1.0 - q).powi(2) * (-q).ln_1p()) / (4.0 * q)
            };
            Ok(-hi.ln() + g)
        }
        _ => Err(Error::InvalidInput(format!("no radial kernel for n = {n}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    /// Mesh in τ = log r.
    pub tau_min: f64,
    pub tau_max: f64,
    pub points_per_unit: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub theta: f64,
    pub homotopy: Vec<f64>,
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig {
            tau_min: -18.0,
            tau_max: 18.0,
            points_per_unit: 60,
            tol: 1e-11,
            max_iter: 2000,
            theta: 0.5,
            homotopy: vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub alpha: f64,
    pub n: usize,
    pub status: Status,
    pub residual: f64,
    pub iterations: usize,
    pub radii: Vec<f64>,
    pub u: Vec<f64>,
    pub mass: f64,
}

/// Radial reduction of v = T(v) for K = |x|^{nα}, β = Λ/γ_n, on a uniform mesh
/// in log r. The dilation mode is pinned so that half of the mass lies in the
/// unit ball.
pub fn radial_solve(alpha: f64, n: usize, target: f64, cfg: &RadialConfig) -> Result<RadialSolution> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("alpha {alpha} must exceed -1")));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidInput("target mass must be positive".into()));
    }
    radial_kernel(n, 1.0, 1.0)?;
    let nf = n as f64;
    let gamma = gamma_n(n);
    let beta = target / gamma;
    let dt = 1.0 / cfg.points_per_unit as f64;
    let m = ((cfg.tau_max - cfg.tau_min) / dt).round() as usize + 1;
    let radii: Vec<f64> = (0..m).map(|j| (cfg.tau_min + j as f64 * dt).exp()).collect();
    let area = unit_sphere_area(n - 1);
    // log of measure × K̄
    let log_w: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let end = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            (area * dt * end).ln() + nf * s.ln() + nf * alpha * s.ln() + nf * beta * u0(*s)
        })
        .collect();
    let kernel: Vec<f64> = {
        let mut k = Vec::with_capacity(m * m);
        for r in &radii {
            for s in &radii {
                k.push(radial_kernel(n, *r, *s)? / gamma);
            }
        }
        k
    };
    let psi: Vec<f64> = radii
        .iter()
        .map(|r| {
            let q = r.powf(beta);
            (1.0 - q) / (1.0 + q)
        })
        .collect();
    let base: Vec<f64> = radii.iter().map(|r| beta * u0(*r)).collect();
    let normalize = |v: &[f64]| -> Vec<f64> {
        let lse = log_sum_exp((0..m).map(|j| log_w[j] + nf * v[j]));
        let c = (target.ln() - lse) / nf;
        (0..m).map(|j| (log_w[j] + nf * (v[j] + c)).exp()).collect()
    };
    let apply = |v: &[f64]| -> Vec<f64> {
        let mu = normalize(v);
        (0..m)
            .map(|i| {
                let row = &kernel[i * m..(i + 1) * m];
                row.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>() - base[i]
            })
            .collect()
    };
    let pin = |w: &[f64]| -> f64 {
        // s such that the density of w + (s/n)ψ has zero ψ-mean
        let eval = |s: f64| {
            let logs: Vec<f64> = (0..m).map(|j| log_w[j] + nf * w[j] + s * psi[j]).collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (mut z, mut e1, mut e2) = (0.0, 0.0, 0.0);
            for j in 0..m {
                let p = (logs[j] - top).exp();
                z += p;
                e1 += p * psi[j];
                e2 += p * psi[j] * psi[j];
            }
            (e1 / z, e2 / z - (e1 / z).powi(2))
        };
        // H is increasing in s: bracket, then Newton with bisection fallback
        let (mut lo, mut hi) = (-1.0, 1.0);
        while eval(lo).0 > 0.0 && lo > -1e6 {
            lo *= 2.0;
        }
        while eval(hi).0 < 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        let mut s = 0.0;
        for _ in 0..200 {
            let (h, dh) = eval(s);
            if h.abs() < 1e-15 {
                break;
            }
            if h > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let next = s - h / dh;
            s = if dh > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-14 {
                break;
            }
        }
        s
    };
    let mut v = vec![0.0; m];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut status = Status::MaxIter;
    for &t in &cfg.homotopy {
        let last = t == 1.0;
        let accept = if last { cfg.tol } else { 1e-6f64.max(cfg.tol) };
        let theta = cfg.theta;
        let mut done = false;
        for _ in 0..cfg.max_iter {
            iterations += 1;
            let mut tv: Vec<f64> = apply(&v).into_iter().map(|x| t * x).collect();
            if last {
                let w: Vec<f64> = (0..m).map(|j| (1.0 - theta) * v[j] + theta * tv[j]).collect();
                let a = pin(&w) / (nf * theta);
                for (x, p) in tv.iter_mut().zip(&psi) {
                    *x += a * p;
                }
            }
            residual = tv.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if !residual.is_finite() {
                return Err(Error::DegenerateField("radial iteration diverged".into()));
            }
            if residual <= accept {
                done = true;
                break;
            }
            for (a, b) in v.iter_mut().zip(&tv) {
                *a = (1.0 - theta) * *a + theta * b;
            }
        }
        if !done {
            break;
        }
        if last {
            status = Status::Converged;
        }
    }
    let lse = log_sum_exp((0..m).map(|j| log_w[j] + nf * v[j]));
    let c = (target.ln() - lse) / nf;
    let u: Vec<f64> = (0..m).map(|j| v[j] + base[j] + c).collect();
    let mass = (0..m)
        .map(|j| (log_w[j] + nf * (u[j] - base[j])).exp())
        .sum();
    Ok(RadialSolution {
        alpha,
        n,
        status,
        residual,
        iterations,
        radii,
        u,
        mass,
    })
}

impl RadialSolution {
    /// Far exponent Λ/γ_n.
    pub fn beta(&self) -> f64 {
        self.mass / gamma_n(self.n)
    }

    /// Linear interpolation in log r; constant beyond the mesh ends.
    pub fn value_at(&self, r: f64) -> f64 {
        let t0 = self.radii[0].ln();
        let dt = self.radii[1].ln() - t0;
        let x = (r.ln() - t0) / dt;
        if x <= 0.0 {
            return self.u[0];
        }
        let j = x.floor() as usize;
        if j + 1 >= self.u.len() {
            return self.u[self.u.len() - 1];
        }
        let f = x - j as f64;
        (1.0 - f) * self.u[j] + f * self.u[j + 1]
    }

    /// Profile of the dilated solution u(λr) + (β/2) log λ.
    pub fn dilated(&self, lambda: f64, r: f64) -> f64 {
        self.value_at(lambda * r) + 0.5 * self.beta() * lambda.ln()
    }

    /// λ for which the dilated profile takes the value `value` at radius `r`.
    pub fn align(&self, r: f64, value: f64) -> Option<f64> {
        let f = |l: f64| self.dilated(l, r) - value;
        let (mut lo, mut hi) = (1e-6, 1.0 / r.max(1e-12));
        if f(lo) > 0.0 || f(hi) < 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some((lo * hi).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub lambda: f64,
    /// max |u − ũ| / max |ũ| over the compared samples.
    pub relative_error: f64,
    pub samples: usize,
}

/// Compare radial samples (r_k, u_k) with the oracle after matching the dilation
/// at the sample with the largest value.
pub fn cross_validate(oracle: &RadialSolution, radii: &[f64], values: &[f64], r_max: f64) -> Result<CrossCheck> {
    let idx: Vec<usize> = (0..radii.len()).filter(|&k| radii[k] <= r_max).collect();
    let &top = idx
        .iter()
        .max_by(|&&a, &&b| values[a].total_cmp(&values[b]))
        .ok_or_else(|| Error::InvalidInput("no samples to compare".into()))?;
    let lambda = oracle
        .align(radii[top], values[top])
        .ok_or_else(|| Error::InvalidInput("maximum value outside the oracle's dilation range".into()))?;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for &k in &idx {
        let o = oracle.dilated(lambda, radii[k]);
        err = err.max((values[k] - o).abs());
        scale = scale.max(o.abs());
    }
    Ok(CrossCheck {
        lambda,
        relative_error: err / scale,
        samples: idx.len(),
    })
}

/// Grid solve of a single origin source checked against the radial oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub n: usize,
    pub alpha: f64,
    pub status: Status,
    pub nodes: usize,
    pub mass: f64,
    pub target: f64,
    pub mass_error: f64,
    pub oracle_status: Status,
    /// `None` when the grid profile cannot be aligned with the oracle.
    pub cross: Option<CrossCheck>,
}

/// Samples with |x| ≤ this radius enter the profile comparison.
pub const CROSS_RADIUS: f64 = 4.0;

pub fn grid_check(n: usize, alpha: f64, grid: &GridConfig, iter: &IterationConfig) -> Result<GridCheck> {
    let (solver, sol) = solve_n(Equation::validation(n, alpha)?, grid, iter)?;
    let target = solver.eq.targets[0];
    let mass = solver.masses(&sol.v, &sol.c)[0];
    let oracle = radial_solve(alpha, n, target, &RadialConfig::default())?;
    let g = &solver.disc.grid;
    let radii: Vec<f64> = (0..g.len()).map(|k| g.radius(k)).collect();
    let cross = cross_validate(&oracle, &radii, &sol.u[0], CROSS_RADIUS).ok();
    Ok(GridCheck {
        n,
        alpha,
        status: sol.status,
        nodes: g.len(),
        mass,
        target,
        mass_error: (mass - target).abs() / target,
        oracle_status: oracle.status,
        cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bubble_satisfies_the_equation() {
        let h = 1e-3;
        for x in [[0.3, -0.2], [1.1, 0.7], [-2.0, 0.4]] {
            let f = |a: f64, b: f64| bubble_2d(&[a, b]);
            let lap = (f(x[0] + h, x[1]) + f(x[0] - h, x[1]) + f(x[0], x[1] + h) + f(x[0], x[1] - h)
                - 4.0 * f(x[0], x[1]))
                / (h * h);
            assert!((-lap - (2.0 * f(x[0], x[1])).exp()).abs() < 1e-5);
        }
    }

    #[test]
    fn kernel_3d_matches_quadrature() {
        let (r, s) = (0.7, 1.9);
        let k = crate::discretization::quadrature::gauss_panel(-1.0, 1.0, 40);
        let num: f64 = k
            .iter()
            .map(|(c, w)| 0.5 * w * -(0.5 * (r * r + s * s - 2.0 * r * s * c).ln()))
            .sum();
        assert!((radial_kernel(3, r, s).unwrap() - num).abs() < 1e-10);
        assert!((radial_kernel(3, 1e-9, 2.0).unwrap() + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn radial_bubble_2d() {
        let sol = radial_solve(0.0, 2, 4.0 * PI, &RadialConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Converged);
        assert!((sol.mass - 4.0 * PI).abs() < 1e-10);
        for r in [0.01, 0.5, 1.0, 3.0, 20.0] {
            assert!((sol.value_at(r) - bubble_2d(&[r, 0.0])).abs() < 1e-3, "r = {r}");
        }
    }

    #[test]
    fn radial_alpha_2d() {
        let sol = radial_solve(0.5, 2, 6.0 * PI, &RadialConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Converged);
        for r in [0.05, 0.8, 4.0] {
            let exact = bubble(2, 0.5, &[r, 0.0]).unwrap();
            assert!((sol.value_at(r) - exact).abs() < 1e-3, "r = {r}");
        }
    }

    #[test]
    fn radial_bubble_3d() {
        let gamma = gamma_n(3);
        let sol = radial_solve(0.0, 3, 2.0 * gamma, &RadialConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Converged);
        for r in [0.05, 1.0, 6.0] {
            let exact = bubble(3, 0.0, &[r, 0.0, 0.0]).unwrap();
            assert!((sol.value_at(r) - exact).abs() < 2e-3, "r = {r}: {} vs {exact}", sol.value_at(r));
        }
    }
}
