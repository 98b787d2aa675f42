//! Damped Picard iteration with homotopy in t for v = t·T(v).

use serde::{Deserialize, Serialize};

use crate::discretization::{
    grid::{Chart, GridConfig, QuadratureGrid},
    kernel::{KernelOperator, DEFAULT_MATRIX_BYTES},
    profile::u0,
    weight::WeightField,
};
use crate::equation::Equation;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationConfig {
    /// Sup-norm of T_t(v) − v accepted at t = 1.
    pub tol: f64,
    /// Accepted residual before leaving an intermediate homotopy stage.
    pub stage_tol: f64,
    /// Iterations allowed per homotopy stage.
    pub max_iter: usize,
    pub theta: f64,
    pub theta_min: f64,
    pub homotopy: Vec<f64>,
    /// Blow-up threshold on sup(v + c + (1/n) log t).
    pub blow_up: f64,
    pub matrix_bytes: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tol: 1e-8,
            stage_tol: 1e-4,
            max_iter: 600,
            theta: 0.5,
            theta_min: 0.05,
            homotopy: vec![0.25, 0.5, 0.75, 1.0],
            blow_up: 12.0,
            matrix_bytes: DEFAULT_MATRIX_BYTES,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if !(self.tol > 0.0) || !(self.stage_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) || !(self.theta_min > 0.0) {
            return bad("damping must lie in (0, 1]");
        }
        if self.homotopy.is_empty() || self.homotopy.last() != Some(&1.0) {
            return bad("homotopy schedule must end at t = 1");
        }
        if self.homotopy.iter().any(|t| !(*t > 0.0 && *t <= 1.0))
            || self.homotopy.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("homotopy schedule must increase within (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    BlowUp,
    MaxIter,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::BlowUp => "BlowUp",
            Status::MaxIter => "MaxIter",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUpPoint {
    pub component: usize,
    pub node: usize,
    pub location: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub stage: f64,
    pub iteration: usize,
    pub theta: f64,
    pub residual: Vec<f64>,
    pub mass: Vec<f64>,
    /// sup over components and nodes of v + c + (1/n) log t.
    pub peak: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    pub blow_up: Option<BlowUpPoint>,
    pub v: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub residual: f64,
    /// Amplitude of the dilation generator added to pin the dilation mode, when one was needed.
    pub gauge: Option<f64>,
    pub history: Vec<IterRecord>,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn history_csv(&self) -> String {
        let k = self.c.len();
        let mut out = String::from("stage,iteration,theta");
        for i in 1..=k {
            out += &format!(",residual{i}");
        }
        for i in 1..=k {
            out += &format!(",mass{i}");
        }
        out += ",peak\n";
        for r in &self.history {
            out += &format!("{},{},{}", fmt17(r.stage), r.iteration, fmt17(r.theta));
            for v in r.residual.iter().chain(&r.mass) {
                out += &format!(",{}", fmt17(*v));
            }
            out += &format!(",{}\n", fmt17(r.peak));
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Grid, weights and kernel for one equation.
pub struct Discretization {
    pub grid: QuadratureGrid,
    pub weights: WeightField,
    pub kernel: KernelOperator,
    pub u0: Vec<f64>,
    log_w: Vec<f64>,
}

impl Discretization {
    pub fn new(eq: &Equation, cfg: &GridConfig, matrix_bytes: usize) -> Result<Self> {
        let grid = QuadratureGrid::build(eq.dim, &eq.points, cfg)?;
        let weights = WeightField::new(&grid, eq, cfg.log_weight_cap)?;
        let kernel = KernelOperator::new(&grid, matrix_bytes);
        let u0 = (0..grid.len()).map(|k| u0(grid.radius(k))).collect();
        let log_w = grid.weights.iter().map(|w| w.ln()).collect();
        Ok(Discretization {
            grid,
            weights,
            kernel,
            u0,
            log_w,
        })
    }
}

pub struct Solver {
    pub eq: Equation,
    pub disc: Discretization,
    /// Dilation generator (1 − r^β)/(1 + r^β) per component, used to pin the
    /// dilation mode when every source sits at the origin.
    gauge: Option<Vec<Vec<f64>>>,
    /// Node permutation x ↦ −x, used to keep iterates even when the problem is.
    mirror: Option<Vec<usize>>,
}

impl Solver {
    pub fn new(eq: Equation, grid: &GridConfig, iter: &IterationConfig) -> Result<Self> {
        iter.validate()?;
        let disc = Discretization::new(&eq, grid, iter.matrix_bytes)?;
        let dilation_invariant = eq.points.iter().all(|p| p.iter().all(|x| *x == 0.0));
        let gauge = dilation_invariant.then(|| {
            eq.beta
                .iter()
                .map(|b| {
                    (0..disc.grid.len())
                        .map(|k| {
                            let q = disc.grid.radius(k).powf(*b);
                            (1.0 - q) / (1.0 + q)
                        })
                        .collect()
                })
                .collect()
        });
        let mirror = if point_symmetric(&eq) { disc.grid.antipodes() } else { None };
        Ok(Solver {
            eq,
            disc,
            gauge,
            mirror,
        })
    }

    /// True when iterates are kept even under x ↦ −x.
    pub fn is_mirrored(&self) -> bool {
        self.mirror.is_some()
    }

    /// True when the problem is invariant under x ↦ λx and the last stage pins λ.
    pub fn is_gauged(&self) -> bool {
        self.gauge.is_some()
    }

    /// Shift s along ψ so that the density of w + (s/n)ψ has zero mean of ψ,
    /// which puts half of each bubble inside the unit ball.
    fn pin_dilation(&self, psi: &[Vec<f64>], w: &[Vec<f64>], s0: f64) -> Result<f64> {
        let eval = |s: f64| -> (f64, f64) {
            let mut h = 0.0;
            let mut dh = 0.0;
            for (i, row) in w.iter().enumerate() {
                let logs: Vec<f64> = (0..row.len())
                    .map(|k| self.log_density(i, row, k) + s * psi[i][k])
                    .collect();
                let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (mut z, mut ec, mut ep, mut ecp) = (0.0, 0.0, 0.0, 0.0);
                for k in 0..row.len() {
                    let p = (logs[k] - m).exp();
                    let f = psi[i][k];
                    z += p;
                    ec += p * f;
                    ep += p * f;
                    ecp += p * f * f;
                }
                h += ec / z;
                dh += ecp / z - (ec / z) * (ep / z);
            }
            (h, dh)
        };
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = s0;
        for _ in 0..100 {
            let (h, dh) = eval(s);
            if !h.is_finite() {
                return Err(Error::DegenerateField("dilation gauge diverged".into()));
            }
            if h.abs() < 1e-15 {
                break;
            }
            if h > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = if dh > 0.0 { s - h / dh } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0 + (lo - s0).abs(),
                    _ => hi - 1.0 - (hi - s0).abs(),
                };
            }
            if (next - s).abs() < 1e-15 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        Ok(s)
    }

    fn n(&self) -> f64 {
        self.eq.dim as f64
    }

    fn log_density(&self, i: usize, v: &[f64], k: usize) -> f64 {
        self.disc.log_w[k] + self.disc.weights.log_kbar[i][k] + self.n() * v[k]
    }

    /// c_i = (1/n) log(target_i / ∫ K̄_i e^{n v_i}).
    pub fn normalization(&self, v: &[Vec<f64>]) -> Result<Vec<f64>> {
        (0..self.eq.components())
            .map(|i| {
                let lse = log_sum_exp((0..v[i].len()).map(|k| self.log_density(i, &v[i], k)));
                if !lse.is_finite() {
                    return Err(Error::DegenerateField(format!(
                        "integral of component {i} is {}",
                        lse.exp()
                    )));
                }
                Ok((self.eq.targets[i].ln() - lse) / self.n())
            })
            .collect()
    }

    /// Node masses K̄_i e^{n(v_i + c_i)} w.
    pub fn densities(&self, v: &[Vec<f64>], c: &[f64]) -> Vec<Vec<f64>> {
        (0..self.eq.components())
            .map(|i| {
                (0..v[i].len())
                    .map(|k| (self.log_density(i, &v[i], k) + self.n() * c[i]).exp())
                    .collect()
            })
            .collect()
    }

    fn combine(&self, pot: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let g = &self.disc.grid;
        (0..self.eq.components())
            .map(|i| {
                (0..g.len())
                    .map(|k| {
                        let mut s = 0.0;
                        for (j, p) in pot.iter().enumerate() {
                            s += self.eq.coupling[i][j] * p[k];
                        }
                        let lin = if g.charts[k] == Chart::Outer {
                            0.0
                        } else {
                            self.eq.beta[i] * self.disc.u0[k]
                        };
                        self.eq.kernel_scale * s - lin
                    })
                    .collect()
            })
            .collect()
    }

    /// T(v) on every node.
    pub fn apply_t(&self, v: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let c = self.normalization(v)?;
        Ok(self.apply_with(v, &c))
    }

    fn apply_with(&self, v: &[Vec<f64>], c: &[f64]) -> Vec<Vec<f64>> {
        let rho = self.densities(v, c);
        let pot = self.disc.kernel.apply(&rho);
        self.combine(&pot)
    }

    /// T(v) at an arbitrary point, using the far form when |x| ≥ 1.
    pub fn apply_t_at(&self, x: &[f64], v: &[Vec<f64>]) -> Result<Vec<f64>> {
        let c = self.normalization(v)?;
        let rho = self.densities(v, &c);
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let far = r >= 1.0;
        let pot: Vec<f64> = rho
            .iter()
            .map(|m| self.disc.kernel.potential_at(x, m, far))
            .collect();
        Ok((0..self.eq.components())
            .map(|i| {
                let s: f64 = pot.iter().enumerate().map(|(j, p)| self.eq.coupling[i][j] * p).sum();
                let lin = if far { 0.0 } else { self.eq.beta[i] * u0(r) };
                self.eq.kernel_scale * s - lin
            })
            .collect())
    }

    /// u_i = v_i + β_i u₀ + c_i.
    pub fn assemble(&self, v: &[Vec<f64>], c: &[f64]) -> Vec<Vec<f64>> {
        (0..self.eq.components())
            .map(|i| {
                v[i].iter()
                    .zip(&self.disc.u0)
                    .map(|(vk, u)| vk + self.eq.beta[i] * u + c[i])
                    .collect()
            })
            .collect()
    }

    pub fn masses(&self, v: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
        self.densities(v, c).iter().map(|r| r.iter().sum()).collect()
    }

    pub fn solve(&self, cfg: &IterationConfig) -> Result<Solution> {
        cfg.validate()?;
        let k = self.eq.components();
        let len = self.disc.grid.len();
        let mut v = vec![vec![0.0; len]; k];
        let mut history = Vec::new();
        let mut theta = cfg.theta;
        let mut amplitude = None;
        for &t in &cfg.homotopy {
            let last = t == 1.0;
            let accept = if last { cfg.tol } else { cfg.tol.max(cfg.stage_tol) };
            let mut prev = f64::INFINITY;
            let mut done = false;
            for it in 0..cfg.max_iter {
                let c = self.normalization(&v)?;
                let mut tv: Vec<Vec<f64>> = self
                    .apply_with(&v, &c)
                    .into_iter()
                    .map(|row| row.into_iter().map(|x| t * x).collect())
                    .collect();
                if let (Some(psi), true) = (&self.gauge, last) {
                    let w: Vec<Vec<f64>> = (0..k)
                        .map(|i| {
                            v[i].iter()
                                .zip(&tv[i])
                                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                                .collect()
                        })
                        .collect();
                    let s0 = self.n() * theta * amplitude.unwrap_or(0.0);
                    let a = self.pin_dilation(psi, &w, s0)? / (self.n() * theta);
                    for (row, gen) in tv.iter_mut().zip(psi) {
                        for (x, p) in row.iter_mut().zip(gen) {
                            *x += a * p;
                        }
                    }
                    amplitude = Some(a);
                }
                let residual: Vec<f64> = (0..k)
                    .map(|i| {
                        tv[i].iter()
                            .zip(&v[i])
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max)
                    })
                    .collect();
                let res = residual.iter().copied().fold(0.0, f64::max);
                let (peak, at) = self.peak(&v, &c, t);
                history.push(IterRecord {
                    stage: t,
                    iteration: it,
                    theta,
                    residual,
                    mass: self.masses(&v, &c),
                    peak,
                });
                if peak > cfg.blow_up || !res.is_finite() {
                    let (i, node) = at;
                    let blow = BlowUpPoint {
                        component: i,
                        node,
                        location: self.disc.grid.point(node).to_vec(),
                        value: peak,
                    };
                    return Ok(self.finish(Status::BlowUp, Some(blow), v, c, res, amplitude, history));
                }
                if res <= accept {
                    if last {
                        return Ok(self.finish(Status::Converged, None, v, c, res, amplitude, history));
                    }
                    done = true;
                    break;
                }
                if res > prev {
                    theta = (0.5 * theta).max(cfg.theta_min);
                }
                prev = res;
                for i in 0..k {
                    for (a, b) in v[i].iter_mut().zip(&tv[i]) {
                        *a = (1.0 - theta) * *a + theta * b;
                    }
                    if let Some(m) = &self.mirror {
                        let even: Vec<f64> = (0..len).map(|n| 0.5 * (v[i][n] + v[i][m[n]])).collect();
                        v[i] = even;
                    }
                }
            }
            if !done {
                let c = self.normalization(&v)?;
                let res = history.last().map_or(f64::INFINITY, |r| {
                    r.residual.iter().copied().fold(0.0, f64::max)
                });
                return Ok(self.finish(Status::MaxIter, None, v, c, res, amplitude, history));
            }
        }
        unreachable!("schedule ends at t = 1")
    }

    fn peak(&self, v: &[Vec<f64>], c: &[f64], t: f64) -> (f64, (usize, usize)) {
        let shift = t.ln() / self.n();
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for (i, row) in v.iter().enumerate() {
            for (k, x) in row.iter().enumerate() {
                let p = x + c[i] + shift;
                if p > best.0 {
                    best = (p, (i, k));
                }
            }
        }
        best
    }

    fn finish(
        &self,
        status: Status,
        blow_up: Option<BlowUpPoint>,
        v: Vec<Vec<f64>>,
        c: Vec<f64>,
        residual: f64,
        gauge: Option<f64>,
        history: Vec<IterRecord>,
    ) -> Solution {
        let u = self.assemble(&v, &c);
        Solution {
            status,
            blow_up,
            v,
            c,
            u,
            residual,
            gauge,
            history,
        }
    }
}

/// True when negating every source maps the source set onto itself.
fn point_symmetric(eq: &Equation) -> bool {
    eq.points.iter().enumerate().all(|(j, p)| {
        eq.points.iter().enumerate().any(|(l, q)| {
            p.iter().zip(q).all(|(a, b)| (a + b).abs() < 1e-12)
                && (0..eq.components()).all(|i| eq.exponents[i][j] == eq.exponents[i][l])
        })
    })
}

pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(v.iter().copied()) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(std::iter::empty::<f64>()), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_bad_schedule() {
        let cfg = IterationConfig {
            homotopy: vec![0.5, 0.25, 1.0],
            ..IterationConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn history_csv_has_header_and_rows() {
        let s = Solution {
            status: Status::MaxIter,
            blow_up: None,
            v: vec![vec![]],
            c: vec![0.0],
            u: vec![vec![]],
            residual: 1.0,
            gauge: None,
            history: vec![IterRecord {
                stage: 0.25,
                iteration: 0,
                theta: 0.5,
                residual: vec![0.1],
                mass: vec![2.0],
                peak: 0.0,
            }],
        };
        let csv = s.history_csv();
        assert!(csv.starts_with("stage,iteration,theta,residual1,mass1,peak\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
