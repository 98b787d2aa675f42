//! Discrete log kernel with self-cell corrections.
//!
//! Off-diagonal entries are log(1/|x−y|), replaced inside the source cell's
//! equal-volume ball by the ball potential. The diagonal uses the lattice
//! constant for Cartesian cells and the ball average elsewhere. Rows of
//! far-field nodes carry the extra log|x| of the log(|x|/|x−y|) form.
//!
//! The matrix is stored in f64 when it fits the byte budget, in f32 (with f64
//! accumulation) when only that fits, and evaluated on the fly otherwise.

use rayon::prelude::*;

use super::grid::{Chart, QuadratureGrid};
use super::quadrature::lattice_log_constant;

/// Dense storage is used while the matrix fits in this many bytes.
pub const DEFAULT_MATRIX_BYTES: usize = 1_600_000_000;

pub struct KernelOperator {
    dim: usize,
    len: usize,
    coords: Vec<f64>,
    self_value: Vec<f64>,
    reg_radius: Vec<f64>,
    far_shift: Vec<f64>,
    storage: Storage,
}

enum Storage {
    Double(Vec<f64>),
    Single(Vec<f32>),
    Implicit,
}

impl KernelOperator {
    pub fn new(grid: &QuadratureGrid, max_bytes: usize) -> Self {
        let n = grid.dim;
        let len = grid.len();
        let lattice = lattice_log_constant(n);
        let mut self_value = Vec::with_capacity(len);
        let mut reg_radius = Vec::with_capacity(len);
        let mut far_shift = Vec::with_capacity(len);
        for i in 0..len {
            let a = grid.ball_radius(i);
            reg_radius.push(a);
            let ball = -a.ln() + 1.0 / n as f64;
            self_value.push(match (grid.charts[i], lattice) {
                (Chart::Inner, Some(z)) => -grid.spacing[i].ln() - z,
                _ => ball,
            });
            far_shift.push(if grid.charts[i] == Chart::Outer {
                grid.radius(i).ln()
            } else {
                0.0
            });
        }
        let mut op = KernelOperator {
            dim: n,
            len,
            coords: grid.coords().to_vec(),
            self_value,
            reg_radius,
            far_shift,
            storage: Storage::Implicit,
        };
        let cells = len.saturating_mul(len);
        if cells.saturating_mul(8) <= max_bytes {
            let mut m = vec![0.0; cells];
            m.par_chunks_mut(len.max(1)).enumerate().for_each(|(t, row)| {
                for (s, v) in row.iter_mut().enumerate() {
                    *v = op.entry(t, s);
                }
            });
            op.storage = Storage::Double(m);
        } else if cells.saturating_mul(4) <= max_bytes {
            let mut m = vec![0.0f32; cells];
            m.par_chunks_mut(len.max(1)).enumerate().for_each(|(t, row)| {
                for (s, v) in row.iter_mut().enumerate() {
                    *v = op.entry(t, s) as f32;
                }
            });
            op.storage = Storage::Single(m);
        }
        op
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_dense(&self) -> bool {
        !matches!(self.storage, Storage::Implicit)
    }

    /// True when the stored matrix is rounded to single precision.
    pub fn is_single(&self) -> bool {
        matches!(self.storage, Storage::Single(_))
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// log(1/|x − y_s|) with the ball regularization of cell s.
    #[inline]
    fn pair(&self, x: &[f64], s: usize) -> f64 {
        let y = self.point(s);
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let a = self.reg_radius[s];
        if d2 < a * a {
            -a.ln() + (1.0 - d2 / (a * a)) / self.dim as f64
        } else {
            -0.5 * d2.ln()
        }
    }

    #[inline]
    pub fn entry(&self, t: usize, s: usize) -> f64 {
        let base = if t == s {
            self.self_value[s]
        } else {
            self.pair(self.point(t), s)
        };
        base + self.far_shift[t]
    }

    /// out_t = Σ_s K_ts masses_s for every source vector in `masses`.
    pub fn apply(&self, masses: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let len = self.len;
        let k = masses.len();
        let rows: Vec<Vec<f64>> = (0..len)
            .into_par_iter()
            .map(|t| {
                let mut acc = vec![0.0; k];
                match &self.storage {
                    Storage::Double(m) => {
                        let row = &m[t * len..(t + 1) * len];
                        for (j, mj) in masses.iter().enumerate() {
                            acc[j] = row.iter().zip(mj).map(|(a, b)| a * b).sum();
                        }
                    }
                    Storage::Single(m) => {
                        let row = &m[t * len..(t + 1) * len];
                        for (j, mj) in masses.iter().enumerate() {
                            acc[j] = row.iter().zip(mj).map(|(a, b)| *a as f64 * b).sum();
                        }
                    }
                    Storage::Implicit => {
                        for s in 0..len {
                            let e = self.entry(t, s);
                            for (j, mj) in masses.iter().enumerate() {
                                acc[j] += e * mj[s];
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        (0..k).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    }

    /// Σ_s log(1/|x − y_s|) masses_s at an arbitrary point, optionally in the far form.
    pub fn potential_at(&self, x: &[f64], masses: &[f64], far_form: bool) -> f64 {
        let shift = if far_form {
            x.iter().map(|v| v * v).sum::<f64>().sqrt().ln()
        } else {
            0.0
        };
        (0..self.len).map(|s| (self.pair(x, s) + shift) * masses[s]).sum()
    }
}
