//! One-dimensional and spherical quadrature rules, partition functions and lattice constants.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre nodes and weights on [-1, 1]; one point is the midpoint rule.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    match points {
        0 => Vec::new(),
        1 => vec![(0.0, 2.0)],
        k => {
            let mut pairs = GaussLegendre::new(k)
                .expect("degree >= 2")
                .as_node_weight_pairs()
                .to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs
        }
    }
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_panel(a: f64, b: f64, points: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(points)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Surface area of the unit sphere S^d ⊂ R^{d+1}.
pub fn unit_sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * unit_sphere_area(d - 2),
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n - 1) / n as f64
}

/// Quadrature on the unit sphere S^{n-1}; weights sum to its area.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub dirs: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `order` azimuthal angles (rounded up to a multiple of 4); each further
    /// polar angle uses `order / 2` Gauss points in cos θ for n = 3 and `order`
    /// points in θ above that.
    pub fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 2);
        let order = order.max(4).div_ceil(4) * 4;
        if dim == 2 {
            let dt = 2.0 * PI / order as f64;
            let (dirs, weights) = (0..order)
                .map(|j| {
                    let t = (j as f64 + 0.5) * dt;
                    (vec![t.cos(), t.sin()], dt)
                })
                .unzip();
            return SphereRule { dim, dirs, weights };
        }
        let inner = SphereRule::new(dim - 1, order);
        let k = if dim == 3 { (order / 2).max(2) } else { order };
        // polar angle: Gauss in cos θ when the measure is flat there (n = 3), in θ otherwise
        let polar: Vec<(f64, f64, f64)> = if dim == 3 {
            gauss_panel(-1.0, 1.0, k)
                .into_iter()
                .map(|(c, w)| ((1.0 - c * c).sqrt(), c, w))
                .collect()
        } else {
            gauss_panel(0.0, PI, k)
                .into_iter()
                .map(|(t, w)| (t.sin(), t.cos(), w * t.sin().powi(dim as i32 - 2)))
                .collect()
        };
        let mut dirs = Vec::with_capacity(polar.len() * inner.dirs.len());
        let mut weights = Vec::with_capacity(dirs.capacity());
        for &(s, c, jac) in &polar {
            for (d, w) in inner.dirs.iter().zip(&inner.weights) {
                let mut x = Vec::with_capacity(dim);
                x.extend(d.iter().map(|v| s * v));
                x.push(c);
                dirs.push(x);
                weights.push(jac * w);
            }
        }
        SphereRule { dim, dirs, weights }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Z such that h^n [Σ'_k log(1/|hk|) g(hk) + (log(1/h) − Z) g(0)] reproduces
/// ∫ log(1/|y|) g(y) dy to higher order on the cubic lattice hZ^n.
pub fn lattice_log_constant(n: usize) -> Option<f64> {
    match n {
        2 => Some(-1.310_532_925_911_509_5),
        3 => Some(-1.110_954_2),
        _ => None,
    }
}
