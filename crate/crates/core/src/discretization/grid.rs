//! Composite quadrature grid.
//!
//! Three kinds of charts cover R^n, glued by a smooth partition of unity:
//! a Cartesian orthtree on the split box (midpoint rule, uniform in the core),
//! graded polar patches around each source, and a polar grid in the Kelvin
//! variable y = x/|x|² for the far field.

use serde::{Deserialize, Serialize};

use super::quadrature::{gauss_panel, smooth_step, unit_ball_volume, SphereRule};
use crate::error::{Error, Result};
use crate::problem::distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Inner,
    Outer,
    Patch(usize),
}

impl Chart {
    pub fn label(&self) -> String {
        match self {
            Chart::Inner => "inner".into(),
            Chart::Outer => "outer".into(),
            Chart::Patch(l) => format!("patch{l}"),
        }
    }
}

/// Patch partition: weight 1 inside `PATCH_CORE`·ρ, 0 outside ρ.
pub const PATCH_CORE: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Cells across the uniform core box [-core_radius, core_radius]^n.
    pub core_cells: usize,
    pub core_radius: f64,
    /// Background cells never exceed this fraction of |x|.
    pub far_ratio: f64,
    /// Overrides the default split radius 4·max(1, max|P|).
    pub split_radius: Option<f64>,
    /// Overrides the patch radius cap; must not exceed half the closest source distance.
    pub patch_radius: Option<f64>,
    pub patch_ratio: f64,
    pub patch_layers: usize,
    pub patch_sectors: usize,
    pub patch_gauss: usize,
    pub outer_gauss: usize,
    /// Each level halves every spacing.
    pub refine: u32,
    pub log_weight_cap: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            core_cells: 48,
            core_radius: 4.0,
            far_ratio: 1.0 / 6.0,
            split_radius: None,
            patch_radius: None,
            patch_ratio: 0.7,
            patch_layers: 16,
            patch_sectors: 24,
            patch_gauss: 2,
            outer_gauss: 4,
            refine: 0,
            log_weight_cap: 500.0,
        }
    }
}

impl GridConfig {
    pub fn refined(&self, levels: u32) -> Self {
        GridConfig {
            refine: self.refine + levels,
            ..self.clone()
        }
    }

    fn scale(&self) -> usize {
        1usize << self.refine
    }

    pub fn core_spacing(&self) -> f64 {
        2.0 * self.core_radius / (self.core_cells * self.scale()) as f64
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::GridConfig(m.into()));
        if self.core_cells < 2 {
            return bad("core_cells must be at least 2");
        }
        if !(self.core_radius > 0.0) {
            return bad("core_radius must be positive");
        }
        if !(self.far_ratio > 0.0 && self.far_ratio <= 1.0) {
            return bad("far_ratio must lie in (0, 1]");
        }
        if !(self.patch_ratio > 0.0 && self.patch_ratio < 1.0) {
            return bad("patch_ratio must lie in (0, 1)");
        }
        if self.patch_layers == 0 || self.patch_sectors < 4 {
            return bad("patch needs at least one layer and four sectors");
        }
        if self.patch_gauss == 0 || self.outer_gauss == 0 {
            return bad("Gauss orders must be positive");
        }
        if self.refine > 6 {
            return bad("refine above 6 is not supported");
        }
        if !(self.log_weight_cap > 0.0) {
            return bad("log_weight_cap must be positive");
        }
        Ok(())
    }
}

/// Polar rule on the ball of radius `radius` about the origin, graded towards
/// the centre, with an innermost ball ("tail") of radius `tail_radius`.
#[derive(Clone, Debug)]
pub struct PatchRule {
    pub dim: usize,
    pub radius: f64,
    pub tail_radius: f64,
    pub offsets: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub tail: Vec<bool>,
    /// Radial layer of each non-tail node.
    pub layers: Vec<Option<(f64, f64)>>,
    pub gauss: usize,
}

impl PatchRule {
    pub fn new(dim: usize, radius: f64, cfg: &GridConfig) -> Self {
        let s = cfg.scale();
        let q = cfg.patch_ratio.powf(1.0 / s as f64);
        let layers = cfg.patch_layers * s;
        let order = if dim == 2 {
            cfg.patch_sectors * s
        } else {
            (cfg.patch_sectors / 2).max(4) * s
        };
        let sphere = SphereRule::new(dim, order);
        let mut rule = PatchRule {
            dim,
            radius,
            tail_radius: radius * q.powi(layers as i32),
            offsets: Vec::new(),
            radii: Vec::new(),
            volumes: Vec::new(),
            tail: Vec::new(),
            layers: Vec::new(),
            gauss: cfg.patch_gauss,
        };
        let mut outer = radius;
        for _ in 0..layers {
            let inner = outer * q;
            for (r, wr) in gauss_panel(inner, outer, cfg.patch_gauss) {
                let jac = wr * r.powi(dim as i32 - 1);
                for (d, w) in sphere.dirs.iter().zip(&sphere.weights) {
                    rule.push(d.iter().map(|c| r * c).collect(), r, jac * w, Some((inner, outer)));
                }
            }
            outer = inner;
        }
        let eps = rule.tail_radius;
        let r = 0.5 * eps;
        let jac = eps.powi(dim as i32) / dim as f64;
        for (d, w) in sphere.dirs.iter().zip(&sphere.weights) {
            rule.push(d.iter().map(|c| r * c).collect(), r, jac * w, None);
        }
        rule
    }

    fn push(&mut self, x: Vec<f64>, r: f64, vol: f64, layer: Option<(f64, f64)>) {
        self.offsets.push(x);
        self.radii.push(r);
        self.volumes.push(vol);
        self.tail.push(layer.is_none());
        self.layers.push(layer);
    }

    /// ∫_{B_radius} |x|^{-p} f(x) dx with the singular factor product-integrated.
    pub fn integrate_power(&self, p: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.offsets.len())
            .map(|k| {
                let s = log_singular_factor(
                    self.dim,
                    self.radii[k],
                    self.layers[k],
                    self.tail_radius,
                    p,
                    self.gauss,
                );
                self.volumes[k] * s.exp() * f(&self.offsets[k])
            })
            .sum()
    }
}

/// Polar rule in the Kelvin variable on the ball |y| < `y_max`, with Gauss
/// panels graded towards y = 0 and ring sizes matched to the local spacing.
#[derive(Clone, Debug)]
pub struct OuterRule {
    pub dim: usize,
    pub y_max: f64,
    pub points: Vec<Vec<f64>>,
    /// Volume in y.
    pub volumes: Vec<f64>,
}

impl OuterRule {
    /// `dy` is the radial node spacing, `dtheta` the arc spacing on rings.
    pub fn new(dim: usize, y_max: f64, dy: f64, dtheta: f64, gauss: usize) -> Self {
        let width = (dy * gauss as f64).min(0.5 * y_max);
        let panels = (y_max / width).ceil() as usize;
        let width = y_max / panels as f64;
        let mut edges = vec![0.0];
        for j in (0..=8).rev() {
            edges.push(width * 0.25f64.powi(j));
        }
        for k in 2..=panels {
            edges.push(width * k as f64);
        }
        let mut rule = OuterRule {
            dim,
            y_max,
            points: Vec::new(),
            volumes: Vec::new(),
        };
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let local = ((b - a) / gauss as f64).max(dtheta);
            for (r, wr) in gauss_panel(a, b, gauss) {
                let order = ((2.0 * std::f64::consts::PI * r / local).ceil() as usize).max(8);
                let sphere = SphereRule::new(dim, order);
                let jac = wr * r.powi(dim as i32 - 1);
                for (d, w) in sphere.dirs.iter().zip(&sphere.weights) {
                    rule.points.push(d.iter().map(|c| r * c).collect());
                    rule.volumes.push(jac * w);
                }
            }
        }
        rule
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub dim: usize,
    pub split_radius: f64,
    /// Inner weight falls from 1 at `blend.0` to 0 at `blend.1`.
    pub blend: (f64, f64),
    pub core_spacing: f64,
    pub sources: Vec<Vec<f64>>,
    pub patch_radii: Vec<f64>,
    pub tail_radii: Vec<f64>,
    coords: Vec<f64>,
    /// Quadrature weight, partition factor included.
    pub weights: Vec<f64>,
    /// Geometric cell volume in x.
    pub volumes: Vec<f64>,
    /// Cartesian cell side for inner nodes, 0 elsewhere.
    pub spacing: Vec<f64>,
    pub charts: Vec<Chart>,
    /// Tail nodes carry the index of their source.
    pub tails: Vec<Option<usize>>,
    /// Radial layer of non-tail patch nodes.
    pub layers: Vec<Option<(f64, f64)>>,
    pub patch_gauss: usize,
}

impl QuadratureGrid {
    pub fn build(dim: usize, sources: &[Vec<f64>], cfg: &GridConfig) -> Result<Self> {
        cfg.validate()?;
        if dim < 2 {
            return Err(Error::GridConfig("dimension must be at least 2".into()));
        }
        if sources.iter().any(|p| p.len() != dim) {
            return Err(Error::GridConfig("source dimension mismatch".into()));
        }
        let radii = patch_radii(sources, cfg)?;
        let max_p = sources
            .iter()
            .map(|p| norm(p))
            .fold(0.0, f64::max);
        let split = cfg.split_radius.unwrap_or(4.0 * max_p.max(1.0));
        let (ra, rb) = (0.5 * split, split);
        for (l, p) in sources.iter().enumerate() {
            if norm(p) + radii[l] >= ra {
                return Err(Error::GridConfig(format!(
                    "source {l} and its patch reach the far-field blend at radius {ra}; increase split_radius"
                )));
            }
        }
        let h = cfg.core_spacing();
        let s = cfg.scale() as f64;
        let sizing = Sizing {
            h,
            core: cfg.core_radius,
            far: cfg.far_ratio,
            sources: sources.to_vec(),
            radii: radii.clone(),
            grading: 6.0 * s,
        };
        let mut grid = QuadratureGrid {
            dim,
            split_radius: split,
            blend: (ra, rb),
            core_spacing: h,
            sources: sources.to_vec(),
            patch_radii: radii.clone(),
            tail_radii: Vec::new(),
            coords: Vec::new(),
            weights: Vec::new(),
            volumes: Vec::new(),
            spacing: Vec::new(),
            charts: Vec::new(),
            tails: Vec::new(),
            layers: Vec::new(),
            patch_gauss: cfg.patch_gauss,
        };
        grid.add_background(&sizing)?;
        for (l, p) in sources.iter().enumerate() {
            let rule = PatchRule::new(dim, radii[l], cfg);
            grid.tail_radii.push(rule.tail_radius);
            for k in 0..rule.offsets.len() {
                let x: Vec<f64> = p.iter().zip(&rule.offsets[k]).map(|(a, b)| a + b).collect();
                let w = rule.volumes[k] * patch_weight(rule.radii[k], radii[l]);
                if w > 0.0 {
                    let tail = rule.tail[k].then_some(l);
                    grid.push(x, w, rule.volumes[k], 0.0, Chart::Patch(l), tail);
                    *grid.layers.last_mut().unwrap() = rule.layers[k];
                }
            }
        }
        // arc spacing matched to the Cartesian cells at the blend; at least
        // eight Gauss panels across the Kelvin ball radially
        let dtheta = sizing.base(ra) / (ra * ra);
        let dy = dtheta.min(1.0 / (8.0 * cfg.outer_gauss as f64 * ra * s));
        let outer = OuterRule::new(dim, 1.0 / ra, dy, dtheta, cfg.outer_gauss);
        for (y, vy) in outer.points.iter().zip(&outer.volumes) {
            let r2: f64 = y.iter().map(|c| c * c).sum();
            let x: Vec<f64> = y.iter().map(|c| c / r2).collect();
            let vol = vy * r2.powi(-(dim as i32));
            let w = vol * (1.0 - grid.inner_factor(r2.sqrt().recip()));
            if w > 0.0 {
                grid.push(x, w, vol, 0.0, Chart::Outer, None);
            }
        }
        Ok(grid)
    }

    fn push(&mut self, x: Vec<f64>, w: f64, vol: f64, h: f64, chart: Chart, tail: Option<usize>) {
        self.coords.extend_from_slice(&x);
        self.weights.push(w);
        self.volumes.push(vol);
        self.spacing.push(h);
        self.charts.push(chart);
        self.tails.push(tail);
        self.layers.push(None);
    }

    /// Weight of the Cartesian chart against the far field at radius r.
    pub fn inner_factor(&self, r: f64) -> f64 {
        let (a, b) = self.blend;
        1.0 - smooth_step((r - a) / (b - a))
    }

    fn add_background(&mut self, sizing: &Sizing) -> Result<()> {
        let n = self.dim;
        let rb = self.blend.1;
        let mut root = sizing.h;
        while root < 0.5 * rb {
            root *= 2.0;
        }
        let per_side = 2 * (rb / root).ceil() as usize;
        let half_box = 0.5 * per_side as f64 * root;
        let mut stack: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let c = idx
                .iter()
                .map(|&i| -half_box + (i as f64 + 0.5) * root)
                .collect();
            stack.push((c, root));
            let mut d = 0;
            while d < n {
                idx[d] += 1;
                if idx[d] < per_side {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == n {
                break;
            }
        }
        let floor = 1e-7 * sizing.h;
        let zero = vec![0.0; n];
        while let Some((c, size)) = stack.pop() {
            let half = 0.5 * size;
            if box_near(&c, half, &zero) >= rb {
                continue;
            }
            let swallowed = self
                .sources
                .iter()
                .zip(&self.patch_radii)
                .any(|(p, r)| box_far(&c, half, p) <= PATCH_CORE * r);
            if swallowed {
                continue;
            }
            if size > sizing.target(&c, half) * (1.0 + 1e-9) {
                if size < floor {
                    return Err(Error::GridConfig("orthtree refinement did not terminate".into()));
                }
                for mask in 0..(1usize << n) {
                    let child = c
                        .iter()
                        .enumerate()
                        .map(|(d, v)| v + if mask >> d & 1 == 1 { 0.5 * half } else { -0.5 * half })
                        .collect();
                    stack.push((child, half));
                }
                continue;
            }
            let mut w = size.powi(n as i32) * self.inner_factor(norm(&c));
            for (p, r) in self.sources.iter().zip(&self.patch_radii) {
                w *= 1.0 - patch_weight(distance(&c, p), *r);
            }
            if w > 0.0 {
                self.push(c, w, size.powi(n as i32), size, Chart::Inner, None);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn radius(&self, i: usize) -> f64 {
        norm(self.point(i))
    }

    /// Radius of the ball with the node's cell volume.
    pub fn ball_radius(&self, i: usize) -> f64 {
        (self.volumes[i] / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }

    /// Index of the node at −x for every node x, when the rule is point symmetric.
    pub fn antipodes(&self) -> Option<Vec<usize>> {
        let key = |x: &[f64]| -> Vec<i64> {
            let scale = 1e8 / (1.0 + x.iter().map(|a| a * a).sum::<f64>().sqrt());
            x.iter().map(|a| (a * scale).round() as i64).collect()
        };
        let index: std::collections::HashMap<Vec<i64>, usize> =
            (0..self.len()).map(|k| (key(self.point(k)), k)).collect();
        (0..self.len())
            .map(|k| {
                let neg: Vec<f64> = self.point(k).iter().map(|a| -a).collect();
                let j = *index.get(&key(&neg))?;
                let same = (self.weights[j] - self.weights[k]).abs() <= 1e-12 * self.weights[k];
                same.then_some(j)
            })
            .collect()
    }

    pub fn count(&self, chart: Chart) -> usize {
        self.charts.iter().filter(|c| **c == chart).count()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.point(i))).sum()
    }
}

/// log of the factor standing in for r^{-p} at a patch node: the exact ball
/// average on the tail, the pointwise value rescaled so that each radial layer
/// integrates r^{n-1-p} exactly otherwise.
pub fn log_singular_factor(
    dim: usize,
    r: f64,
    layer: Option<(f64, f64)>,
    tail_radius: f64,
    p: f64,
    gauss: usize,
) -> f64 {
    let n = dim as f64;
    match layer {
        None => (n / (n - p)).ln() - p * tail_radius.ln(),
        Some((a, b)) => {
            let q = n - p;
            let exact = (b.powf(q) - a.powf(q)) / q;
            let approx: f64 = gauss_panel(a, b, gauss)
                .iter()
                .map(|(x, w)| w * x.powf(q - 1.0))
                .sum();
            -p * r.ln() + (exact / approx).ln()
        }
    }
}

/// Patch share of the partition at distance d from a source with patch radius ρ.
pub fn patch_weight(d: f64, rho: f64) -> f64 {
    1.0 - smooth_step((d / rho - PATCH_CORE) / (1.0 - PATCH_CORE))
}

fn patch_radii(sources: &[Vec<f64>], cfg: &GridConfig) -> Result<Vec<f64>> {
    let cap = cfg.patch_radius.unwrap_or(0.5);
    if !(cap > 0.0) {
        return Err(Error::GridConfig("patch radius must be positive".into()));
    }
    let mut radii = vec![cap; sources.len()];
    for a in 0..sources.len() {
        for b in a + 1..sources.len() {
            let d = distance(&sources[a], &sources[b]);
            if cfg.patch_radius.is_some() && cap > 0.5 * d {
                return Err(Error::SourcesTooClose {
                    a,
                    b,
                    distance: d,
                    radius: cap,
                });
            }
            radii[a] = radii[a].min(0.5 * d);
            radii[b] = radii[b].min(0.5 * d);
        }
    }
    if let Some(l) = radii.iter().position(|r| *r < 1e-6) {
        return Err(Error::GridConfig(format!("source {l} is within 2e-6 of another source")));
    }
    Ok(radii)
}

struct Sizing {
    h: f64,
    core: f64,
    far: f64,
    sources: Vec<Vec<f64>>,
    radii: Vec<f64>,
    /// Cells per patch radius near a source.
    grading: f64,
}

impl Sizing {
    fn base(&self, r: f64) -> f64 {
        let t = r / self.core;
        self.h.max((self.h * t * t).min(self.far * r))
    }

    fn target(&self, c: &[f64], half: f64) -> f64 {
        let zero = vec![0.0; c.len()];
        let mut t = self.base(box_near(c, half, &zero));
        for (p, rho) in self.sources.iter().zip(&self.radii) {
            let d = box_near(c, half, p);
            t = t.min(rho / self.grading + 0.3 * (d - rho).max(0.0));
        }
        t
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn box_near(c: &[f64], half: f64, p: &[f64]) -> f64 {
    c.iter()
        .zip(p)
        .map(|(a, b)| ((a - b).abs() - half).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn box_far(c: &[f64], half: f64, p: &[f64]) -> f64 {
    c.iter()
        .zip(p)
        .map(|(a, b)| ((a - b).abs() + half).powi(2))
        .sum::<f64>()
        .sqrt()
}
