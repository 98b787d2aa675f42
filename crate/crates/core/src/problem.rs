//! Source configurations, derived exponents and the algebraic existence conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::gamma_n;

/// SU(3) Cartan matrix.
pub const CARTAN: [[f64; 2]; 2] = [[2.0, -1.0], [-1.0, 2.0]];

/// Margins with absolute value at or below this are reported as indeterminate.
pub const INDETERMINATE_BAND: f64 = 1e-12;

/// Tolerance for the equality hypotheses A1 and A4.
pub const EQUALITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Scalar,
    Toda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSourceSet", into = "RawSourceSet")]
pub struct SourceSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSourceSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<RawSourceSet> for SourceSet {
    type Error = Error;
    fn try_from(raw: RawSourceSet) -> Result<Self> {
        SourceSet::new(raw.dim, raw.points, raw.weights)
    }
}

impl From<SourceSet> for RawSourceSet {
    fn from(s: SourceSet) -> Self {
        RawSourceSet {
            dim: s.dim,
            points: s.points,
            weights: s.weights,
        }
    }
}

impl SourceSet {
    /// `weights[i][l]` is the exponent of source `l` in component `i`.
    /// One component gives the scalar equation, two the Toda system (plane only).
    pub fn new(dim: usize, points: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSource(format!("dimension {dim} < 2")));
        }
        match weights.len() {
            1 => {}
            2 if dim == 2 => {}
            2 => {
                return Err(Error::InvalidSource(format!(
                    "Toda system requires dimension 2, got {dim}"
                )))
            }
            k => {
                return Err(Error::InvalidSource(format!(
                    "expected 1 or 2 weight rows, got {k}"
                )))
            }
        }
        let m = points.len();
        for (l, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidSource(format!(
                    "point {l} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSource(format!("point {l} is not finite")));
            }
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidSource(format!(
                    "weight row {i} has {} entries for {m} points",
                    row.len()
                )));
            }
            for (l, &b) in row.iter().enumerate() {
                if !(0.0..1.0).contains(&b) {
                    return Err(Error::InvalidSource(format!(
                        "weight beta[{i}][{l}] = {b} outside [0, 1)"
                    )));
                }
            }
        }
        let set = SourceSet {
            dim,
            points,
            weights,
        };
        if let Some((a, b, d)) = set.closest_pair() {
            if d == 0.0 {
                return Err(Error::InvalidSource(format!("points {a} and {b} coincide")));
            }
        }
        Ok(set)
    }

    pub fn scalar(dim: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::new(dim, points, vec![weights])
    }

    pub fn toda(points: Vec<[f64; 2]>, w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        Self::new(2, points.into_iter().map(|p| p.to_vec()).collect(), vec![w1, w2])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn mode(&self) -> Mode {
        if self.weights.len() == 2 {
            Mode::Toda
        } else {
            Mode::Scalar
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight_sum(&self, i: usize) -> f64 {
        self.weights[i].iter().sum()
    }

    /// Closest pair of sources and their distance.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..self.points.len() {
            for b in a + 1..self.points.len() {
                let d = distance(&self.points[a], &self.points[b]);
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        best
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub mode: Mode,
    pub dim: usize,
    /// Far-field exponents.
    pub beta: Vec<f64>,
    /// Normalized masses; equal to `beta` in scalar mode.
    pub beta_bar: Vec<f64>,
    pub target_mass: Vec<f64>,
}

pub fn derive_exponents(set: &SourceSet) -> DerivedExponents {
    match set.mode() {
        Mode::Scalar => {
            let beta = 2.0 - set.weight_sum(0);
            DerivedExponents {
                mode: Mode::Scalar,
                dim: set.dim(),
                beta: vec![beta],
                beta_bar: vec![beta],
                target_mass: vec![beta * gamma_n(set.dim())],
            }
        }
        Mode::Toda => {
            let beta = [2.0 - set.weight_sum(0), 2.0 - set.weight_sum(1)];
            let bb = beta_bar_from_beta(beta);
            let two_pi = 2.0 * std::f64::consts::PI;
            DerivedExponents {
                mode: Mode::Toda,
                dim: 2,
                beta: beta.to_vec(),
                beta_bar: bb.to_vec(),
                target_mass: bb.iter().map(|b| two_pi * b).collect(),
            }
        }
    }
}

/// β = A β̄.
pub fn beta_from_beta_bar(bb: [f64; 2]) -> [f64; 2] {
    [
        CARTAN[0][0] * bb[0] + CARTAN[0][1] * bb[1],
        CARTAN[1][0] * bb[0] + CARTAN[1][1] * bb[1],
    ]
}

/// β̄ = A⁻¹ β, i.e. β̄_i = (2β_i + β_{3−i})/3.
pub fn beta_bar_from_beta(b: [f64; 2]) -> [f64; 2] {
    [(2.0 * b[0] + b[1]) / 3.0, (2.0 * b[1] + b[0]) / 3.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub clause: String,
    pub value: f64,
}

/// A conjunction of strict inequalities `margin > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub holds: bool,
    pub indeterminate: bool,
    pub margins: Vec<Margin>,
}

impl Check {
    fn from_margins(margins: Vec<Margin>) -> Self {
        Check {
            holds: margins.iter().all(|m| m.value > 0.0),
            indeterminate: margins.iter().any(|m| m.value.abs() <= INDETERMINATE_BAND),
            margins,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.value)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn margin(&self, clause: &str) -> Option<f64> {
        self.margins
            .iter()
            .find(|m| m.clause == clause)
            .map(|m| m.value)
    }
}

fn margin(clause: impl Into<String>, value: f64) -> Margin {
    Margin {
        clause: clause.into(),
        value,
    }
}

/// Hypotheses A1–A6 on seven weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumptions {
    pub holds: [bool; 6],
    /// Signed slack per hypothesis: `lhs − rhs` for equalities, positive-is-satisfied otherwise.
    pub margins: Vec<Margin>,
}

impl Assumptions {
    pub fn all(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub mode: Mode,
    pub luo_tian: Option<Check>,
    pub toda_existence: Option<Check>,
    pub beta_like: Option<Check>,
    pub barbeta_form: Option<Check>,
    /// The β̄ inequalities alone, without positivity of β = Aβ̄.
    pub barbeta_literal: Option<bool>,
    pub assumptions_a: Option<Assumptions>,
}

pub fn check_conditions(set: &SourceSet) -> ConditionReport {
    let mut report = ConditionReport {
        mode: set.mode(),
        luo_tian: None,
        toda_existence: None,
        beta_like: None,
        barbeta_form: None,
        barbeta_literal: None,
        assumptions_a: None,
    };
    match set.mode() {
        Mode::Scalar => {
            report.luo_tian = Some(luo_tian(&set.weights()[0]));
            if set.len() == 7 {
                let w: [f64; 7] = set.weights()[0].clone().try_into().unwrap();
                report.assumptions_a = Some(assumptions_a(&w));
            }
        }
        Mode::Toda => {
            let w = set.weights();
            report.toda_existence = Some(toda_existence(&w[0], &w[1]));
            report.beta_like = Some(beta_like(&w[0], &w[1]));
            let (form, literal) = barbeta_form(&w[0], &w[1]);
            report.barbeta_form = Some(form);
            report.barbeta_literal = Some(literal);
            if set.len() == 7 {
                let mut c = [0.0; 7];
                for (l, v) in c.iter_mut().enumerate() {
                    *v = w[0][l] + w[1][l];
                }
                report.assumptions_a = Some(assumptions_a(&c));
            }
        }
    }
    report
}

pub fn luo_tian(b: &[f64]) -> Check {
    let total: f64 = b.iter().sum();
    let mut m = vec![margin("2 - sum", 2.0 - total)];
    for (j, &bj) in b.iter().enumerate() {
        m.push(margin(format!("others({j}) - beta[{j}]"), (total - bj) - bj));
    }
    Check::from_margins(m)
}

pub fn toda_existence(b1: &[f64], b2: &[f64]) -> Check {
    let s = [b1.iter().sum::<f64>(), b2.iter().sum::<f64>()];
    let rows = [b1, b2];
    let mut m = Vec::new();
    for i in 0..2 {
        let rhs = 2.0 * s[i] + s[1 - i];
        for (j, &bij) in rows[i].iter().enumerate() {
            m.push(margin(format!("mass({i},{j})"), rhs - 3.0 * (1.0 + bij)));
        }
    }
    for i in 0..2 {
        m.push(margin(format!("2 - sum({i})"), 2.0 - s[i]));
    }
    Check::from_margins(m)
}

pub fn beta_like(b1: &[f64], b2: &[f64]) -> Check {
    let rows = [b1, b2];
    let mut m = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let s: f64 = row.iter().sum();
        for j in 0..row.len() {
            let others = s - row[j];
            m.push(margin(format!("like({i},{j})"), others - b1[j].max(b2[j])));
        }
    }
    Check::from_margins(m)
}

/// The β̄ form of the Toda condition. The β̄ inequalities reproduce the first
/// clause of the Toda condition; positivity of β = Aβ̄ carries the second. The
/// returned flag is the β̄ inequalities alone.
pub fn barbeta_form(b1: &[f64], b2: &[f64]) -> (Check, bool) {
    let beta = [2.0 - b1.iter().sum::<f64>(), 2.0 - b2.iter().sum::<f64>()];
    let bb = beta_bar_from_beta(beta);
    let rows = [b1, b2];
    let mut m = Vec::new();
    for i in 0..2 {
        m.push(margin(format!("bbar({i})"), bb[i]));
        for (l, &bil) in rows[i].iter().enumerate() {
            m.push(margin(format!("1 - beta({i},{l}) - bbar({i})"), 1.0 - bil - bb[i]));
        }
    }
    let literal = m.iter().all(|x| x.value > 0.0);
    let back = beta_from_beta_bar(bb);
    for (i, b) in back.iter().enumerate() {
        m.push(margin(format!("A bbar({i})"), *b));
    }
    (Check::from_margins(m), literal)
}

pub fn assumptions_a(b: &[f64; 7]) -> Assumptions {
    let s14: f64 = b[..4].iter().sum();
    let s57: f64 = b[4..].iter().sum();
    let a1 = b[3] + s14 - 2.0;
    let a2 = b[0] - (b[1] + b[2]);
    let a3 = 1.0 / 3.0 - b[3];
    let a4 = b[3] + s57 - 2.0;
    let a5 = 1.0 - (b[3] + b[4]);
    let a6 = [b[3] + b[0] - 1.0, 1.0 - (b[3] + b[1]), 1.0 - (b[3] + b[2])];
    let a6_min = a6.iter().copied().fold(f64::INFINITY, f64::min);
    Assumptions {
        holds: [
            a1.abs() <= EQUALITY_TOL,
            a2 > 0.0,
            a3 > 0.0,
            a4.abs() <= EQUALITY_TOL,
            a5 > 0.0,
            a6_min > 0.0,
        ],
        margins: vec![
            margin("A1", a1),
            margin("A2", a2),
            margin("A3", a3),
            margin("A4", a4),
            margin("A5", a5),
            margin("A6", a6_min),
        ],
    }
}

/// The seven weights of the counterexample family for ε ∈ (0, 2/9).
pub fn counterexample_weights(eps: f64) -> Result<[f64; 7]> {
    if !(eps > 0.0 && eps < 2.0 / 9.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let h = 0.5 - eps;
    let w = 0.5 * (1.0 + eps);
    Ok([1.0 - eps, h, h, 1.5 * eps, 1.0 - 2.5 * eps, w, w])
}

/// Default placement: five points on the unit circle, then two further out.
pub fn counterexample_points(s: f64) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            [t.cos(), t.sin()]
        })
        .collect();
    pts.push([s, 0.0]);
    pts.push([-2.0 * s, 0.0]);
    pts
}

/// Toda counterexample: sources 1–4 act on the first component, 5–7 on the second.
pub fn counterexample_family(eps: f64) -> Result<SourceSet> {
    counterexample_family_at(eps, counterexample_points(3.0))
}

pub fn counterexample_family_at(eps: f64, points: Vec<[f64; 2]>) -> Result<SourceSet> {
    let b = counterexample_weights(eps)?;
    if points.len() != 7 {
        return Err(Error::InvalidSource(format!(
            "counterexample needs 7 points, got {}",
            points.len()
        )));
    }
    let w1 = (0..7).map(|l| if l < 4 { b[l] } else { 0.0 }).collect();
    let w2 = (0..7).map(|l| if l < 4 { 0.0 } else { b[l] }).collect();
    SourceSet::toda(points, w1, w2)
}
