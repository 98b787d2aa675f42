//! Oracle suite behind the `validate` mode.

use toda_core::diagnostics::{pohozaev_residual, two_point_defect};
use toda_core::discretization::GridConfig;
use toda_core::oracle::{bubble, grid_check, radial_solve, RadialConfig};
use toda_core::liouville::gamma_n;
use toda_core::solver::{fmt17, IterationConfig, Status};

use crate::config::ValidateSpec;
use crate::RunError;

pub struct Row {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(name: &str, value: f64, tolerance: f64) -> Row {
    Row {
        name: name.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

/// Radial oracle against the closed-form profile.
fn closed_form(n: usize, alpha: f64) -> Result<f64, RunError> {
    let sol = radial_solve(alpha, n, 2.0 * gamma_n(n) * (1.0 + alpha), &RadialConfig::default())?;
    if sol.status != Status::Converged {
        return Ok(f64::INFINITY);
    }
    let mut worst = 0.0f64;
    for k in 0..=40 {
        let r = 10f64.powf(-2.0 + 0.075 * k as f64);
        let mut x = vec![0.0; n];
        x[0] = r;
        let exact = bubble(n, alpha, &x).expect("closed form exists");
        worst = worst.max((sol.value_at(r) - exact).abs());
    }
    Ok(worst)
}

pub fn run(spec: &ValidateSpec, grid: &GridConfig, iter: &IterationConfig) -> Result<Vec<Row>, RunError> {
    let mut rows = vec![
        row("oracle_bubble_2d", closed_form(2, 0.0)?, 2e-3),
        row("oracle_alpha_2d", closed_form(2, 0.5)?, 2e-3),
        row("oracle_bubble_3d", closed_form(3, 0.0)?, 2e-3),
    ];
    let mut cases = vec![(2, 0.0, grid.clone(), 0.01), (2, 0.5, grid.clone(), 0.01)];
    if spec.three_d {
        let coarse = GridConfig {
            core_cells: spec.three_d_cells,
            ..grid.clone()
        };
        cases.push((3, 0.0, coarse, 0.05));
    }
    for (n, alpha, g, mass_tol) in cases {
        let c = grid_check(n, alpha, &g, iter)?;
        let name = format!("grid_n{n}_alpha{alpha}");
        let converged = if c.status == Status::Converged { 0.0 } else { 1.0 };
        rows.push(row(&format!("{name}_converged"), converged, 0.0));
        rows.push(row(&format!("{name}_mass"), c.mass_error, mass_tol));
        let profile = c.cross.map_or(f64::INFINITY, |x| x.relative_error);
        rows.push(row(&format!("{name}_profile"), profile, 0.02));
    }
    let poho = (0..20)
        .map(|k| {
            let a = -0.95 + 0.0975 * k as f64;
            let s = 2.0 * (1.0 - a);
            pohozaev_residual(s, s, a, a).residual.abs()
        })
        .fold(0.0, f64::max);
    rows.push(row("pohozaev_full_blow_up", poho, 1e-12));
    let kelvin = (0..1000)
        .map(|k| {
            let t = k as f64;
            let x = [(0.7 * t).sin() * (1.0 + t % 5.0), (1.3 * t).cos() + 0.1];
            let y = [(2.9 * t).cos() * 3.0, (0.4 * t).sin() - 0.2];
            two_point_defect(&x, &y)
        })
        .fold(0.0, f64::max);
    rows.push(row("kelvin_two_point", kelvin, 1e-12));
    Ok(rows)
}

pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from("check,value,tolerance,pass\n");
    for r in rows {
        out += &format!("{},{},{},{}\n", r.name, fmt17(r.value), fmt17(r.tolerance), r.pass);
    }
    out
}

pub fn render(rows: &[Row]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{} {:<28} {:.3e} (tolerance {:.1e})",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.value,
                r.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_compare_against_tolerance() {
        let rows = vec![row("a", 1e-3, 2e-3), row("b", 3e-3, 2e-3), row("c", f64::INFINITY, 0.0)];
        assert_eq!(rows.iter().map(|r| r.pass).collect::<Vec<_>>(), [true, false, false]);
        let table = csv(&rows);
        assert!(table.starts_with("check,value,tolerance,pass\n"));
        assert_eq!(table.lines().count(), 4);
        assert!(render(&rows).lines().nth(1).unwrap().starts_with("FAIL b"));
    }
}
