//! Result files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use toda_core::discretization::QuadratureGrid;
use toda_core::solver::fmt17;

use crate::RunError;

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, RunError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
    write_text(dir, name, &(text + "\n"))
}

/// Columns x1..xn, chart, u1[, u2].
pub fn field_csv(grid: &QuadratureGrid, u: &[Vec<f64>]) -> String {
    let mut out: Vec<String> = (1..=grid.dim).map(|k| format!("x{k}")).collect();
    out.push("chart".into());
    out.extend((1..=u.len()).map(|i| format!("u{i}")));
    let mut text = out.join(",") + "\n";
    for k in 0..grid.len() {
        let mut row: Vec<String> = grid.point(k).iter().map(|x| fmt17(*x)).collect();
        row.push(grid.charts[k].label());
        row.extend(u.iter().map(|ui| fmt17(ui[k])));
        text += &row.join(",");
        text.push('\n');
    }
    text
}
