//! CSV field tables and the JSON report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use torsion_core::{DiscGrid, ScalarField};

use crate::error::{CliError, CliResult};

/// A table of scalar fields sharing one grid, written as `<stem>.csv`.
pub struct FieldTable {
    pub stem: &'static str,
    pub columns: Vec<(&'static str, ScalarField)>,
}

/// Rows `j,k,u,v,<columns>`; boundary nodes carry `j = n_r`.
pub fn render_csv(table: &FieldTable, grid: &DiscGrid) -> String {
    let cols: Vec<ScalarField> = table.columns.iter().map(|(_, f)| grid.with_trace(f)).collect();
    let mut out = String::from("j,k,u,v");
    for (name, _) in &table.columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let n = grid.n_theta();
    let mut row = |j: usize, k: usize, (u, v): (f64, f64), pick: &dyn Fn(&ScalarField) -> f64| {
        let _ = write!(out, "{j},{k},{u},{v}");
        for c in &cols {
            let _ = write!(out, ",{}", pick(c));
        }
        out.push('\n');
    };
    for i in 0..grid.num_interior() {
        row(i / n, i % n, grid.node(i), &|f| f.values()[i]);
    }
    for k in 0..n {
        row(grid.n_r(), k, grid.boundary_node(k), &|f| f.trace().expect("trace attached")[k]);
    }
    out
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes every table and then the report; returns the table paths.
pub fn write_outputs(dir: &Path, files: &[(PathBuf, String)]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (path, text) in files {
        std::fs::write(path, text).map_err(|e| io(path, e))?;
    }
    Ok(())
}
