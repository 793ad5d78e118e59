//! Tidy per-figure CSV tables built from summary rows.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::ensemble::{SummaryRow, CHI_I, CHI_II, CHI_II_SCALED, DELTA0, F, P_LO};
use crate::error::{Error, Result};

pub const FIGURES: [&str; 8] = [
    "fig2a", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b", "fig6a", "fig6b",
];

/// A header plus rows of numbers, one figure's worth of data.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotTable {
    pub figure: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let malformed = |e: csv::Error| Error::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        w.write_record(&self.columns).map_err(malformed)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(malformed)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Rows of one observable as `(r, mean, stderr, Lx, Ly)`, or `(r, var, Lx, Ly)`.
fn series(rows: &[SummaryRow], observable: &str, variance: bool) -> Vec<Vec<f64>> {
    rows.iter()
        .filter(|r| r.observable == observable)
        .map(|r| {
            if variance {
                vec![r.r, r.var, r.lx as f64, r.ly as f64]
            } else {
                vec![r.r, r.mean, r.stderr, r.lx as f64, r.ly as f64]
            }
        })
        .collect()
}

fn negativity_rows(rows: &[SummaryRow]) -> Vec<Vec<f64>> {
    rows.iter()
        .filter_map(|r| {
            let k: usize = r.observable.strip_prefix("n_a_k")?.parse().ok()?;
            Some(vec![
                r.r,
                k as f64,
                r.mean,
                r.stderr,
                r.lx as f64,
                r.ly as f64,
            ])
        })
        .collect()
}

/// Builds the table for `figure` from summary rows.
pub fn plot_table(rows: &[SummaryRow], figure: &str) -> Result<PlotTable> {
    if !FIGURES.contains(&figure) {
        return Err(Error::UnknownFigure(figure.to_string()));
    }
    if rows.is_empty() {
        return Err(Error::MissingData("dataset has no rows".into()));
    }
    let (cols, data) = match figure {
        "fig2a" => (
            columns(&["r", "k_A", "mean_N_A", "stderr", "Lx", "Ly"]),
            negativity_rows(rows),
        ),
        "fig2c" => (
            columns(&["r", "delta0_N_A", "stderr", "Lx", "Ly"]),
            series(rows, DELTA0, false),
        ),
        "fig3a" => (
            columns(&["r", "mean_chiI", "stderr", "Lx", "Ly"]),
            series(rows, CHI_I, false),
        ),
        "fig3b" => (
            columns(&["r", "mean_chiII", "stderr", "Lx", "Ly"]),
            series(rows, CHI_II, false),
        ),
        "fig4a" => (
            columns(&["r", "mean_scaled_chiII", "stderr", "Lx", "Ly"]),
            series(rows, CHI_II_SCALED, false),
        ),
        "fig4b" => (
            columns(&["r", "F", "stderr", "Lx", "Ly"]),
            series(rows, F, false),
        ),
        "fig6a" => (
            columns(&["r", "p_lo", "stderr", "Lx", "Ly"]),
            series(rows, P_LO, false),
        ),
        "fig6b" => (
            columns(&["r", "var_p_lo", "Lx", "Ly"]),
            series(rows, P_LO, true),
        ),
        _ => unreachable!(),
    };
    if data.is_empty() {
        return Err(Error::MissingData(format!("no rows for {figure}")));
    }
    Ok(PlotTable {
        figure: figure.to_string(),
        columns: cols,
        rows: data,
    })
}

/// Writes `<dir>/<figure>.csv` and returns its path.
pub fn emit_plot(rows: &[SummaryRow], figure: &str, dir: &Path) -> Result<PathBuf> {
    let table = plot_table(rows, figure)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{figure}.csv"));
    table.write_csv(&path)?;
    Ok(path)
}
