use std::fs;
use std::path::{Path, PathBuf};

use crate::coupling::{ConditionalKernel, OccupancyCoupling};
use crate::error::{Error, Result};
use crate::solver::IterateDiagnostics;

/// Full-precision rendering: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A headered comma-separated table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let csv_err = |e: csv::Error| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(path.to_path_buf())
    }

    /// Reads a table written by [`Table::write`].
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let csv_err = |e: csv::Error| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        };
        let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                _ => unreachable!(),
            },
            _ => csv_err(e),
        })?;
        let header = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// A column parsed as numbers; empty or malformed cells become NaN.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let col = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[col].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

/// Convergence trace; residual columns appear only when available, and an
/// absolute-error column when a reference distance is supplied.
pub fn trace_table(trace: &[IterateDiagnostics], reference: Option<f64>) -> Table {
    let with_residuals = trace.first().is_some_and(|d| d.residuals.is_some());
    let mut header = vec!["k", "distance_estimate"];
    if with_residuals {
        header.extend([
            "flow_residual",
            "causal_x_residual",
            "causal_y_residual",
            "certificate",
        ]);
    }
    if reference.is_some() {
        header.push("abs_error");
    }
    let mut table = Table::new(header);
    for d in trace {
        let mut row = vec![d.k.to_string(), fmt_f64(d.distance)];
        if let (true, Some(r), Some(cert)) = (with_residuals, d.residuals, d.certificate) {
            row.extend([
                fmt_f64(r.flow),
                fmt_f64(r.causal_x),
                fmt_f64(r.causal_y),
                fmt_f64(cert),
            ]);
        }
        if let Some(reference) = reference {
            row.push(fmt_f64((d.distance - reference).abs()));
        }
        table.push(row);
    }
    table
}

/// Coupling as `(x, y, x', y', value)` rows.
pub fn coupling_table(mu: &OccupancyCoupling) -> Table {
    let d = mu.dims();
    let mut table = Table::new(["x", "y", "x_next", "y_next", "value"]);
    for x in 0..d.nx {
        for y in 0..d.ny {
            for x2 in 0..d.nx {
                for y2 in 0..d.ny {
                    table.push(vec![
                        x.to_string(),
                        y.to_string(),
                        x2.to_string(),
                        y2.to_string(),
                        fmt_f64(mu.get(x, y, x2, y2)),
                    ]);
                }
            }
        }
    }
    table
}

/// Conditional kernel as a dense matrix: one row per conditioning state,
/// one column per target state.
pub fn kernel_table(kernel: &ConditionalKernel, row_name: &str, col_prefix: &str) -> Table {
    let mut header = vec![row_name.to_string()];
    header.extend((0..kernel.cols()).map(|j| format!("{col_prefix}{j}")));
    let mut table = Table::new(header);
    for i in 0..kernel.rows() {
        let mut row = vec![i.to_string()];
        row.extend(kernel.row(i).iter().map(|v| fmt_f64(*v)));
        table.push(row);
    }
    table
}

/// Reads the `distance` column of a one-row result table such as the
/// oracle's.
pub fn read_distance(path: &Path) -> Result<f64> {
    let table = Table::read(path)?;
    let bad = |msg: &str| Error::Format {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    let col = table
        .column("distance")
        .ok_or_else(|| bad("no `distance` column"))?;
    let row = table.rows.first().ok_or_else(|| bad("no data rows"))?;
    row[col]
        .parse()
        .map_err(|_| bad("`distance` is not a number"))
}
