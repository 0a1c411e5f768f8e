//! Observed panel data, preprocessing, and lagged design matrices for
//! restricted VAR(p) regression.
//!
//! Time indices are 1-based and intervals are closed on both ends. Node
//! indices are 1-based as well, matching the natural numbering `1..=N`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A multivariate time series: `T` observation times over `N` nodes,
/// stored column-major (one contiguous vector per node).
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    columns: Vec<Vec<f64>>,
    labels: Vec<String>,
    t_len: usize,
}

impl MultivariateSeries {
    /// Build a series from per-node columns and labels.
    ///
    /// Requires at least two nodes, equal column lengths, distinct labels,
    /// and finite values throughout.
    pub fn from_columns(columns: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n = columns.len();
        if n < 2 {
            return Err(Error::invalid_input(format!(
                "a series needs at least 2 nodes, got {n}"
            )));
        }
        if labels.len() != n {
            return Err(Error::dimension_mismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                n
            )));
        }
        let t_len = columns[0].len();
        if t_len == 0 {
            return Err(Error::invalid_input("series must have at least one row"));
        }
        for (v, col) in columns.iter().enumerate() {
            if col.len() != t_len {
                return Err(Error::dimension_mismatch(format!(
                    "column {} has {} rows, expected {}",
                    v + 1,
                    col.len(),
                    t_len
                )));
            }
            for (t, &value) in col.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        row: t + 1,
                        col: v + 1,
                    });
                }
            }
        }
        for (i, a) in labels.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::invalid_input("node labels must be non-empty"));
            }
            if labels[i + 1..].iter().any(|b| a == b) {
                return Err(Error::invalid_input(format!("duplicate node label '{a}'")));
            }
        }
        Ok(MultivariateSeries {
            columns,
            labels,
            t_len,
        })
    }

    /// Number of observation times `T`.
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Number of nodes `N`.
    pub fn n_nodes(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the node with the given label, 1-based.
    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| i + 1)
    }

    /// Value at time `t` (1-based) for node `v` (1-based).
    pub fn value(&self, t: usize, v: usize) -> f64 {
        self.columns[v - 1][t - 1]
    }

    /// Value at time `t` for node `v`, or 0 when `t < 1`. This is the
    /// zero-fill convention for lagged regressors before the first
    /// observation.
    pub fn value_or_zero(&self, t: isize, v: usize) -> f64 {
        if t < 1 {
            0.0
        } else {
            self.columns[v - 1][t as usize - 1]
        }
    }

    /// The full column of node `v` (1-based).
    pub fn column(&self, v: usize) -> &[f64] {
        &self.columns[v - 1]
    }

    /// Reorder the nodes according to `order`, a permutation of `1..=N`
    /// giving for each new position the original node index.
    pub fn permute_nodes(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_nodes();
        if order.len() != n {
            return Err(Error::dimension_mismatch(format!(
                "permutation of length {} for {} nodes",
                order.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &v in order {
            if v < 1 || v > n || seen[v - 1] {
                return Err(Error::invalid_input("order is not a permutation of 1..=N"));
            }
            seen[v - 1] = true;
        }
        let columns = order.iter().map(|&v| self.columns[v - 1].clone()).collect();
        let labels = order.iter().map(|&v| self.labels[v - 1].clone()).collect();
        MultivariateSeries::from_columns(columns, labels)
    }

    /// Write the series as CSV: one header line of labels, then one row per
    /// time point. Floats are printed in shortest round-trip form, so a
    /// save/load cycle reproduces values bit-exactly.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        out.push_str(&self.labels.join(","));
        out.push('\n');
        for t in 1..=self.t_len {
            for v in 1..=self.n_nodes() {
                if v > 1 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.value(t, v)));
            }
            out.push('\n');
        }
        let mut file = fs::File::create(path)?;
        file.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Load a series from CSV: a header row of node labels followed by rows of
/// finite reals. Ragged rows and non-finite cells are rejected with their
/// location.
pub fn load_csv(path: impl AsRef<Path>) -> Result<MultivariateSeries> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid_input("empty file"))?;
    let labels: Vec<String> = header
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let n = labels.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (row_idx, line) in lines.enumerate() {
        let row = row_idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(Error::Parse {
                row,
                col: cells.len().min(n),
                message: format!("expected {} cells, found {}", n, cells.len()),
            });
        }
        for (col_idx, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                col: col_idx + 1,
                message: format!("'{}' is not a number", cell.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    col: col_idx + 1,
                });
            }
            columns[col_idx].push(value);
        }
    }
    MultivariateSeries::from_columns(columns, labels)
}

/// First-order difference: output row `t` is input row `t+1` minus row `t`.
/// The result has `T - 1` rows.
pub fn first_difference(series: &MultivariateSeries) -> Result<MultivariateSeries> {
    let t_len = series.t_len();
    if t_len < 2 {
        return Err(Error::invalid_input(
            "first difference needs at least 2 rows",
        ));
    }
    let columns = (1..=series.n_nodes())
        .map(|v| {
            let col = series.column(v);
            (1..t_len).map(|t| col[t] - col[t - 1]).collect()
        })
        .collect();
    MultivariateSeries::from_columns(columns, series.labels().to_vec())
}

/// A closed time interval `[start, end]`, 1-based on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 1 || start > end {
            return Err(Error::invalid_input(format!(
                "invalid interval [{start}, {end}]"
            )));
        }
        Ok(Interval { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        t >= self.start && t <= self.end
    }

    pub(crate) fn validate_within(&self, t_len: usize) -> Result<()> {
        if self.end > t_len {
            return Err(Error::invalid_input(format!(
                "interval [{}, {}] exceeds series length {}",
                self.start, self.end, t_len
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Lagged design matrix for one target node over one interval.
///
/// Columns are ordered by source node ascending (skipping the target), and
/// within a node by lag `1..=p`. The row for time `t` holds `X_{t-l}(v)`,
/// taken from the global series; entries with `t - l < 1` are zero.
#[derive(Debug, Clone)]
pub struct LaggedDesign {
    matrix: Array2<f64>,
    column_map: Vec<(usize, usize)>,
    target: usize,
    interval: Interval,
}

impl LaggedDesign {
    #[cfg(test)]
    pub(crate) fn from_parts(
        matrix: Array2<f64>,
        column_map: Vec<(usize, usize)>,
        target: usize,
        interval: Interval,
    ) -> Self {
        LaggedDesign {
            matrix,
            column_map,
            target,
            interval,
        }
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    /// `(source node, lag)` per column, in column order.
    pub fn column_map(&self) -> &[(usize, usize)] {
        &self.column_map
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Source nodes in column order, one entry per lag group.
    pub fn source_nodes(&self) -> Vec<usize> {
        self.column_map
            .iter()
            .filter(|(_, lag)| *lag == 1)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Lag order `p`.
    pub fn lag_order(&self) -> usize {
        self.column_map.iter().map(|(_, lag)| *lag).max().unwrap_or(0)
    }
}

/// Build the lagged design for target `u` (1-based), lag order `p`, over
/// interval `interval`. Lagged values are taken from the global series even
/// when they precede the interval; only times before 1 are zero-filled.
pub fn build_lagged_design(
    series: &MultivariateSeries,
    u: usize,
    p: usize,
    interval: Interval,
) -> Result<LaggedDesign> {
    let n = series.n_nodes();
    if u < 1 || u > n {
        return Err(Error::invalid_input(format!(
            "target node {u} out of range 1..={n}"
        )));
    }
    if p == 0 {
        return Err(Error::invalid_input("lag order p must be at least 1"));
    }
    interval.validate_within(series.t_len())?;

    let sources: Vec<usize> = (1..=n).filter(|&v| v != u).collect();
    let k = sources.len() * p;
    let rows = interval.len();
    let mut matrix = Array2::zeros((rows, k));
    let mut column_map = Vec::with_capacity(k);
    for &v in &sources {
        for lag in 1..=p {
            column_map.push((v, lag));
        }
    }
    for (r, t) in (interval.start..=interval.end).enumerate() {
        for (c, &(v, lag)) in column_map.iter().enumerate() {
            matrix[[r, c]] = series.value_or_zero(t as isize - lag as isize, v);
        }
    }
    Ok(LaggedDesign {
        matrix,
        column_map,
        target: u,
        interval,
    })
}
