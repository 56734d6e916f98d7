//! Panel data type and lagged sample moments.
//!
//! A [`TimeSeriesPanel`] holds `n` observations of a `p`-dimensional series,
//! one row per time point. Lagged autocovariances use divisor `n` with `n - k`
//! summands and no mean subtraction; callers that want centred data opt in
//! with [`TimeSeriesPanel::new_centered`].

use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Columns whose lag-0 second moment falls at or below this are rejected.
pub const DEGENERATE_VARIANCE_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_CLAMP_TOL: f64 = 1e-10;

/// `n x p` panel of observations; rows are time points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    data: DMatrix<f64>,
}

impl TimeSeriesPanel {
    /// Wraps an `n x p` matrix. Requires `n >= 2`, `p >= 1` and finite entries.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 || data.ncols() < 1 {
            return Err(Error::InvalidData(format!(
                "panel must have n >= 2 rows and p >= 1 columns, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % data.nrows(), pos / data.nrows());
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {row}, column {col}"
            )));
        }
        Ok(Self { data })
    }

    /// Like [`new`](Self::new) but subtracts each column mean first.
    pub fn new_centered(mut data: DMatrix<f64>) -> Result<Self> {
        let n = data.nrows() as f64;
        for mut col in data.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
        }
        Self::new(data)
    }

    /// Builds a panel from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::ShapeMismatch(format!(
                "row {bad} has {} entries, expected {p}",
                rows[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    /// Contiguous rows `start..start + len` as a new panel.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n() {
            return Err(Error::InvalidInput(format!(
                "window {start}..{} exceeds panel length {}",
                start + len,
                self.n()
            )));
        }
        Self::new(self.data.rows(start, len).into_owned())
    }

    /// Columns selected by index, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.p()) {
            return Err(Error::InvalidInput(format!(
                "column {bad} out of range for p = {}",
                self.p()
            )));
        }
        Self::new(self.data.select_columns(columns))
    }

    /// Lag-0 second moments `Σ̂(0)_ii`, erroring on the first degenerate column.
    pub(crate) fn checked_second_moments(&self) -> Result<Vec<f64>> {
        let n = self.n() as f64;
        self.data
            .column_iter()
            .enumerate()
            .map(|(j, col)| {
                let v = col.norm_squared() / n;
                if v <= DEGENERATE_VARIANCE_TOL {
                    Err(Error::DegenerateVariance { column: j, value: v })
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Reads a panel from CSV: one row per time point, `p` numeric columns.
    pub fn read_csv<R: Read>(reader: R, has_header: bool, center: bool) -> Result<Self> {
        let data = read_matrix_csv(reader, has_header)?;
        if center {
            Self::new_centered(data)
        } else {
            Self::new(data)
        }
    }

    /// Writes the panel as headerless CSV, one row per time point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(writer);
        for row in self.data.row_iter() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// A `p x p` lagged moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedMatrix {
    pub lag: usize,
    pub values: DMatrix<f64>,
}

/// Reads a rectangular numeric CSV into a matrix. Parse errors carry 1-based
/// row and column positions, counting the header row if present.
pub fn read_matrix_csv<R: Read>(reader: R, has_header: bool) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut p = None;
    let first_data_row = if has_header { 2 } else { 1 };
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = first_data_row + i;
        match p {
            None => p = Some(record.len()),
            Some(p) if p != record.len() => {
                return Err(Error::Parse {
                    row,
                    column: record.len().min(p) + 1,
                    message: format!("expected {p} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: j + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, p.unwrap_or(0), &values))
}


/// `Σ̂(k) = n⁻¹ Σ_{t=1}^{n-k} ε_{t+k} ε_tᵀ`.
pub fn sample_autocovariance(panel: &TimeSeriesPanel, k: usize) -> Result<LaggedMatrix> {
    let n = panel.n();
    if k >= n {
        return Err(Error::LagTooLarge { lag: k, n });
    }
    let x = panel.data();
    let m = n - k;
    let mut values = x.rows(k, m).tr_mul(&x.rows(0, m));
    values /= n as f64;
    Ok(LaggedMatrix { lag: k, values })
}

/// `Γ̂(k) = diag{Σ̂(0)}^{-1/2} Σ̂(k) diag{Σ̂(0)}^{-1/2}`.
pub fn sample_autocorrelation(panel: &TimeSeriesPanel, k: usize) -> Result<LaggedMatrix> {
    let scale = inverse_sqrt_moments(panel)?;
    let mut cov = sample_autocovariance(panel, k)?;
    standardize(&mut cov.values, &scale);
    if k == 0 {
        cov.values.fill_diagonal(1.0);
    }
    Ok(cov)
}

pub(crate) fn inverse_sqrt_moments(panel: &TimeSeriesPanel) -> Result<Vec<f64>> {
    Ok(panel
        .checked_second_moments()?
        .into_iter()
        .map(|v| v.sqrt().recip())
        .collect())
}

pub(crate) fn standardize(m: &mut DMatrix<f64>, scale: &[f64]) {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        for (i, v) in col.iter_mut().enumerate() {
            *v *= scale[i] * scale[j];
        }
    }
}

/// Symmetric square root of a PSD matrix via symmetric eigendecomposition.
///
/// Eigenvalues in `[-1e-10, 0)` are treated as round-off and clamped to zero.
pub fn sym_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "sym_sqrt needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max |S - Sᵀ| = {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -EIGEN_CLAMP_TOL {
            return Err(Error::NotPsd(*v));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= roots[j];
    }
    let m = &scaled * q.transpose();
    // Symmetrize away round-off.
    Ok((&m + m.transpose()) * 0.5)
}

/// `tr(AB)` as `Σ_ij A_ij B_ji`, without forming the product.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.ncols() || a.ncols() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "tr(AB) needs A: r x c and B: c x r, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    // A is column-major: walking A's column j pairs with B's row j.
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}
