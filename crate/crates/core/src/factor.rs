//! Three-factor regression residuals and sliding-window testing.

use std::io::Read;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TimeSeriesPanel;
use crate::testing::{run_all, PerTest};

/// Pivots of `R` below this fraction of the largest pivot count as rank loss.
pub const RANK_TOL: f64 = 1e-10;
pub const MIN_PERIODS: usize = 10;
pub const MIN_WINDOW: usize = 10;

/// Excess returns (`T x p`) aligned with market-excess, SMB and HML factors (`T x 3`).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorData {
    excess_returns: DMatrix<f64>,
    factors: DMatrix<f64>,
    dates: Option<Vec<String>>,
}

impl FactorData {
    pub fn new(excess_returns: DMatrix<f64>, factors: DMatrix<f64>) -> Result<Self> {
        let t = excess_returns.nrows();
        if factors.nrows() != t {
            return Err(Error::ShapeMismatch(format!(
                "returns have {t} rows but factors have {}",
                factors.nrows()
            )));
        }
        if factors.ncols() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "expected 3 factor columns, got {}",
                factors.ncols()
            )));
        }
        if excess_returns.ncols() == 0 {
            return Err(Error::ShapeMismatch("no asset columns".into()));
        }
        if t < MIN_PERIODS {
            return Err(Error::InvalidData(format!("need T >= {MIN_PERIODS} periods, got {t}")));
        }
        if excess_returns.iter().chain(factors.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("returns and factors must be finite".into()));
        }
        for (j, col) in factors.column_iter().enumerate() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            if var <= 0.0 {
                return Err(Error::DegenerateVariance { column: j, value: var });
            }
        }
        Ok(Self {
            excess_returns,
            factors,
            dates: None,
        })
    }

    pub fn with_dates(mut self, dates: Vec<String>) -> Result<Self> {
        if dates.len() != self.periods() {
            return Err(Error::ShapeMismatch(format!(
                "{} dates for {} periods",
                dates.len(),
                self.periods()
            )));
        }
        self.dates = Some(dates);
        Ok(self)
    }

    pub fn periods(&self) -> usize {
        self.excess_returns.nrows()
    }

    pub fn assets(&self) -> usize {
        self.excess_returns.ncols()
    }

    pub fn excess_returns(&self) -> &DMatrix<f64> {
        &self.excess_returns
    }

    pub fn factors(&self) -> &DMatrix<f64> {
        &self.factors
    }

    pub fn dates(&self) -> Option<&[String]> {
        self.dates.as_deref()
    }

    /// `[1, factors]`, the `T x 4` regression design.
    pub fn design(&self) -> DMatrix<f64> {
        let t = self.periods();
        DMatrix::from_fn(t, 4, |i, j| if j == 0 { 1.0 } else { self.factors[(i, j - 1)] })
    }

    /// Joins a returns table and a factors table by row order.
    ///
    /// Unless `already_excess` is set, the factors' risk-free column is
    /// subtracted from every asset. With `check_dates`, the two date columns
    /// must agree row by row.
    pub fn from_tables(
        returns: DatedTable,
        factors: FactorTable,
        already_excess: bool,
        check_dates: bool,
    ) -> Result<Self> {
        if returns.values.nrows() != factors.factors.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "returns have {} rows but factors have {}",
                returns.values.nrows(),
                factors.factors.nrows()
            )));
        }
        if check_dates {
            if let Some(i) = returns.dates.iter().zip(&factors.dates).position(|(a, b)| a != b) {
                return Err(Error::InvalidData(format!(
                    "date mismatch at row {}: `{}` vs `{}`",
                    i + 1,
                    returns.dates[i],
                    factors.dates[i]
                )));
            }
        }
        let mut excess = returns.values;
        if !already_excess {
            for (mut row, rf) in excess.row_iter_mut().zip(factors.risk_free.iter()) {
                row.add_scalar_mut(-rf);
            }
        }
        Self::new(excess, factors.factors)?.with_dates(returns.dates)
    }
}

/// A CSV with a leading date column followed by numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedTable {
    pub dates: Vec<String>,
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl DatedTable {
    /// Reads a headed CSV: `date, col1, col2, ...`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::Parse {
                row: 1,
                column: header.len(),
                message: "expected a date column and at least one value column".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let width = names.len();
        let mut dates = Vec::new();
        let mut flat = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            if rec.len() != width + 1 {
                return Err(Error::Parse {
                    row,
                    column: rec.len(),
                    message: format!("expected {} fields", width + 1),
                });
            }
            dates.push(rec[0].to_string());
            for (j, field) in rec.iter().enumerate().skip(1) {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("`{field}` is not a number"),
                })?;
                flat.push(v);
            }
        }
        let values = DMatrix::from_row_slice(dates.len(), width, &flat);
        Ok(Self { dates, names, values })
    }
}

/// Factor file columns: date, market excess, SMB, HML, risk-free.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    pub dates: Vec<String>,
    pub factors: DMatrix<f64>,
    pub risk_free: Vec<f64>,
}

impl FactorTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let table = DatedTable::read_csv(reader)?;
        if table.names.len() != 4 {
            return Err(Error::Parse {
                row: 1,
                column: table.names.len() + 1,
                message: format!(
                    "factor file needs date, market-excess, SMB, HML, risk-free; got {} value columns",
                    table.names.len()
                ),
            });
        }
        let factors = table.values.columns(0, 3).into_owned();
        let risk_free = table.values.column(3).iter().copied().collect();
        Ok(Self {
            dates: table.dates,
            factors,
            risk_free,
        })
    }
}

/// Residuals of per-asset regressions of excess returns on `[1, factors]`.
pub fn ols_residuals(data: &FactorData) -> Result<TimeSeriesPanel> {
    let design = data.design();
    let r = design.clone().col_piv_qr().r();
    let pivots: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    if let Some(column) = pivots.iter().position(|&d| d.is_nan() || d <= RANK_TOL * largest) {
        return Err(Error::RankDeficient {
            column,
            value: pivots[column],
        });
    }
    let q = design.qr().q();
    let y = data.excess_returns();
    let columns: Vec<_> = (0..y.ncols())
        .into_par_iter()
        .map(|j| {
            let yj = y.column(j);
            yj - &q * (q.tr_mul(&yj))
        })
        .collect();
    TimeSeriesPanel::new(DMatrix::from_columns(&columns))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlidingWindowSummary {
    pub window: usize,
    #[serde(rename = "K")]
    pub lags: usize,
    pub alpha: f64,
    pub num_windows: usize,
    pub rejections: PerTest<usize>,
    pub rates: PerTest<f64>,
}

/// Runs all three tests on every window `[s, s + window)` for `s < T - window`.
pub fn sliding_window_rates(
    panel: &TimeSeriesPanel,
    window: usize,
    lags: usize,
    alpha: f64,
) -> Result<SlidingWindowSummary> {
    let t = panel.n();
    if window >= t {
        return Err(Error::InvalidInput(format!(
            "window {window} must be shorter than the series ({t})"
        )));
    }
    if window < MIN_WINDOW {
        return Err(Error::InvalidInput(format!("window must be >= {MIN_WINDOW}, got {window}")));
    }
    let num_windows = t - window;
    let decisions: Vec<PerTest<bool>> = (0..num_windows)
        .into_par_iter()
        .map(|s| Ok(run_all(&panel.window(s, window)?, lags, alpha)?.decisions))
        .collect::<Result<_>>()?;
    let count = |f: fn(&PerTest<bool>) -> bool| decisions.iter().filter(|d| f(d)).count();
    let rejections = PerTest {
        max: count(|d| d.max),
        sum: count(|d| d.sum),
        fc: count(|d| d.fc),
    };
    Ok(SlidingWindowSummary {
        window,
        lags,
        alpha,
        num_windows,
        rejections,
        rates: rejections.map(|c| c as f64 / num_windows as f64),
    })
}
