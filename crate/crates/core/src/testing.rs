//! Max-type, sum-type and Fisher-combination white-noise tests.
//!
//! * MAX: `T_MAX = max_{1≤k≤K} max_{i,j} √n |ρ̂_ij(k)|`, calibrated through
//!   `T_MAX² - 2 log(Kp²) + log log(Kp²)` against [`gumbel_cdf`].
//! * SUM: the U-statistic
//!   `T_SUM = {n(n-1)}⁻¹ Σ_{l≤K} Σ_{t≠s} ε_tᵀε_s ε_{t+l}ᵀε_{s+l}`, standardised by
//!   `σ̂_S = √(2K/{n(n-1)}) · tr̂(Σ²)`.
//! * FC: `-2 log p_MAX - 2 log p_SUM` against χ²₄.
//!
//! All three are one-sided upper-tail tests.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::{chi2_4_sf, gumbel_cdf, gumbel_sf, std_normal_sf};
use crate::error::{Error, Result};
use crate::series::{inverse_sqrt_moments, TimeSeriesPanel};

/// p-values are floored here before taking logs in the Fisher combination.
pub const P_VALUE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxResult {
    pub t_max: f64,
    pub gumbel_y: f64,
    pub p_value: f64,
    pub lags: usize,
    pub p_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub t_sum: f64,
    pub trace_sq_hat: f64,
    pub sigma_s_hat: f64,
    pub z_score: f64,
    pub p_value: f64,
}

/// One value per test, in MAX, SUM, FC order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerTest<T> {
    pub max: T,
    pub sum: T,
    pub fc: T,
}

impl<T> PerTest<T> {
    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PerTest<U> {
        PerTest {
            max: f(self.max),
            sum: f(self.sum),
            fc: f(self.fc),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport {
    pub n: usize,
    pub p: usize,
    pub lags: usize,
    pub alpha: f64,
    pub max: MaxResult,
    pub sum: SumResult,
    pub t_fc: f64,
    pub fc_p_value: f64,
    pub decisions: PerTest<bool>,
}

/// Flat record used for both the JSON and the one-line CSV encodings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlatReport {
    pub n: usize,
    pub p: usize,
    #[serde(rename = "K")]
    pub lags: usize,
    pub alpha: f64,
    pub t_max: f64,
    pub gumbel_y: f64,
    pub p_max: f64,
    pub t_sum: f64,
    pub z: f64,
    pub p_sum: f64,
    pub t_fc: f64,
    pub p_fc: f64,
    pub rej_max: bool,
    pub rej_sum: bool,
    pub rej_fc: bool,
}

impl TestReport {
    pub const CSV_HEADER: [&'static str; 15] = [
        "n", "p", "K", "alpha", "t_max", "gumbel_y", "p_max", "t_sum", "z", "p_sum", "t_fc",
        "p_fc", "rej_max", "rej_sum", "rej_fc",
    ];

    pub fn flat(&self) -> FlatReport {
        FlatReport {
            n: self.n,
            p: self.p,
            lags: self.lags,
            alpha: self.alpha,
            t_max: self.max.t_max,
            gumbel_y: self.max.gumbel_y,
            p_max: self.max.p_value,
            t_sum: self.sum.t_sum,
            z: self.sum.z_score,
            p_sum: self.sum.p_value,
            t_fc: self.t_fc,
            p_fc: self.fc_p_value,
            rej_max: self.decisions.max,
            rej_sum: self.decisions.sum,
            rej_fc: self.decisions.fc,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.flat()).expect("flat report is always serializable")
    }

    /// One CSV line (no header, no trailing newline) in [`Self::CSV_HEADER`] order.
    pub fn to_csv_record(&self) -> String {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        wtr.serialize(self.flat()).expect("in-memory CSV write");
        let bytes = wtr.into_inner().expect("in-memory CSV flush");
        String::from_utf8(bytes)
            .expect("CSV output is UTF-8")
            .trim_end()
            .to_string()
    }
}

fn check_lags(n: usize, lags: usize) -> Result<()> {
    let max = n.saturating_sub(2);
    if lags == 0 || lags > max {
        return Err(Error::LagBudget { lags, max });
    }
    Ok(())
}

/// Centring constant of the max statistic: `2 log(Kp²) - log log(Kp²)`.
pub fn max_centering(lags: usize, p: usize) -> f64 {
    let kp2 = (lags * p * p) as f64;
    2.0 * kp2.ln() - kp2.ln().ln()
}

/// Max-type test over lags `1..=K`.
pub fn t_max(panel: &TimeSeriesPanel, lags: usize) -> Result<MaxResult> {
    let (n, p) = (panel.n(), panel.p());
    check_lags(n, lags)?;
    if p < 2 {
        return Err(Error::InvalidInput(format!(
            "the max-type test needs p >= 2, got {p}"
        )));
    }
    let scale = inverse_sqrt_moments(panel)?;
    let x = panel.data();
    let mut max_abs = 0.0_f64;
    for k in 1..=lags {
        let m = n - k;
        // Un-normalised Σ_t ε_{t+k} ε_tᵀ; the 1/n cancels against √n below.
        let cross = x.rows(k, m).tr_mul(&x.rows(0, m));
        for (j, col) in cross.column_iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                max_abs = max_abs.max((v * scale[i] * scale[j]).abs());
            }
        }
    }
    let t = (n as f64).sqrt() * max_abs / n as f64;
    Ok(max_result_from_statistic(t, lags, p))
}

/// Builds a [`MaxResult`] from an already computed `T_MAX`.
pub fn max_result_from_statistic(t_max: f64, lags: usize, p: usize) -> MaxResult {
    let gumbel_y = t_max * t_max - max_centering(lags, p);
    MaxResult {
        t_max,
        gumbel_y,
        p_value: gumbel_sf(gumbel_y),
        lags,
        p_dim: p,
    }
}

/// Sum of a slice by pairwise (tree) reduction.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sum-type U-statistic test over lags `1..=K`.
///
/// Index pairs are restricted to `1 ≤ t ≠ s ≤ n - l` so every factor exists; the
/// divisor stays `n(n - 1)`.
pub fn t_sum(panel: &TimeSeriesPanel, lags: usize) -> Result<SumResult> {
    let n = panel.n();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "the sum-type test needs n >= 4, got {n}"
        )));
    }
    check_lags(n, lags)?;
    let x = panel.data();
    let gram: DMatrix<f64> = x * x.transpose();
    let denom = (n * (n - 1)) as f64;

    let mut row_totals = vec![0.0; n];
    for l in 1..=lags {
        let m = n - l;
        for (t, total) in row_totals.iter_mut().enumerate().take(m) {
            let mut acc = 0.0;
            for s in 0..m {
                if s != t {
                    acc += gram[(t, s)] * gram[(t + l, s + l)];
                }
            }
            *total += acc;
        }
    }
    let t_sum = pairwise_sum(&row_totals) / denom;

    let sq_rows: Vec<f64> = (0..n)
        .map(|t| {
            (0..n)
                .filter(|&s| s != t)
                .map(|s| gram[(t, s)] * gram[(t, s)])
                .sum()
        })
        .collect();
    let trace_sq_hat = pairwise_sum(&sq_rows) / denom;
    if trace_sq_hat.is_nan() || trace_sq_hat <= 0.0 {
        return Err(Error::DegenerateTrace(trace_sq_hat));
    }
    let sigma_s_hat = (2.0 * lags as f64 / denom).sqrt() * trace_sq_hat;
    let z_score = t_sum / sigma_s_hat;
    Ok(SumResult {
        t_sum,
        trace_sq_hat,
        sigma_s_hat,
        z_score,
        p_value: std_normal_sf(z_score),
    })
}

/// Fisher combination of two p-values: `(T_FC, 1 - F_{χ²₄}(T_FC))`.
pub fn fisher_combine(p_max: f64, p_sum: f64) -> Result<(f64, f64)> {
    for p in [p_max, p_sum] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    let t_fc = -2.0 * p_max.max(P_VALUE_FLOOR).ln() - 2.0 * p_sum.max(P_VALUE_FLOOR).ln();
    // ln(1) is +0 but -2 * 0 is -0; normalise.
    let t_fc = t_fc.max(0.0);
    Ok((t_fc, chi2_4_sf(t_fc)?))
}

/// Runs all three tests on one panel at level `alpha`.
pub fn run_all(panel: &TimeSeriesPanel, lags: usize, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let max = t_max(panel, lags)?;
    let sum = t_sum(panel, lags)?;
    let (t_fc, fc_p_value) = fisher_combine(max.p_value, sum.p_value)?;
    Ok(TestReport {
        n: panel.n(),
        p: panel.p(),
        lags,
        alpha,
        max,
        sum,
        t_fc,
        fc_p_value,
        decisions: PerTest {
            max: max.p_value < alpha,
            sum: sum.p_value < alpha,
            fc: fc_p_value < alpha,
        },
    })
}

/// Null CDF value of the transformed max statistic, `G(y)`.
pub fn max_null_cdf(result: &MaxResult) -> f64 {
    gumbel_cdf(result.gumbel_y)
}
