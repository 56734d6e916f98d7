//! Asymptotic power approximations.
//!
//! For the sum-type test under a VMA(1) alternative `ε_t = A0 z_t + A1 z_{t-1}`
//! with `K = 1`, `T_SUM` is approximately `N(μ_S, σ²_S1)` and the power is
//!
//! ```text
//! β_SUM = Φ(μ_S / σ_S1 - z_α · √2 n⁻¹ ξ0 / σ_S1)
//! ```
//!
//! with `S0 = A0ᵀA0`, `S1 = A1ᵀA1`, `S01 = A0ᵀA1`. The sample size enters as
//! `n` throughout and the `o(σ²_S1)` remainder of the variance is dropped.
//!
//! For the max-type test a single planted lag-1 autocorrelation `ρ` gives
//! `Φ(√n ρ - √x_α) + Φ(-√n ρ - √x_α) ≤ β_MAX ≤ α + (same)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::{gumbel_quantile, std_normal_cdf, std_normal_quantile};
use crate::error::{Error, Result};
use crate::series::trace_product;
use crate::testing::max_centering;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerInputs {
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub n: usize,
    pub nu4: f64,
    pub alpha: f64,
}

impl PowerInputs {
    pub fn new(a0: DMatrix<f64>, a1: DMatrix<f64>, n: usize, nu4: f64, alpha: f64) -> Result<Self> {
        if !a0.is_square() || a0.shape() != a1.shape() {
            return Err(Error::ShapeMismatch(format!(
                "A0 and A1 must be equal-sized square matrices, got {:?} and {:?}",
                a0.shape(),
                a1.shape()
            )));
        }
        if nu4.is_nan() || nu4 < 1.0 {
            return Err(Error::InvalidInput(format!("nu4 must be >= 1, got {nu4}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be >= 2, got {n}")));
        }
        Ok(Self {
            a0,
            a1,
            n,
            nu4,
            alpha,
        })
    }
}

/// Named summands of `σ²_S1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VarianceTerms {
    /// `2/n² tr²(S0² + S1²)`
    pub null_part: f64,
    /// `6/n² tr²(S0 S1)`
    pub signal_sq: f64,
    /// `8/n tr{(S0 S1)²}`
    pub signal_product: f64,
    /// `4/n (ν4 - 3) tr{D²(S0 S1)}`
    pub kurtosis: f64,
    /// `8/n² tr(S01 S01ᵀ) tr(S0² + S1²)`
    pub cross_null: f64,
    /// `16/n² tr(S01 S1) tr(S01 S0)`
    pub cross_pair: f64,
    /// `16/n² tr(S0 + S1) {tr(S01ᵀ S01 S0) + tr(S01 S01ᵀ S1)}`
    pub cross_trace: f64,
    /// `16/n² tr(S01) {tr(S0² S01ᵀ) + tr(S1² S01) + 2 tr(S1 S01 S0)}`
    pub cross_mean: f64,
    /// `4/n tr(S01ᵀ S01 S0² + S01 S01ᵀ S1² + 2 S01ᵀ S1 S01 S0)`
    pub quartic: f64,
    /// `4/n tr(S01 S01ᵀ S01ᵀ S01)`
    pub cross_quartic: f64,
    /// `12/n² tr²(S01 S01ᵀ)`
    pub cross_sq: f64,
    /// `16/n² tr(S01) tr(S01 S01ᵀ S01ᵀ)`
    pub cross_cubic: f64,
    /// `4/n² tr²(S0 S01)`
    pub left_sq: f64,
    /// `4/n² tr²(S1 S01)`
    pub right_sq: f64,
}

impl VarianceTerms {
    pub fn total(&self) -> f64 {
        [
            self.null_part,
            self.signal_sq,
            self.signal_product,
            self.kurtosis,
            self.cross_null,
            self.cross_pair,
            self.cross_trace,
            self.cross_mean,
            self.quartic,
            self.cross_quartic,
            self.cross_sq,
            self.cross_cubic,
            self.left_sq,
            self.right_sq,
        ]
        .iter()
        .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumPowerBreakdown {
    pub mu_s: f64,
    pub sigma_s1: f64,
    pub xi0: f64,
    pub beta_sum: f64,
    pub terms: VarianceTerms,
}

fn tr(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    trace_product(a, b).expect("square matrices of equal size")
}

/// Mean, standard deviation and power of the sum-type test under VMA(1), `K = 1`.
pub fn sum_power(inp: &PowerInputs) -> Result<SumPowerBreakdown> {
    let n = inp.n as f64;
    let n2 = n * n;
    let s0 = inp.a0.tr_mul(&inp.a0);
    let s1 = inp.a1.tr_mul(&inp.a1);
    let s01 = inp.a0.tr_mul(&inp.a1);
    let s01t = s01.transpose();

    let s0s1 = &s0 * &s1;
    let s0_sq = &s0 * &s0;
    let s1_sq = &s1 * &s1;
    let tr_sq_sum = s0_sq.trace() + s1_sq.trace();
    let tr_s01 = s01.trace();
    let tr_s0s1 = s0s1.trace();
    let tr_cross = tr(&s01, &s01t);
    let diag_sq: f64 = s0s1.diagonal().iter().map(|d| d * d).sum();

    let terms = VarianceTerms {
        null_part: 2.0 / n2 * tr_sq_sum.powi(2),
        signal_sq: 6.0 / n2 * tr_s0s1.powi(2),
        signal_product: 8.0 / n * tr(&s0s1, &s0s1),
        kurtosis: 4.0 / n * (inp.nu4 - 3.0) * diag_sq,
        cross_null: 8.0 / n2 * tr_cross * tr_sq_sum,
        cross_pair: 16.0 / n2 * tr(&s01, &s1) * tr(&s01, &s0),
        cross_trace: 16.0 / n2
            * (s0.trace() + s1.trace())
            * (tr(&(&s01t * &s01), &s0) + tr(&(&s01 * &s01t), &s1)),
        cross_mean: 16.0 / n2
            * tr_s01
            * (tr(&s0_sq, &s01t) + tr(&s1_sq, &s01) + 2.0 * tr(&(&s1 * &s01), &s0)),
        quartic: 4.0 / n
            * (tr(&(&s01t * &s01), &s0_sq)
                + tr(&(&s01 * &s01t), &s1_sq)
                + 2.0 * tr(&(&s01t * &s1), &(&s01 * &s0))),
        cross_quartic: 4.0 / n * tr(&(&s01 * &s01t), &(&s01t * &s01)),
        cross_sq: 12.0 / n2 * tr_cross.powi(2),
        cross_cubic: 16.0 / n2 * tr_s01 * tr(&(&s01 * &s01t), &s01t),
        left_sq: 4.0 / n2 * tr(&s0, &s01).powi(2),
        right_sq: 4.0 / n2 * tr(&s1, &s01).powi(2),
    };

    let mu_s = tr_s0s1 + 2.0 / n * tr_s01 * tr_s01;
    let variance = terms.total();
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "sigma^2_S1 is not positive ({variance:e}); A0 and A1 carry no variance"
        )));
    }
    let sigma_s1 = variance.sqrt();
    let xi0 = tr_sq_sum + 2.0 * tr(&s01t, &s01);
    let z_alpha = std_normal_quantile(1.0 - inp.alpha)?;
    let beta_sum =
        std_normal_cdf(mu_s / sigma_s1 - z_alpha * std::f64::consts::SQRT_2 / n * xi0 / sigma_s1);
    Ok(SumPowerBreakdown {
        mu_s,
        sigma_s1,
        xi0,
        beta_sum,
        terms,
    })
}

/// `x_α = 2 log(Kp²) - log log(Kp²) + q_α`.
pub fn max_threshold(p: usize, lags: usize, alpha: f64) -> Result<f64> {
    Ok(max_centering(lags, p) + gumbel_quantile(alpha)?)
}

/// Lower and upper local-power bounds for the max-type test with one planted
/// lag-1 autocorrelation `rho`.
pub fn max_power_bounds(rho: f64, n: usize, p: usize, lags: usize, alpha: f64) -> Result<(f64, f64)> {
    if p < 2 || lags < 1 || n < 2 {
        return Err(Error::InvalidInput(format!(
            "need p >= 2, K >= 1, n >= 2 (got p={p}, K={lags}, n={n})"
        )));
    }
    if !rho.is_finite() {
        return Err(Error::InvalidInput(format!("rho must be finite, got {rho}")));
    }
    let root = max_threshold(p, lags, alpha)?.max(0.0).sqrt();
    let shift = (n as f64).sqrt() * rho;
    let lower = (std_normal_cdf(shift - root) + std_normal_cdf(-shift - root)).clamp(0.0, 1.0);
    Ok((lower, (lower + alpha).clamp(0.0, 1.0)))
}

/// Whether population autocorrelations `Γ(1..K)` reach the detectable region
/// `max_{k, i<j} |ρ_ij(k)| ≥ b0 √(log p / n)` (ties count as detectable).
pub fn theorem2_signal_check(gammas: &[DMatrix<f64>], n: usize, b0: f64) -> Result<bool> {
    let first = gammas
        .first()
        .ok_or_else(|| Error::InvalidInput("no autocorrelation matrices given".into()))?;
    let p = first.nrows();
    if gammas.iter().any(|g| g.shape() != (p, p)) {
        return Err(Error::ShapeMismatch("autocorrelation matrices must all be p x p".into()));
    }
    let mut largest = 0.0_f64;
    for g in gammas {
        for i in 0..p {
            for j in i + 1..p {
                largest = largest.max(g[(i, j)].abs());
            }
        }
    }
    Ok(largest >= signal_threshold(p, n, b0))
}

/// `b0 √(log p / n)`.
pub fn signal_threshold(p: usize, n: usize, b0: f64) -> f64 {
    b0 * ((p as f64).ln() / n as f64).sqrt()
}
