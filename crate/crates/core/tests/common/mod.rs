//! Independent reference implementations used by the integration tests.
//!
//! Everything here works on plain `Vec<Vec<f64>>` rows with left-to-right loops
//! and shares no code with the library.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// `(1/n) Σ_{t=0}^{n-k-1} x[t+k][i] x[t][j]`.
pub fn naive_autocov(x: &[Vec<f64>], k: usize, i: usize, j: usize) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for t in 0..n - k {
        acc += x[t + k][i] * x[t][j];
    }
    acc / n as f64
}

/// `√n max_{k,i,j} |γ_ij(k)| / √(γ_ii(0) γ_jj(0))`.
pub fn naive_t_max(x: &[Vec<f64>], lags: usize) -> f64 {
    let n = x.len();
    let p = x[0].len();
    let mut best = 0.0_f64;
    for k in 1..=lags {
        for i in 0..p {
            for j in 0..p {
                let rho = naive_autocov(x, k, i, j)
                    / (naive_autocov(x, 0, i, i) * naive_autocov(x, 0, j, j)).sqrt();
                best = best.max(rho.abs());
            }
        }
    }
    (n as f64).sqrt() * best
}

/// `(1/(n(n-1))) Σ_l Σ_{t≠s ≤ n-l} (x_t·x_s)(x_{t+l}·x_{s+l})`, plus the sum of
/// absolute summands for relative-error scaling.
pub fn naive_t_sum(x: &[Vec<f64>], lags: usize) -> (f64, f64) {
    let n = x.len();
    let denom = (n * (n - 1)) as f64;
    let (mut acc, mut abs) = (0.0, 0.0);
    for l in 1..=lags {
        for t in 0..n - l {
            for s in 0..n - l {
                if t != s {
                    let v = dot(&x[t], &x[s]) * dot(&x[t + l], &x[s + l]);
                    acc += v;
                    abs += v.abs();
                }
            }
        }
    }
    (acc / denom, abs / denom)
}

/// `(1/(n(n-1))) Σ_{t≠s} (x_t·x_s)²`.
pub fn naive_trace_sq(x: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for t in 0..n {
        for s in 0..n {
            if t != s {
                acc += dot(&x[t], &x[s]).powi(2);
            }
        }
    }
    acc / (n * (n - 1)) as f64
}

/// `sup_x |F_n(x) - F(x)|` for a sample against a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut num = 0.0;
    let (mut va, mut vb) = (0.0, 0.0);
    for i in 0..a.len() {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma).powi(2);
        vb += (b[i] - mb).powi(2);
    }
    num / (va * vb).sqrt()
}

/// Setting (I) covariance written out entrywise.
pub fn setting_one_sigma(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| if i == j { 1.0 } else { 0.5 / ((i as f64 - j as f64).powi(2)) })
                .collect()
        })
        .collect()
}

/// `tr(Σ²) = Σ_ij σ_ij²` for symmetric `Σ`.
pub fn trace_of_square(sigma: &[Vec<f64>]) -> f64 {
    sigma.iter().flatten().map(|v| v * v).sum()
}

/// Upper critical value of `G(y) = exp(-π^{-1/2} e^{-y/2})` by bisection.
pub fn bisect_gumbel_upper(alpha: f64) -> f64 {
    let g = |y: f64| (-(-y / 2.0).exp() / std::f64::consts::PI.sqrt()).exp();
    bisect(|y| g(y) - (1.0 - alpha), -20.0, 100.0)
}

/// χ²₄ quantile by bisection on `1 - (1 + x/2) e^{-x/2}`.
pub fn bisect_chi2_4(u: f64) -> f64 {
    bisect(|x| 1.0 - (1.0 + x / 2.0) * (-x / 2.0).exp() - u, 0.0, 200.0)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random panel with entries in `[-2, 2]`, sizes `n ∈ [5, 12]`, `p ∈ [2, 4]`.
pub fn random_small_panel<R: Rng>(rng: &mut R) -> Vec<Vec<f64>> {
    let n = rng.random_range(5..=12);
    let p = rng.random_range(2..=4);
    (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / scale.max(f64::MIN_POSITIVE)
}
