//! Reference distributions for the three tests.
//!
//! The Gumbel-type law `G(y) = exp(-π^{-1/2} e^{-y/2})` calibrates the max-type
//! statistic, the standard normal the sum-type statistic, and the chi-squared
//! law with four degrees of freedom the Fisher combination.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

fn inv_sqrt_pi() -> f64 {
    PI.sqrt().recip()
}

/// `G(y) = exp{-π^{-1/2} exp(-y/2)}`.
pub fn gumbel_cdf(y: f64) -> f64 {
    (-inv_sqrt_pi() * (-y / 2.0).exp()).exp()
}

/// `1 - G(y)`, accurate in the upper tail.
pub fn gumbel_sf(y: f64) -> f64 {
    -(-inv_sqrt_pi() * (-y / 2.0).exp()).exp_m1()
}

/// `G⁻¹(u)` for `u ∈ (0, 1)`.
pub fn gumbel_inverse_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    Ok(-2.0 * (-PI.sqrt() * u.ln()).ln())
}

/// Upper-tail critical value `q_α`, the `1 - α` quantile of `G`.
pub fn gumbel_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    Ok(-2.0 * (-PI.sqrt() * (-alpha).ln_1p()).ln())
}

/// `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `1 - Φ(x)`, computed directly so the upper tail keeps full precision.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `Φ⁻¹(u)` for `u ∈ (0, 1)`.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * u);
    // erfc_inv alone is good to ~1e-11; Newton steps on Φ(x) = u tighten it.
    for _ in 0..2 {
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if density > 0.0 {
            let resid = if u < 0.5 { std_normal_cdf(x) - u } else { (1.0 - u) - std_normal_sf(x) };
            x -= resid / density;
        }
    }
    Ok(x)
}

/// χ²₄ CDF: `1 - (1 + x/2) e^{-x/2}`.
pub fn chi2_4_cdf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidInput(format!("chi2_4_cdf needs x >= 0, got {x}")));
    }
    let h = x / 2.0;
    Ok(-(-h).exp_m1() - h * (-h).exp())
}

/// χ²₄ survival function `(1 + x/2) e^{-x/2}`.
pub fn chi2_4_sf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidInput(format!("chi2_4_sf needs x >= 0, got {x}")));
    }
    let h = x / 2.0;
    Ok((1.0 + h) * (-h).exp())
}

/// Inverse χ²₄ CDF, by safeguarded Newton iteration on `log S(x)`.
pub fn chi2_4_quantile(u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidProbability(u));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    // Solve f(h) = ln(1 + h) - h - ln(1 - u) = 0 for h = x/2; f is decreasing on h > 0.
    let target = (-u).ln_1p();
    let f = |h: f64| h.ln_1p() - h - target;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut h = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fh = f(h);
        if fh == 0.0 {
            break;
        }
        if fh > 0.0 {
            lo = h;
        } else {
            hi = h;
        }
        let step = fh / (-h / (1.0 + h));
        let mut next = h - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - h).abs() <= 1e-15 * h.max(1.0) {
            h = next;
            break;
        }
        h = next;
    }
    Ok(2.0 * h)
}
