//! White-noise testing for high-dimensional time series.
//!
//! Three tests of `H0: Γ(k) = 0 for k = 1..=K`:
//!
//! * a max-type test on the largest standardized lagged autocorrelation,
//!   calibrated by a Gumbel limit;
//! * a sum-type U-statistic on the squared lagged autocovariances,
//!   calibrated by a normal limit;
//! * the Fisher combination of the two p-values against `χ²₄`.
//!
//! ```
//! use nalgebra::DMatrix;
//! use wnfc::{run_all, TimeSeriesPanel};
//!
//! let data = DMatrix::from_fn(50, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
//! let panel = TimeSeriesPanel::new(data).unwrap();
//! let report = run_all(&panel, 2, 0.05).unwrap();
//! assert!((0.0..=1.0).contains(&report.fc_p_value));
//! ```

pub mod dgp;
pub mod dist;
pub mod error;
pub mod factor;
pub mod harness;
pub mod power;
pub mod rng;
pub mod series;
pub mod testing;

pub use error::{Error, ErrorCategory, Result};
pub use series::{sample_autocorrelation, sample_autocovariance, TimeSeriesPanel};
pub use testing::{fisher_combine, run_all, t_max, t_sum, MaxResult, PerTest, SumResult, TestReport};
