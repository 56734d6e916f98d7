//! Seeded generators for the null settings and the VAR/VMA/VARMA alternatives.
//!
//! Null panels are `ε_t = A z_t` with
//! * `NullI`:   `A = Σ^{1/2}`, `σ_ij = 0.5 (i - j)^{-2}` off the diagonal,
//! * `NullII`:  `σ_ij = 0.5 · 1{|i - j| < 5}` off the diagonal; this band is
//!   indefinite once `p >= 10`, so `A` is the square root of its positive
//!   part (see [`null_loading`]),
//! * `NullIII`: `a_ij ~ U(-1, 1)`, drawn once per panel.
//!
//! Alternatives use a coefficient matrix whose top-left `m x m` block is
//! random and everything else zero:
//! * `Var1`:   `ε_t = A ε_{t-1} + z_t`,
//! * `Vma1`:   `ε_t = z_t + A z_{t-1}`,
//! * `Varma1`: `ε_t = 0.5 A ε_{t-1} + z_t + 0.5 A z_{t-1}`.
//!
//! Autoregressive recursions start at zero and discard [`BURN_IN`] steps.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};
use crate::series::{sym_sqrt, TimeSeriesPanel};

pub const BURN_IN: usize = 300;

/// Draws with spectral radius at or above this are rejected as non-stationary.
pub const MAX_SPECTRAL_RADIUS: f64 = 0.999;

pub const MAX_BLOCK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "null-i")]
    NullI,
    #[serde(rename = "null-ii")]
    NullII,
    #[serde(rename = "null-iii")]
    NullIII,
    #[serde(rename = "var1")]
    Var1,
    #[serde(rename = "vma1")]
    Vma1,
    #[serde(rename = "varma1")]
    Varma1,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::NullI,
        Scenario::NullII,
        Scenario::NullIII,
        Scenario::Var1,
        Scenario::Vma1,
        Scenario::Varma1,
    ];

    pub fn is_alternative(self) -> bool {
        matches!(self, Scenario::Var1 | Scenario::Vma1 | Scenario::Varma1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NullI => "null-i",
            Scenario::NullII => "null-ii",
            Scenario::NullIII => "null-iii",
            Scenario::Var1 => "var1",
            Scenario::Vma1 => "vma1",
            Scenario::Varma1 => "varma1",
        }
    }

    /// Support of the non-zero coefficients for block size `m`.
    pub fn coefficient_range(self, m: usize) -> Option<(f64, f64)> {
        let m_f = m as f64;
        match (self, m) {
            (Scenario::Var1, 1) => Some((0.4, 0.8)),
            (Scenario::Var1, _) => Some((-1.4 / m_f, 1.4 / m_f)),
            (Scenario::Vma1, 1) => Some((0.4, 0.9)),
            (Scenario::Vma1, _) => Some((-1.8 / m_f, 1.8 / m_f)),
            (Scenario::Varma1, 1) => Some((0.4, 0.8)),
            (Scenario::Varma1, _) => Some((-1.6 / m_f, 1.6 / m_f)),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Innovation {
    /// `z_ti ~ N(0, 1)`.
    Gaussian,
    /// `z_ti ~ Gamma(shape 4, scale 0.5) - 2`: mean 0, variance 1, `E z⁴ = 4.5`.
    ShiftedGamma,
}

impl Innovation {
    pub fn name(self) -> &'static str {
        match self {
            Innovation::Gaussian => "gaussian",
            Innovation::ShiftedGamma => "shifted-gamma",
        }
    }

    /// Fourth moment `ν₄ = E z⁴`.
    pub fn fourth_moment(self) -> f64 {
        match self {
            Innovation::Gaussian => 3.0,
            Innovation::ShiftedGamma => 4.5,
        }
    }
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Innovation::Gaussian, Innovation::ShiftedGamma]
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown innovation law `{s}`")))
    }
}

/// One simulation scenario, fully determined including its seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub scenario: Scenario,
    pub innovation: Innovation,
    pub n: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(
        scenario: Scenario,
        innovation: Innovation,
        n: usize,
        p: usize,
        m: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            scenario,
            innovation,
            n,
            p,
            m,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidInput(format!("n must be >= 10, got {}", self.n)));
        }
        if self.p < 2 {
            return Err(Error::InvalidInput(format!("p must be >= 2, got {}", self.p)));
        }
        match (self.scenario.is_alternative(), self.m) {
            (true, None) => Err(Error::InvalidInput(format!(
                "scenario {} needs a block size m",
                self.scenario
            ))),
            (false, Some(_)) => Err(Error::InvalidInput(format!(
                "null scenario {} takes no block size",
                self.scenario
            ))),
            (true, Some(m)) => {
                check_block(m, self.p)?;
                if self.innovation != Innovation::Gaussian {
                    return Err(Error::InvalidInput(
                        "alternative scenarios use Gaussian innovations only".into(),
                    ));
                }
                Ok(())
            }
            (false, None) => Ok(()),
        }
    }
}

fn check_block(m: usize, p: usize) -> Result<()> {
    if m == 0 || m > MAX_BLOCK.min(p) {
        return Err(Error::InvalidInput(format!(
            "block size m = {m} outside 1..={}",
            MAX_BLOCK.min(p)
        )));
    }
    Ok(())
}

/// Covariance of null settings (I) and (II).
pub fn make_sigma(setting: Scenario, p: usize) -> Result<DMatrix<f64>> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("p must be >= 2, got {p}")));
    }
    let entry: fn(usize) -> f64 = match setting {
        Scenario::NullI => |d| 0.5 / (d * d) as f64,
        Scenario::NullII => |d| if d < 5 { 0.5 } else { 0.0 },
        other => {
            return Err(Error::InvalidInput(format!(
                "no fixed covariance for scenario {other}"
            )))
        }
    };
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            entry(i.abs_diff(j))
        }
    }))
}

/// `rows x p` matrix of i.i.d. innovations, filled row by row.
pub fn draw_innovations<R: Rng + ?Sized>(
    law: Innovation,
    rows: usize,
    p: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(rows, p);
    match law {
        Innovation::Gaussian => {
            for i in 0..rows {
                for j in 0..p {
                    z[(i, j)] = StandardNormal.sample(rng);
                }
            }
        }
        Innovation::ShiftedGamma => {
            let gamma = Gamma::new(4.0, 0.5).expect("valid gamma parameters");
            for i in 0..rows {
                for j in 0..p {
                    z[(i, j)] = gamma.sample(rng) - 2.0;
                }
            }
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    pub values: DMatrix<f64>,
    pub m: usize,
}

impl CoeffMatrix {
    /// The active `m x m` block.
    pub fn block(&self) -> DMatrix<f64> {
        self.values.view((0, 0), (self.m, self.m)).into_owned()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.block())
    }
}

/// Random coefficient matrix for an alternative scenario.
pub fn make_coeff_matrix<R: Rng + ?Sized>(
    scenario: Scenario,
    m: usize,
    p: usize,
    rng: &mut R,
) -> Result<CoeffMatrix> {
    check_block(m, p)?;
    let (lo, hi) = scenario.coefficient_range(m).ok_or_else(|| {
        Error::InvalidInput(format!("scenario {scenario} has no coefficient matrix"))
    })?;
    let dist = Uniform::new(lo, hi).expect("non-empty coefficient range");
    let mut values = DMatrix::zeros(p, p);
    for i in 0..m {
        for j in 0..m {
            values[(i, j)] = dist.sample(rng);
        }
    }
    Ok(CoeffMatrix { values, m })
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn stack_rows(rows: &[DVector<f64>], p: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), p);
    for (t, r) in rows.iter().enumerate() {
        out.row_mut(t).copy_from(&r.transpose());
    }
    out
}

/// `ε_t = A ε_{t-1} + z_t` from `ε_0 = 0`, discarding `burn_in` steps.
pub fn simulate_var1<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    n: usize,
    law: Innovation,
    burn_in: usize,
    rng: &mut R,
) -> Result<TimeSeriesPanel> {
    let p = a.nrows();
    let z = draw_innovations(law, burn_in + n, p, rng);
    let mut prev = DVector::zeros(p);
    let mut kept = Vec::with_capacity(n);
    for t in 0..burn_in + n {
        let next = a * &prev + z.row(t).transpose();
        if t >= burn_in {
            kept.push(next.clone());
        }
        prev = next;
    }
    TimeSeriesPanel::new(stack_rows(&kept, p))
}

/// `ε_t = A0 z_t + A1 z_{t-1}`; one pre-sample innovation is drawn.
pub fn simulate_vma1<R: Rng + ?Sized>(
    a0: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    n: usize,
    law: Innovation,
    rng: &mut R,
) -> Result<TimeSeriesPanel> {
    if a0.shape() != a1.shape() || !a0.is_square() {
        return Err(Error::ShapeMismatch("VMA(1) needs equal square coefficients".into()));
    }
    let p = a0.nrows();
    let z = draw_innovations(law, n + 1, p, rng);
    let x = z.rows(1, n) * a0.transpose() + z.rows(0, n) * a1.transpose();
    TimeSeriesPanel::new(x)
}

/// `ε_t = 0.5 A ε_{t-1} + z_t + 0.5 A z_{t-1}` from `ε_0 = 0`, discarding `burn_in` steps.
pub fn simulate_varma1<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    n: usize,
    law: Innovation,
    burn_in: usize,
    rng: &mut R,
) -> Result<TimeSeriesPanel> {
    let p = a.nrows();
    let half = a * 0.5;
    let z = draw_innovations(law, burn_in + n + 1, p, rng);
    let mut prev = DVector::zeros(p);
    let mut kept = Vec::with_capacity(n);
    for t in 1..=burn_in + n {
        let carry = &prev + z.row(t - 1).transpose();
        let next = &half * carry + z.row(t).transpose();
        if t > burn_in {
            kept.push(next.clone());
        }
        prev = next;
    }
    TimeSeriesPanel::new(stack_rows(&kept, p))
}

/// Loading matrix `A` of settings (I) and (II).
///
/// Setting (I) is positive definite and uses [`sym_sqrt`]. Setting (II) has
/// negative eigenvalues for `p >= 10`; its negative eigenvalues are set to
/// zero, which gives the nearest positive semidefinite matrix in Frobenius
/// norm, and `A` is the square root of that.
pub fn null_loading(setting: Scenario, p: usize) -> Result<DMatrix<f64>> {
    let sigma = make_sigma(setting, p)?;
    match setting {
        Scenario::NullII => {
            let eig = SymmetricEigen::new(sigma);
            let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            let a = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
            Ok((&a + a.transpose()) * 0.5)
        }
        _ => sym_sqrt(&sigma),
    }
}

/// Reusable generator for one scenario; caches `Σ^{1/2}` for settings (I)/(II).
#[derive(Debug, Clone)]
pub struct PanelGenerator {
    scenario: Scenario,
    innovation: Innovation,
    n: usize,
    p: usize,
    m: Option<usize>,
    loading: Option<DMatrix<f64>>,
}

impl PanelGenerator {
    pub fn new(
        scenario: Scenario,
        innovation: Innovation,
        n: usize,
        p: usize,
        m: Option<usize>,
    ) -> Result<Self> {
        DgpSpec::new(scenario, innovation, n, p, m, 0)?;
        let loading = match scenario {
            Scenario::NullI | Scenario::NullII => Some(null_loading(scenario, p)?),
            _ => None,
        };
        Ok(Self {
            scenario,
            innovation,
            n,
            p,
            m,
            loading,
        })
    }

    pub fn from_spec(spec: &DgpSpec) -> Result<Self> {
        Self::new(spec.scenario, spec.innovation, spec.n, spec.p, spec.m)
    }

    pub fn spec(&self, seed: u64) -> DgpSpec {
        DgpSpec {
            scenario: self.scenario,
            innovation: self.innovation,
            n: self.n,
            p: self.p,
            m: self.m,
            seed,
        }
    }

    /// Generates the panel for `seed`. Alternatives may fail with
    /// [`Error::NonStationary`]; redrawing is up to the caller.
    pub fn generate(&self, seed: u64) -> Result<TimeSeriesPanel> {
        self.generate_with(&mut stream(seed))
    }

    pub fn generate_with(&self, rng: &mut StreamRng) -> Result<TimeSeriesPanel> {
        let (n, p) = (self.n, self.p);
        match self.scenario {
            Scenario::NullI | Scenario::NullII => {
                let a = self.loading.as_ref().expect("loading cached for settings I/II");
                let z = draw_innovations(self.innovation, n, p, rng);
                TimeSeriesPanel::new(z * a.transpose())
            }
            Scenario::NullIII => {
                let unif = Uniform::new(-1.0, 1.0).expect("valid range");
                let a = DMatrix::from_fn(p, p, |_, _| unif.sample(rng));
                let z = draw_innovations(self.innovation, n, p, rng);
                TimeSeriesPanel::new(z * a.transpose())
            }
            alt => {
                let m = self.m.expect("validated: alternatives carry m");
                let coeff = make_coeff_matrix(alt, m, p, rng)?;
                let radius = match alt {
                    Scenario::Var1 => coeff.spectral_radius(),
                    Scenario::Varma1 => 0.5 * coeff.spectral_radius(),
                    _ => 0.0,
                };
                if radius >= MAX_SPECTRAL_RADIUS {
                    return Err(Error::NonStationary(radius));
                }
                match alt {
                    Scenario::Var1 => simulate_var1(&coeff.values, n, self.innovation, BURN_IN, rng),
                    Scenario::Vma1 => simulate_vma1(
                        &DMatrix::identity(p, p),
                        &coeff.values,
                        n,
                        self.innovation,
                        rng,
                    ),
                    _ => simulate_varma1(&coeff.values, n, self.innovation, BURN_IN, rng),
                }
            }
        }
    }
}

/// Null panel `ε_t = A z_t` for settings (I)-(III).
pub fn gen_null_panel(spec: &DgpSpec) -> Result<TimeSeriesPanel> {
    if spec.scenario.is_alternative() {
        return Err(Error::InvalidInput(format!("{} is not a null scenario", spec.scenario)));
    }
    PanelGenerator::from_spec(spec)?.generate(spec.seed)
}

/// Panel from one of the VAR(1)/VMA(1)/VARMA(1) alternatives.
pub fn gen_alternative_panel(spec: &DgpSpec) -> Result<TimeSeriesPanel> {
    if !spec.scenario.is_alternative() {
        return Err(Error::InvalidInput(format!(
            "{} is not an alternative scenario",
            spec.scenario
        )));
    }
    PanelGenerator::from_spec(spec)?.generate(spec.seed)
}
