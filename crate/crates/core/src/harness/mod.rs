//! Seeded, parallel Monte Carlo runner for size and power experiments.
//!
//! Replication `j` of a cell draws its panel from a stream seeded by
//! `(master_seed, cell id, j)`; replications run on a rayon pool and are
//! reduced in index order, so results do not depend on the worker count.

mod config;
mod emit;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    DEFAULT_ALPHA, DEFAULT_POWER_REPLICATIONS, DEFAULT_SEED, DEFAULT_SIZE_REPLICATIONS,
};
pub use emit::{emit_power_curve, emit_table, write_power_curve, write_table, TableFormat};

use crate::dgp::{DgpSpec, Innovation, PanelGenerator, Scenario};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, fnv1a, replication_seed};
use crate::testing::{run_all, PerTest};

/// Redraw budget for non-stationary coefficient draws in one replication.
pub const MAX_REDRAWS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Size,
    Power,
}

/// One grid point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub scenario: Scenario,
    pub innovation: Innovation,
    pub n: usize,
    pub p: usize,
    #[serde(rename = "K")]
    pub lags: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl Cell {
    /// Stable identifier derived from the cell's content, not its grid position.
    pub fn id(&self) -> u64 {
        let key = format!(
            "{}|{}|{}|{}|{}|{}",
            self.scenario,
            self.innovation,
            self.n,
            self.p,
            self.lags,
            self.m.unwrap_or(0)
        );
        fnv1a(key.as_bytes())
    }

    pub fn dgp_spec(&self, seed: u64) -> Result<DgpSpec> {
        DgpSpec::new(self.scenario, self.innovation, self.n, self.p, self.m, seed)
    }

    fn validate(&self) -> Result<()> {
        self.dgp_spec(0)?;
        if self.lags == 0 || self.lags > self.n - 2 {
            return Err(Error::LagBudget {
                lags: self.lags,
                max: self.n - 2,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: Vec<Cell>,
    pub replications: usize,
    pub alpha: f64,
    pub master_seed: u64,
    /// Thread-count hint; `None` uses every core.
    pub workers: Option<usize>,
    pub out_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if self.grid.is_empty() {
            return Err(Error::config("grid", "no cells"));
        }
        for (i, cell) in self.grid.iter().enumerate() {
            let wants_alt = self.kind == ExperimentKind::Power;
            if cell.scenario.is_alternative() != wants_alt {
                return Err(Error::config(
                    format!("grid[{i}].scenario"),
                    format!("{} does not belong in a {:?} experiment", cell.scenario, self.kind),
                ));
            }
            cell.validate()
                .map_err(|e| Error::config(format!("grid[{i}]"), e.to_string()))?;
        }
        Ok(())
    }
}

/// What one replication contributes; enough to recompute any tally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    /// Seed of the stream that produced the panel (after any redraws).
    pub seed: u64,
    pub t_max: f64,
    pub gumbel_y: f64,
    pub p_max: f64,
    pub t_sum: f64,
    pub z_score: f64,
    pub trace_sq_hat: f64,
    pub p_sum: f64,
    pub t_fc: f64,
    pub p_fc: f64,
    pub reject: PerTest<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub alpha: f64,
    pub rates: PerTest<f64>,
    pub standard_errors: PerTest<f64>,
    pub replications_used: usize,
    pub wall_time: Duration,
}

/// Binomial standard error `√(r(1-r)/R)`.
pub fn binomial_se(rate: f64, reps: usize) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

/// Generates the panel for replication `replication`, redrawing non-stationary
/// coefficient matrices from derived sub-seeds.
fn replicate_one(
    generator: &PanelGenerator,
    cell: &Cell,
    alpha: f64,
    master_seed: u64,
    replication: usize,
) -> Result<ReplicationOutcome> {
    let base = replication_seed(master_seed, cell.id(), replication as u64);
    let mut attempt = 0;
    let (seed, panel) = loop {
        let seed = if attempt == 0 { base } else { derive_seed(&[base, attempt]) };
        match generator.generate(seed) {
            Ok(panel) => break (seed, panel),
            Err(Error::NonStationary(_)) if attempt + 1 < MAX_REDRAWS => attempt += 1,
            Err(e) => return Err(e),
        }
    };
    let report = run_all(&panel, cell.lags, alpha)?;
    Ok(ReplicationOutcome {
        replication,
        seed,
        t_max: report.max.t_max,
        gumbel_y: report.max.gumbel_y,
        p_max: report.max.p_value,
        t_sum: report.sum.t_sum,
        z_score: report.sum.z_score,
        trace_sq_hat: report.sum.trace_sq_hat,
        p_sum: report.sum.p_value,
        t_fc: report.t_fc,
        p_fc: report.fc_p_value,
        reject: report.decisions,
    })
}

/// All replications of one cell, in replication order. Runs on the current
/// rayon pool.
pub fn run_cell(cell: &Cell, replications: usize, alpha: f64, master_seed: u64) -> Result<Vec<ReplicationOutcome>> {
    cell.validate()?;
    let generator = PanelGenerator::new(cell.scenario, cell.innovation, cell.n, cell.p, cell.m)?;
    (0..replications)
        .into_par_iter()
        .map(|j| replicate_one(&generator, cell, alpha, master_seed, j))
        .collect()
}

/// Tallies replication outcomes into rejection rates.
pub fn summarize(cell: Cell, alpha: f64, outcomes: &[ReplicationOutcome], wall_time: Duration) -> CellResult {
    let reps = outcomes.len();
    let count = |f: fn(&PerTest<bool>) -> bool| outcomes.iter().filter(|o| f(&o.reject)).count();
    let counts = PerTest {
        max: count(|r| r.max),
        sum: count(|r| r.sum),
        fc: count(|r| r.fc),
    };
    let rates = counts.map(|c| c as f64 / reps as f64);
    CellResult {
        cell,
        alpha,
        rates,
        standard_errors: rates.map(|r| binomial_se(r, reps)),
        replications_used: reps,
        wall_time,
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::config("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every cell of the grid and returns one result per cell, in grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    with_pool(cfg.workers, || {
        cfg.grid
            .iter()
            .map(|cell| {
                let start = Instant::now();
                let outcomes = run_cell(cell, cfg.replications, cfg.alpha, cfg.master_seed)?;
                Ok(summarize(*cell, cfg.alpha, &outcomes, start.elapsed()))
            })
            .collect()
    })?
}
