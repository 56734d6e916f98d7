//! Experiment configuration files.
//!
//! A config is a flat TOML document; array-valued keys span a grid whose
//! cells are the cartesian product, in the order scenario, innovation, n, p,
//! K, m:
//!
//! ```toml
//! kind = "size"            # or "power"
//! replications = 1000
//! alpha = 0.05
//! seed = 20240601
//! workers = 8              # optional, 0 or absent = all cores
//! out = "table1.csv"       # optional
//! scenarios = ["null-i", "null-ii"]
//! innovations = ["gaussian"]
//! n = [100, 200]
//! p = [30, 60, 90, 120]
//! K = [1, 2, 3]
//! # m = [1, 2, 3]          # power experiments only
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Cell, ExperimentConfig, ExperimentKind};
use crate::dgp::{Innovation, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    kind: ExperimentKind,
    replications: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    scenarios: Vec<Scenario>,
    #[serde(default)]
    innovations: Vec<Innovation>,
    n: Vec<usize>,
    p: Vec<usize>,
    #[serde(rename = "K")]
    lags: Vec<usize>,
    #[serde(default)]
    m: Vec<usize>,
}

pub const DEFAULT_SIZE_REPLICATIONS: usize = 1000;
pub const DEFAULT_POWER_REPLICATIONS: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.lines().next().unwrap_or("").trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().to_string())
        })?;

        let innovations = if file.innovations.is_empty() {
            vec![Innovation::Gaussian]
        } else {
            file.innovations
        };
        let blocks: Vec<Option<usize>> = match file.kind {
            ExperimentKind::Size => {
                if !file.m.is_empty() {
                    return Err(Error::config("m", "size experiments take no block sizes"));
                }
                vec![None]
            }
            ExperimentKind::Power => {
                if file.m.is_empty() {
                    return Err(Error::config("m", "power experiments need block sizes"));
                }
                file.m.iter().copied().map(Some).collect()
            }
        };
        for (name, list) in [("scenarios", file.scenarios.len()), ("n", file.n.len()), ("p", file.p.len()), ("K", file.lags.len())] {
            if list == 0 {
                return Err(Error::config(name, "must list at least one value"));
            }
        }

        let mut grid = Vec::new();
        for &scenario in &file.scenarios {
            for &innovation in &innovations {
                for &n in &file.n {
                    for &p in &file.p {
                        for &lags in &file.lags {
                            for &m in &blocks {
                                grid.push(Cell {
                                    scenario,
                                    innovation,
                                    n,
                                    p,
                                    lags,
                                    m,
                                });
                            }
                        }
                    }
                }
            }
        }

        let cfg = ExperimentConfig {
            kind: file.kind,
            grid,
            replications: file.replications.unwrap_or(match file.kind {
                ExperimentKind::Size => DEFAULT_SIZE_REPLICATIONS,
                ExperimentKind::Power => DEFAULT_POWER_REPLICATIONS,
            }),
            alpha: file.alpha.unwrap_or(DEFAULT_ALPHA),
            master_seed: file.seed.unwrap_or(DEFAULT_SEED),
            workers: file.workers.filter(|&w| w > 0),
            out_path: file.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}
