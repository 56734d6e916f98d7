//! Result tables and power-curve files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::CellResult;
use crate::dgp::{Innovation, Scenario, MAX_BLOCK};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::InvalidInput(format!("unknown table format `{other}`"))),
        }
    }
}

const CSV_COLUMNS: [&str; 14] = [
    "scenario",
    "innovation",
    "n",
    "p",
    "K",
    "m",
    "alpha",
    "replications",
    "rate_max",
    "rate_sum",
    "rate_fc",
    "se_max",
    "se_sum",
    "se_fc",
];

fn csv_table(results: &[CellResult]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in results {
        let c = &r.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.scenario,
            c.innovation,
            c.n,
            c.p,
            c.lags,
            c.m.map_or(String::new(), |m| m.to_string()),
            r.alpha,
            r.replications_used,
            r.rates.max,
            r.rates.sum,
            r.rates.fc,
            r.standard_errors.max,
            r.standard_errors.sum,
            r.standard_errors.fc,
        );
    }
    out
}

/// Blocks per (scenario, innovation); rows per (n, p, m); for each K a MAX/SUM/FC
/// column triple.
fn markdown_table(results: &[CellResult]) -> String {
    type RowKey = (usize, usize, Option<usize>);
    type Rows<'a> = BTreeMap<RowKey, BTreeMap<usize, &'a CellResult>>;
    let mut lags: Vec<usize> = results.iter().map(|r| r.cell.lags).collect();
    lags.sort_unstable();
    lags.dedup();
    let has_m = results.iter().any(|r| r.cell.m.is_some());

    let mut blocks: BTreeMap<(Scenario, Innovation), Rows> = BTreeMap::new();
    for r in results {
        let c = &r.cell;
        blocks
            .entry((c.scenario, c.innovation))
            .or_default()
            .entry((c.n, c.p, c.m))
            .or_default()
            .insert(c.lags, r);
    }

    let mut out = String::new();
    let lead = if has_m { "| n | p | m |" } else { "| n | p |" };
    let lead_rule = if has_m { "|---|---|---|" } else { "|---|---|" };
    for ((scenario, innovation), rows) in &blocks {
        let _ = writeln!(out, "### {scenario}, {innovation} innovations\n");
        let mut header = lead.to_string();
        let mut rule = lead_rule.to_string();
        for k in &lags {
            for test in ["MAX", "SUM", "FC"] {
                let _ = write!(header, " {test} (K={k}) |");
                rule.push_str("---|");
            }
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for ((n, p, m), by_k) in rows {
            let mut line = match m {
                Some(m) => format!("| {n} | {p} | {m} |"),
                None if has_m => format!("| {n} | {p} | |"),
                None => format!("| {n} | {p} |"),
            };
            for k in &lags {
                match by_k.get(k) {
                    Some(r) => {
                        let _ = write!(line, " {:.3} | {:.3} | {:.3} |", r.rates.max, r.rates.sum, r.rates.fc);
                    }
                    None => line.push_str(" - | - | - |"),
                }
            }
            let _ = writeln!(out, "{line}");
        }
        out.push('\n');
    }
    out
}

/// Renders results as a table. Errors on an empty result list.
pub fn emit_table<W: Write>(results: &[CellResult], format: TableFormat, mut out: W) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let text = match format {
        TableFormat::Csv => csv_table(results),
        TableFormat::Markdown => markdown_table(results),
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<table output>", e))
}

/// Writes the table to `path`. Nothing is created when `results` is empty.
pub fn write_table(results: &[CellResult], format: TableFormat, path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut buf = Vec::new();
    emit_table(results, format, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Power curve over `m = 1..=10` for cells sharing (scenario, innovation, n, p, K).
pub fn emit_power_curve<W: Write>(results: &[CellResult], mut out: W) -> Result<()> {
    let first = results.first().ok_or(Error::EmptyResults)?.cell;
    let mut by_m = BTreeMap::new();
    for r in results {
        let c = &r.cell;
        let same = (c.scenario, c.innovation, c.n, c.p, c.lags)
            == (first.scenario, first.innovation, first.n, first.p, first.lags);
        let m = match (same, c.m) {
            (true, Some(m)) => m,
            _ => {
                return Err(Error::InvalidGrouping(format!(
                    "{}/{}/n={}/p={}/K={}/m={:?} vs {}/{}/n={}/p={}/K={}",
                    c.scenario, c.innovation, c.n, c.p, c.lags, c.m,
                    first.scenario, first.innovation, first.n, first.p, first.lags
                )))
            }
        };
        if by_m.insert(m, r).is_some() {
            return Err(Error::InvalidGrouping(format!("m = {m} appears twice")));
        }
    }
    let missing: Vec<usize> = (1..=MAX_BLOCK).filter(|m| !by_m.contains_key(m)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingAbscissae(missing));
    }
    let mut text = String::from("m,rate_MAX,rate_SUM,rate_FC,se_MAX,se_SUM,se_FC\n");
    for (m, r) in by_m {
        let _ = writeln!(
            text,
            "{m},{},{},{},{},{},{}",
            r.rates.max, r.rates.sum, r.rates.fc,
            r.standard_errors.max, r.standard_errors.sum, r.standard_errors.fc
        );
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<power curve output>", e))
}

pub fn write_power_curve(results: &[CellResult], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    emit_power_curve(results, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
