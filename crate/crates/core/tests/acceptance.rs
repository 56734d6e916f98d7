//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use wnfc::dgp::{simulate_vma1, Innovation, Scenario};
use wnfc::dist::{chi2_4_cdf, chi2_4_quantile, gumbel_quantile};
use wnfc::harness::{run_cell, Cell, ReplicationOutcome};
use wnfc::power::{sum_power, PowerInputs};
use wnfc::rng::{derive_seed, stream};
use wnfc::{t_max, t_sum, PerTest, TimeSeriesPanel};

const MASTER_SEED: u64 = 20_240_601;
const ALPHA: f64 = 0.05;

// Criterion 1
const C1_SUM: (f64, f64) = (0.030, 0.065);
const C1_MAX_MAX: f64 = 0.035;
const C1_FC: (f64, f64) = (0.020, 0.070);
// Criterion 2
const C2_SUM: (f64, f64) = (0.025, 0.065);
const C2_FC: (f64, f64) = (0.010, 0.055);
// Criterion 3
const C3_MIN_GAP: f64 = 0.01;
// Criterion 4
const C4_SE_MULTIPLE: f64 = 2.0;
const C4_FC_SLACK: f64 = 0.10;
// Criterion 5
const C5_TOL: f64 = 0.10;
// Criterion 6
const C6_MAX_CORR: f64 = 0.08;
const C6_ALPHA: f64 = 0.10;
const C6_JOINT_TOL: f64 = 0.03;
// Criterion 7
const C7_MAX_KS: f64 = 0.05;
// Criterion 8
const C8_REL_TOL: f64 = 1e-10;
const C8_SECONDS: f64 = 10.0;
// Criterion 9
const C9_SE_MULTIPLE: f64 = 3.0;
// Criterion 10
const C10_TOL: f64 = 1e-3;

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn cell(scenario: Scenario, innovation: Innovation, n: usize, p: usize, lags: usize, m: Option<usize>) -> Cell {
    Cell {
        scenario,
        innovation,
        n,
        p,
        lags,
        m,
    }
}

fn rates(outcomes: &[ReplicationOutcome]) -> PerTest<f64> {
    let r = outcomes.len() as f64;
    let count = |f: fn(&ReplicationOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / r;
    PerTest {
        max: count(|o| o.reject.max),
        sum: count(|o| o.reject.sum),
        fc: count(|o| o.reject.fc),
    }
}

fn within((lo, hi): (f64, f64), x: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn table_one_size() -> Outcome {
    let out = run_cell(&cell(Scenario::NullI, Innovation::Gaussian, 100, 30, 1, None), 1000, ALPHA, MASTER_SEED).unwrap();
    let r = rates(&out);
    Outcome {
        pass: within(C1_SUM, r.sum) && r.max <= C1_MAX_MAX && within(C1_FC, r.fc),
        detail: format!("MAX {:.3} (<= {C1_MAX_MAX}), SUM {:.3} in {C1_SUM:?}, FC {:.3} in {C1_FC:?}", r.max, r.sum, r.fc),
    }
}

fn table_two_size() -> Outcome {
    let out = run_cell(&cell(Scenario::NullII, Innovation::ShiftedGamma, 200, 60, 2, None), 1000, ALPHA, MASTER_SEED).unwrap();
    let r = rates(&out);
    Outcome {
        pass: within(C2_SUM, r.sum) && within(C2_FC, r.fc),
        detail: format!("MAX {:.3}, SUM {:.3} in {C2_SUM:?}, FC {:.3} in {C2_FC:?}", r.max, r.sum, r.fc),
    }
}

fn conservativeness() -> Outcome {
    let out = run_cell(&cell(Scenario::NullI, Innovation::Gaussian, 100, 120, 3, None), 1000, ALPHA, MASTER_SEED).unwrap();
    let r = rates(&out);
    Outcome {
        pass: r.max <= r.sum && r.sum - r.max >= C3_MIN_GAP,
        detail: format!("MAX {:.3} vs SUM {:.3} (gap {:.3}, need >= {C3_MIN_GAP})", r.max, r.sum, r.sum - r.max),
    }
}

fn power_orderings() -> Outcome {
    let reps = 500;
    let mut pass = true;
    let mut parts = Vec::new();
    for m in 1..=10 {
        let out = run_cell(&cell(Scenario::Vma1, Innovation::Gaussian, 200, 60, 1, Some(m)), reps, ALPHA, MASTER_SEED).unwrap();
        let r = rates(&out);
        let pooled = ((r.max * (1.0 - r.max) + r.sum * (1.0 - r.sum)) / reps as f64).sqrt();
        let fc_ok = r.fc >= r.max.min(r.sum) && r.fc >= r.max.max(r.sum) - C4_FC_SLACK;
        let order_ok = match m {
            1 => r.max - r.sum >= C4_SE_MULTIPLE * pooled,
            10 => r.sum - r.max >= C4_SE_MULTIPLE * pooled,
            _ => true,
        };
        pass &= fc_ok && order_ok;
        parts.push(format!(
            "m={m}: {:.2}/{:.2}/{:.2}{}",
            r.max,
            r.sum,
            r.fc,
            if fc_ok && order_ok { "" } else { "!" }
        ));
    }
    Outcome {
        pass,
        detail: format!("MAX/SUM/FC {}", parts.join(", ")),
    }
}

fn sum_power_vs_monte_carlo() -> Outcome {
    let (n, p, reps) = (200, 5, 2000u64);
    let a0 = DMatrix::<f64>::identity(p, p);
    let a1 = a0.scale(0.3);
    let theory = sum_power(&PowerInputs::new(a0.clone(), a1.clone(), n, 3.0, ALPHA).unwrap()).unwrap();
    let hits = (0..reps)
        .filter(|&r| {
            let mut rng = stream(derive_seed(&[MASTER_SEED, 5, r]));
            let panel = simulate_vma1(&a0, &a1, n, Innovation::Gaussian, &mut rng).unwrap();
            t_sum(&panel, 1).unwrap().p_value < ALPHA
        })
        .count();
    let mc = hits as f64 / reps as f64;
    Outcome {
        pass: (theory.beta_sum - mc).abs() <= C5_TOL,
        detail: format!("beta_SUM {:.4} vs MC {:.4} (tol {C5_TOL})", theory.beta_sum, mc),
    }
}

fn null_setting_one_2000() -> Vec<ReplicationOutcome> {
    run_cell(&cell(Scenario::NullI, Innovation::Gaussian, 200, 60, 1, None), 2000, ALPHA, MASTER_SEED).unwrap()
}

fn asymptotic_independence(out: &[ReplicationOutcome]) -> Outcome {
    let y: Vec<f64> = out.iter().map(|o| o.gumbel_y).collect();
    let z: Vec<f64> = out.iter().map(|o| o.z_score).collect();
    let corr = pearson(&y, &z);
    let r = out.len() as f64;
    let rej_max: Vec<bool> = out.iter().map(|o| o.p_max < C6_ALPHA).collect();
    let rej_sum: Vec<bool> = out.iter().map(|o| o.p_sum < C6_ALPHA).collect();
    let m = rej_max.iter().filter(|&&b| b).count() as f64 / r;
    let s = rej_sum.iter().filter(|&&b| b).count() as f64 / r;
    let joint = rej_max.iter().zip(&rej_sum).filter(|(a, b)| **a && **b).count() as f64 / r;
    Outcome {
        pass: corr.abs() < C6_MAX_CORR && (joint - m * s).abs() <= C6_JOINT_TOL,
        detail: format!(
            "corr {corr:.4} (< {C6_MAX_CORR}); joint {joint:.4} vs {m:.3}*{s:.3} = {:.4} (tol {C6_JOINT_TOL})",
            m * s
        ),
    }
}

fn fisher_calibration(out: &[ReplicationOutcome]) -> Outcome {
    let t: Vec<f64> = out.iter().map(|o| o.t_fc).collect();
    let d = ks_distance(&t, |x| chi2_4_cdf(x).unwrap());
    Outcome {
        pass: d < C7_MAX_KS,
        detail: format!("KS distance {d:.4} (< {C7_MAX_KS})"),
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(MASTER_SEED);
    let mut worst = 0.0_f64;
    for _ in 0..500 {
        let rows = random_small_panel(&mut rng);
        let lags = rng.random_range(1..=3.min(rows.len() - 2));
        let panel = TimeSeriesPanel::from_rows(&rows).unwrap();
        let want_max = naive_t_max(&rows, lags);
        let (want_sum, _) = naive_t_sum(&rows, lags);
        worst = worst
            .max(rel_err(t_max(&panel, lags).unwrap().t_max, want_max, want_max.abs()))
            .max(rel_err(t_sum(&panel, lags).unwrap().t_sum, want_sum, want_sum.abs()));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst < C8_REL_TOL && secs <= C8_SECONDS,
        detail: format!("max relative error {worst:.2e} (< {C8_REL_TOL:e}) in {secs:.2}s (<= {C8_SECONDS}s)"),
    }
}

fn trace_estimator_unbiased() -> Outcome {
    let out = run_cell(&cell(Scenario::NullI, Innovation::Gaussian, 200, 60, 1, None), 1000, ALPHA, MASTER_SEED).unwrap();
    let tr: Vec<f64> = out.iter().map(|o| o.trace_sq_hat).collect();
    let exact = trace_of_square(&setting_one_sigma(60));
    let se = (variance(&tr) / tr.len() as f64).sqrt();
    let m = mean(&tr);
    Outcome {
        pass: (m - exact).abs() <= C9_SE_MULTIPLE * se,
        detail: format!("mean {m:.4} vs tr(Sigma^2) {exact:.4}, |diff| {:.4} <= {C9_SE_MULTIPLE} SE ({se:.4})", (m - exact).abs()),
    }
}

fn distribution_utilities() -> Outcome {
    let q = gumbel_quantile(0.05).unwrap();
    let c = chi2_4_quantile(0.95).unwrap();
    let (q_ref, c_ref) = (bisect_gumbel_upper(0.05), bisect_chi2_4(0.95));
    let pass = (q - 4.7958).abs() <= C10_TOL
        && (q - q_ref).abs() <= C10_TOL
        && (c - 9.4877).abs() <= C10_TOL
        && (c - c_ref).abs() <= C10_TOL;
    Outcome {
        pass,
        detail: format!("q_0.05 {q:.5} (bisection {q_ref:.5}), chi2_4 0.95 {c:.5} (bisection {c_ref:.5})"),
    }
}

fn main() -> ExitCode {
    let null_runs = null_setting_one_2000();
    let checks: Vec<Check> = vec![
        ("1 size, setting I Gaussian n=100 p=30 K=1", Box::new(table_one_size)),
        ("2 size, setting II shifted-Gamma n=200 p=60 K=2", Box::new(table_two_size)),
        ("3 MAX more conservative than SUM at n=100 p=120 K=3", Box::new(conservativeness)),
        ("4 VMA(1) power orderings over m=1..10", Box::new(power_orderings)),
        ("5 theoretical vs Monte Carlo SUM power", Box::new(sum_power_vs_monte_carlo)),
        ("6 asymptotic independence of MAX and SUM", Box::new(|| asymptotic_independence(&null_runs))),
        ("7 chi2_4 calibration of FC", Box::new(|| fisher_calibration(&null_runs))),
        ("8 brute-force oracle equivalence", Box::new(oracle_equivalence)),
        ("9 unbiased tr(Sigma^2) estimate", Box::new(trace_estimator_unbiased)),
        ("10 distribution utilities", Box::new(distribution_utilities)),
    ];
    let mut failures = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let o = check();
        failures += usize::from(!o.pass);
        println!(
            "{} [{name}] {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", checks.len() - failures, checks.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
