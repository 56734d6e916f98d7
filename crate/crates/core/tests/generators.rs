mod common;

use common::*;
use nalgebra::DMatrix;
use wnfc::dgp::{
    draw_innovations, make_coeff_matrix, simulate_var1, simulate_vma1, DgpSpec, Innovation,
    PanelGenerator, Scenario, BURN_IN,
};
use wnfc::rng::{derive_seed, stream};
use wnfc::{sample_autocorrelation, sample_autocovariance, t_sum, TimeSeriesPanel};

/// Raw moment `E[G^r]` of Gamma(shape k, scale θ).
fn gamma_raw_moment(k: f64, theta: f64, r: u32) -> f64 {
    (0..r).map(|i| k + i as f64).product::<f64>() * theta.powi(r as i32)
}

/// `E[(G - c)^r]` by binomial expansion.
fn shifted_moment(k: f64, theta: f64, c: f64, r: u32) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=r {
        acc += binom * gamma_raw_moment(k, theta, j) * (-c).powi((r - j) as i32);
        binom = binom * (r - j) as f64 / (j + 1) as f64;
    }
    acc
}

#[test]
fn shifted_gamma_moments() {
    let n = 1_000_000;
    let z = draw_innovations(Innovation::ShiftedGamma, n, 1, &mut stream(1));
    let xs: Vec<f64> = z.iter().copied().collect();
    let m = |r: i32| xs.iter().map(|x| x.powi(r)).sum::<f64>() / n as f64;
    let moment = |r: u32| shifted_moment(4.0, 0.5, 2.0, r);
    let nf = n as f64;

    assert!((moment(1)).abs() < 1e-12 && (moment(2) - 1.0).abs() < 1e-12 && (moment(4) - 4.5).abs() < 1e-12);
    let se1 = (moment(2) / nf).sqrt();
    let se2 = ((moment(4) - 1.0) / nf).sqrt();
    let se4 = ((moment(8) - moment(4).powi(2)) / nf).sqrt();
    assert!(m(1).abs() < 3.0 * se1, "mean {}", m(1));
    assert!((m(2) - 1.0).abs() < 3.0 * se2, "variance {}", m(2));
    assert!((m(4) - 4.5).abs() < 3.0 * se4, "fourth moment {}", m(4));
    assert!((0.99..=1.01).contains(&variance(&xs)));
}

#[test]
fn gaussian_mean() {
    let z = draw_innovations(Innovation::Gaussian, 1_000_000, 1, &mut stream(2));
    assert!(z.mean().abs() < 0.004);
}

#[test]
fn setting_one_is_white_with_known_covariance() {
    let (n, p) = (2000, 10);
    let panel = PanelGenerator::new(Scenario::NullI, Innovation::Gaussian, n, p, None)
        .unwrap()
        .generate(3)
        .unwrap();
    let rho1 = sample_autocorrelation(&panel, 1).unwrap().values;
    assert!(rho1.amax() < 0.1, "max lag-1 autocorrelation {}", rho1.amax());

    let sigma = setting_one_sigma(p);
    let target = DMatrix::from_fn(p, p, |i, j| sigma[i][j]);
    let s0 = sample_autocovariance(&panel, 0).unwrap().values;
    let rel = (&s0 - &target).norm() / target.norm();
    assert!(rel < 0.15, "relative Frobenius error {rel}");
}

#[test]
fn distinct_seeds_give_distinct_panels() {
    for scenario in [Scenario::NullI, Scenario::NullII, Scenario::NullIII] {
        let spec = DgpSpec::new(scenario, Innovation::ShiftedGamma, 20, 4, None, 1).unwrap();
        let a = wnfc::dgp::gen_null_panel(&spec).unwrap();
        let b = wnfc::dgp::gen_null_panel(&DgpSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, wnfc::dgp::gen_null_panel(&spec).unwrap());
    }
}

#[test]
fn vma_lag_one_autocovariance_is_coefficient() {
    let (n, p) = (5000, 5);
    let mut rng = stream(4);
    let a = make_coeff_matrix(Scenario::Vma1, 5, p, &mut rng).unwrap().values;
    let panel = simulate_vma1(&DMatrix::identity(p, p), &a, n, Innovation::Gaussian, &mut rng).unwrap();
    let s1 = sample_autocovariance(&panel, 1).unwrap().values;
    let err = (&s1 - &a).norm();
    assert!(err < 0.1, "Frobenius error {err}");
}

#[test]
fn var_variance_solves_lyapunov_equation() {
    let (n, p) = (5000, 5);
    let mut seed = 5;
    let a = loop {
        let c = make_coeff_matrix(Scenario::Var1, 5, p, &mut stream(seed)).unwrap();
        if c.spectral_radius() < 0.9 {
            break c.values;
        }
        seed += 1;
    };
    let mut sigma = DMatrix::<f64>::identity(p, p);
    for _ in 0..2000 {
        sigma = &a * &sigma * a.transpose() + DMatrix::identity(p, p);
    }
    let panel = simulate_var1(&a, n, Innovation::Gaussian, BURN_IN, &mut stream(99)).unwrap();
    let s0 = sample_autocovariance(&panel, 0).unwrap().values;
    let err = (&s0 - &sigma).norm();
    assert!(err < 0.15, "Frobenius error {err}");
}

fn sum_size(panels: impl Iterator<Item = TimeSeriesPanel>) -> f64 {
    let decisions: Vec<bool> = panels.map(|p| t_sum(&p, 1).unwrap().p_value < 0.05).collect();
    decisions.iter().filter(|&&d| d).count() as f64 / decisions.len() as f64
}

#[test]
fn components_beyond_the_block_carry_no_signal() {
    let (n, p, m) = (200, 60, 5);
    for scenario in [Scenario::Var1, Scenario::Vma1] {
        let gen = PanelGenerator::new(scenario, Innovation::Gaussian, n, p, Some(m)).unwrap();
        let tail: Vec<usize> = (m..p).collect();
        let size = sum_size((0..500u64).map(|rep| {
            let mut attempt = 0;
            loop {
                match gen.generate(derive_seed(&[rep, attempt])) {
                    Ok(panel) => break panel.select_columns(&tail).unwrap(),
                    Err(_) => attempt += 1,
                }
            }
        }));
        assert!((0.02..=0.08).contains(&size), "{scenario}: size {size}");
    }
}

#[test]
fn zero_coefficients_reduce_to_the_null() {
    let (n, p) = (200, 30);
    let zero = DMatrix::zeros(p, p);
    let eye = DMatrix::identity(p, p);
    let size = sum_size(
        (0..500u64).map(|rep| simulate_vma1(&eye, &zero, n, Innovation::Gaussian, &mut stream(rep)).unwrap()),
    );
    assert!((0.02..=0.08).contains(&size), "size {size}");
}
