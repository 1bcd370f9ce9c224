//! Regression anchors for the two printed coefficient tables.

use std::f64::consts::FRAC_1_SQRT_2;

use fracgauss::dawson_approx::{error_eps1, DEFAULT_EPS1_POINTS, DEFAULT_EPS1_RANGE};
use fracgauss::fracgauss::{eval_approx, linspace, oracle_eval, ApproxKind};
use fracgauss::moments::{frac_moments, sinc_moments};
use fracgauss::momentsolve::{load_table, residuals, ExponentialSum, Table};
use fracgauss::{Complex64, DawsonRational, FracApprox, FracParams};

/// Max pointwise error of the printed Table 1 sum against the oracle on
/// 481 points of [−6, 6], as measured when the table was first loaded.
const TABLE1_MAX_POINTWISE: f64 = 0.155_562_108_784_468_5;

/// `ε₁` of the Table 2 sum (nodes `√γ²`), measured on the default scan.
const TABLE2_EPS1: f64 = 0.035_810_691_806_774_76;

fn table1_params() -> FracParams {
    FracParams::new(0.5, FRAC_1_SQRT_2).unwrap()
}

fn max_relative_residual(params: FracParams, sum: &ExponentialSum, count: usize) -> f64 {
    let h = frac_moments(params, count).unwrap();
    residuals(&h, sum)
        .iter()
        .zip(&h.values)
        .map(|(e, h)| e.norm() / h.norm())
        .fold(0.0, f64::max)
}

fn max_pointwise(params: FracParams, sum: ExponentialSum) -> f64 {
    let t = linspace(-6.0, 6.0, 481);
    let approx = FracApprox::new(params, sum, ApproxKind::FracDerivative).unwrap();
    eval_approx(&approx, &t).unwrap().max_abs_diff(&oracle_eval(params, &t).unwrap()).unwrap()
}

#[test]
fn table1_printed_error_is_frozen() {
    let measured = max_pointwise(table1_params(), load_table(Table::Table1));
    assert!((measured - TABLE1_MAX_POINTWISE).abs() <= 1e-9, "measured {measured:e}");
}

#[test]
fn table1_weights_miss_sigma_power() {
    // The printed weights solve h_n·σ^a: every moment is off by the same
    // factor 2^{−1/4}, so the relative residual is flat at 1 − 2^{−1/4}.
    let params = table1_params();
    let printed = load_table(Table::Table1);
    let flat = 1.0 - 2f64.powf(-0.25);
    assert!((max_relative_residual(params, &printed, 24) - flat).abs() < 1e-10);

    let rescaled = printed.scaled(Complex64::new(params.sigma.powf(-params.a), 0.0));
    assert!(max_relative_residual(params, &rescaled, 24) < 1e-12);
    assert!(max_pointwise(params, rescaled) < 1e-6);
}

#[test]
fn table2_needs_square_root_of_printed_nodes() {
    let h = sinc_moments(16).unwrap();
    let printed = load_table(Table::Table2);
    let rooted = DawsonRational::from_printed_table2().unwrap();
    let worst = |sum: &ExponentialSum| {
        residuals(&h, sum)
            .iter()
            .zip(&h.values)
            .map(|(e, h)| e.norm() / h.norm())
            .fold(0.0, f64::max)
    };
    assert!(worst(&printed) > 1.0);
    assert!(worst(rooted.sum()) < 1e-6);
    assert!(printed.gammas().any(|g| (g * g).re < 0.0));
}

#[test]
fn table2_eps1_is_frozen() {
    let rational = DawsonRational::from_printed_table2().unwrap();
    let eps1 = error_eps1(rational.sum(), DEFAULT_EPS1_RANGE, DEFAULT_EPS1_POINTS).unwrap();
    assert!((eps1 - TABLE2_EPS1).abs() <= 1e-12, "measured {eps1:e}");
}

