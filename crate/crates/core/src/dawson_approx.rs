//! Gaussian-sum fit of `sinc + i·cosinc`, the rational approximation of
//! Dawson's integral built from it, and the two error bounds.
//!
//! Writing `F(x) = (x/2) ∫_0^∞ e^{−t²/4} sinc(xt) t dt` and replacing sinc by
//! `Σ α_m e^{−(γ_m x)²}` gives `F̃(x) = x Σ α_m/(1 + (2γ_m x)²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fracgauss::{linspace, AxisKind, ComplexGrid};
use crate::moments::sinc_moments;
use crate::momentsolve::{load_table, solve, ExponentialSum, SolveReport, Table, Term};
use crate::special_fn::{dawson_ref, g_kernel, sinc, DawsonImpl};
use crate::{Error, Result};

/// Denominators `|1 + (2γx)²|` below this are reported as poles.
pub const POLE_TOL: f64 = 1e-14;

/// Allowed `|Im F̃(x)|` relative to `Σ_m |α_m x/(1+(2γ_m x)²)|`.
pub const IMAGINARY_TOL: f64 = 1e-12;

/// Default ε₁ scan: `[−200, 200]` at `2·10⁵` points.
pub const DEFAULT_EPS1_RANGE: (f64, f64) = (-200.0, 200.0);
pub const DEFAULT_EPS1_POINTS: usize = 200_000;

const EPS1_MAX_DOUBLINGS: usize = 6;

/// An exponential sum with `Re γ_m > 0` and `Re γ_m² > 0`, read as the
/// coefficients of `F̃(x) = x Σ α_m/(1+(2γ_m x)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DawsonRational {
    sum: ExponentialSum,
}

impl DawsonRational {
    /// Validates the node conditions. Nodes whose conjugates are also present
    /// (to relative `1e-8`) are replaced by exact conjugate pairs, and nodes
    /// within that distance of the real axis become real.
    pub fn new(sum: ExponentialSum) -> Result<Self> {
        if let Some(g) = sum.gammas().find(|g| g.re <= 0.0 || (g * g).re <= 0.0) {
            return Err(Error::Domain(format!("node {g} needs Re(gamma) > 0 and Re(gamma^2) > 0")));
        }
        Ok(Self { sum: symmetrize(sum) })
    }

    /// The sum with nodes `γ_m = √(printed γ_m)` (principal root).
    ///
    /// The printed node column of the sinc table satisfies the moment
    /// equations only after this square root: with the printed values taken
    /// literally, four nodes have `Re γ² < 0` and `Σ α_m γ_m^n` misses
    /// `Γ((n+2)/2)/(n+1)!` by orders of magnitude.
    pub fn from_printed_table2() -> Result<Self> {
        let printed = load_table(Table::Table2);
        let terms = printed
            .terms
            .iter()
            .map(|t| Term { alpha: t.alpha, gamma: t.gamma.sqrt() })
            .collect();
        Self::new(ExponentialSum::new("table2", terms)?)
    }

    /// Solves the sinc moment problem from scratch.
    pub fn from_sinc_solve(count: usize, tol: f64, max_order: usize) -> Result<(Self, SolveReport)> {
        let h = sinc_moments(count)?;
        let (sum, report) = solve(&h, tol, max_order)?;
        Ok((Self::new(sum)?, report))
    }

    pub fn sum(&self) -> &ExponentialSum {
        &self.sum
    }

    /// `z Σ α_m/(1+(2γ_m z)²)` for complex `z`.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.sum.terms {
            let q = 2.0 * t.gamma * z;
            let denom = 1.0 + q * q;
            if denom.norm() < POLE_TOL {
                return Err(Error::Pole { function: "dawson_rational", at: z });
            }
            acc += t.alpha / denom;
        }
        Ok(z * acc)
    }

    /// `Σ_m α_m/(4γ_m²)`: `F̃(x) ~ coefficient/x` as `x → ∞` (exact Dawson: ½).
    pub fn tail_coefficient(&self) -> Complex64 {
        self.sum.terms.iter().map(|t| t.alpha / (4.0 * t.gamma * t.gamma)).sum()
    }
}

fn symmetrize(mut sum: ExponentialSum) -> ExponentialSum {
    let n = sum.terms.len();
    let close_within = |x: Complex64, y: Complex64, rel: f64| (x - y).norm() <= rel * x.norm().max(y.norm());
    let close = |x, y| close_within(x, y, 1e-8);
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let gi = sum.terms[i].gamma;
        if gi.im.abs() <= 1e-8 * gi.norm() {
            let t = &mut sum.terms[i];
            t.gamma.im = 0.0;
            if t.alpha.im.abs() <= 1e-8 * t.alpha.norm() {
                t.alpha.im = 0.0;
            }
            done[i] = true;
            continue;
        }
        let partner = (0..n).find(|&j| j != i && !done[j] && close(sum.terms[j].gamma, gi.conj()));
        if let Some(j) = partner {
            let (a, b) = (sum.terms[i], sum.terms[j]);
            // large paired weights cancel, so their mismatch is looser than the nodes'
            if close_within(a.alpha, b.alpha.conj(), 1e-6) {
                let gamma = 0.5 * (a.gamma + b.gamma.conj());
                let alpha = 0.5 * (a.alpha + b.alpha.conj());
                sum.terms[i] = Term { alpha, gamma };
                sum.terms[j] = Term { alpha: alpha.conj(), gamma: gamma.conj() };
                done[j] = true;
            }
        }
        done[i] = true;
    }
    sum
}

/// `Σ α_m g(γ_m x)`; the real part approximates sinc, the imaginary part cosinc.
pub fn sinc_cosinc_approx(sum: &ExponentialSum, x: &[f64]) -> Result<ComplexGrid> {
    let values = x
        .iter()
        .map(|&xi| {
            sum.terms
                .iter()
                .map(|t| Ok(t.alpha * g_kernel(t.gamma * xi, DawsonImpl::Reference)?))
                .sum::<Result<Complex64>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(x.to_vec(), values, AxisKind::Time)
}

/// `F̃(x)` on real points. The imaginary part left by rounding in conjugate
/// pairs is checked against [`IMAGINARY_TOL`] and dropped.
pub fn dawson_rational(rational: &DawsonRational, x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&xi| {
            let value = rational.eval_complex(Complex64::new(xi, 0.0))?;
            let scale: f64 = rational
                .sum
                .terms
                .iter()
                .map(|t| {
                    let q = 2.0 * t.gamma * xi;
                    (t.alpha * xi / (1.0 + q * q)).norm()
                })
                .sum();
            if value.im.abs() > IMAGINARY_TOL * scale {
                return Err(Error::Domain(format!(
                    "F~({xi}) has imaginary part {:e}; nodes are not conjugate-closed",
                    value.im
                )));
            }
            Ok(value.re)
        })
        .collect()
}

/// `max |sinc(x) − Re Σ α_m e^{−(γ_m x)²}|` over `points` evenly spaced
/// samples of `scan_range`, doubling the sampling density until the maximum
/// changes by less than 1%.
pub fn error_eps1(sum: &ExponentialSum, scan_range: (f64, f64), scan_points: usize) -> Result<f64> {
    let (lo, hi) = scan_range;
    if !(lo < hi) || scan_points < 2 {
        return Err(Error::InvalidInput(format!("bad scan [{lo}, {hi}] with {scan_points} points")));
    }
    let scan = |points: usize| {
        linspace(lo, hi, points)
            .into_iter()
            .map(|x| {
                let fit: Complex64 = sum.terms.iter().map(|t| t.alpha * (-(t.gamma * x) * (t.gamma * x)).exp()).sum();
                (sinc(x) - fit.re).abs()
            })
            .fold(0.0, f64::max)
    };
    let mut points = scan_points;
    let mut current = scan(points);
    for _ in 0..EPS1_MAX_DOUBLINGS {
        points = 2 * points - 1;
        let next = scan(points);
        let settled = (next - current).abs() <= 0.01 * next.abs();
        current = next;
        if settled {
            break;
        }
    }
    Ok(current)
}

/// `ε₁|x|/2`, the bound on `|F − F̃|` near zero.
pub fn bound_near_zero(eps1: f64, x: f64) -> f64 {
    eps1 * x.abs() / 2.0
}

/// `Σ_m |α_m| e^{−1/2}/√(2 Re γ_m²)`, an upper bound on
/// `max_{t>0} |t Σ α_m e^{−(γ_m t)²}|`.
pub fn max_inequality_constant(sum: &ExponentialSum) -> Result<f64> {
    sum.terms
        .iter()
        .map(|t| {
            let re2 = (t.gamma * t.gamma).re;
            if re2 <= 0.0 {
                Err(Error::Domain(format!("node {} has Re(gamma^2) <= 0", t.gamma)))
            } else {
                Ok(t.alpha.norm() * (-0.5f64).exp() / (2.0 * re2).sqrt())
            }
        })
        .sum()
}

/// `½√(π/x)·[1 + Σ_m |α_m| e^{−1/2}/√(2 Re γ_m²)]`, the bound on `|F − F̃|`
/// away from zero.
pub fn bound_far(sum: &ExponentialSum, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidInput(format!("far-field bound needs x > 0, got {x}")));
    }
    Ok(0.5 * (PI / x).sqrt() * (1.0 + max_inequality_constant(sum)?))
}

/// Dense-scan `max |t Σ α_m e^{−(γ_m t)²}|` over `points` samples of `(0, t_max]`.
pub fn weighted_gaussian_max(sum: &ExponentialSum, t_max: f64, points: usize) -> f64 {
    (1..=points)
        .map(|k| {
            let t = t_max * k as f64 / points as f64;
            let s: Complex64 = sum.terms.iter().map(|m| m.alpha * (-(m.gamma * t) * (m.gamma * t)).exp()).sum();
            (t * s).norm()
        })
        .fold(0.0, f64::max)
}

/// Pointwise comparison of `F̃` against the reference Dawson function and
/// the two bounds on a scan of `(0, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DawsonCheck {
    pub eps1: f64,
    pub scan_points: usize,
    pub max_error: f64,
    /// Largest `|F − F̃|/bound` on `(0, 1]` against the near-zero bound.
    pub near_zero_ratio: f64,
    /// Largest `|F − F̃|/bound` on `[1, x_max]` against the far bound.
    pub far_ratio: f64,
    pub max_inequality_scan: f64,
    pub max_inequality_constant: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Runs the domination checks with `ε₁` measured on the default scan.
pub fn check_bounds(rational: &DawsonRational, x_max: f64, scan_points: usize) -> Result<DawsonCheck> {
    let sum = rational.sum();
    let eps1 = error_eps1(sum, DEFAULT_EPS1_RANGE, DEFAULT_EPS1_POINTS)?;
    let xs: Vec<f64> = (1..=scan_points).map(|k| x_max * k as f64 / scan_points as f64).collect();
    let approx = dawson_rational(rational, &xs)?;
    let mut max_error: f64 = 0.0;
    let mut near_zero_ratio: f64 = 0.0;
    let mut far_ratio: f64 = 0.0;
    for (x, f) in xs.iter().zip(&approx) {
        let err = (dawson_ref(*x) - f).abs();
        max_error = max_error.max(err);
        if *x <= 1.0 {
            near_zero_ratio = near_zero_ratio.max(err / bound_near_zero(eps1, *x));
        }
        if *x >= 1.0 {
            far_ratio = far_ratio.max(err / bound_far(sum, *x)?);
        }
    }
    let constant = max_inequality_constant(sum)?;
    let scan = weighted_gaussian_max(sum, x_max, scan_points.max(2));
    let pass = near_zero_ratio <= 1.0 && far_ratio <= 1.0 && scan <= constant;
    Ok(DawsonCheck {
        eps1,
        scan_points,
        max_error,
        near_zero_ratio,
        far_ratio,
        max_inequality_scan: scan,
        max_inequality_constant: constant,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}
