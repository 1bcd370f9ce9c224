//! Evaluation of `f̃_{a,σ}(t) = Σ α_m g(γ_m t)`, the quadrature oracle for
//! `f_{a,σ}`, spectra, L2 errors and the order derivative `∂_a f_{a,σ}`.
//!
//! The target is
//! `f_{a,σ}(t) = √(2/π) e^{iaπ/2} ∫_0^∞ e^{−ω²/2} (ω/σ)^a e^{iωt/σ} dω`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::moments::{frac_moments, order_deriv_moments, FracParams, MomentSequence};
use crate::momentsolve::{numerical_rank, solve, solve_fixed_order, ExponentialSum, SolveReport};
use crate::extended::{to_f64, ComplexDD};
use crate::quadrature::{graded_breaks, integrate_refined, uniform_breaks, GaussLegendre};
use crate::special_fn::{digamma_real, g_kernel, gamma_real, ln_gamma, DawsonImpl};
use crate::{Error, Result};

/// Beyond this `|t/σ|` the oracle switches from quadrature to the
/// large-argument expansion.
pub const ORACLE_ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// Closed-form L2 values above `−NEGATIVE_L2_CLAMP` but below zero are
/// treated as roundoff and reported as zero.
pub const NEGATIVE_L2_CLAMP: f64 = 1e-10;

const ORACLE_RULE_ORDER: usize = 20;
const ORACLE_PANEL_WIDTH: f64 = 0.25;
const ORACLE_TOL: f64 = 1e-11;
const ORACLE_MAX_LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxKind {
    FracDerivative,
    OrderDerivative,
}

/// An exponential sum read as an approximation of `f_{a,σ}` or `∂_a f_{a,σ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracApprox {
    pub params: FracParams,
    pub sum: ExponentialSum,
    pub kind: ApproxKind,
}

impl FracApprox {
    pub fn new(params: FracParams, sum: ExponentialSum, kind: ApproxKind) -> Result<Self> {
        if sum.is_empty() {
            return Err(Error::InvalidInput("approximation needs at least one term".into()));
        }
        if !(params.sigma > 0.0) {
            return Err(Error::InvalidInput(format!("sigma = {} must be positive", params.sigma)));
        }
        Ok(Self { params, sum, kind })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Time,
    Frequency,
}

/// Complex samples on a strictly increasing real axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexGrid {
    pub axis: Vec<f64>,
    pub values: Vec<Complex64>,
    pub axis_kind: AxisKind,
}

impl ComplexGrid {
    pub fn new(axis: Vec<f64>, values: Vec<Complex64>, axis_kind: AxisKind) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "axis has {} points but {} values",
                axis.len(),
                values.len()
            )));
        }
        check_axis(&axis)?;
        Ok(Self { axis, values, axis_kind })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// `max_j |self_j − other_j|` over a shared axis.
    pub fn max_abs_diff(&self, other: &ComplexGrid) -> Result<f64> {
        if self.axis != other.axis {
            return Err(Error::InvalidInput("grids have different axes".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("grid contains a non-finite point".into()));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("grid axis must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Closed-form and quadrature L2 errors plus the pointwise error on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l2_closed_form: f64,
    pub l2_quadrature: f64,
    /// `|closed − quadrature| / max(closed, quadrature, NEGATIVE_L2_CLAMP)`
    pub relative_gap: f64,
    pub max_pointwise: f64,
    pub range: (f64, f64),
}

/// Moment count, rank tolerance and order cap used when an approximation is
/// built from scratch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub moments: usize,
    pub tol: f64,
    pub max_order: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { moments: 64, tol: 1e-10, max_order: 24 }
    }
}

/// Solves the fractional moment problem for `params`.
pub fn frac_approx(params: FracParams, settings: SolverSettings) -> Result<(FracApprox, SolveReport)> {
    let h = frac_moments(params, settings.moments)?;
    let (sum, report) = solve(&h, settings.tol, settings.max_order)?;
    Ok((FracApprox::new(params, sum, ApproxKind::FracDerivative)?, report))
}

/// Solves the order-derivative moment problem for `params`.
pub fn order_deriv_approx(params: FracParams, settings: SolverSettings) -> Result<(FracApprox, SolveReport)> {
    let h = order_deriv_moments(params, settings.moments)?;
    let (sum, report) = solve(&h, settings.tol, settings.max_order)?;
    Ok((FracApprox::new(params, sum, ApproxKind::OrderDerivative)?, report))
}

/// `Σ α_m g(γ_m t)` on `t` with the reference Dawson function.
pub fn eval_approx(approx: &FracApprox, t: &[f64]) -> Result<ComplexGrid> {
    eval_approx_with(approx, t, DawsonImpl::Reference)
}

/// `Σ α_m g(γ_m t)` on `t` with a chosen Dawson evaluator.
pub fn eval_approx_with(approx: &FracApprox, t: &[f64], dawson: DawsonImpl<'_>) -> Result<ComplexGrid> {
    let values = t
        .iter()
        .map(|&x| eval_sum_at(&approx.sum, x, dawson))
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(t.to_vec(), values, AxisKind::Time)
}

fn eval_sum_at(sum: &ExponentialSum, t: f64, dawson: DawsonImpl<'_>) -> Result<Complex64> {
    sum.terms
        .iter()
        .map(|term| Ok(term.alpha * g_kernel(term.gamma * t, dawson)?))
        .sum()
}

/// Same evaluation rule as [`eval_approx`], restricted to order-derivative sums.
pub fn order_deriv_eval(approx: &FracApprox, t: &[f64]) -> Result<ComplexGrid> {
    if approx.kind != ApproxKind::OrderDerivative {
        return Err(Error::InvalidInput("order_deriv_eval needs an order-derivative approximation".into()));
    }
    eval_approx(approx, t)
}

/// `ω_max` with `e^{−ω²/2} ω^a = 10^{−16}`.
fn omega_max(a: f64) -> f64 {
    let target = 16.0 * 10f64.ln();
    let mut w: f64 = 8.0;
    for _ in 0..50 {
        w = (2.0 * (target + a * w.ln())).max(1.0).sqrt();
    }
    w
}

/// Precomputed nodes and weights of `∫_0^{ω_max} ω^a e^{−ω²/2} (ln ω)^k · dω`
/// at successively halved panel widths.
struct OracleRule {
    a: f64,
    log_power: bool,
    breaks: Vec<f64>,
    levels: Vec<(Vec<f64>, Vec<f64>)>,
    gauss: GaussLegendre,
}

impl OracleRule {
    fn new(a: f64, log_power: bool) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::Domain(format!("oracle needs a > -1, got {a}")));
        }
        let w_max = omega_max(a);
        // below δ the integrand's mass is under 1e-17
        let delta = (1e-17 * (a + 1.0)).powf(1.0 / (a + 1.0));
        let mut breaks = graded_breaks(0.0, 1.0, delta, 0.25);
        breaks.pop();
        breaks.extend(uniform_breaks(1.0, w_max, ORACLE_PANEL_WIDTH));
        let mut rule = Self { a, log_power, breaks, levels: Vec::new(), gauss: GaussLegendre::new(ORACLE_RULE_ORDER) };
        rule.push_level();
        rule.push_level();
        Ok(rule)
    }

    fn push_level(&mut self) {
        let level = self.levels.len();
        let mut breaks = self.breaks.clone();
        for _ in 0..level {
            breaks = crate::quadrature::halve(&breaks);
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            for (x, wt) in self.gauss.nodes.iter().zip(&self.gauss.weights) {
                let omega = mid + half * x;
                let mut weight = wt * half * omega.powf(self.a) * (-0.5 * omega * omega).exp();
                if self.log_power {
                    weight *= omega.ln();
                }
                nodes.push(omega);
                weights.push(weight);
            }
        }
        self.levels.push((nodes, weights));
    }

    fn apply(&self, level: usize, x: f64) -> Complex64 {
        let (nodes, weights) = &self.levels[level];
        nodes
            .iter()
            .zip(weights)
            .map(|(w, wt)| Complex64::from_polar(*wt, w * x))
            .sum()
    }

    /// `∫_0^∞ ω^a (ln ω)^k e^{−ω²/2} e^{iωx} dω`, refined until two levels agree.
    fn integrate(&mut self, x: f64) -> Result<Complex64> {
        let mut prev = self.apply(0, x);
        for level in 1..ORACLE_MAX_LEVELS {
            if level == self.levels.len() {
                self.push_level();
            }
            let next = self.apply(level, x);
            if (next - prev).norm() < ORACLE_TOL {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature(format!("oracle integral at x = {x} did not settle")))
    }
}

/// Large-`|x|` expansion of `∫_0^∞ ω^a e^{−ω²/2} e^{iωx} dω` and its
/// `a`-derivative: `Σ_j (−½)^j/j! Γ(a+2j+1) (−ix)^{−(a+2j+1)}`, truncated
/// before the terms start to grow.
fn oracle_asymptotic(a: f64, x: f64, with_log: bool) -> Result<(Complex64, Complex64)> {
    let ln_z = Complex64::new(x.abs().ln(), -FRAC_PI_2 * x.signum());
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for j in 0..200 {
        let jf = j as f64;
        let order = a + 2.0 * jf + 1.0;
        // order > 0, so Γ(order) > 0
        let ln_mag = jf * 0.5f64.ln() - ln_gamma(jf + 1.0)? + ln_gamma(order)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (Complex64::new(ln_mag, 0.0) - order * ln_z).exp();
        let size = term.norm();
        if size > last {
            break;
        }
        value += term;
        if with_log {
            deriv += term * (digamma_real(order)? - ln_z);
        }
        last = size;
        if size < 1e-17 * value.norm() {
            break;
        }
    }
    Ok((value, deriv))
}

/// `f_{a,σ}(t)` by quadrature in `ω` (large `|t/σ|` by the asymptotic series).
pub fn oracle_eval(params: FracParams, t: &[f64]) -> Result<ComplexGrid> {
    let mut rule = OracleRule::new(params.a, false)?;
    let prefactor = (2.0 / PI).sqrt() * params.phase() * params.sigma.powf(-params.a);
    let values = t
        .iter()
        .map(|&ti| {
            let x = ti / params.sigma;
            let integral = if x.abs() >= ORACLE_ASYMPTOTIC_THRESHOLD {
                oracle_asymptotic(params.a, x, false)?.0
            } else {
                rule.integrate(x)?
            };
            Ok(prefactor * integral)
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(t.to_vec(), values, AxisKind::Time)
}

/// Exact `∂_a f_{a,σ}(t)` by quadrature of the `ln ω`-weighted integral.
pub fn oracle_order_deriv(params: FracParams, t: &[f64]) -> Result<ComplexGrid> {
    let mut plain = OracleRule::new(params.a, false)?;
    let mut logged = OracleRule::new(params.a, true)?;
    let prefactor = (2.0 / PI).sqrt() * params.phase() * params.sigma.powf(-params.a);
    let shift = Complex64::new(-params.sigma.ln(), FRAC_PI_2);
    let values = t
        .iter()
        .map(|&ti| {
            let x = ti / params.sigma;
            let (value, deriv) = if x.abs() >= ORACLE_ASYMPTOTIC_THRESHOLD {
                oracle_asymptotic(params.a, x, true)?
            } else {
                (plain.integrate(x)?, logged.integrate(x)?)
            };
            Ok(prefactor * (deriv + shift * value))
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(t.to_vec(), values, AxisKind::Time)
}

fn require_rotatable(sum: &ExponentialSum) -> Result<()> {
    match sum.gammas().find(|g| (g * g).re <= 0.0) {
        Some(g) => Err(Error::Domain(format!("node {g} has Re(gamma^2) <= 0"))),
        None => Ok(()),
    }
}

/// The spectrum of the approximation and the exact symbol, both in the
/// integration variable `ω` of the target's integral:
/// `Σ α_m/(√2σγ_m) e^{−ω²/(4σ²γ_m²)}` and `e^{−ω²/2} (ω/σ)^a e^{iaπ/2}`.
pub fn spectrum(approx: &FracApprox, omega: &[f64]) -> Result<(ComplexGrid, ComplexGrid)> {
    require_rotatable(&approx.sum)?;
    if omega.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidInput("spectrum is one-sided: omega must be >= 0".into()));
    }
    let FracParams { a, sigma } = approx.params;
    let approx_values = omega
        .iter()
        .map(|&w| {
            approx
                .sum
                .terms
                .iter()
                .map(|t| {
                    let sg = sigma * t.gamma;
                    t.alpha / (SQRT_2 * sg) * (-(w * w) / (4.0 * sg * sg)).exp()
                })
                .sum()
        })
        .collect();
    let phase = approx.params.phase();
    let exact_values = omega
        .iter()
        .map(|&w| phase * ((-0.5 * w * w).exp() * (w / sigma).powf(a)))
        .collect();
    Ok((
        ComplexGrid::new(omega.to_vec(), approx_values, AxisKind::Frequency)?,
        ComplexGrid::new(omega.to_vec(), exact_values, AxisKind::Frequency)?,
    ))
}

/// `∫|f̃ − f|² dt` in closed form, from Parseval's identity applied to the
/// one-sided spectra:
///
/// `4[ Σ_{m,m'} ᾱ_{m'}α_m/(2γ̄_{m'}γ_m)·½√(π/c) + ½σ^{1−2a}Γ(a+½)
///     − 2 Re Σ_m conj(α_m/(√2γ_m)) σ e^{iaπ/2} ½Γ((a+1)/2) b_m^{−(a+1)/2} ]`
///
/// with `c = 1/(4γ̄_{m'}²) + 1/(4γ_m²)` and `b_m = σ²/2 + 1/(4γ̄_m²)`, all
/// powers on the principal branch.
pub fn l2_error_closed_form(approx: &FracApprox) -> Result<f64> {
    let FracParams { a, sigma } = approx.params;
    if !(a > -0.5) {
        return Err(Error::Domain(format!("closed-form L2 needs a > -1/2, got {a}")));
    }
    require_rotatable(&approx.sum)?;
    let terms = &approx.sum.terms;

    // The three parts are O(1) while their combination is the squared error,
    // and individual products grow like |α|²; accumulate in double-double.
    let pi = ComplexDD::real(twofloat::consts::PI);
    let mut diagonal = ComplexDD::real(0.0.into());
    for p in terms {
        for q in terms {
            let gp = ComplexDD::from(p.gamma.conj());
            let gq = ComplexDD::from(q.gamma);
            let c = (ComplexDD::real(1.0.into()) / (gp * gp) + ComplexDD::real(1.0.into()) / (gq * gq)) * 0.25;
            let weight = ComplexDD::from(p.alpha.conj()) * ComplexDD::from(q.alpha) / (gp * gq * 2.0);
            diagonal = diagonal + weight * (pi / c).sqrt() * 0.5;
        }
    }

    let target = 0.5 * sigma.powf(1.0 - 2.0 * a) * gamma_real(a + 0.5)?;

    let half_gamma = 0.5 * gamma_real((a + 1.0) / 2.0)?;
    let phase = ComplexDD::cis(twofloat::consts::FRAC_PI_2 * a);
    let sqrt_2 = ComplexDD::real(twofloat::consts::SQRT_2);
    let mut cross = ComplexDD::real(0.0.into());
    for t in terms {
        let gc = ComplexDD::from(t.gamma.conj());
        let b = ComplexDD::real((0.5 * sigma).into()) * sigma + ComplexDD::real(0.25.into()) / (gc * gc);
        let weight = (ComplexDD::from(t.alpha) / (sqrt_2 * ComplexDD::from(t.gamma))).conj();
        cross = cross + weight * phase * b.powf(-(a + 1.0) / 2.0) * (sigma * half_gamma);
    }

    let value = to_f64((diagonal.re + target - cross.re * 2.0) * 4.0);
    if value < -NEGATIVE_L2_CLAMP {
        return Err(Error::NegativeResult(value));
    }
    Ok(value.max(0.0))
}

/// `∫|f̃ − f|² dt` over `t_range` by adaptive quadrature. Infinite endpoints
/// are handled by mapping each tail `|t| > T₀` onto `s = T₀/|t| ∈ (0, 1]`.
pub fn l2_error_quadrature(approx: &FracApprox, t_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = t_range;
    if !(lo < hi) || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidInput(format!("empty range [{lo}, {hi}]")));
    }
    let gauss = GaussLegendre::new(ORACLE_RULE_ORDER);
    let mut rule = OracleRule::new(approx.params.a, false)?;
    let prefactor = (2.0 / PI).sqrt() * approx.params.phase() * approx.params.sigma.powf(-approx.params.a);
    let sigma = approx.params.sigma;
    let mut failure: Option<Error> = None;
    let mut sq_err = |t: f64| -> f64 {
        let x = t / sigma;
        let exact = if x.abs() >= ORACLE_ASYMPTOTIC_THRESHOLD {
            oracle_asymptotic(approx.params.a, x, false).map(|v| v.0)
        } else {
            rule.integrate(x)
        };
        match exact.and_then(|e| Ok(eval_sum_at(&approx.sum, t, DawsonImpl::Reference)? - prefactor * e)) {
            Ok(d) => d.norm_sqr(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };

    let core = 10.0 * sigma;
    let tol = 1e-13;
    let mut total = 0.0;
    let (core_lo, core_hi) = (lo.max(-core), hi.min(core));
    if core_lo < core_hi {
        total += integrate_refined(&gauss, uniform_breaks(core_lo, core_hi, 0.5), tol, 8, &mut sq_err)?;
    }
    // tails: ∫_{T₀}^{T} e(±t)² dt = ∫_{T₀/T}^{1} e(±T₀/s)² T₀/s² ds
    for (sign, end) in [(1.0, hi), (-1.0, -lo)] {
        if end <= core {
            continue;
        }
        let s_min = if end.is_infinite() { 0.0 } else { core / end };
        let breaks = graded_breaks(s_min, 1.0, 1e-8, 0.5);
        total += integrate_refined(&gauss, breaks, tol, 8, |s: f64| {
            if s == 0.0 {
                return 0.0;
            }
            let t = sign * core / s;
            sq_err(t) * core / (s * s)
        })?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Both L2 measures and the max pointwise error on `grid`.
pub fn error_report(approx: &FracApprox, grid: &[f64]) -> Result<ErrorReport> {
    let l2_closed_form = l2_error_closed_form(approx)?;
    let l2_quadrature = l2_error_quadrature(approx, (f64::NEG_INFINITY, f64::INFINITY))?;
    // both values below the clamp are roundoff; measure the gap against it
    let denom = l2_closed_form.abs().max(l2_quadrature.abs()).max(NEGATIVE_L2_CLAMP);
    let relative_gap = (l2_closed_form - l2_quadrature).abs() / denom;
    let approx_grid = eval_approx(approx, grid)?;
    let exact_grid = oracle_eval(approx.params, grid)?;
    let range = (grid.first().copied().unwrap_or(0.0), grid.last().copied().unwrap_or(0.0));
    Ok(ErrorReport {
        l2_closed_form,
        l2_quadrature,
        relative_gap,
        max_pointwise: approx_grid.max_abs_diff(&exact_grid)?,
        range,
    })
}

/// Central difference `(f̃_{a+Δa} − f̃_{a−Δa})/(2Δa)` of freshly solved
/// approximations. Both sides use the same number of nodes, the larger of the
/// two numerical ranks, so that the difference does not jump with the rank.
pub fn finite_difference_order(
    params: FracParams,
    delta_a: f64,
    t: &[f64],
    settings: SolverSettings,
) -> Result<ComplexGrid> {
    if !(delta_a > 0.0) {
        return Err(Error::InvalidInput(format!("delta_a = {delta_a} must be positive")));
    }
    let upper = FracParams::new(params.a + delta_a, params.sigma)?;
    let lower = FracParams::new(params.a - delta_a, params.sigma)?;
    let h_up = frac_moments(upper, settings.moments)?;
    let h_lo = frac_moments(lower, settings.moments)?;
    let order = numerical_rank(&h_up, settings.tol)?.max(numerical_rank(&h_lo, settings.tol)?);
    if order > settings.max_order {
        return Err(Error::Rank { rank: order, max_order: settings.max_order, tol: settings.tol });
    }
    let side = |p: FracParams, h: &MomentSequence| -> Result<ComplexGrid> {
        let (sum, _) = solve_fixed_order(h, order)?;
        eval_approx(&FracApprox::new(p, sum, ApproxKind::FracDerivative)?, t)
    };
    let f_up = side(upper, &h_up)?;
    let f_lo = side(lower, &h_lo)?;
    let values = f_up
        .values
        .iter()
        .zip(&f_lo.values)
        .map(|(u, l)| (u - l) / (2.0 * delta_a))
        .collect();
    ComplexGrid::new(t.to_vec(), values, AxisKind::Time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentsolve::Term;
    use crate::special_fn::{dawson_ref, TWO_OVER_SQRT_PI};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(a: f64, sigma: f64, alpha: Complex64, gamma: Complex64) -> FracApprox {
        let sum = ExponentialSum::new("t", vec![Term { alpha, gamma }]).unwrap();
        FracApprox::new(FracParams::new(a, sigma).unwrap(), sum, ApproxKind::FracDerivative).unwrap()
    }

    #[test]
    fn exact_case_matches_kernel() {
        let approx = single(0.0, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        let t = linspace(-6.0, 6.0, 49);
        let grid = eval_approx(&approx, &t).unwrap();
        for (x, v) in t.iter().zip(&grid.values) {
            assert!((v.re - (-x * x).exp()).abs() < 1e-15);
            assert!((v.im - TWO_OVER_SQRT_PI * dawson_ref(*x)).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_case_for_several_widths() {
        let t = linspace(-6.0, 6.0, 61);
        for sigma in [0.5, FRAC_1_SQRT_2, 1.0, 2.0] {
            let approx = single(0.0, sigma, c(1.0, 0.0), c(1.0 / (sigma * SQRT_2), 0.0));
            let gap = eval_approx(&approx, &t).unwrap().max_abs_diff(&oracle_eval(approx.params, &t).unwrap()).unwrap();
            assert!(gap < 1e-10, "sigma = {sigma}: {gap}");
        }
    }

    #[test]
    fn oracle_at_origin() {
        let p = FracParams::new(0.0, FRAC_1_SQRT_2).unwrap();
        assert!((oracle_eval(p, &[0.0]).unwrap().values[0] - c(1.0, 0.0)).norm() < 1e-12);
        let p = FracParams::default();
        let expect = Complex64::from_polar(1.0, PI / 4.0) * (2.0 / PI).sqrt() * gamma_real(0.75).unwrap();
        assert!((oracle_eval(p, &[0.0]).unwrap().values[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn oracle_integer_orders() {
        for sigma in [0.6, 1.3] {
            let pts: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| k * sigma).collect();
            let first = oracle_eval(FracParams::new(1.0, sigma).unwrap(), &pts).unwrap();
            let second = oracle_eval(FracParams::new(2.0, sigma).unwrap(), &pts).unwrap();
            for (j, t) in pts.iter().enumerate() {
                let gauss = (-t * t / (2.0 * sigma * sigma)).exp();
                let d1 = -t / (sigma * sigma) * gauss;
                let d2 = (t * t / sigma.powi(4) - 1.0 / (sigma * sigma)) * gauss;
                assert!((first.values[j].re - d1).abs() < 1e-10);
                assert!((second.values[j].re - d2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn oracle_branches_agree_at_switch() {
        for a in [0.0, 0.5, 1.5] {
            let mut plain = OracleRule::new(a, false).unwrap();
            let mut logged = OracleRule::new(a, true).unwrap();
            for x in [-12.0, -10.0, 10.0, 12.0] {
                let (value, deriv) = oracle_asymptotic(a, x, true).unwrap();
                assert!((plain.integrate(x).unwrap() - value).norm() < 1e-10, "a = {a}, x = {x}");
                assert!((logged.integrate(x).unwrap() - deriv).norm() < 1e-10, "a = {a}, x = {x}");
            }
        }
    }

    #[test]
    fn oracle_order_deriv_matches_difference() {
        let p = FracParams::new(0.7, 0.8).unwrap();
        let t = [-3.0, -0.4, 0.0, 1.1, 5.0];
        let h = 1e-4;
        let up = oracle_eval(FracParams::new(0.7 + h, 0.8).unwrap(), &t).unwrap();
        let lo = oracle_eval(FracParams::new(0.7 - h, 0.8).unwrap(), &t).unwrap();
        let exact = oracle_order_deriv(p, &t).unwrap();
        for (j, x) in t.iter().enumerate() {
            let fd = (up.values[j] - lo.values[j]) / (2.0 * h);
            assert!((fd - exact.values[j]).norm() < 1e-7, "t = {x}");
        }
    }

    #[test]
    fn spectrum_exact_case_is_identity() {
        let approx = single(0.0, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        let w = linspace(0.0, 6.0, 25);
        let (s, e) = spectrum(&approx, &w).unwrap();
        assert!(s.max_abs_diff(&e).unwrap() < 1e-15);
        let half = single(0.5, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(spectrum(&half, &[0.0]).unwrap().1.values[0], c(0.0, 0.0));
    }

    #[test]
    fn spectrum_rejects_bad_nodes() {
        let approx = single(0.5, 1.0, c(1.0, 0.0), c(1.0, 1.5));
        assert!(matches!(spectrum(&approx, &[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(l2_error_closed_form(&approx), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_inverse_transform() {
        let approx = single(0.3, 0.9, c(0.8, -0.3), c(1.1, 0.2));
        let sigma = approx.params.sigma;
        let gauss = GaussLegendre::new(20);
        for t in [-2.0, 0.0, 0.7, 3.0] {
            let integral: Complex64 = integrate_refined(&gauss, uniform_breaks(0.0, 40.0, 0.25), 1e-13, 6, |w| {
                let s = spectrum(&approx, &[w]).unwrap().0.values[0];
                s * Complex64::from_polar(1.0, w * t / sigma)
            })
            .unwrap();
            let direct = eval_approx(&approx, &[t]).unwrap().values[0];
            assert!(((2.0 / PI).sqrt() * integral - direct).norm() < 1e-8);
        }
    }

    #[test]
    fn closed_form_vanishes_in_exact_case() {
        let approx = single(0.0, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        assert!(l2_error_closed_form(&approx).unwrap() < 1e-12);
        let wide = single(0.0, 2.0, c(1.0, 0.0), c(1.0 / (2.0 * SQRT_2), 0.0));
        assert!(l2_error_closed_form(&wide).unwrap() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature_single_term() {
        let approx = single(0.5, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        let closed = l2_error_closed_form(&approx).unwrap();
        let quad = l2_error_quadrature(&approx, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert!((closed - quad).abs() < 1e-6 * closed, "{closed} vs {quad}");
    }

    #[test]
    fn closed_form_matches_quadrature_perturbed() {
        let approx = single(0.0, FRAC_1_SQRT_2, c(1.0 + 1e-3, 0.0), c(1.0, 0.0));
        let closed = l2_error_closed_form(&approx).unwrap();
        let quad = l2_error_quadrature(&approx, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        // ‖1e-3·g‖² = 1e-6·√(2π)
        assert!((closed - 1e-6 * (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((closed - quad).abs() < 1e-6 * closed);
    }

    #[test]
    fn exact_case_quadrature_is_zero() {
        let approx = single(0.0, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        assert!(l2_error_quadrature(&approx, (f64::NEG_INFINITY, f64::INFINITY)).unwrap() < 1e-12);
    }

    #[test]
    fn finite_range_is_part_of_whole_line() {
        let approx = single(0.5, FRAC_1_SQRT_2, c(1.0, 0.0), c(1.0, 0.0));
        let part = l2_error_quadrature(&approx, (-3.0, 20.0)).unwrap();
        let whole = l2_error_quadrature(&approx, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert!(part > 0.0 && part < whole);
    }

    #[test]
    fn grid_validation() {
        assert!(ComplexGrid::new(vec![0.0, 0.0], vec![c(0.0, 0.0); 2], AxisKind::Time).is_err());
        assert!(ComplexGrid::new(vec![0.0, 1.0], vec![c(0.0, 0.0)], AxisKind::Time).is_err());
        assert_eq!(linspace(-6.0, 6.0, 481).len(), 481);
        assert_eq!(linspace(-6.0, 6.0, 481)[240], 0.0);
    }

    #[test]
    fn order_eval_requires_kind() {
        let approx = single(0.5, 1.0, c(1.0, 0.0), c(1.0, 0.0));
        assert!(order_deriv_eval(&approx, &[0.0]).is_err());
    }
}
