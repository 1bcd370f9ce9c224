//! Power-moment sequences for the fractional-derivative, order-derivative and
//! sinc/cosinc problems.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::special_fn::{digamma_real, ln_gamma};
use crate::{Error, Result};

/// Fractional order `a` and Gaussian width `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub a: f64,
    pub sigma: f64,
}

impl FracParams {
    pub fn new(a: f64, sigma: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidInput(format!("order a = {a} is not finite")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma = {sigma} must be positive")));
        }
        Ok(Self { a, sigma })
    }

    /// `e^{iaπ/2}`
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.a * FRAC_PI_2)
    }
}

impl Default for FracParams {
    fn default() -> Self {
        Self { a: 0.5, sigma: std::f64::consts::FRAC_1_SQRT_2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Fractional,
    OrderDerivative,
    SincCosinc,
}

/// `h_0 … h_{N−1}` together with the problem that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub values: Vec<Complex64>,
    pub kind: MomentKind,
    pub params: Option<FracParams>,
}

impl MomentSequence {
    pub fn new(values: Vec<Complex64>, kind: MomentKind, params: Option<FracParams>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a moment sequence needs at least 2 entries, got {}",
                values.len()
            )));
        }
        if let Some(n) = values.iter().position(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(Error::Overflow(format!("moment h_{n} is not finite")));
        }
        Ok(Self { values, kind, params })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|h| h.norm()).fold(0.0, f64::max)
    }
}

fn check_count(count: usize) -> Result<()> {
    if count < 2 {
        Err(Error::InvalidInput(format!("moment count must be at least 2, got {count}")))
    } else {
        Ok(())
    }
}

/// `ln` of the real magnitude of the fractional moment
/// `(√2/σ)^{a+n} Γ((n+2)/2) Γ((a+n+1)/2) / (√π n!)`.
fn frac_log_magnitude(params: &FracParams, n: usize) -> Result<f64> {
    let nf = n as f64;
    let ln_scale = (SQRT_2 / params.sigma).ln();
    Ok((params.a + nf) * ln_scale + ln_gamma((nf + 2.0) / 2.0)? + ln_gamma((params.a + nf + 1.0) / 2.0)?
        - ln_gamma(nf + 1.0)?
        - 0.5 * PI.ln())
}

/// Moments `h_n = (1/√π) e^{iaπ/2} (√2/σ)^{a+n} Γ((n+2)/2) Γ((a+n+1)/2) / n!`.
///
/// `Γ((a+n+1)/2)` changes sign for `a + n + 1 < 0`; the sign is carried
/// separately from the log-magnitude.
pub fn frac_moments(params: FracParams, count: usize) -> Result<MomentSequence> {
    check_count(count)?;
    let phase = params.phase();
    let values = (0..count)
        .map(|n| {
            let arg = (params.a + n as f64 + 1.0) / 2.0;
            let sign = gamma_sign(arg);
            let mag = frac_log_magnitude(&params, n)?.exp();
            if !mag.is_finite() {
                return Err(Error::Overflow(format!("moment h_{n} exceeds double range")));
            }
            Ok(phase * (sign * mag))
        })
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(values, MomentKind::Fractional, Some(params))
}

fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The bracket `ln(√2/σ) + ½ψ((a+n+1)/2) + iπ/2` relating the order-derivative
/// moments to the fractional ones.
pub fn order_bracket(params: FracParams, n: usize) -> Result<Complex64> {
    let psi = digamma_real((params.a + n as f64 + 1.0) / 2.0)?;
    Ok(Complex64::new((SQRT_2 / params.sigma).ln() + 0.5 * psi, FRAC_PI_2))
}

/// Moments of `∂_a f_{a,σ}`: the fractional moments times `order_bracket`.
pub fn order_deriv_moments(params: FracParams, count: usize) -> Result<MomentSequence> {
    let frac = frac_moments(params, count)?;
    let values = frac
        .values
        .iter()
        .enumerate()
        .map(|(n, h)| Ok(h * order_bracket(params, n)?))
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(values, MomentKind::OrderDerivative, Some(params))
}

/// Moments `Γ((n+2)/2)/(n+1)!` of the sinc/cosinc problem.
pub fn sinc_moments(count: usize) -> Result<MomentSequence> {
    check_count(count)?;
    let values = (0..count)
        .map(|n| {
            let nf = n as f64;
            Ok(Complex64::new((ln_gamma((nf + 2.0) / 2.0)? - ln_gamma(nf + 2.0)?).exp(), 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(values, MomentKind::SincCosinc, None)
}
