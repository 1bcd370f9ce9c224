//! Gamma, digamma, Dawson's integral and the Gaussian+Dawson kernel `g`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dawson_approx::DawsonRational;
use crate::{Error, Result};

/// `2/√π`
pub const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this magnitude `dawson_ref` sums the exponentially scaled power
/// series; above it the asymptotic `1/(2x)` expansion is used.
pub const DAWSON_SERIES_CUTOFF: f64 = 6.0;

/// `Re{z²}` below this value means `e^{-z²}` leaves double range.
pub const GAUSSIAN_OVERFLOW_LIMIT: f64 = -700.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// B_{2k}/(2k), k = 1..7
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn check_finite(z: Complex64, function: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{function}: non-finite argument {z}")))
    }
}

/// Γ(z) by the Lanczos approximation (g = 7, nine coefficients), with the
/// reflection formula for `Re z < 1/2`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    check_finite(z, "gamma")?;
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "gamma", at: z });
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        PI / ((PI * z).sin() * gamma_unchecked(1.0 - z))
    } else {
        let z = z - 1.0;
        let (series, t) = lanczos_sum(z);
        ((z + 0.5) * t.ln() - t).exp() * series * (2.0 * PI).sqrt()
    }
}

fn lanczos_sum(z: Complex64) -> (Complex64, Complex64) {
    let mut series = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    (series, z + LANCZOS_G + 0.5)
}

/// Real Γ(x).
pub fn gamma_real(x: f64) -> Result<f64> {
    gamma(Complex64::new(x, 0.0)).map(|g| g.re)
}

/// `ln|Γ(x)|` for real `x`, accurate for large arguments where Γ itself
/// overflows.
pub fn ln_gamma(x: f64) -> Result<f64> {
    let z = Complex64::new(x, 0.0);
    check_finite(z, "ln_gamma")?;
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "ln_gamma", at: z });
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - ln_gamma_unchecked(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut series = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            series += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
    }
}

/// Digamma ψ(z) = Γ'(z)/Γ(z).
///
/// The argument is raised by `ψ(z) = ψ(z+1) − 1/z` until `Re z ≥ 8`, then
/// the Bernoulli asymptotic series is summed. Arguments with `Re z < 1/2`
/// go through `ψ(z) = ψ(1−z) − π cot(πz)`.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_finite(z, "digamma")?;
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "digamma", at: z });
    }
    Ok(digamma_unchecked(z))
}

fn digamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return digamma_unchecked(1.0 - z) - PI / (PI * z).tan();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 8.0 {
        acc -= w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for c in DIGAMMA_ASYMP {
        tail += p * c;
        p *= inv2;
    }
    acc + w.ln() - 0.5 * inv - tail
}

/// Real ψ(x).
pub fn digamma_real(x: f64) -> Result<f64> {
    digamma(Complex64::new(x, 0.0)).map(|d| d.re)
}

/// Dawson's integral `F(x) = e^{-x²} ∫_0^x e^{t²} dt` for real `x`.
///
/// For `|x| < DAWSON_SERIES_CUTOFF` this sums `e^{-x²} Σ x^{2n+1}/(n!(2n+1))`,
/// whose terms are all positive; beyond it the asymptotic series
/// `(1/2x) Σ (2k−1)!!/(2x²)^k` is truncated at its smallest term.
pub fn dawson_ref(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { x } else { 0.0 };
    }
    let ax = x.abs();
    let value = if ax < DAWSON_SERIES_CUTOFF {
        let x2 = ax * ax;
        let mut power = ax; // x^{2n+1}/n!
        let mut sum = ax;
        let mut n = 0.0;
        loop {
            n += 1.0;
            power *= x2 / n;
            let term = power / (2.0 * n + 1.0);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (-x2).exp() * sum
    } else {
        let inv = 1.0 / (2.0 * ax * ax);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            let next = term * (2.0 * k - 1.0) * inv;
            if next >= term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * ax)
    };
    value.copysign(x)
}

const WEIDEMAN_N: usize = 40;

struct Weideman {
    l: f64,
    // a_1..a_N; p(Z) = Σ a_n Z^{n-1}
    coef: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        let sample = |k: i64| {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            (-t * t).exp() * (l * l + t * t)
        };
        // Samples in FFT order: k = 0..m-1, a zero at index m, then k = -(m-1)..-1.
        let shifted: Vec<f64> = (0..m2)
            .map(|j| match j.cmp(&m) {
                std::cmp::Ordering::Less => sample(j as i64),
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => sample(j as i64 - m2 as i64),
            })
            .collect();
        let coef = (1..=n)
            .map(|k| {
                let s: f64 = shifted
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (2.0 * PI * (j * k % m2) as f64 / m2 as f64).cos())
                    .sum();
                s / m2 as f64
            })
            .collect();
        Weideman { l, coef }
    })
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    let table = weideman();
    let i = Complex64::i();
    let denom = table.l - i * z;
    let big_z = (table.l + i * z) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in table.coef.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

/// Faddeeva function `w(z) = e^{-z²} erfc(-iz)` by Weideman's rational
/// expansion (N = 40). For `Im z < 0` the reflection
/// `w(z) = 2e^{-z²} − w(−z)` is applied.
///
/// On the real axis `w(x) = e^{-x²} + i(2/√π)F(x)`, so `w` is the analytic
/// continuation of the kernel `g`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        2.0 * (-z * z).exp() - faddeeva_upper(-z)
    }
}

/// Which Dawson evaluator `g_kernel` uses.
#[derive(Debug, Clone, Copy, Default)]
pub enum DawsonImpl<'a> {
    /// `dawson_ref` on the real axis, the Faddeeva function off it.
    #[default]
    Reference,
    /// The rational approximation `F̃(z) = z Σ α_m/(1+(2γ_m z)²)`.
    Rational(&'a DawsonRational),
}

/// The kernel `g(z) = e^{-z²} + i(2/√π)F(z)`, whose Taylor coefficients are
/// `iⁿ/Γ((n+2)/2)`.
pub fn g_kernel(z: Complex64, dawson: DawsonImpl<'_>) -> Result<Complex64> {
    check_finite(z, "g_kernel")?;
    let z2 = z * z;
    if z2.re < GAUSSIAN_OVERFLOW_LIMIT {
        return Err(Error::Overflow(format!("e^(-z^2) at z = {z}")));
    }
    match dawson {
        DawsonImpl::Reference => {
            if z.im == 0.0 {
                Ok(Complex64::new((-z2.re).exp(), TWO_OVER_SQRT_PI * dawson_ref(z.re)))
            } else {
                Ok(faddeeva(z))
            }
        }
        DawsonImpl::Rational(rational) => {
            let f = rational.eval_complex(z)?;
            Ok((-z2).exp() + Complex64::i() * TWO_OVER_SQRT_PI * f)
        }
    }
}

/// `sin(x)/x`, continuous at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `(1 − cos x)/x`, continuous at zero.
pub fn cosinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        x / 2.0 - x * x2 / 24.0 + x * x2 * x2 / 720.0
    } else {
        // 1 − cos x = 2 sin²(x/2) avoids cancellation near zero
        let s = (0.5 * x).sin();
        2.0 * s * s / x
    }
}
