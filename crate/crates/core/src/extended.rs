//! Complex double-double arithmetic for sums whose terms cancel to many
//! digits. Addition, multiplication and division come from `twofloat`; the
//! elementary functions are evaluated here by Taylor series and Newton steps.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use twofloat::{consts, TwoFloat};

const TAYLOR_TERMS: usize = 40;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

pub(crate) fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

/// `x / y` with two residual corrections. `TwoFloat`'s own quotient forms
/// its residual without a fused multiply-add and is only good to `f64`
/// precision.
pub(crate) fn quotient(x: TwoFloat, y: TwoFloat) -> TwoFloat {
    let q1 = x.hi() / y.hi();
    let r = x - y * q1;
    let q2 = r.hi() / y.hi();
    let r = r - y * q2;
    let q3 = r.hi() / y.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// `eˣ` by reduction `x = k ln 2 + r`, `|r| ≤ ln 2 / 2`, and a Taylor series in `r`.
pub(crate) fn exp(x: TwoFloat) -> TwoFloat {
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = x - consts::LN_2 * k;
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for n in 1..TAYLOR_TERMS {
        term = term * r / n as f64;
        sum += term;
        if term.hi().abs() < 1e-34 * sum.hi().abs() {
            break;
        }
    }
    sum * 2f64.powi(k as i32)
}

/// `(sin x, cos x)` for moderate `|x|`, reduced by multiples of `π/2`.
pub(crate) fn sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let k = (x.hi() / std::f64::consts::FRAC_PI_2).round();
    let r = x - consts::FRAC_PI_2 * k;
    let r2 = r * r;
    let (mut s, mut c) = (r, dd(1.0));
    let (mut ts, mut tc) = (r, dd(1.0));
    for n in 1..TAYLOR_TERMS {
        let m = 2.0 * n as f64;
        ts = -ts * r2 / (m * (m + 1.0));
        tc = -tc * r2 / ((m - 1.0) * m);
        s += ts;
        c += tc;
        if tc.hi().abs() < 1e-34 {
            break;
        }
    }
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `ln x` for `x > 0`: Newton steps `l ← l + x e^{−l} − 1` from the `f64` logarithm.
pub(crate) fn ln(x: TwoFloat) -> TwoFloat {
    let mut l = dd(x.hi().ln());
    for _ in 0..2 {
        l = l + x * exp(-l) - 1.0;
    }
    l
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ComplexDD {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

impl ComplexDD {
    pub fn real(re: TwoFloat) -> Self {
        Self { re, im: dd(0.0) }
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    #[cfg(test)]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(to_f64(self.re), to_f64(self.im))
    }

    /// `e^{iθ}`
    pub fn cis(theta: TwoFloat) -> Self {
        let (s, c) = sin_cos(theta);
        Self { re: c, im: s }
    }

    pub fn exp(self) -> Self {
        Self::cis(self.im) * exp(self.re)
    }

    /// Principal logarithm; the argument is refined from `atan2` by Newton
    /// steps on `y cos θ − x sin θ = 0`.
    pub fn ln(self) -> Self {
        let norm_sqr = self.re * self.re + self.im * self.im;
        let mut theta = dd(self.im.hi().atan2(self.re.hi()));
        for _ in 0..2 {
            let (s, c) = sin_cos(theta);
            theta += quotient(self.im * c - self.re * s, self.re * c + self.im * s);
        }
        Self { re: ln(norm_sqr) * 0.5, im: theta }
    }

    /// `z^p` on the principal branch.
    pub fn powf(self, p: f64) -> Self {
        (self.ln() * p).exp()
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }
}

impl From<Complex64> for ComplexDD {
    fn from(z: Complex64) -> Self {
        Self { re: dd(z.re), im: dd(z.im) }
    }
}

impl Add for ComplexDD {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for ComplexDD {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Neg for ComplexDD {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul for ComplexDD {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Mul<TwoFloat> for ComplexDD {
    type Output = Self;
    fn mul(self, rhs: TwoFloat) -> Self {
        Self { re: self.re * rhs, im: self.im * rhs }
    }
}

impl Mul<f64> for ComplexDD {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self { re: self.re * rhs, im: self.im * rhs }
    }
}

impl Div for ComplexDD {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let denom = rhs.re * rhs.re + rhs.im * rhs.im;
        Self {
            re: quotient(self.re * rhs.re + self.im * rhs.im, denom),
            im: quotient(self.im * rhs.re - self.re * rhs.im, denom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // hi/lo split of a 60-digit evaluation
    fn exact(hi: f64, lo: f64) -> TwoFloat {
        TwoFloat::new_add(hi, lo)
    }

    fn rel(x: TwoFloat, y: TwoFloat) -> f64 {
        to_f64(quotient(x - y, y)).abs()
    }

    #[test]
    fn quotient_is_double_double() {
        let third = quotient(dd(1.0), dd(3.0));
        assert!(to_f64(third * 3.0 - 1.0).abs() < 1e-31);
        let x = TwoFloat::new_add(1.7, 3e-17);
        let y = TwoFloat::new_add(-0.9, 1e-18);
        assert!(to_f64(quotient(x, y) * y - x).abs() < 1e-31);
    }

    #[test]
    fn exp_against_reference() {
        // e^x at the double nearest −2.3
        let expected = exact(0.10025884372280375, 3.8616592363140386e-18);
        assert!(rel(exp(dd(-2.3)), expected) < 1e-30);
        assert!(rel(exp(dd(0.0)), dd(1.0)) == 0.0);
    }

    #[test]
    fn ln_inverts_exp() {
        for x in [1e-8, 0.3, 1.0, 2.5, 1e6] {
            assert!(to_f64(exp(ln(dd(x))) - x).abs() < 1e-30 * x);
        }
    }

    #[test]
    fn pythagoras_and_quadrants() {
        for x in [-7.0, -2.0, -0.4, 0.0, 0.8, 1.6, 3.1, 4.7] {
            let (s, c) = sin_cos(dd(x));
            assert!(to_f64(s * s + c * c - 1.0).abs() < 1e-30);
            assert!((to_f64(s) - f64::sin(x)).abs() < 1e-15);
            assert!((to_f64(c) - f64::cos(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn complex_power_round_trip() {
        let z = ComplexDD::from(Complex64::new(0.3, -1.7));
        let back = z.powf(-0.5).powf(-2.0);
        assert!((back - z).to_complex().norm() < 1e-30);
        let r = z.sqrt();
        assert!((r * r - z).to_complex().norm() < 1e-30);
        assert!((r.to_complex() - Complex64::new(0.3, -1.7).sqrt()).norm() < 1e-15);
    }
}
