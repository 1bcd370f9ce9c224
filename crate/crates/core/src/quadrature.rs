//! Composite Gauss–Legendre quadrature with panel halving.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

/// Values a quadrature rule can accumulate.
pub trait Integrand: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f on a single panel.
    pub fn panel<T: Integrand>(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Sum of panel integrals over consecutive breakpoints.
    pub fn composite<T: Integrand>(&self, breaks: &[f64], f: &mut impl FnMut(f64) -> T) -> T {
        breaks
            .windows(2)
            .fold(T::zero(), |acc, w| acc + self.panel(w[0], w[1], f))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Breakpoints `lo, lo + (hi-lo)·r^{k}, …, hi` graded geometrically towards
/// `lo`, with the smallest panel no wider than `finest`.
pub fn graded_breaks(lo: f64, hi: f64, finest: f64, ratio: f64) -> Vec<f64> {
    let width = hi - lo;
    let mut offsets = vec![width];
    let mut h = width;
    while h > finest {
        h *= ratio;
        offsets.push(h);
    }
    offsets.push(0.0);
    offsets.iter().rev().map(|d| lo + d).collect()
}

/// Uniform breakpoints on `[lo, hi]` with panels no wider than `max_width`.
pub fn uniform_breaks(lo: f64, hi: f64, max_width: f64) -> Vec<f64> {
    let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Splits every panel in two.
pub fn halve(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(last) = breaks.last() {
        out.push(*last);
    }
    out
}

/// Integrates over `breaks`, halving every panel until two successive
/// estimates agree to `tol` (absolute, or relative to the estimate when it
/// is larger than one).
pub fn integrate_refined<T: Integrand>(
    rule: &GaussLegendre,
    breaks: Vec<f64>,
    tol: f64,
    max_halvings: usize,
    mut f: impl FnMut(f64) -> T,
) -> Result<T> {
    let mut breaks = breaks;
    let mut prev = rule.composite(&breaks, &mut f);
    for _ in 0..max_halvings {
        breaks = halve(&breaks);
        let next = rule.composite(&breaks, &mut f);
        let change = (next + prev * -1.0).magnitude();
        if change <= tol * next.magnitude().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "no convergence after {max_halvings} halvings of {} panels",
        breaks.len() - 1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(10);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // degree 19 is the limit for 10 points
        let v = rule.panel(0.0, 1.0, &mut |x: f64| x.powi(19));
        assert!((v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let rule = GaussLegendre::new(7);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rule.nodes[3], 0.0);
        assert!((rule.nodes[0] + rule.nodes[6]).abs() < 1e-16);
    }

    #[test]
    fn refined_complex_integral() {
        let rule = GaussLegendre::new(20);
        let v = integrate_refined(&rule, uniform_breaks(0.0, PI, 0.5), 1e-13, 6, |x| {
            Complex64::new(0.0, x).exp()
        })
        .unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn graded_breaks_resolve_endpoint_singularity() {
        let rule = GaussLegendre::new(20);
        let breaks = graded_breaks(0.0, 1.0, 1e-20, 0.25);
        assert_eq!(breaks[0], 0.0);
        assert_eq!(*breaks.last().unwrap(), 1.0);
        let v = integrate_refined(&rule, breaks, 1e-12, 4, |x: f64| x.powf(-0.5)).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn refinement_reports_failure() {
        let rule = GaussLegendre::new(2);
        let r = integrate_refined(&rule, vec![0.0, 1.0], 1e-15, 1, |x: f64| (50.0 * x).sin());
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
