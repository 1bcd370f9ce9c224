//! Recovery of `(α_m, γ_m)` from `h_n ≈ Σ_m α_m γ_m^n`.
//!
//! Nodes come from a matrix pencil on the dominant right singular subspace of
//! the moment Hankel matrix, then are polished by variable-projection
//! Levenberg–Marquardt; weights are the Vandermonde least-squares solution.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Schur, QR, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::moments::MomentSequence;
use crate::{Error, Result};

/// Nodes closer than this (relative to their magnitude) are merged.
pub const COINCIDENT_NODE_TOL: f64 = 1e-12;

const SVD_MAX_ITER: usize = 10_000;
const SCHUR_MAX_ITER: usize = 10_000;
const REFINE_MAX_ITER: usize = 100;
const REFINE_MAX_DAMPING_STEPS: usize = 30;

/// One `(α, γ)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Complex64,
    pub gamma: Complex64,
}

/// `Σ_m α_m k(γ_m t)` for whichever kernel `k` the caller applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSum {
    pub label: String,
    pub a: Option<f64>,
    pub sigma: Option<f64>,
    pub terms: Vec<Term>,
}

impl ExponentialSum {
    pub fn new(label: impl Into<String>, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("an exponential sum needs at least one term".into()));
        }
        if let Some(t) = terms.iter().find(|t| {
            !(t.alpha.re.is_finite() && t.alpha.im.is_finite() && t.gamma.re.is_finite() && t.gamma.im.is_finite())
        }) {
            return Err(Error::InvalidInput(format!("non-finite term {t:?}")));
        }
        Ok(Self { label: label.into(), a: None, sigma: None, terms })
    }

    pub fn from_pairs(label: impl Into<String>, pairs: &[(Complex64, Complex64)]) -> Result<Self> {
        Self::new(label, pairs.iter().map(|&(alpha, gamma)| Term { alpha, gamma }).collect())
    }

    pub fn with_params(mut self, a: f64, sigma: f64) -> Self {
        self.a = Some(a);
        self.sigma = Some(sigma);
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn alphas(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.terms.iter().map(|t| t.alpha)
    }

    pub fn gammas(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.terms.iter().map(|t| t.gamma)
    }

    /// Canonical order: ascending `Re γ`, then ascending `Im γ`.
    pub fn sort_terms(&mut self) {
        self.terms.sort_by(|x, y| {
            x.gamma
                .re
                .total_cmp(&y.gamma.re)
                .then(x.gamma.im.total_cmp(&y.gamma.im))
        });
    }

    /// Every term scaled by `c`: the solution of the moment problem `c·h_n`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.alpha *= c;
        }
        out
    }
}

/// `Σ_m α_m γ_m^n`, each power built by repeated multiplication.
pub fn eval_sum(sum: &ExponentialSum, n: usize) -> Complex64 {
    sum.terms
        .iter()
        .map(|t| {
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..n {
                p *= t.gamma;
            }
            t.alpha * p
        })
        .sum()
}

/// `h_n − Σ α_m γ_m^n` for every moment.
pub fn residuals(moments: &MomentSequence, sum: &ExponentialSum) -> Vec<Complex64> {
    let mut powers: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); sum.len()];
    moments
        .values
        .iter()
        .map(|h| {
            let fit: Complex64 = sum.terms.iter().zip(&powers).map(|(t, p)| t.alpha * p).sum();
            for (p, t) in powers.iter_mut().zip(&sum.terms) {
                *p *= t.gamma;
            }
            h - fit
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub residuals: Vec<Complex64>,
    pub max_abs_residual: f64,
    pub model_order: usize,
    /// `σ_{M+1}/σ_1` of the scaled Hankel matrix, zero when nothing was discarded.
    pub svd_tail: f64,
    /// Positions (in the sorted sum) of nodes with `Re γ ≤ 0`.
    pub nonpositive_nodes: Vec<usize>,
    /// The moments were solved as `h_n/ρⁿ`; this is `ρ`.
    pub scale: f64,
}

impl SolveReport {
    fn new(moments: &MomentSequence, sum: &ExponentialSum, svd_tail: f64, scale: f64) -> Self {
        let residuals = residuals(moments, sum);
        let max_abs_residual = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let nonpositive_nodes = sum
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.gamma.re <= 0.0)
            .map(|(i, _)| i)
            .collect();
        Self { residuals, max_abs_residual, model_order: sum.len(), svd_tail, nonpositive_nodes, scale }
    }

    /// `max|ε_n| ≤ 10·tol·max|h_n|`.
    pub fn within_contract(&self, tol: f64, moments: &MomentSequence) -> bool {
        self.max_abs_residual <= 10.0 * tol * moments.max_abs()
    }
}

enum OrderRule {
    Tolerance { tol: f64, max_order: usize },
    Fixed(usize),
}

/// Solves with the model order given by the numerical rank of the Hankel
/// matrix at relative tolerance `tol`.
pub fn solve(moments: &MomentSequence, tol: f64, max_order: usize) -> Result<(ExponentialSum, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol = {tol} must be positive")));
    }
    if max_order == 0 || moments.len() < 2 * max_order {
        return Err(Error::InvalidInput(format!(
            "max_order = {max_order} needs at least {} moments, got {}",
            2 * max_order.max(1),
            moments.len()
        )));
    }
    solve_with(moments, OrderRule::Tolerance { tol, max_order })
}

/// Solves with exactly `order` nodes (fewer only if some coincide).
pub fn solve_fixed_order(moments: &MomentSequence, order: usize) -> Result<(ExponentialSum, SolveReport)> {
    if order == 0 || moments.len() < 2 * order {
        return Err(Error::InvalidInput(format!(
            "order {order} needs at least {} moments, got {}",
            2 * order.max(1),
            moments.len()
        )));
    }
    solve_with(moments, OrderRule::Fixed(order))
}

/// Numerical rank of the scaled moment Hankel matrix at relative tolerance `tol`.
pub fn numerical_rank(moments: &MomentSequence, tol: f64) -> Result<usize> {
    let scale = moment_scale(&moments.values);
    let singular = hankel_svd(&scaled_moments(&moments.values, scale))?.singular_values;
    Ok(rank_of(singular.as_slice(), tol))
}

fn rank_of(singular: &[f64], tol: f64) -> usize {
    let top = singular[0];
    singular.iter().filter(|s| **s > tol * top).count()
}

/// `ρ = (|h_{N−1}|/|h_{N/2}|)^{1/(N−1−N/2)}`, the geometric growth rate of the
/// tail, so that `h_n/ρⁿ` stays within a modest dynamic range.
fn moment_scale(h: &[Complex64]) -> f64 {
    let n = h.len();
    let mid = n / 2;
    if n < 3 || n - 1 == mid {
        return 1.0;
    }
    let rho = (h[n - 1].norm() / h[mid].norm()).powf(1.0 / (n - 1 - mid) as f64);
    if rho.is_finite() && rho > 0.0 {
        rho
    } else {
        1.0
    }
}

fn scaled_moments(h: &[Complex64], scale: f64) -> Vec<Complex64> {
    let mut factor = 1.0;
    h.iter()
        .map(|v| {
            let out = v / factor;
            factor *= scale;
            out
        })
        .collect()
}

fn hankel_svd(h: &[Complex64]) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = h.len();
    let cols = n / 2 + 1;
    let rows = n - n / 2;
    let hankel = DMatrix::from_fn(rows, cols, |i, j| h[i + j]);
    let svd = SVD::try_new(hankel, false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Convergence("Hankel SVD did not converge".into()))?;
    if svd.singular_values.is_empty() || svd.singular_values[0] == 0.0 {
        return Err(Error::Degenerate("all moments vanish".into()));
    }
    Ok(svd)
}

fn solve_with(moments: &MomentSequence, rule: OrderRule) -> Result<(ExponentialSum, SolveReport)> {
    let scale = moment_scale(&moments.values);
    let h = scaled_moments(&moments.values, scale);
    let svd = hankel_svd(&h)?;
    let singular = svd.singular_values.as_slice();
    let pencil_rows = h.len() / 2;
    let order = match rule {
        OrderRule::Tolerance { tol, max_order } => {
            let rank = rank_of(singular, tol);
            if rank > max_order {
                return Err(Error::Rank { rank, max_order, tol });
            }
            rank
        }
        OrderRule::Fixed(order) => order,
    };
    if order > singular.len() || order > pencil_rows {
        return Err(Error::InvalidInput(format!(
            "model order {order} exceeds what {} moments can resolve",
            h.len()
        )));
    }
    let svd_tail = singular.get(order).map_or(0.0, |s| s / singular[0]);

    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Convergence("SVD returned no right singular vectors".into()))?;
    let nodes = pencil_nodes(v_t, order)?;
    let nodes = merge_coincident(nodes);
    let nodes = merge_coincident(refine_nodes(&h, nodes));
    let scaled_fit = VandermondeFit::new(&h, &nodes)
        .ok_or_else(|| Error::Degenerate("Vandermonde system is singular".into()))?;

    // The scaled fit weighs every moment evenly; a refit against the raw
    // moments weighs them by size. Keep whichever leaves the smaller raw residual.
    let gammas: Vec<Complex64> = nodes.iter().map(|z| z * scale).collect();
    let build = |alpha: &DVector<Complex64>| -> Result<ExponentialSum> {
        let terms = gammas.iter().zip(alpha.iter()).map(|(g, a)| Term { alpha: *a, gamma: *g }).collect();
        let mut sum = ExponentialSum::new("solved", terms)?;
        if let Some(p) = moments.params {
            sum = sum.with_params(p.a, p.sigma);
        }
        sum.sort_terms();
        Ok(sum)
    };
    let max_residual = |sum: &ExponentialSum| residuals(moments, sum).iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut sum = build(&scaled_fit.alpha)?;
    if let Some(raw_fit) = VandermondeFit::new(&moments.values, &gammas) {
        let candidate = build(&raw_fit.alpha)?;
        if max_residual(&candidate) < max_residual(&sum) {
            sum = candidate;
        }
    }
    let report = SolveReport::new(moments, &sum, svd_tail, scale);
    Ok((sum, report))
}

/// Eigenvalues of `V₁⁺V₂`, where `V` holds the leading `order` right singular
/// vectors as columns (the rows of `Vᴴ`, transposed without conjugation) and
/// `V₁`, `V₂` drop its last and first rows.
fn pencil_nodes(v_t: &DMatrix<Complex64>, order: usize) -> Result<Vec<Complex64>> {
    let v = v_t.rows(0, order).transpose();
    let rows = v.nrows() - 1;
    let v1 = v.rows(0, rows).into_owned();
    let v2 = v.rows(1, rows).into_owned();
    let phi = least_squares(v1, &v2)
        .ok_or_else(|| Error::Convergence("matrix pencil is rank deficient".into()))?;
    let schur = Schur::try_new(phi, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Convergence("pencil eigenvalue iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Convergence("pencil Schur form is not triangular".into()))?;
    Ok(eig.iter().copied().collect())
}

/// `argmin ‖A x − B‖` column by column through a thin QR of `A`.
fn least_squares(a: DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let qr = QR::new(a);
    let rhs = qr.q().adjoint() * b;
    let x = qr.r().solve_upper_triangular(&rhs)?;
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

fn merge_coincident(nodes: Vec<Complex64>) -> Vec<Complex64> {
    let mut kept: Vec<Complex64> = Vec::with_capacity(nodes.len());
    for z in nodes {
        let dup = kept
            .iter()
            .any(|k| (k - z).norm() <= COINCIDENT_NODE_TOL * k.norm().max(z.norm()).max(1.0));
        if !dup {
            kept.push(z);
        }
    }
    kept
}

fn vandermonde(nodes: &[Complex64], rows: usize) -> DMatrix<Complex64> {
    let mut v = DMatrix::from_element(rows, nodes.len(), Complex64::new(1.0, 0.0));
    for (k, z) in nodes.iter().enumerate() {
        for n in 1..rows {
            v[(n, k)] = v[(n - 1, k)] * z;
        }
    }
    v
}

struct VandermondeFit {
    alpha: DVector<Complex64>,
    residual: DVector<Complex64>,
    q: DMatrix<Complex64>,
}

impl VandermondeFit {
    fn new(h: &[Complex64], nodes: &[Complex64]) -> Option<Self> {
        let v = vandermonde(nodes, h.len());
        let target = DVector::from_column_slice(h);
        let qr = QR::new(v.clone());
        let q = qr.q();
        let alpha = qr.r().solve_upper_triangular(&(q.adjoint() * &target))?;
        if !alpha.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return None;
        }
        let residual = target - v * &alpha;
        Some(Self { alpha, residual, q })
    }

    fn cost(&self) -> f64 {
        self.residual.norm()
    }
}

/// Variable-projection Levenberg–Marquardt on the nodes alone.
///
/// The Jacobian of the projected residual is approximated by Kaufman's
/// `−(I − QQᴴ) ∂V/∂z · α`; columns are scaled to unit norm before damping.
/// Only steps that lower the residual norm are accepted, so the result is
/// never worse than the input.
fn refine_nodes(h: &[Complex64], nodes: Vec<Complex64>) -> Vec<Complex64> {
    let Some(mut fit) = VandermondeFit::new(h, &nodes) else {
        return nodes;
    };
    let mut nodes = nodes;
    let mut cost = fit.cost();
    let m = nodes.len();
    let rows = h.len();
    let mut damping: f64 = 1e-6;
    for _ in 0..REFINE_MAX_ITER {
        if cost == 0.0 {
            break;
        }
        let mut deriv = DMatrix::zeros(rows, m);
        for k in 0..m {
            let mut p = Complex64::new(1.0, 0.0);
            for n in 1..rows {
                deriv[(n, k)] = p * n as f64 * fit.alpha[k];
                p *= nodes[k];
            }
        }
        let jac = -(&deriv - &fit.q * (fit.q.adjoint() * &deriv));
        let col_scale: Vec<f64> = jac
            .column_iter()
            .map(|c| {
                let s = c.norm();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();

        let mut improved = None;
        for _ in 0..REFINE_MAX_DAMPING_STEPS {
            let mut aug = DMatrix::zeros(rows + m, m);
            for k in 0..m {
                for n in 0..rows {
                    aug[(n, k)] = jac[(n, k)] / col_scale[k];
                }
                aug[(rows + k, k)] = Complex64::new(damping.sqrt(), 0.0);
            }
            let mut rhs = DMatrix::zeros(rows + m, 1);
            for n in 0..rows {
                rhs[(n, 0)] = -fit.residual[n];
            }
            let trial = least_squares(aug, &rhs).and_then(|step| {
                let moved: Vec<Complex64> =
                    nodes.iter().enumerate().map(|(k, z)| z + step[(k, 0)] / col_scale[k]).collect();
                VandermondeFit::new(h, &moved).map(|f| (moved, f))
            });
            if let Some((moved, next)) = trial {
                let next_cost = next.cost();
                if next_cost.is_finite() && next_cost < cost {
                    let gain = (cost - next_cost) / cost;
                    nodes = moved;
                    fit = next;
                    cost = next_cost;
                    damping = (damping / 10.0).max(1e-16);
                    improved = Some(gain);
                    break;
                }
            }
            damping *= 10.0;
        }
        match improved {
            Some(gain) if gain >= 1e-10 => {}
            _ => break,
        }
    }
    nodes
}

/// Coefficient sets printed in the reference tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    /// Fractional-derivative sum, `a = 1/2`, `σ = 1/√2`, twelve terms.
    Table1,
    /// Sinc/cosinc sum, eight terms in conjugate pairs.
    Table2,
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Table::Table1 => "table1",
            Table::Table2 => "table2",
        })
    }
}

impl FromStr for Table {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Table::Table1),
            "table2" => Ok(Table::Table2),
            other => Err(Error::InvalidInput(format!("unknown table `{other}`"))),
        }
    }
}

#[allow(clippy::excessive_precision)]
const TABLE1: [[f64; 4]; 12] = [
    [-0.002327462216272, -0.002323117038281, 0.022707194026268, -0.000014485869526],
    [-0.008686498484022, -0.008672831744140, 0.088058420558651, -0.000050483776843],
    [-0.017746649906246, -0.017725233118614, 0.188199334944285, -0.000090762508709],
    [-0.028479502359746, -0.028455359343906, 0.311644959787523, -0.000118301948941],
    [-0.040781085680949, -0.040758739735612, 0.445550822358306, -0.000124204777278],
    [-0.055691041043028, -0.055672403045923, 0.578033122632225, -0.000110160892971],
    [-0.075799236577609, -0.075783432858215, 0.699719488265476, -0.000084621403249],
    [-0.106825493665143, -0.106809444597271, 0.804243109619030, -0.000056714249345],
    [2.224002927119579, 2.223687081665376, 1.001024232778366, 0.000000290415923],
    [-0.846706907066594, -0.846588952992167, 0.986812368161672, -0.000003755178001],
    [-0.296187315352343, -0.296147582995713, 0.948969382632748, -0.000014668011082],
    [-0.163403417748510, -0.163381667176418, 0.887911302390365, -0.000032513183747],
];

#[allow(clippy::excessive_precision)]
const TABLE2: [[f64; 4]; 8] = [
    [-0.117532571756027, -0.003575367485193, 0.003599251866768, 0.023031988828263],
    [-0.117532571756027, 0.003575367485193, 0.003599251866768, -0.023031988828263],
    [2.658250413824904, -0.872108421067261, 0.015512727403264, 0.023419328488677],
    [2.658250413824904, 0.872108421067261, 0.015512727403264, -0.023419328488677],
    [9.141742362072840, -34.331838882055756, 0.032137996250724, 0.006297276091330],
    [9.141742362072840, 34.331838882055756, 0.032137996250724, -0.006297276091330],
    [-11.182460204141808, 11.443034213692357, 0.026033590315800, 0.017203623738202],
    [-11.182460204141808, -11.443034213692357, 0.026033590315800, -0.017203623738202],
];

/// The printed coefficients, row order and digits unchanged.
///
/// Table 2's second column holds `γ²` rather than `γ`; see
/// [`DawsonRational::from_printed_table2`](crate::DawsonRational::from_printed_table2).
pub fn load_table(which: Table) -> ExponentialSum {
    let (rows, label): (&[[f64; 4]], _) = match which {
        Table::Table1 => (&TABLE1, "table1"),
        Table::Table2 => (&TABLE2, "table2"),
    };
    let terms = rows
        .iter()
        .map(|r| Term { alpha: Complex64::new(r[0], r[1]), gamma: Complex64::new(r[2], r[3]) })
        .collect();
    let sum = ExponentialSum { label: label.into(), a: None, sigma: None, terms };
    match which {
        Table::Table1 => sum.with_params(0.5, std::f64::consts::FRAC_1_SQRT_2),
        Table::Table2 => sum,
    }
}
