//! The `fracgauss` command line.
//!
//! Exit codes: 0 success, 1 residual contract violated, 2 rank exceeds the
//! order cap, 3 eigenvalue iteration failed, 4 I/O or JSON failure, 5 domain
//! error, 6 any other numerical failure, 64 bad usage.

use std::ffi::OsString;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::dawson_approx::{check_bounds, sinc_cosinc_approx, DawsonRational};
use crate::fracgauss::{
    error_report, eval_approx, finite_difference_order, linspace, oracle_eval, oracle_order_deriv,
    order_deriv_approx, spectrum, ApproxKind, FracApprox, SolverSettings,
};
use crate::io::{columns_csv, grid_csv, read_sum, to_json, write_atomic};
use crate::moments::{frac_moments, order_deriv_moments, sinc_moments, FracParams, MomentSequence};
use crate::momentsolve::{load_table, solve, Table};
use crate::special_fn::{cosinc, sinc};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 1;
pub const EXIT_RANK: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_DOMAIN: i32 = 5;
pub const EXIT_NUMERIC: i32 = 6;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "fracgauss", version, about = "Gaussian-sum approximations of fractional derivatives of the Gaussian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the fractional-derivative moment problem.
    SolveFrac(SolveArgs),
    /// Solve the order-derivative moment problem.
    SolveOrder(SolveArgs),
    /// Solve the sinc/cosinc moment problem.
    SolveSinc(SincArgs),
    /// Evaluate a sum (or its spectrum) on a grid.
    Eval(EvalArgs),
    /// L2 and pointwise errors, or the Dawson bound checks.
    Error(ErrorArgs),
    /// Order derivative against central differences in the order.
    OrderDeriv(OrderDerivArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableArg {
    Table1,
    Table2,
}

impl From<TableArg> for Table {
    fn from(t: TableArg) -> Self {
        match t {
            TableArg::Table1 => Table::Table1,
            TableArg::Table2 => Table::Table2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Number of moments.
    #[arg(long, default_value_t = 64)]
    pub moments: usize,
    /// Relative singular-value tolerance for the model order.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest accepted model order.
    #[arg(long, default_value_t = 24)]
    pub max_order: usize,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings { moments: self.moments, tol: self.tol, max_order: self.max_order }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Fractional order a.
    #[arg(long = "a", default_value_t = 0.5, allow_hyphen_values = true)]
    pub a: f64,
    /// Gaussian width σ.
    #[arg(long, default_value_t = FRAC_1_SQRT_2)]
    pub sigma: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Sum JSON destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solve report JSON destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SincArgs {
    #[arg(long, default_value_t = 48)]
    pub moments: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 24)]
    pub max_order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Use a printed coefficient table.
    #[arg(long, value_enum, conflicts_with = "sum")]
    pub table: Option<TableArg>,
    /// Use a sum stored as JSON.
    #[arg(long)]
    pub sum: Option<PathBuf>,
    /// Fractional order (defaults to the sum's own, then 0.5).
    #[arg(long = "a", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Gaussian width (defaults to the sum's own, then 1/√2).
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Grid as LO HI N.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Evaluate the spectrum instead of the time-domain sum.
    #[arg(long)]
    pub spectrum: bool,
    /// Add the exact target as extra columns.
    #[arg(long)]
    pub with_oracle: bool,
    /// Solve and evaluate for every a in START:STEP:END, one file each.
    #[arg(long, value_name = "START:STEP:END")]
    pub sweep_a: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output directory for --sweep-a.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ErrorArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Check the rational Dawson approximation and its bounds instead.
    #[arg(long)]
    pub dawson: bool,
    /// Grid for the pointwise error as LO HI N.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Dawson scan extent (0, X_MAX].
    #[arg(long, default_value_t = 200.0)]
    pub x_max: f64,
    /// Dawson scan points.
    #[arg(long, default_value_t = 20_000)]
    pub scan_points: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrderDerivArgs {
    #[arg(long = "a", default_value_t = 0.5, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = FRAC_1_SQRT_2)]
    pub sigma: f64,
    /// Order step(s) for the central difference, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1e-3")]
    pub delta_a: Vec<f64>,
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Add the exact ∂_a f as extra columns.
    #[arg(long)]
    pub with_oracle: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const TIME_GRID: (f64, f64, usize) = (-6.0, 6.0, 481);
const FREQUENCY_GRID: (f64, f64, usize) = (0.0, 6.0, 241);

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Rank { .. } => EXIT_RANK,
        Error::Convergence(_) => EXIT_CONVERGENCE,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::Domain(_) => EXIT_DOMAIN,
        Error::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_RESIDUAL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command; `Ok(false)` means the outputs were written but a
/// residual exceeded its contract.
pub fn execute(command: &Command) -> Result<bool> {
    match command {
        Command::SolveFrac(args) => cmd_solve(args, MomentFamily::Fractional),
        Command::SolveOrder(args) => cmd_solve(args, MomentFamily::OrderDerivative),
        Command::SolveSinc(args) => cmd_solve_sinc(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Error(args) => cmd_error(args),
        Command::OrderDeriv(args) => cmd_order_deriv(args),
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn grid_points(grid: &Option<Vec<f64>>, default: (f64, f64, usize)) -> Result<Vec<f64>> {
    let (lo, hi, n) = match grid.as_deref() {
        Some([lo, hi, n]) => {
            if n.fract() != 0.0 || *n < 2.0 {
                return Err(Error::InvalidInput(format!("grid size {n} must be an integer >= 2")));
            }
            (*lo, *hi, *n as usize)
        }
        Some(_) => return Err(Error::InvalidInput("--grid takes LO HI N".into())),
        None => default,
    };
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("grid needs LO < HI, got {lo} >= {hi}")));
    }
    Ok(linspace(lo, hi, n))
}

enum MomentFamily {
    Fractional,
    OrderDerivative,
}

fn cmd_solve(args: &SolveArgs, family: MomentFamily) -> Result<bool> {
    let params = FracParams::new(args.a, args.sigma)?;
    let h = match family {
        MomentFamily::Fractional => frac_moments(params, args.solver.moments)?,
        MomentFamily::OrderDerivative => order_deriv_moments(params, args.solver.moments)?,
    };
    finish_solve(&h, args.solver.tol, args.solver.max_order, args.out.as_deref(), args.report.as_deref())
}

fn cmd_solve_sinc(args: &SincArgs) -> Result<bool> {
    let h = sinc_moments(args.moments)?;
    finish_solve(&h, args.tol, args.max_order, args.out.as_deref(), args.report.as_deref())
}

fn finish_solve(h: &MomentSequence, tol: f64, max_order: usize, out: Option<&Path>, report_out: Option<&Path>) -> Result<bool> {
    let (sum, report) = solve(h, tol, max_order)?;
    let ok = report.within_contract(tol, h);
    if let Some(path) = report_out {
        write_atomic(path, &to_json(&report)?)?;
    }
    emit(out, &to_json(&sum)?)?;
    eprintln!(
        "model order {}, max |residual| {:.3e}, svd tail {:.3e}{}",
        report.model_order,
        report.max_abs_residual,
        report.svd_tail,
        if ok { "" } else { " (exceeds 10*tol*max|h|)" }
    );
    Ok(ok)
}

/// What `--table`/`--sum` selected, with its evaluation parameters resolved.
enum Source {
    Frac(FracApprox),
    Sinc(DawsonRational),
}

fn resolve_source(source: &SourceArgs, solver: &SolverArgs) -> Result<Source> {
    let sum = match (source.table, &source.sum) {
        (Some(TableArg::Table2), _) => return Ok(Source::Sinc(DawsonRational::from_printed_table2()?)),
        (Some(TableArg::Table1), _) => Some(load_table(Table::Table1)),
        (None, Some(path)) => Some(read_sum(path)?),
        (None, None) => None,
    };
    let default = FracParams::default();
    let a = source.a.or(sum.as_ref().and_then(|s| s.a)).unwrap_or(default.a);
    let sigma = source.sigma.or(sum.as_ref().and_then(|s| s.sigma)).unwrap_or(default.sigma);
    let params = FracParams::new(a, sigma)?;
    let approx = match sum {
        Some(sum) => FracApprox::new(params, sum, ApproxKind::FracDerivative)?,
        None => crate::fracgauss::frac_approx(params, solver.settings())?.0,
    };
    Ok(Source::Frac(approx))
}

fn cmd_eval(args: &EvalArgs) -> Result<bool> {
    if let Some(spec) = &args.sweep_a {
        return cmd_eval_sweep(args, spec);
    }
    let csv = match resolve_source(&args.source, &args.solver)? {
        Source::Frac(approx) => eval_csv(&approx, args)?,
        Source::Sinc(rational) => {
            if args.spectrum {
                return Err(Error::InvalidInput("--spectrum applies to fractional-derivative sums".into()));
            }
            let x = grid_points(&args.grid, TIME_GRID)?;
            let grid = sinc_cosinc_approx(rational.sum(), &x)?;
            if args.with_oracle {
                let exact: Vec<Complex64> = x.iter().map(|&v| Complex64::new(sinc(v), cosinc(v))).collect();
                grid_csv(&grid, &[("exact", &exact)])?
            } else {
                grid_csv(&grid, &[])?
            }
        }
    };
    emit(args.out.as_deref(), &csv)?;
    Ok(true)
}

fn eval_csv(approx: &FracApprox, args: &EvalArgs) -> Result<String> {
    if args.spectrum {
        let omega = grid_points(&args.grid, FREQUENCY_GRID)?;
        let (approx_spec, exact_spec) = spectrum(approx, &omega)?;
        let header: Vec<String> =
            ["axis", "re", "im", "abs", "re_exact", "im_exact", "abs_exact"].iter().map(|s| s.to_string()).collect();
        let columns = vec![
            omega.clone(),
            approx_spec.values.iter().map(|z| z.re).collect(),
            approx_spec.values.iter().map(|z| z.im).collect(),
            approx_spec.values.iter().map(|z| z.norm()).collect(),
            exact_spec.values.iter().map(|z| z.re).collect(),
            exact_spec.values.iter().map(|z| z.im).collect(),
            exact_spec.values.iter().map(|z| z.norm()).collect(),
        ];
        return columns_csv(&header, &columns);
    }
    let t = grid_points(&args.grid, TIME_GRID)?;
    let grid = eval_approx(approx, &t)?;
    if args.with_oracle {
        let exact = oracle_eval(approx.params, &t)?;
        grid_csv(&grid, &[("exact", &exact.values)])
    } else {
        grid_csv(&grid, &[])
    }
}

/// `START:STEP:END` with END included when it lies on the lattice.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("sweep `{spec}`: {e}"))))
        .collect::<Result<_>>()?;
    let [start, step, end] = parts[..] else {
        return Err(Error::InvalidInput(format!("sweep `{spec}` must be START:STEP:END")));
    };
    if !(step > 0.0) || end < start {
        return Err(Error::InvalidInput(format!("sweep `{spec}` needs STEP > 0 and END >= START")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

fn cmd_eval_sweep(args: &EvalArgs, spec: &str) -> Result<bool> {
    if args.source.table.is_some() || args.source.sum.is_some() {
        return Err(Error::InvalidInput("--sweep-a solves afresh; drop --table/--sum".into()));
    }
    let sigma = args.source.sigma.unwrap_or(FRAC_1_SQRT_2);
    let orders = parse_sweep(spec)?;
    fs::create_dir_all(&args.out_dir)?;
    let kind = if args.spectrum { "spectrum" } else { "eval" };
    // compute every panel before writing any file
    let files = orders
        .iter()
        .map(|&a| {
            let params = FracParams::new(a, sigma)?;
            let (approx, _) = crate::fracgauss::frac_approx(params, args.solver.settings())?;
            Ok((args.out_dir.join(format!("{kind}_a{a:.3}.csv")), eval_csv(&approx, args)?))
        })
        .collect::<Result<Vec<_>>>()?;
    for (path, csv) in &files {
        write_atomic(path, csv)?;
    }
    eprintln!("wrote {} files to {}", files.len(), args.out_dir.display());
    Ok(true)
}

fn cmd_error(args: &ErrorArgs) -> Result<bool> {
    if args.dawson {
        let rational = match (&args.source.table, &args.source.sum) {
            (Some(TableArg::Table1), _) => {
                return Err(Error::InvalidInput("--dawson needs the sinc table or a sinc sum".into()))
            }
            (None, Some(path)) => DawsonRational::new(read_sum(path)?)?,
            _ => DawsonRational::from_printed_table2()?,
        };
        let check = check_bounds(&rational, args.x_max, args.scan_points)?;
        emit(args.out.as_deref(), &to_json(&check)?)?;
        return Ok(true);
    }
    let approx = match resolve_source(&args.source, &args.solver)? {
        Source::Frac(approx) => approx,
        Source::Sinc(_) => return Err(Error::InvalidInput("the sinc table needs --dawson".into())),
    };
    let t = grid_points(&args.grid, TIME_GRID)?;
    let report = error_report(&approx, &t)?;
    emit(args.out.as_deref(), &to_json(&report)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct DifferenceGap {
    delta_a: f64,
    max_gap: f64,
}

fn cmd_order_deriv(args: &OrderDerivArgs) -> Result<bool> {
    let params = FracParams::new(args.a, args.sigma)?;
    let t = grid_points(&args.grid, TIME_GRID)?;
    if args.delta_a.is_empty() {
        return Err(Error::InvalidInput("--delta-a needs at least one value".into()));
    }
    let settings = args.solver.settings();
    let (approx, report) = order_deriv_approx(params, settings)?;
    let analytic = eval_approx(&approx, &t)?;

    let mut header: Vec<String> = ["axis", "re", "im"].iter().map(|s| s.to_string()).collect();
    let mut columns = vec![
        t.clone(),
        analytic.values.iter().map(|z| z.re).collect(),
        analytic.values.iter().map(|z| z.im).collect(),
    ];
    let mut gaps = Vec::new();
    for (k, &delta_a) in args.delta_a.iter().enumerate() {
        let fd = finite_difference_order(params, delta_a, &t, settings)?;
        let suffix = if args.delta_a.len() == 1 { "fd".to_string() } else { format!("fd{k}") };
        header.push(format!("re_{suffix}"));
        header.push(format!("im_{suffix}"));
        columns.push(fd.values.iter().map(|z| z.re).collect());
        columns.push(fd.values.iter().map(|z| z.im).collect());
        gaps.push(DifferenceGap { delta_a, max_gap: analytic.max_abs_diff(&fd)? });
    }
    if args.with_oracle {
        let exact = oracle_order_deriv(params, &t)?;
        header.push("re_exact".into());
        header.push("im_exact".into());
        columns.push(exact.values.iter().map(|z| z.re).collect());
        columns.push(exact.values.iter().map(|z| z.im).collect());
    }
    emit(args.out.as_deref(), &columns_csv(&header, &columns)?)?;
    for g in &gaps {
        eprintln!("delta_a {:e}: max |analytic - fd| {:.3e}", g.delta_a, g.max_gap);
    }
    let h = order_deriv_moments(params, settings.moments)?;
    Ok(report.within_contract(settings.tol, &h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_matches_figure_layout() {
        let a = parse_sweep("0:0.125:2.125").unwrap();
        assert_eq!(a.len(), 18);
        assert_eq!(a[0], 0.0);
        assert_eq!(*a.last().unwrap(), 2.125);
        assert!(parse_sweep("0:0:1").is_err());
        assert!(parse_sweep("1:2").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Rank { rank: 3, max_order: 2, tol: 1e-10 }), EXIT_RANK);
        assert_eq!(exit_code(&Error::Convergence("x".into())), EXIT_CONVERGENCE);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_DOMAIN);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["fracgauss", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["fracgauss", "--help"]), EXIT_OK);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(grid_points(&None, TIME_GRID).unwrap().len(), 481);
        assert!(grid_points(&Some(vec![1.0, 0.0, 5.0]), TIME_GRID).is_err());
        assert!(grid_points(&Some(vec![0.0, 1.0, 2.5]), TIME_GRID).is_err());
    }
}
