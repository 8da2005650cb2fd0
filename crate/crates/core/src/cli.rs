//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{expected_rate, lower_bound_log, main_bound, rate_fit, RateKind};
use crate::model::{ModelDescriptor, ModelManifold};
use crate::output::{lambda_path, write_atomic, Format, Table};
use crate::resolvent::{default_r_max, solve_radial, RadialResolvent, SolverConfig};
use crate::specfun::bessel_k_eval;
use crate::verify::{run_suite, Suite};

pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "resolvent-decay", version, about = "Resolvent kernels and decay bounds on model manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial kernel u, u' and ln u on the solver grid.
    Kernel(JobArgs),
    /// Spherical sums psi_bar and extraglobular sums Psi.
    Sums(JobArgs),
    /// Spherical sums against the envelope, uniform and lower bounds.
    Bounds(JobArgs),
    /// Fitted against expected decay rates.
    Rates(JobArgs),
    /// Modified Bessel function K_nu(x).
    Bessel(BesselArgs),
    /// Runs the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JobArgs {
    /// Model descriptor (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Spectral parameter; a comma-separated list writes one output per value.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub lambda: Vec<f64>,
    /// Inner radius of the bounds (also used for the default outer radius).
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Outer radius of the solver grid.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Number of uniform grid cells before refinement.
    #[arg(long, default_value_t = 1500)]
    pub grid: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BesselArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) | CliError::Output { .. } => EXIT_NUMERICAL,
        }
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Kernel(job) => run_job("kernel", job, kernel_table),
        Command::Sums(job) => run_job("sums", job, sums_table),
        Command::Bounds(job) => run_job("bounds", job, bounds_table),
        Command::Rates(job) => run_job("rates", job, rates_table),
        Command::Bessel(args) => {
            let table = bessel_table(args)?;
            emit(&table.render(args.format, "bessel", args), args.out.as_deref())?;
            Ok(0)
        }
        Command::Verify(args) => run_verify(args),
    }
}

fn load_model(path: &Path) -> Result<ModelManifold, CliError> {
    ModelDescriptor::from_path(path)
        .and_then(|d| d.build())
        .map_err(|e| CliError::Input(e.to_string()))
}

fn validate(job: &JobArgs) -> Result<(), CliError> {
    if let Some(l) = job.lambda.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(CliError::Input(format!("lambda must be positive and finite, got {l}")));
    }
    if !(job.r0 > 0.0 && job.r0.is_finite()) {
        return Err(CliError::Input(format!("r0 must be positive, got {}", job.r0)));
    }
    if let Some(r) = job.rmax {
        if !(r > job.r0 && r.is_finite()) {
            return Err(CliError::Input(format!("rmax = {r} must exceed r0 = {}", job.r0)));
        }
    }
    if job.grid < 100 {
        return Err(CliError::Input(format!("grid must be at least 100, got {}", job.grid)));
    }
    Ok(())
}

#[derive(Serialize)]
struct JobEcho<'a> {
    model: String,
    lambda: f64,
    r0: f64,
    rmax: f64,
    grid: usize,
    descriptor: &'a ModelDescriptor,
}

fn run_job(
    name: &str,
    job: &JobArgs,
    build: fn(&ModelManifold, &RadialResolvent, &JobArgs) -> Result<Table, CliError>,
) -> Result<i32, CliError> {
    validate(job)?;
    let model = load_model(&job.model)?;
    let descriptor = model.to_descriptor();
    let fan_out = job.lambda.len() > 1;
    for &lambda in &job.lambda {
        let r_max = job.rmax.unwrap_or_else(|| default_r_max(&model, lambda, job.r0));
        let cfg = SolverConfig {
            r_max: Some(r_max),
            grid_points: job.grid,
            ..SolverConfig::default()
        };
        let res = solve_radial(&model, lambda, &cfg).map_err(numerical)?;
        let table = build(&model, &res, job)?;
        let echo = JobEcho {
            model: model.label(),
            lambda,
            r0: job.r0,
            rmax: r_max,
            grid: job.grid,
            descriptor: &descriptor,
        };
        let text = table.render(job.format, name, &echo);
        match &job.out {
            Some(p) if fan_out => emit(&text, Some(&lambda_path(p, lambda)))?,
            Some(p) => emit(&text, Some(p))?,
            None => {
                if fan_out && job.format == Format::Csv {
                    emit(&format!("# lambda={lambda}\n"), None)?;
                }
                emit(&text, None)?
            }
        }
    }
    Ok(0)
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, text).map_err(|source| CliError::Output {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn kernel_table(_: &ModelManifold, res: &RadialResolvent, _: &JobArgs) -> Result<Table, CliError> {
    let mut t = Table::new(&["r", "u", "du", "log_u"]);
    for i in 0..res.grid.len() {
        t.push(vec![res.grid[i].into(), res.u[i].into(), res.du[i].into(), res.log_u[i].into()]);
    }
    Ok(t)
}

fn sums_table(_: &ModelManifold, res: &RadialResolvent, _: &JobArgs) -> Result<Table, CliError> {
    let s = res.spherical_sums();
    let mut t = Table::new(&["r", "psi_bar", "Psi", "log_psi_bar", "log_neg_Psi"]);
    for i in 0..s.grid.len() {
        t.push(vec![
            s.grid[i].into(),
            s.psi_bar[i].into(),
            s.psi[i].into(),
            s.log_psi_bar[i].into(),
            s.log_neg_psi[i].into(),
        ]);
    }
    Ok(t)
}

fn bounds_table(model: &ModelManifold, res: &RadialResolvent, job: &JobArgs) -> Result<Table, CliError> {
    let b = main_bound(res, job.r0).map_err(|e| CliError::Input(e.to_string()))?;
    let s = res.spherical_sums();
    let off = s.grid.len() - b.grid.len();
    let mut t = Table::new(&["r", "psi_bar", "bound_envelope", "bound_uniform", "lower_bound", "ratio"]);
    for j in 0..b.grid.len() {
        let r = b.grid[j];
        let log_psi = if j == 0 { b.psi_bar_r0.ln() } else { s.log_psi_bar[j + off] };
        let log_f = lower_bound_log(model.n(), model.kappa(), res.lambda, r).map_err(numerical)?;
        t.push(vec![
            r.into(),
            log_psi.exp().into(),
            b.log_envelope[j].exp().into(),
            b.log_uniform[j].exp().into(),
            (model.log_area(r) + log_f).exp().into(),
            (log_psi - b.log_envelope[j]).exp().into(),
        ]);
    }
    Ok(t)
}

fn rates_table(model: &ModelManifold, res: &RadialResolvent, _: &JobArgs) -> Result<Table, CliError> {
    let r_max = res.r_max();
    let window = [r_max / 3.0, 5.0 * r_max / 6.0];
    let mu_bar = model.asymptotic_mu();
    let s = res.spherical_sums();
    let log_mean: Vec<f64> = s
        .grid
        .iter()
        .zip(&s.log_psi_bar)
        .map(|(r, l)| l - model.log_area(*r))
        .collect();
    let series: [(RateKind, &[f64], &[f64]); 3] = [
        (RateKind::Pointwise, &res.grid, &res.log_u),
        (RateKind::SphericalSum, &s.grid, &s.log_psi_bar),
        (RateKind::SphericalMean, &s.grid, &log_mean),
    ];
    let mut t = Table::new(&[
        "quantity",
        "window_lo",
        "window_hi",
        "fitted_rate",
        "expected_rate",
        "residual",
        "relative_error",
    ]);
    for (kind, grid, logs) in series {
        let fit = rate_fit(grid, logs, window)
            .map_err(numerical)?
            .with_expected(expected_rate(kind, mu_bar, res.lambda));
        t.push(vec![
            kind.as_str().into(),
            window[0].into(),
            window[1].into(),
            fit.fitted_rate.into(),
            fit.expected_rate.unwrap_or(f64::NAN).into(),
            fit.residual.into(),
            fit.relative_error().unwrap_or(f64::NAN).into(),
        ]);
    }
    Ok(t)
}

fn bessel_table(args: &BesselArgs) -> Result<Table, CliError> {
    let mut t = Table::new(&["nu", "x", "k", "log_k", "method"]);
    for &nu in &args.nu {
        for &x in &args.x {
            let e = bessel_k_eval(nu, x).map_err(|e| CliError::Input(e.to_string()))?;
            let method = serde_json::to_value(e.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            t.push(vec![nu.into(), x.into(), e.value.into(), e.log_value.into(), method.into()]);
        }
    }
    Ok(t)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let checks = run_suite(args.suite);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut report = format!("{:<10} {:<width$} {:>12} {:>12}  status\n", "suite", "check", "measured", "limit");
    for c in &checks {
        report.push_str(&format!(
            "{:<10} {:<width$} {:>12.4e} {:>12.4e}  {}\n",
            c.suite,
            c.name,
            c.measured,
            c.limit,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    report.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    emit(&report, None)?;
    if let Some(path) = &args.out {
        let mut t = Table::new(&["suite", "check", "measured", "limit", "pass"]);
        for c in &checks {
            t.push(vec![
                c.suite.into(),
                c.name.clone().into(),
                c.measured.into(),
                c.limit.into(),
                if c.pass { "true" } else { "false" }.into(),
            ]);
        }
        emit(&t.render(args.format, "verify", args), Some(path))?;
    }
    Ok(if failed == 0 { 0 } else { EXIT_VIOLATION })
}
