//! Command-line front end. Every subcommand parses its inputs, calls one
//! library entry point and formats the result.
//!
//! Function specs are JSON documents (see [`crate::catalog`]), given either
//! as a file path or inline when the argument starts with `{`. Points are
//! comma-separated decimals; a one-coordinate anchor is broadcast to the
//! function's dimension. Grids are `lo:hi:count` per axis, separated by
//! `;`; a single axis is repeated for every dimension.
//!
//! Oracle tables for `reconstruct` are CSV files with one row per sample,
//! `x1,…,xn,p1,…,pn`, where `p = prox_f(x)`; an optional header row is
//! skipped. Lattice-shaped tables are interpolated multilinearly, others
//! answer with the nearest sample.
//!
//! Exit status: 0 when everything was computed or verified, 2 on a
//! counterexample or solver failure, 1 on usage and parse errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::catalog::ConvexFunction;
use crate::conjugation::{numerical_conjugate_detail, read_numeric_rows, tabulate, SampleGrid};
use crate::determination::{reconstruct, CatalogOracle, Convention, ProxOracle, ReconstructionTask, TableOracle};
use crate::error::{Error, Result};
use crate::point::{fmt_real, Point};
use crate::prox_engine::{depth_warning, envelope_gradient, prox_with, ProxMode, SolverBudget};
use crate::rng::SampleSpec;
use crate::verify::{
    check_comparison, default_tolerance, verify_all, write_reports_csv, write_reports_json, BatteryConfig, CheckReport,
    Status, Tolerances,
};

#[derive(Debug, Parser)]
#[command(name = "proxcalc", version, about = "Proximal calculus for convex functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; reports default to json, evaluations to text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    #[value(alias = "structured-text")]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate prox_{λf}(x).
    Prox(ProxArgs),
    /// Evaluate the Moreau envelope f_λ(x) and its gradient.
    Envelope(ProxArgs),
    /// Print f* as a document, or evaluate it at --y.
    Conjugate(ConjugateArgs),
    /// Recover f from prox samples.
    Reconstruct(ReconstructArgs),
    /// Check the comparison principle for a pair of functions.
    Compare(PairArgs),
    /// Run every check on a pair of functions.
    VerifyAll(VerifyAllArgs),
}

#[derive(Debug, Args)]
pub struct ProxArgs {
    /// Function spec (path or inline JSON).
    #[arg(long = "f")]
    pub f: String,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Use the numerical solver even when a closed form exists.
    #[arg(long)]
    pub numerical: bool,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub solver_tol: f64,
}

#[derive(Debug, Args)]
pub struct ConjugateArgs {
    #[arg(long = "f")]
    pub f: String,
    /// Evaluation point; without it the conjugate document is printed.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Tabulate f on this grid and take the discrete conjugate instead.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// CSV of prox samples `x1..xn,p1..pn`.
    #[arg(long, conflicts_with = "f", required_unless_present = "f")]
    pub oracle_table: Option<PathBuf>,
    /// Use the prox of a catalog function as the oracle.
    #[arg(long = "f")]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: String,
    /// f(anchor); without it values are relative to the anchor.
    #[arg(long, allow_hyphen_values = true)]
    pub f_at_anchor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// CSV of query points, one per row.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long = "f")]
    pub f: String,
    #[arg(long = "g")]
    pub g: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub anchor: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    /// Overrides both tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub hypothesis_tol: Option<f64>,
    #[arg(long)]
    pub conclusion_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyAllArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// ℓ for the norm-bound and Lipschitz checks.
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    /// Envelope index for the gradient comparison.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

/// Reads a function spec from a file, or inline when it starts with `{`.
pub fn load_function(arg: &str) -> Result<ConvexFunction> {
    let (text, origin) = if arg.trim_start().starts_with('{') {
        (arg.to_string(), "inline spec".to_string())
    } else {
        (std::fs::read_to_string(arg)?, arg.to_string())
    };
    ConvexFunction::from_json_str(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{origin}: {m}")),
        e => e,
    })
}

fn parse_point(s: &str, dim: usize, field: &str) -> Result<Point> {
    let p: Point = s.parse()?;
    if p.dim() == 1 && dim > 1 {
        return Ok(Point::splat(dim, p[0]));
    }
    p.check_dim(dim, field)?;
    Ok(p)
}

fn parse_grid(s: &str, dim: usize) -> Result<SampleGrid> {
    let axes: Vec<&str> = s.split(';').map(str::trim).filter(|a| !a.is_empty()).collect();
    if axes.len() == 1 && dim > 1 {
        return SampleGrid::parse(&vec![axes[0]; dim].join(";"));
    }
    let g = SampleGrid::parse(s)?;
    if g.dim() != dim {
        return Err(Error::dim("grid", dim, g.dim()));
    }
    Ok(g)
}

fn warn_depth(f: &ConvexFunction) {
    if let Some(w) = depth_warning(f) {
        eprintln!("warning: {w}");
    }
}

fn tolerances(p: &PairArgs, fs: &[&ConvexFunction]) -> Option<Tolerances> {
    let base = p.tol.map(Tolerances::uniform).unwrap_or_else(|| default_tolerance(fs));
    let t = Tolerances::new(
        p.hypothesis_tol.unwrap_or(base.hypothesis),
        p.conclusion_tol.unwrap_or(base.conclusion),
    );
    (p.tol.is_some() || p.hypothesis_tol.is_some() || p.conclusion_tol.is_some()).then_some(t)
}

fn emit_reports(reports: &[CheckReport], format: Format, out: &mut dyn Write) -> Result<i32> {
    match format {
        Format::Json => write_reports_json(reports, &mut *out)?,
        Format::Csv => write_reports_csv(reports, &mut *out)?,
        Format::Text => {
            for r in reports {
                writeln!(
                    out,
                    "{}: {} (hypothesis residual {}, conclusion residual {})",
                    r.name,
                    r.status,
                    fmt_real(r.hypothesis_residual),
                    fmt_real(r.conclusion_residual)
                )?;
                for w in &r.witnesses {
                    writeln!(out, "  at {}: {}", w.point, w.detail)?;
                }
            }
        }
    }
    let bad = reports.iter().any(|r| r.status == Status::Counterexample);
    Ok(if bad { 2 } else { 0 })
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let code = dispatch(cli, &mut *out)?;
    out.flush()?;
    Ok(code)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Prox(a) => run_prox(a, cli.format.unwrap_or(Format::Text), out, false),
        Command::Envelope(a) => run_prox(a, cli.format.unwrap_or(Format::Text), out, true),
        Command::Conjugate(a) => run_conjugate(a, cli.format.unwrap_or(Format::Text), out),
        Command::Reconstruct(a) => run_reconstruct(a, cli.format.unwrap_or(Format::Csv), out),
        Command::Compare(a) => {
            let f = load_function(&a.f)?;
            let g = load_function(&a.g)?;
            let x0 = parse_point(&a.anchor, f.dim(), "anchor")?;
            let tol = tolerances(a, &[&f, &g]).unwrap_or_else(|| default_tolerance(&[&f, &g]));
            let samples = SampleSpec::new(f.dim(), a.samples, a.radius, a.seed).draw();
            let report = check_comparison(&f, &g, &x0, &samples, tol)?;
            emit_reports(&[report], cli.format.unwrap_or(Format::Json), out)
        }
        Command::VerifyAll(a) => {
            let p = &a.pair;
            let f = load_function(&p.f)?;
            let g = load_function(&p.g)?;
            warn_depth(&f);
            warn_depth(&g);
            let cfg = BatteryConfig {
                anchor: parse_point(&p.anchor, f.dim(), "anchor")?,
                samples: p.samples,
                radius: p.radius,
                seed: p.seed,
                ell: a.ell,
                lambda: a.lambda,
                tolerances: tolerances(p, &[&f, &g]),
            };
            let reports = verify_all(&f, &g, &cfg)?;
            emit_reports(&reports, cli.format.unwrap_or(Format::Json), out)
        }
    }
}

fn run_prox(a: &ProxArgs, format: Format, out: &mut dyn Write, envelope: bool) -> Result<i32> {
    let f = load_function(&a.f)?;
    warn_depth(&f);
    let x = parse_point(&a.x, f.dim(), "x")?;
    let budget = SolverBudget::new(a.max_iters, a.solver_tol)?;
    let mode = if a.numerical { ProxMode::Numerical } else { ProxMode::Auto };
    let r = prox_with(&f, a.lambda, &x, &budget, mode)?;
    if !envelope {
        match format {
            Format::Text => writeln!(out, "{}", r.minimizer)?,
            Format::Json => writeln!(
                out,
                "{}",
                json!({
                    "minimizer": r.minimizer,
                    "envelope_value": r.envelope_value,
                    "method": r.method,
                    "iterations": r.iterations,
                    "residual": r.residual,
                })
            )?,
            Format::Csv => {
                let head: Vec<String> = (1..=x.dim()).map(|i| format!("p{i}")).collect();
                writeln!(out, "{},method,iterations,residual", head.join(","))?;
                let row: Vec<String> = r.minimizer.iter().map(|c| fmt_real(*c)).collect();
                writeln!(out, "{},{},{},{}", row.join(","), r.method, r.iterations, fmt_real(r.residual))?;
            }
        }
        return Ok(0);
    }
    let grad = envelope_gradient(&f, a.lambda, &x, &budget)?;
    match format {
        Format::Text => {
            writeln!(out, "value {}", fmt_real(r.envelope_value))?;
            writeln!(out, "gradient {grad}")?;
        }
        Format::Json => writeln!(
            out,
            "{}",
            json!({ "value": r.envelope_value, "gradient": grad, "method": r.method })
        )?,
        Format::Csv => {
            let head: Vec<String> = (1..=x.dim()).map(|i| format!("g{i}")).collect();
            writeln!(out, "value,{}", head.join(","))?;
            let row: Vec<String> = grad.iter().map(|c| fmt_real(*c)).collect();
            writeln!(out, "{},{}", fmt_real(r.envelope_value), row.join(","))?;
        }
    }
    Ok(0)
}

fn run_conjugate(a: &ConjugateArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let f = load_function(&a.f)?;
    let Some(y) = &a.y else {
        if a.grid.is_some() {
            return Err(Error::InvalidParameter("--grid needs --y".into()));
        }
        writeln!(out, "{}", f.conjugate_closed_form()?.to_json_string()?)?;
        return Ok(0);
    };
    let y = parse_point(y, f.dim(), "y")?;
    let (value, detail) = match &a.grid {
        None => (f.conjugate_closed_form()?.evaluate(&y)?.as_f64(), None),
        Some(g) => {
            let table = tabulate(&f, &parse_grid(g, f.dim())?)?;
            let c = numerical_conjugate_detail(&table, &y)?;
            if c.on_boundary {
                eprintln!("warning: the maximizer {} lies on the grid boundary; widen the grid", c.argmax);
            }
            (c.value, Some(c))
        }
    };
    match format {
        Format::Text => writeln!(out, "{}", fmt_real(value))?,
        Format::Json => {
            let v = match &detail {
                None => json!({ "value": fmt_real(value), "route": "closed_form" }),
                Some(c) => json!({
                    "value": fmt_real(value),
                    "route": "grid",
                    "argmax": c.argmax,
                    "on_boundary": c.on_boundary,
                }),
            };
            writeln!(out, "{v}")?;
        }
        Format::Csv => {
            writeln!(out, "value")?;
            writeln!(out, "{}", fmt_real(value))?;
        }
    }
    Ok(0)
}

fn read_points(path: &Path, dim: usize) -> Result<Vec<Point>> {
    let rows = read_numeric_rows(File::open(path)?, "query")?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let p = Point::new(r)?;
            p.check_dim(dim, &format!("query row {}", i + 1))?;
            Ok(p)
        })
        .collect()
}

fn run_reconstruct(a: &ReconstructArgs, format: Format, out: &mut dyn Write) -> Result<i32> {
    let oracle: Box<dyn ProxOracle> = match (&a.oracle_table, &a.f) {
        (Some(path), _) => Box::new(TableOracle::read_csv(File::open(path)?)?),
        (None, Some(spec)) => Box::new(CatalogOracle::new(load_function(spec)?)),
        (None, None) => return Err(Error::InvalidParameter("need --oracle-table or --f".into())),
    };
    let n = oracle.dim();
    let x0 = parse_point(&a.anchor, n, "anchor")?;
    let grid = parse_grid(&a.grid, n)?;
    let queries = read_points(&a.queries, n)?;
    let mut task = ReconstructionTask::new(oracle.as_ref(), x0, grid, queries).with_quadrature_steps(a.steps);
    task.seed = a.seed;
    if let Some(v) = a.f_at_anchor {
        task = task.with_f_at_x0(v);
    }
    let r = reconstruct(&task)?;

    if r.boundary_argmax_warnings > 0 {
        eprintln!(
            "warning: {} queries have their conjugate maximizer on the grid boundary",
            r.boundary_argmax_warnings
        );
    }
    if r.minimum_on_boundary {
        eprintln!("warning: the minimum of the integrated potential lies on the grid boundary");
    }
    let convention = match r.convention {
        Convention::Absolute => "absolute",
        Convention::RelativeToAnchor => "relative_to_anchor",
    };
    match format {
        Format::Json => {
            let recovered: Vec<_> = r
                .recovered
                .iter()
                .zip(&r.boundary_flags)
                .map(|((q, v), b)| json!({ "point": q, "value": fmt_real(*v), "boundary": b }))
                .collect();
            let doc = json!({
                "recovered": recovered,
                "convention": convention,
                "pinned_constant": r.pinned_constant,
                "gradient_symmetry_residual": r.gradient_symmetry_residual,
                "monotonicity_residual": r.monotonicity_residual,
                "firm_nonexpansiveness_residual": r.firm_nonexpansiveness_residual,
                "path_residual": r.path_residual,
                "quadrature_steps_used": r.quadrature_steps_used,
                "boundary_argmax_warnings": r.boundary_argmax_warnings,
                "minimum_on_boundary": r.minimum_on_boundary,
                "oracle_calls": r.oracle_calls,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(io::Error::from)?)?;
        }
        Format::Csv | Format::Text => {
            let head: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            writeln!(out, "{},value,boundary", head.join(","))?;
            for ((q, v), b) in r.recovered.iter().zip(&r.boundary_flags) {
                let row: Vec<String> = q.iter().map(|c| fmt_real(*c)).collect();
                writeln!(out, "{},{},{}", row.join(","), fmt_real(*v), b)?;
            }
            eprintln!(
                "convention {convention}; pinned constant {}; symmetry {}; monotonicity {}; firm nonexpansiveness {}; path {}; {} quadrature steps; {} oracle calls",
                fmt_real(r.pinned_constant),
                fmt_real(r.gradient_symmetry_residual),
                fmt_real(r.monotonicity_residual),
                fmt_real(r.firm_nonexpansiveness_residual),
                fmt_real(r.path_residual),
                r.quadrature_steps_used,
                r.oracle_calls
            );
        }
    }
    Ok(0)
}

/// Exit status for an error: 2 for solver failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SolverDidNotConverge(_) | Error::DomainUnreachable => 2,
        _ => 1,
    }
}
