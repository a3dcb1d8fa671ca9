//! Recovery of a convex function, up to a constant, from its prox map.
//!
//! With anchor `x₀ ∈ dom f`, the field `G(x) = prox_f(x + x₀) − x₀` is the
//! gradient of `f̃ = (f* − ⟨x₀,·⟩)₁`, whose infimum is `−f(x₀)` and whose
//! conjugate is `f(· + x₀) + ½‖·‖²`. Reconstruction therefore
//!
//! 1. validates that `G` looks like the gradient of a convex function,
//! 2. integrates `G` along rays from the origin to tabulate `f̃`,
//! 3. pins the table so its minimum is `−f(x₀)` (or 0 without a value),
//! 4. reads `f(q) = f̃*(q − x₀) − ½‖q − x₀‖²` off a numerical conjugate.

use std::io::{Read, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::catalog::ConvexFunction;
use crate::conjugation::{infer_lattice, read_numeric_rows, SampleGrid, TableConjugate, ValueTable};
use crate::error::{Error, Result};
use crate::point::{fmt_real, ExtReal, Point};
use crate::prox_engine::{prox, SolverBudget};
use crate::rng::Lcg64;
use crate::verify::{CheckReport, Status, Tolerances, WitnessLog};

/// Black-box access to `x ↦ prox_f(x)`. Implementations must be pure.
pub trait ProxOracle: Sync {
    fn dim(&self) -> usize;
    fn query(&self, x: &Point) -> Result<Point>;
    fn call_count(&self) -> u64;
}

/// Oracle backed by the prox of a catalog function.
#[derive(Debug)]
pub struct CatalogOracle {
    f: ConvexFunction,
    budget: SolverBudget,
    calls: AtomicU64,
}

impl CatalogOracle {
    pub fn new(f: ConvexFunction) -> Self {
        CatalogOracle {
            f,
            budget: SolverBudget::default(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn function(&self) -> &ConvexFunction {
        &self.f
    }
}

impl ProxOracle for CatalogOracle {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn query(&self, x: &Point) -> Result<Point> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(prox(&self.f, 1.0, x, &self.budget)?.minimizer)
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Oracle backed by sampled `(x, prox_f(x))` pairs.
///
/// When the inputs form a regular lattice, queries are answered by
/// multilinear interpolation (clamped to the lattice box); otherwise by the
/// nearest sampled input.
#[derive(Debug)]
pub struct TableOracle {
    dim: usize,
    inputs: Vec<Point>,
    outputs: Vec<Point>,
    lattice: Option<SampleGrid>,
    calls: AtomicU64,
}

impl TableOracle {
    pub fn from_pairs(inputs: Vec<Point>, outputs: Vec<Point>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(Error::Oracle(format!(
                "need matching non-empty input/output lists ({} vs {})",
                inputs.len(),
                outputs.len()
            )));
        }
        let dim = inputs[0].dim();
        for (i, (x, y)) in inputs.iter().zip(&outputs).enumerate() {
            x.check_dim(dim, &format!("oracle table input {i}"))?;
            y.check_dim(dim, &format!("oracle table output {i}"))?;
        }
        let mut table = TableOracle {
            dim,
            inputs,
            outputs,
            lattice: None,
            calls: AtomicU64::new(0),
        };
        table.detect_lattice();
        Ok(table)
    }

    /// Reorders the pairs into lattice order if the inputs form a lattice.
    fn detect_lattice(&mut self) {
        if self.dim > 3 {
            return;
        }
        let coords: Vec<Vec<f64>> = self.inputs.iter().map(|p| p.to_vec()).collect();
        let Ok(grid) = infer_lattice(&coords) else {
            return;
        };
        let mut slots: Vec<Option<usize>> = vec![None; grid.len()];
        for (k, x) in self.inputs.iter().enumerate() {
            let mut flat = 0;
            for a in 0..self.dim {
                let h = grid.spacing(a);
                let i = ((x[a] - grid.lo()[a]) / h).round();
                if (x[a] - grid.lo()[a] - i * h).abs() > 1e-6 * h {
                    return;
                }
                flat = flat * grid.counts()[a] + i as usize;
            }
            if slots[flat].replace(k).is_some() {
                return;
            }
        }
        let order: Vec<usize> = slots.into_iter().map(|s| s.expect("all slots filled")).collect();
        self.inputs = order.iter().map(|&k| self.inputs[k].clone()).collect();
        self.outputs = order.iter().map(|&k| self.outputs[k].clone()).collect();
        self.lattice = Some(grid);
    }

    /// Samples an oracle on every lattice point of a grid.
    pub fn sample(oracle: &dyn ProxOracle, grid: &SampleGrid) -> Result<Self> {
        if oracle.dim() != grid.dim() {
            return Err(Error::dim("oracle sampling grid", oracle.dim(), grid.dim()));
        }
        let inputs: Vec<Point> = grid.points().collect();
        let outputs = inputs.par_iter().map(|x| oracle.query(x)).collect::<Result<Vec<_>>>()?;
        TableOracle::from_pairs(inputs, outputs)
    }

    /// Rows `x1..xn, p1..pn`; an optional header row is skipped.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = read_numeric_rows(input, "oracle table")?;
        let width = rows[0].len();
        if width < 2 || width % 2 != 0 {
            return Err(Error::Parse(format!("oracle table rows need 2n fields, found {width}")));
        }
        let n = width / 2;
        let mut inputs = Vec::with_capacity(rows.len());
        let mut outputs = Vec::with_capacity(rows.len());
        for r in rows {
            inputs.push(Point::new(r[..n].to_vec())?);
            outputs.push(Point::new(r[n..].to_vec())?);
        }
        TableOracle::from_pairs(inputs, outputs)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.extend((1..=self.dim).map(|i| format!("p{i}")));
        w.write_record(&header)?;
        for (x, y) in self.inputs.iter().zip(&self.outputs) {
            let row: Vec<String> = x.iter().chain(y.iter()).map(|c| fmt_real(*c)).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice.is_some()
    }

    fn interpolate(&self, grid: &SampleGrid, x: &Point) -> Point {
        let n = self.dim;
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let last = grid.counts()[a] - 1;
            let t = ((x[a] - grid.lo()[a]) / grid.spacing(a)).clamp(0.0, last as f64);
            let i = (t.floor() as usize).min(last - 1);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = vec![0.0; n];
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut flat = 0;
            for a in 0..n {
                let up = (corner >> a) & 1 == 1;
                weight *= if up { frac[a] } else { 1.0 - frac[a] };
                flat = flat * grid.counts()[a] + base[a] + usize::from(up);
            }
            if weight != 0.0 {
                for (acc, y) in acc.iter_mut().zip(self.outputs[flat].iter()) {
                    *acc += weight * y;
                }
            }
        }
        Point::from_iter_unchecked(acc)
    }

    fn nearest(&self, x: &Point) -> Point {
        let k = self
            .inputs
            .iter()
            .enumerate()
            .map(|(k, p)| (k, p.dist(x)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            .0;
        self.outputs[k].clone()
    }
}

impl ProxOracle for TableOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim, "oracle query")?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.lattice {
            Some(grid) => self.interpolate(grid, x),
            None => self.nearest(x),
        })
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// `∇f̃(x) = prox_f(x + x₀) − x₀`
pub fn tilde_gradient(oracle: &dyn ProxOracle, x0: &Point, x: &Point) -> Result<Point> {
    x0.check_dim(oracle.dim(), "anchor")?;
    x.check_dim(oracle.dim(), "gradient query")?;
    let y = oracle.query(&(x + x0))?;
    y.check_dim(oracle.dim(), "oracle output")
        .map_err(|_| Error::Oracle(format!("oracle returned dimension {}", y.dim())))?;
    Ok(&y - x0)
}

pub const MONOTONICITY_TOL: f64 = 1e-8;
pub const FIRM_TOL: f64 = 1e-8;
pub const SYMMETRY_TOL: f64 = 1e-3;
pub const PATH_TOL: f64 = 1e-4;
pub const DEFAULT_QUADRATURE_STEPS: usize = 64;
pub const MAX_QUADRATURE_STEPS: usize = 4096;
const VALIDATION_POINTS: usize = 64;
const PATH_PROBES: usize = 32;
const SYMMETRY_STEP: f64 = 1e-5;

/// Residuals of the checks that the field is a firmly nonexpansive gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldDiagnostics {
    /// `max (−⟨G(x) − G(y), x − y⟩)₊`
    pub monotonicity_residual: f64,
    /// `max (‖G(x) − G(y)‖² − ⟨G(x) − G(y), x − y⟩)₊`
    pub firm_nonexpansiveness_residual: f64,
    /// `max |∂ᵢGⱼ − ∂ⱼGᵢ|` by central differences
    pub symmetry_residual: f64,
}

/// Probes the field at seeded random points of the grid box.
pub fn validate_field(oracle: &dyn ProxOracle, x0: &Point, grid: &SampleGrid, seed: u64) -> Result<FieldDiagnostics> {
    let n = grid.dim();
    let mut rng = Lcg64::new(seed);
    let xs: Vec<Point> = (0..VALIDATION_POINTS).map(|_| rng.in_box(grid.lo(), grid.hi())).collect();
    let gs = xs
        .par_iter()
        .map(|x| tilde_gradient(oracle, x0, x))
        .collect::<Result<Vec<_>>>()?;

    let mut d = FieldDiagnostics::default();
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let dg = &gs[i] - &gs[j];
            let dx = &xs[i] - &xs[j];
            let inner = dg.dot(&dx);
            d.monotonicity_residual = d.monotonicity_residual.max(-inner);
            d.firm_nonexpansiveness_residual = d.firm_nonexpansiveness_residual.max(dg.norm_sq() - inner);
        }
    }
    if n >= 2 {
        let sym = xs
            .par_iter()
            .map(|x| -> Result<f64> {
                let h = SYMMETRY_STEP;
                let jac: Vec<Point> = (0..n)
                    .map(|i| {
                        let e = Point::unit(n, i);
                        let up = tilde_gradient(oracle, x0, &x.axpy(h, &e))?;
                        let down = tilde_gradient(oracle, x0, &x.axpy(-h, &e))?;
                        Ok((&up - &down).scale(0.5 / h))
                    })
                    .collect::<Result<_>>()?;
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        worst = worst.max((jac[i][j] - jac[j][i]).abs());
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        d.symmetry_residual = sym.into_iter().fold(0.0, f64::max);
    }
    Ok(d)
}

fn check_field(d: &FieldDiagnostics) -> Result<()> {
    if d.monotonicity_residual > MONOTONICITY_TOL {
        return Err(Error::NonConservativeField(format!(
            "field is not monotone (residual {:e})",
            d.monotonicity_residual
        )));
    }
    if d.firm_nonexpansiveness_residual > FIRM_TOL {
        return Err(Error::NonConservativeField(format!(
            "field is not firmly nonexpansive (residual {:e})",
            d.firm_nonexpansiveness_residual
        )));
    }
    if d.symmetry_residual > SYMMETRY_TOL {
        return Err(Error::NonConservativeField(format!(
            "Jacobian is not symmetric (residual {:e})",
            d.symmetry_residual
        )));
    }
    Ok(())
}

/// Composite Simpson for `∫₀¹ ⟨G(start + t·dir), dir⟩ dt`.
fn simpson_segment(oracle: &dyn ProxOracle, x0: &Point, start: &Point, dir: &Point, steps: usize) -> Result<f64> {
    let h = 1.0 / steps as f64;
    let mut acc = 0.0;
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let g = tilde_gradient(oracle, x0, &start.axpy(k as f64 * h, dir))?;
        acc += w * g.dot(dir);
    }
    Ok(acc * h / 3.0)
}

fn ray_integral(oracle: &dyn ProxOracle, x0: &Point, x: &Point, steps: usize) -> Result<f64> {
    if x.norm() == 0.0 {
        return Ok(0.0);
    }
    simpson_segment(oracle, x0, &Point::zeros(x.dim()), x, steps)
}

/// The same integral along the axis-aligned path `0 → x₁e₁ → x₁e₁+x₂e₂ → …`.
fn staircase_integral(oracle: &dyn ProxOracle, x0: &Point, x: &Point, steps: usize) -> Result<f64> {
    let n = x.dim();
    let mut corner = Point::zeros(n);
    let mut acc = 0.0;
    for a in 0..n {
        if x[a] == 0.0 {
            continue;
        }
        let leg = Point::unit(n, a).scale(x[a]);
        acc += simpson_segment(oracle, x0, &corner, &leg, steps)?;
        corner = &corner + &leg;
    }
    Ok(acc)
}

/// `f̃ − f̃(0)` tabulated on a grid, with the integration diagnostics.
#[derive(Clone, Debug)]
pub struct TildeIntegration {
    pub table: ValueTable,
    pub diagnostics: FieldDiagnostics,
    pub steps_used: usize,
    /// Largest ray-versus-staircase disagreement at the final step count.
    pub path_residual: f64,
}

/// Validates the field, then integrates it along rays from the origin to
/// every lattice point. The panel count doubles (up to
/// [`MAX_QUADRATURE_STEPS`]) while the ray and staircase integrals at probe
/// lattice points disagree by more than [`PATH_TOL`].
pub fn integrate_tilde(
    oracle: &dyn ProxOracle,
    x0: &Point,
    grid: &SampleGrid,
    quadrature_steps: usize,
) -> Result<TildeIntegration> {
    integrate_tilde_seeded(oracle, x0, grid, quadrature_steps, 0)
}

pub(crate) fn integrate_tilde_seeded(
    oracle: &dyn ProxOracle,
    x0: &Point,
    grid: &SampleGrid,
    quadrature_steps: usize,
    seed: u64,
) -> Result<TildeIntegration> {
    x0.check_dim(oracle.dim(), "anchor")?;
    if grid.dim() != oracle.dim() {
        return Err(Error::dim("reconstruction grid", oracle.dim(), grid.dim()));
    }
    if quadrature_steps < 8 || quadrature_steps % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature steps must be even and >= 8, got {quadrature_steps}"
        )));
    }
    let diagnostics = validate_field(oracle, x0, grid, seed)?;
    check_field(&diagnostics)?;

    let stride = (grid.len() / PATH_PROBES).max(1);
    let probes: Vec<Point> = (0..grid.len()).step_by(stride).map(|i| grid.point(i)).collect();
    let mut steps = quadrature_steps;
    let path_residual = loop {
        let gap = probes
            .par_iter()
            .map(|x| Ok((ray_integral(oracle, x0, x, steps)? - staircase_integral(oracle, x0, x, steps)?).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if gap <= PATH_TOL || steps >= MAX_QUADRATURE_STEPS {
            break gap;
        }
        steps *= 2;
    };

    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| ExtReal::finite(ray_integral(oracle, x0, &grid.point(i), steps)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(TildeIntegration {
        table: ValueTable::new(grid.clone(), values)?,
        diagnostics,
        steps_used: steps,
        path_residual,
    })
}

/// How recovered values relate to `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Values are `f(q)`; the anchor value was supplied.
    Absolute,
    /// Values are `f(q) − f(x₀)`.
    RelativeToAnchor,
}

#[derive(Debug)]
pub struct ReconstructionTask<'a> {
    pub oracle: &'a dyn ProxOracle,
    pub x0: Point,
    pub f_at_x0: Option<f64>,
    pub tilde_grid: SampleGrid,
    pub query_points: Vec<Point>,
    pub quadrature_steps: usize,
    pub seed: u64,
}

impl std::fmt::Debug for dyn ProxOracle + '_ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProxOracle(dim={})", self.dim())
    }
}

impl<'a> ReconstructionTask<'a> {
    pub fn new(oracle: &'a dyn ProxOracle, x0: Point, tilde_grid: SampleGrid, query_points: Vec<Point>) -> Self {
        ReconstructionTask {
            oracle,
            x0,
            f_at_x0: None,
            tilde_grid,
            query_points,
            quadrature_steps: DEFAULT_QUADRATURE_STEPS,
            seed: 0,
        }
    }

    pub fn with_f_at_x0(mut self, v: f64) -> Self {
        self.f_at_x0 = Some(v);
        self
    }

    pub fn with_quadrature_steps(mut self, steps: usize) -> Self {
        self.quadrature_steps = steps;
        self
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub recovered: Vec<(Point, f64)>,
    /// Per query: the conjugate's maximizer hit the grid boundary.
    pub boundary_flags: Vec<bool>,
    pub convention: Convention,
    /// Value of the pinned `f̃` at the origin.
    pub pinned_constant: f64,
    pub gradient_symmetry_residual: f64,
    pub monotonicity_residual: f64,
    pub firm_nonexpansiveness_residual: f64,
    pub path_residual: f64,
    pub quadrature_steps_used: usize,
    pub boundary_argmax_warnings: usize,
    /// The minimum of `f̃` on the grid lies on its boundary, so pinning may
    /// be off.
    pub minimum_on_boundary: bool,
    pub oracle_calls: u64,
}

pub fn reconstruct(task: &ReconstructionTask<'_>) -> Result<ReconstructionReport> {
    let n = task.oracle.dim();
    for (i, q) in task.query_points.iter().enumerate() {
        q.check_dim(n, &format!("query point {i}"))?;
    }
    if let Some(v) = task.f_at_x0 {
        if !v.is_finite() {
            return Err(Error::AnchorOutsideDomain(format!("value at anchor is {v}")));
        }
    }
    let calls_before = task.oracle.call_count();
    let tilde = integrate_tilde_seeded(task.oracle, &task.x0, &task.tilde_grid, task.quadrature_steps, task.seed)?;

    let (min_idx, min) = tilde.table.min_entry();
    let target = task.f_at_x0.map_or(0.0, |v| -v);
    let shift = target - min;
    let table = tilde.table.shifted(shift)?;
    let engine = TableConjugate::new(&table)?;

    let rows = task
        .query_points
        .par_iter()
        .map(|q| {
            let s = q - &task.x0;
            let c = engine.eval(&s)?;
            Ok((c.value - 0.5 * s.norm_sq(), c.on_boundary))
        })
        .collect::<Result<Vec<(f64, bool)>>>()?;

    let boundary_flags: Vec<bool> = rows.iter().map(|r| r.1).collect();
    Ok(ReconstructionReport {
        recovered: task.query_points.iter().cloned().zip(rows.iter().map(|r| r.0)).collect(),
        boundary_argmax_warnings: boundary_flags.iter().filter(|b| **b).count(),
        boundary_flags,
        convention: if task.f_at_x0.is_some() {
            Convention::Absolute
        } else {
            Convention::RelativeToAnchor
        },
        pinned_constant: shift,
        gradient_symmetry_residual: tilde.diagnostics.symmetry_residual,
        monotonicity_residual: tilde.diagnostics.monotonicity_residual,
        firm_nonexpansiveness_residual: tilde.diagnostics.firm_nonexpansiveness_residual,
        path_residual: tilde.path_residual,
        quadrature_steps_used: tilde.steps_used,
        minimum_on_boundary: task.tilde_grid.on_boundary(min_idx),
        oracle_calls: task.oracle.call_count() - calls_before,
    })
}

/// Checks that equal prox distances to an anchor force `f − f(x₀) = g − g(x₀)`.
///
/// Without an anchor the distances are measured to the origin and the
/// conclusion becomes `f − g` constant; that form additionally needs `f*`
/// and `g*` bounded below, i.e. `0 ∈ dom f ∩ dom g`, and the report says
/// `precondition_violated` when that fails. The conclusion is probed at the
/// samples and at the prox points of both functions, which lie in their
/// domains.
pub fn determine_from_norm(
    f: &ConvexFunction,
    g: &ConvexFunction,
    x0: Option<&Point>,
    samples: &[Point],
    tol: Tolerances,
) -> Result<CheckReport> {
    if f.dim() != g.dim() {
        return Err(Error::dim("second function", f.dim(), g.dim()));
    }
    let n = f.dim();
    let origin = Point::zeros(n);
    let anchor = x0.unwrap_or(&origin);
    anchor.check_dim(n, "anchor")?;
    let fa = f.evaluate(anchor)?.value();
    let ga = g.evaluate(anchor)?.value();
    let mut report = CheckReport::new("determination_from_norm", tol);
    let precondition_ok = fa.is_some() && ga.is_some();
    if x0.is_some() && !precondition_ok {
        let which = if fa.is_none() { f } else { g };
        return Err(Error::AnchorOutsideDomain(which.to_string()));
    }

    let budget = SolverBudget::default();
    let proxes = samples
        .par_iter()
        .map(|x| Ok((prox(f, 1.0, x, &budget)?.minimizer, prox(g, 1.0, x, &budget)?.minimizer)))
        .collect::<Result<Vec<_>>>()?;

    let mut hyp_log = WitnessLog::new();
    for (x, (pf, pg)) in samples.iter().zip(&proxes) {
        let r = (pf.dist(anchor) - pg.dist(anchor)).abs();
        report.hypothesis_residual = report.hypothesis_residual.max(r);
        if r > tol.hypothesis {
            hyp_log.push(x.clone(), format!("prox distance gap {}", fmt_real(r)), r);
        }
    }

    let probes: Vec<&Point> = samples
        .iter()
        .chain(proxes.iter().map(|p| &p.0))
        .chain(proxes.iter().map(|p| &p.1))
        .collect();
    let mut con_log = WitnessLog::new();
    let mut reference: Option<f64> = fa.zip(ga).map(|(a, b)| a - b);
    for x in probes {
        let (fx, gx) = (f.evaluate(x)?.value(), g.evaluate(x)?.value());
        let r = match (fx, gx) {
            (None, None) => 0.0,
            (Some(a), Some(b)) => {
                let d = a - b;
                (d - *reference.get_or_insert(d)).abs()
            }
            _ => f64::INFINITY,
        };
        report.conclusion_residual = report.conclusion_residual.max(r);
        if r > tol.conclusion {
            let detail = if r.is_infinite() {
                "finite for only one function".to_string()
            } else {
                format!("f - g deviates by {}", fmt_real(r))
            };
            con_log.push(x.clone(), detail, r);
        }
    }

    let hyp = report.hypothesis_holds();
    let con = report.conclusion_holds();
    report.status = if !precondition_ok {
        Status::PreconditionViolated
    } else if !hyp {
        Status::HypothesisFails
    } else if con {
        Status::Verified
    } else {
        Status::Counterexample
    };
    report.witnesses = if hyp { con_log.into_witnesses() } else { hyp_log.into_witnesses() };
    if !precondition_ok {
        report.notes.push("origin outside dom f or dom g: f* or g* is unbounded below".into());
    }
    report.notes.push(format!("anchor {anchor}, {} samples", samples.len()));
    Ok(report)
}
