//! Proximal maps, Moreau envelopes and their gradients.
//!
//! `prox` dispatches to the closed-form rule table and falls back to the
//! numerical solver in [`solver`] when a tree has no closed form.

use std::fmt;

use serde::Serialize;

use crate::catalog::{project_ball, project_box, project_halfspace, ConvexFunction, Node};
use crate::conjugation::{SampleGrid, TableConjugate};
use crate::error::{Error, Result};
use crate::point::{ExtReal, Point};

pub mod solver;

pub use solver::ProxObjective;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxMethod {
    ClosedForm,
    Numerical,
}

impl fmt::Display for ProxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProxMethod::ClosedForm => "closed_form",
            ProxMethod::Numerical => "numerical",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProxResult {
    pub minimizer: Point,
    /// `f(minimizer) + ‖x − minimizer‖² / (2λ)`, the envelope value at x.
    pub envelope_value: f64,
    pub method: ProxMethod,
    pub iterations: usize,
    /// Final step length of the solver (bracket half-width in one
    /// dimension); 0 for closed forms.
    pub residual: f64,
}

/// Envelope nesting depth from which callers are warned: without a closed
/// form every level multiplies the cost of an inner solve.
pub const ENVELOPE_DEPTH_WARNING: usize = 3;

pub fn depth_warning(f: &ConvexFunction) -> Option<String> {
    let d = f.envelope_depth();
    (d >= ENVELOPE_DEPTH_WARNING).then(|| format!("envelope nesting depth {d} in {f}"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverBudget {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_iters: 10_000,
            tol: 1e-8,
        }
    }
}

impl SolverBudget {
    pub fn new(max_iters: usize, tol: f64) -> Result<Self> {
        if max_iters == 0 || !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver budget needs max_iters >= 1 and tol > 0 (got {max_iters}, {tol})"
            )));
        }
        Ok(SolverBudget { max_iters, tol })
    }
}

/// Selects how a prox is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProxMode {
    /// Closed form when the rule table has one, numerical otherwise.
    #[default]
    Auto,
    /// Always run the numerical solver (projections still short-circuit).
    Numerical,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("prox index must be > 0, got {lambda}")))
    }
}

fn finish(
    f: &ConvexFunction,
    lambda: f64,
    x: &Point,
    minimizer: Point,
    method: ProxMethod,
    iterations: usize,
    residual: f64,
) -> Result<ProxResult> {
    let fy = f.evaluate(&minimizer)?.value().ok_or(Error::ExtendedArithmetic(
        "prox minimizer lies outside the domain",
    ))?;
    Ok(ProxResult {
        envelope_value: fy + x.dist(&minimizer).powi(2) / (2.0 * lambda),
        minimizer,
        method,
        iterations,
        residual,
    })
}

/// `prox_{λf}(x)` together with the envelope value and diagnostics.
pub fn prox(f: &ConvexFunction, lambda: f64, x: &Point, budget: &SolverBudget) -> Result<ProxResult> {
    prox_with(f, lambda, x, budget, ProxMode::Auto)
}

pub fn prox_with(
    f: &ConvexFunction,
    lambda: f64,
    x: &Point,
    budget: &SolverBudget,
    mode: ProxMode,
) -> Result<ProxResult> {
    check_lambda(lambda)?;
    x.check_dim(f.dim(), "prox point")?;
    if mode == ProxMode::Auto {
        match f.prox_closed_form(lambda, x) {
            Ok(y) => return finish(f, lambda, x, y, ProxMethod::ClosedForm, 0, 0.0),
            Err(Error::UnsupportedProx(_)) => {}
            Err(e) => return Err(e),
        }
    }
    numerical_prox(f, lambda, x, budget)
}

/// Numerical prox. Tilts, translations, constants and regularizations are
/// peeled by their exact rules and indicator atoms short-circuit to their
/// projections; whatever remains goes to the iterative solver.
pub fn numerical_prox(
    f: &ConvexFunction,
    lambda: f64,
    x: &Point,
    budget: &SolverBudget,
) -> Result<ProxResult> {
    check_lambda(lambda)?;
    x.check_dim(f.dim(), "prox point")?;
    let (y, iterations, residual) = peeled_prox(f, lambda, x, budget)?;
    let result = finish(f, lambda, x, y, ProxMethod::Numerical, iterations, residual.value)?;
    if residual.converged {
        Ok(result)
    } else {
        Err(Error::SolverDidNotConverge(Box::new(result)))
    }
}

#[derive(Clone, Copy)]
struct Residual {
    value: f64,
    converged: bool,
}

const EXACT: Residual = Residual {
    value: 0.0,
    converged: true,
};

fn peeled_prox(
    f: &ConvexFunction,
    lambda: f64,
    x: &Point,
    budget: &SolverBudget,
) -> Result<(Point, usize, Residual)> {
    Ok(match f.node() {
        Node::IndicatorPoint { p } => (p.clone(), 0, EXACT),
        Node::IndicatorBall { center, radius } => (project_ball(x, center, *radius), 0, EXACT),
        Node::IndicatorBox { lo, hi } => (project_box(x, lo, hi), 0, EXACT),
        Node::IndicatorHalfspace { a, beta } => (project_halfspace(x, a, *beta), 0, EXACT),
        Node::Tilt { f, a } => peeled_prox(f, lambda, &x.axpy(lambda, a), budget)?,
        Node::Translate { f, t } => {
            let (y, k, r) = peeled_prox(f, lambda, &(x + t), budget)?;
            (&y - t, k, r)
        }
        Node::AddConst { f, .. } => peeled_prox(f, lambda, x, budget)?,
        Node::Regularize { f, mu } => {
            let s = 1.0 + lambda * mu;
            peeled_prox(f, lambda / s, &x.scale(1.0 / s), budget)?
        }
        _ if f.has_full_domain() => {
            let out = solver::minimize(f, lambda, x, budget.max_iters, budget.tol)?;
            let r = Residual {
                value: out.residual,
                converged: out.converged,
            };
            (out.point, out.iterations, r)
        }
        _ => return Err(Error::UnsupportedProx(f.to_string())),
    })
}

impl ProxObjective for ConvexFunction {
    fn dim(&self) -> usize {
        ConvexFunction::dim(self)
    }

    fn value(&self, y: &Point) -> Result<ExtReal> {
        self.evaluate(y)
    }

    fn shifted_subgradient(&self, y: &Point, shift: &Point) -> Result<Point> {
        self.subdifferential(y)?.translate(shift).min_norm_element()
    }
}

pub fn moreau_envelope(f: &ConvexFunction, lambda: f64, x: &Point, budget: &SolverBudget) -> Result<f64> {
    Ok(prox(f, lambda, x, budget)?.envelope_value)
}

/// `∇f_λ(x) = (x − prox_{λf}(x)) / λ`
pub fn envelope_gradient(
    f: &ConvexFunction,
    lambda: f64,
    x: &Point,
    budget: &SolverBudget,
) -> Result<Point> {
    let p = prox(f, lambda, x, budget)?;
    Ok((x - &p.minimizer).scale(1.0 / lambda))
}

/// Both halves of the Moreau decomposition at one point.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub prox_f: ProxResult,
    /// `prox_{f*}(x)`; from the closed-form conjugate when there is one.
    pub prox_conjugate: Point,
    pub conjugate_route: ConjugateRoute,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugateRoute {
    ClosedForm,
    /// Conjugate taken numerically over a value table of f.
    Grid,
}

/// Cells per axis of the fallback grid used when f has no closed-form
/// conjugate.
const FALLBACK_COUNTS: [usize; 3] = [4001, 401, 61];

/// `‖prox_f(x) + prox_{f*}(x) − x‖` (λ = 1).
pub fn moreau_decomposition_residual(f: &ConvexFunction, x: &Point, budget: &SolverBudget) -> Result<f64> {
    Ok(moreau_decomposition(f, x, budget, ProxMode::Auto)?.residual)
}

pub fn moreau_decomposition(
    f: &ConvexFunction,
    x: &Point,
    budget: &SolverBudget,
    mode: ProxMode,
) -> Result<Decomposition> {
    let prox_f = prox_with(f, 1.0, x, budget, mode)?;
    let (prox_conjugate, route) = match f.conjugate_closed_form() {
        Ok(fc) => (prox_with(&fc, 1.0, x, budget, mode)?.minimizer, ConjugateRoute::ClosedForm),
        Err(Error::UnsupportedConjugate(_)) => {
            (grid_conjugate_prox(f, x, &prox_f.minimizer, budget)?, ConjugateRoute::Grid)
        }
        Err(e) => return Err(e),
    };
    let residual = (&(&prox_f.minimizer + &prox_conjugate) - x).norm();
    Ok(Decomposition {
        prox_f,
        prox_conjugate,
        conjugate_route: route,
        residual,
    })
}

/// prox of f* where f* is the numerical conjugate of a table of f. The
/// conjugate's maximizers at the relevant slopes sit near `prox_f(x)`, so
/// the table is centered there. Accuracy is limited by the grid spacing.
fn grid_conjugate_prox(f: &ConvexFunction, x: &Point, prox_f: &Point, budget: &SolverBudget) -> Result<Point> {
    let n = f.dim();
    if n > 3 {
        return Err(Error::UnsupportedConjugate(format!("{f} (grid fallback needs dim <= 3)")));
    }
    let half = 4.0 * (1.0 + x.dist(prox_f));
    let lo = prox_f.map(|c| c - half);
    let hi = prox_f.map(|c| c + half);
    let grid = SampleGrid::new(lo, hi, vec![FALLBACK_COUNTS[n - 1]; n])?;
    let table = crate::conjugation::tabulate(f, &grid)?;
    let conj = TableConjugate::new(&table)?;
    let out = solver::minimize(&conj, 1.0, x, budget.max_iters, budget.tol.max(grid.max_spacing() * 1e-3))?;
    Ok(out.point)
}
