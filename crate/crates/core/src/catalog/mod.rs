//! Extended-real-valued convex functions on ℝⁿ.
//!
//! A [`ConvexFunction`] is an immutable tree: closed-form atoms at the
//! leaves, and combinators (tilt, translate, add-constant, Moreau envelope)
//! on top. Every node knows how to evaluate itself; most also know their
//! conjugate, prox and subdifferential in closed form (see the sibling
//! modules).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::point::{fmt_real, ExtReal, Point};
use crate::prox_engine::{self, SolverBudget};
use crate::rng::Lcg64;

mod conjugate;
pub mod document;
mod prox;
mod subdiff;

pub use prox::{project_ball, project_box, project_halfspace, shrink};
pub use subdiff::{ConeKind, Sign, SubdiffSet};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 16;

/// Slack used when testing membership in the sets behind indicator atoms.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance of the sampled Rayleigh-quotient PSD test for quadratic atoms.
const PSD_TOL: f64 = 1e-10;
const PSD_PROBES: usize = 100;
const PSD_SEED: u64 = 0x5eed;

#[derive(Clone, Debug)]
pub enum Node {
    /// ⟨a, x⟩ + c
    Affine { a: Point, c: f64 },
    /// ½⟨Qx, x⟩ + ⟨b, x⟩ + c with Q symmetric PSD
    Quadratic { q: DMatrix<f64>, b: Point, c: f64 },
    /// ℓ‖x − center‖
    ScaledNorm { ell: f64, center: Point },
    IndicatorPoint { p: Point },
    IndicatorBall { center: Point, radius: f64 },
    IndicatorBox { lo: Point, hi: Point },
    /// δ of {x : ⟨a, x⟩ ≤ β}
    IndicatorHalfspace { a: Point, beta: f64 },
    /// σ of the ball: ⟨center, x⟩ + radius‖x‖
    SupportBall { center: Point, radius: f64 },
    /// σ of the box: Σ max(loᵢxᵢ, hiᵢxᵢ)
    SupportBox { lo: Point, hi: Point },
    /// f − ⟨a, ·⟩
    Tilt { f: ConvexFunction, a: Point },
    /// f(· + t)
    Translate { f: ConvexFunction, t: Point },
    /// f + c
    AddConst { f: ConvexFunction, c: f64 },
    /// Moreau envelope f_λ
    Envelope { f: ConvexFunction, lambda: f64 },
    /// f + (μ/2)‖·‖², the conjugate of an envelope.
    Regularize { f: ConvexFunction, mu: f64 },
}

/// An immutable, cheaply clonable convex function of a fixed dimension.
#[derive(Clone, Debug)]
pub struct ConvexFunction {
    node: Arc<Node>,
    dim: usize,
}

fn check_vec(v: &Point, dim: usize, what: &str) -> Result<()> {
    v.check_dim(dim, what)
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite")))
    }
}

fn check_dim_cap(dim: usize) -> Result<usize> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::InvalidParameter(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )))
    } else {
        Ok(dim)
    }
}

fn check_box(lo: &Point, hi: &Point) -> Result<usize> {
    let dim = check_dim_cap(lo.dim())?;
    check_vec(hi, dim, "box upper corner")?;
    if let Some(i) = (0..dim).find(|&i| lo[i] > hi[i]) {
        return Err(Error::InvalidParameter(format!(
            "box has lo > hi on axis {i} ({} > {})",
            lo[i], hi[i]
        )));
    }
    Ok(dim)
}

impl ConvexFunction {
    fn from_node(node: Node, dim: usize) -> Self {
        ConvexFunction {
            node: Arc::new(node),
            dim,
        }
    }

    pub fn affine(a: Point, c: f64) -> Result<Self> {
        let dim = check_dim_cap(a.dim())?;
        check_finite(c, "affine constant")?;
        Ok(Self::from_node(Node::Affine { a, c }, dim))
    }

    pub fn quadratic(q: DMatrix<f64>, b: Point, c: f64) -> Result<Self> {
        let dim = check_dim_cap(b.dim())?;
        check_finite(c, "quadratic constant")?;
        if q.nrows() != dim || q.ncols() != dim {
            return Err(Error::dim("quadratic matrix", dim, q.nrows().max(q.ncols())));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("quadratic matrix has non-finite entries".into()));
        }
        let scale = q.amax().max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > PSD_TOL * scale {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut rng = Lcg64::new(PSD_SEED);
        for _ in 0..PSD_PROBES {
            let u = rng.unit_vector(dim);
            let v = DMatrix::from_column_slice(dim, 1, &u);
            let rq = (v.transpose() * &q * &v)[(0, 0)];
            if rq < -PSD_TOL * scale {
                return Err(Error::InvalidParameter(format!(
                    "quadratic matrix is not PSD (Rayleigh quotient {rq})"
                )));
            }
        }
        for i in 0..dim {
            if q[(i, i)] < -PSD_TOL * scale {
                return Err(Error::InvalidParameter("quadratic matrix is not PSD".into()));
            }
        }
        Ok(Self::from_node(Node::Quadratic { q, b, c }, dim))
    }

    /// ½‖x‖² in the given dimension.
    pub fn half_sq_norm(dim: usize) -> Result<Self> {
        Self::quadratic(DMatrix::identity(dim, dim), Point::zeros(dim), 0.0)
    }

    /// ½‖x − center‖²
    pub fn half_sq_dist(center: &Point) -> Result<Self> {
        let dim = center.dim();
        Self::quadratic(DMatrix::identity(dim, dim), -center, 0.5 * center.norm_sq())
    }

    pub fn scaled_norm(ell: f64, center: Point) -> Result<Self> {
        let dim = check_dim_cap(center.dim())?;
        if !(ell.is_finite() && ell >= 0.0) {
            return Err(Error::InvalidParameter(format!("norm scale must be >= 0, got {ell}")));
        }
        Ok(Self::from_node(Node::ScaledNorm { ell, center }, dim))
    }

    /// ℓ‖x‖
    pub fn norm(ell: f64, dim: usize) -> Result<Self> {
        Self::scaled_norm(ell, Point::zeros(dim))
    }

    pub fn indicator_point(p: Point) -> Result<Self> {
        let dim = check_dim_cap(p.dim())?;
        Ok(Self::from_node(Node::IndicatorPoint { p }, dim))
    }

    pub fn indicator_ball(center: Point, radius: f64) -> Result<Self> {
        let dim = check_dim_cap(center.dim())?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self::from_node(Node::IndicatorBall { center, radius }, dim))
    }

    pub fn indicator_box(lo: Point, hi: Point) -> Result<Self> {
        let dim = check_box(&lo, &hi)?;
        Ok(Self::from_node(Node::IndicatorBox { lo, hi }, dim))
    }

    pub fn indicator_halfspace(a: Point, beta: f64) -> Result<Self> {
        let dim = check_dim_cap(a.dim())?;
        check_finite(beta, "halfspace offset")?;
        if a.norm() == 0.0 {
            return Err(Error::InvalidParameter("halfspace normal must be nonzero".into()));
        }
        Ok(Self::from_node(Node::IndicatorHalfspace { a, beta }, dim))
    }

    pub fn support_ball(center: Point, radius: f64) -> Result<Self> {
        let dim = check_dim_cap(center.dim())?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self::from_node(Node::SupportBall { center, radius }, dim))
    }

    pub fn support_box(lo: Point, hi: Point) -> Result<Self> {
        let dim = check_box(&lo, &hi)?;
        Ok(Self::from_node(Node::SupportBox { lo, hi }, dim))
    }

    /// `self − ⟨a, ·⟩`
    pub fn tilt(&self, a: Point) -> Result<Self> {
        check_vec(&a, self.dim, "tilt vector")?;
        Ok(Self::from_node(Node::Tilt { f: self.clone(), a }, self.dim))
    }

    /// `self(· + t)`
    pub fn translate(&self, t: Point) -> Result<Self> {
        check_vec(&t, self.dim, "translation")?;
        Ok(Self::from_node(Node::Translate { f: self.clone(), t }, self.dim))
    }

    pub fn add_const(&self, c: f64) -> Result<Self> {
        check_finite(c, "added constant")?;
        Ok(Self::from_node(Node::AddConst { f: self.clone(), c }, self.dim))
    }

    /// Moreau envelope of index λ.
    pub fn envelope(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("envelope index must be > 0, got {lambda}")));
        }
        Ok(Self::from_node(Node::Envelope { f: self.clone(), lambda }, self.dim))
    }

    /// `self + (μ/2)‖·‖²`
    pub fn regularize(&self, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("regularization must be > 0, got {mu}")));
        }
        Ok(Self::from_node(Node::Regularize { f: self.clone(), mu }, self.dim))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Deepest chain of nested envelopes. Each level costs a full inner
    /// prox evaluation.
    pub fn envelope_depth(&self) -> usize {
        match self.node() {
            Node::Envelope { f, .. } => 1 + f.envelope_depth(),
            Node::Tilt { f, .. }
            | Node::Translate { f, .. }
            | Node::AddConst { f, .. }
            | Node::Regularize { f, .. } => f.envelope_depth(),
            _ => 0,
        }
    }

    /// True when the function is finite everywhere, i.e. no indicator atom
    /// is reachable without passing through an envelope.
    pub fn has_full_domain(&self) -> bool {
        match self.node() {
            Node::IndicatorPoint { .. }
            | Node::IndicatorBall { .. }
            | Node::IndicatorBox { .. }
            | Node::IndicatorHalfspace { .. } => false,
            Node::Tilt { f, .. }
            | Node::Translate { f, .. }
            | Node::AddConst { f, .. }
            | Node::Regularize { f, .. } => f.has_full_domain(),
            _ => true,
        }
    }

    pub fn evaluate(&self, x: &Point) -> Result<ExtReal> {
        x.check_dim(self.dim, "evaluation point")?;
        match self.node() {
            Node::Affine { a, c } => ExtReal::finite(a.dot(x) + c),
            Node::Quadratic { q, b, c } => ExtReal::finite(0.5 * quad_form(q, x) + b.dot(x) + c),
            Node::ScaledNorm { ell, center } => ExtReal::finite(ell * x.dist(center)),
            Node::IndicatorPoint { p } => Ok(indicator(
                x.dist(p) <= FEASIBILITY_TOL * (1.0 + p.norm()),
            )),
            Node::IndicatorBall { center, radius } => Ok(indicator(
                x.dist(center) <= radius + FEASIBILITY_TOL * (1.0 + radius),
            )),
            Node::IndicatorBox { lo, hi } => Ok(indicator((0..self.dim).all(|i| {
                let slack = FEASIBILITY_TOL * (1.0 + lo[i].abs().max(hi[i].abs()));
                x[i] >= lo[i] - slack && x[i] <= hi[i] + slack
            }))),
            Node::IndicatorHalfspace { a, beta } => {
                let slack = FEASIBILITY_TOL * (1.0 + beta.abs() + a.norm() * x.norm());
                Ok(indicator(a.dot(x) <= beta + slack))
            }
            Node::SupportBall { center, radius } => ExtReal::finite(center.dot(x) + radius * x.norm()),
            Node::SupportBox { lo, hi } => ExtReal::finite(
                (0..self.dim).map(|i| (lo[i] * x[i]).max(hi[i] * x[i])).sum(),
            ),
            Node::Tilt { f, a } => f.evaluate(x)?.add_real(-a.dot(x)),
            Node::Translate { f, t } => f.evaluate(&(x + t)),
            Node::AddConst { f, c } => f.evaluate(x)?.add_real(*c),
            Node::Envelope { f, lambda } => {
                let r = prox_engine::prox(f, *lambda, x, &SolverBudget::default())?;
                ExtReal::finite(r.envelope_value)
            }
            Node::Regularize { f, mu } => f.evaluate(x)?.add_real(0.5 * mu * x.norm_sq()),
        }
    }
}

fn indicator(inside: bool) -> ExtReal {
    if inside {
        ExtReal::ZERO
    } else {
        ExtReal::INFINITY
    }
}

pub(crate) fn quad_form(q: &DMatrix<f64>, x: &Point) -> f64 {
    let n = x.dim();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += q[(i, j)] * x[j];
        }
        acc += x[i] * row;
    }
    acc
}

pub(crate) fn mat_vec(q: &DMatrix<f64>, x: &Point) -> Point {
    let n = x.dim();
    Point::from_iter_unchecked((0..n).map(|i| (0..n).map(|j| q[(i, j)] * x[j]).sum::<f64>()))
}

impl fmt::Display for ConvexFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Affine { a, c } => write!(fm, "affine(a={a}, c={})", fmt_real(*c)),
            Node::Quadratic { q, b, c } => {
                write!(fm, "quadratic(Q=[")?;
                for i in 0..q.nrows() {
                    if i > 0 {
                        write!(fm, "; ")?;
                    }
                    let row: Vec<String> = (0..q.ncols()).map(|j| fmt_real(q[(i, j)])).collect();
                    write!(fm, "{}", row.join(" "))?;
                }
                write!(fm, "], b={b}, c={})", fmt_real(*c))
            }
            Node::ScaledNorm { ell, center } => {
                write!(fm, "scaled_norm(ell={}, center={center})", fmt_real(*ell))
            }
            Node::IndicatorPoint { p } => write!(fm, "indicator_point(p={p})"),
            Node::IndicatorBall { center, radius } => {
                write!(fm, "indicator_ball(center={center}, radius={})", fmt_real(*radius))
            }
            Node::IndicatorBox { lo, hi } => write!(fm, "indicator_box(lo={lo}, hi={hi})"),
            Node::IndicatorHalfspace { a, beta } => {
                write!(fm, "indicator_halfspace(a={a}, beta={})", fmt_real(*beta))
            }
            Node::SupportBall { center, radius } => {
                write!(fm, "support_ball(center={center}, radius={})", fmt_real(*radius))
            }
            Node::SupportBox { lo, hi } => write!(fm, "support_box(lo={lo}, hi={hi})"),
            Node::Tilt { f, a } => write!(fm, "tilt({f}, a={a})"),
            Node::Translate { f, t } => write!(fm, "translate({f}, t={t})"),
            Node::AddConst { f, c } => write!(fm, "add_const({f}, c={})", fmt_real(*c)),
            Node::Envelope { f, lambda } => {
                write!(fm, "envelope({f}, lambda={})", fmt_real(*lambda))
            }
            Node::Regularize { f, mu } => write!(fm, "regularize({f}, mu={})", fmt_real(*mu)),
        }
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }
}
