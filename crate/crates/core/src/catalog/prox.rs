//! Closed-form proximal maps and the projections behind them.

use nalgebra::{DMatrix, DVector};

use super::{ConvexFunction, Node};
use crate::error::{Error, Result};
use crate::point::Point;

/// Soft-thresholding of a vector: `(1 − τ / max(‖z‖, τ)) z`.
pub fn shrink(z: &Point, tau: f64) -> Point {
    let n = z.norm();
    if n <= tau {
        Point::zeros(z.dim())
    } else {
        z.scale(1.0 - tau / n)
    }
}

pub fn project_ball(x: &Point, center: &Point, radius: f64) -> Point {
    let d = x - center;
    let n = d.norm();
    if n <= radius {
        x.clone()
    } else {
        center.axpy(radius / n, &d)
    }
}

pub fn project_box(x: &Point, lo: &Point, hi: &Point) -> Point {
    Point::from_iter_unchecked((0..x.dim()).map(|i| x[i].clamp(lo[i], hi[i])))
}

/// Projection onto {y : ⟨a, y⟩ ≤ β}.
pub fn project_halfspace(x: &Point, a: &Point, beta: f64) -> Point {
    let excess = a.dot(x) - beta;
    if excess <= 0.0 {
        x.clone()
    } else {
        x.axpy(-excess / a.norm_sq(), a)
    }
}

impl ConvexFunction {
    /// `prox_{λf}(x)` by the closed-form rule table.
    ///
    /// Envelopes use `prox_{λ f_μ}(x) = x + λ/(μ+λ) (prox_{(μ+λ) f}(x) − x)` and
    /// regularized nodes use `prox_{λ(f + μ/2‖·‖²)}(x) = prox_{λ' f}(x / (1+λμ))`
    /// with `λ' = λ / (1+λμ)`, so every tree in the catalog has a closed form
    /// as long as its quadratic atoms are well posed.
    pub fn prox_closed_form(&self, lambda: f64, x: &Point) -> Result<Point> {
        x.check_dim(self.dim(), "prox point")?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("prox index must be > 0, got {lambda}")));
        }
        Ok(match self.node() {
            Node::Affine { a, .. } => x.axpy(-lambda, a),
            Node::Quadratic { q, b, .. } => {
                let n = self.dim();
                let m = DMatrix::identity(n, n) + q * lambda;
                let rhs = DVector::from_iterator(n, x.axpy(-lambda, b).iter().copied());
                let sol = m
                    .cholesky()
                    .ok_or_else(|| Error::UnsupportedProx(format!("{self}: I + λQ not PD")))?
                    .solve(&rhs);
                Point::new(sol.iter().copied().collect::<Vec<_>>())?
            }
            Node::ScaledNorm { ell, center } => center + &shrink(&(x - center), lambda * ell),
            Node::IndicatorPoint { p } => p.clone(),
            Node::IndicatorBall { center, radius } => project_ball(x, center, *radius),
            Node::IndicatorBox { lo, hi } => project_box(x, lo, hi),
            Node::IndicatorHalfspace { a, beta } => project_halfspace(x, a, *beta),
            Node::SupportBall { center, radius } => shrink(&x.axpy(-lambda, center), lambda * radius),
            Node::SupportBox { lo, hi } => {
                // prox_{λσ_C}(x) = x − λ proj_C(x / λ)
                let p = project_box(&x.scale(1.0 / lambda), lo, hi);
                x.axpy(-lambda, &p)
            }
            Node::Tilt { f, a } => f.prox_closed_form(lambda, &x.axpy(lambda, a))?,
            Node::Translate { f, t } => &f.prox_closed_form(lambda, &(x + t))? - t,
            Node::AddConst { f, .. } => f.prox_closed_form(lambda, x)?,
            Node::Envelope { f, lambda: mu } => {
                let p = f.prox_closed_form(mu + lambda, x)?;
                x.axpy(lambda / (mu + lambda), &(&p - x))
            }
            Node::Regularize { f, mu } => {
                let s = 1.0 + lambda * mu;
                f.prox_closed_form(lambda / s, &x.scale(1.0 / s))?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::pt;
    use super::*;
    use crate::rng::Lcg64;

    fn close(a: &Point, b: &Point, tol: f64) -> bool {
        a.dist(b) <= tol
    }

    #[test]
    fn norm_prox_examples() {
        let f = ConvexFunction::norm(1.0, 2).unwrap();
        let y = f.prox_closed_form(1.0, &pt(&[3.0, 4.0])).unwrap();
        assert!(close(&y, &pt(&[2.4, 3.2]), 1e-15));
        let y = f.prox_closed_form(1.0, &pt(&[0.5, 0.0])).unwrap();
        assert_eq!(y, pt(&[0.0, 0.0]));
    }

    #[test]
    fn ball_projection_example() {
        let f = ConvexFunction::indicator_ball(pt(&[0.0, 0.0]), 1.0).unwrap();
        let y = f.prox_closed_form(1.0, &pt(&[3.0, 4.0])).unwrap();
        assert!(close(&y, &pt(&[0.6, 0.8]), 1e-15));
    }

    #[test]
    fn translate_rule_example() {
        // prox of ‖· + (1,0)‖ at (2,0) = shrink((3,0)) − (1,0) = (1,0)
        let f = ConvexFunction::norm(1.0, 2).unwrap().translate(pt(&[1.0, 0.0])).unwrap();
        let y = f.prox_closed_form(1.0, &pt(&[2.0, 0.0])).unwrap();
        assert!(close(&y, &pt(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn quadratic_prox_solves_linear_system() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let f = ConvexFunction::quadratic(q.clone(), pt(&[1.0, -1.0]), 0.0).unwrap();
        let x = pt(&[0.3, 2.0]);
        let y = f.prox_closed_form(0.7, &x).unwrap();
        // stationarity: (y − x)/λ + Qy + b = 0
        let qy = super::super::mat_vec(&q, &y);
        let r = (&(&y - &x).scale(1.0 / 0.7) + &qy).axpy(1.0, &pt(&[1.0, -1.0]));
        assert!(r.norm() < 1e-12);
    }

    /// Brute-force minimization of the prox objective over a fine 1D grid.
    fn grid_argmin(f: &ConvexFunction, lambda: f64, x: f64, lo: f64, hi: f64) -> f64 {
        let n = 200_001;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let v = f.evaluate(&pt(&[y])).unwrap().as_f64() + (x - y).powi(2) / (2.0 * lambda);
            if v < best.0 {
                best = (v, y);
            }
        }
        best.1
    }

    #[test]
    fn combinator_rules_match_grid_minimization() {
        let base = ConvexFunction::norm(1.5, 1).unwrap();
        let cases = vec![
            base.tilt(pt(&[0.7])).unwrap(),
            base.translate(pt(&[-0.4])).unwrap(),
            base.add_const(3.0).unwrap(),
            base.envelope(0.8).unwrap(),
            base.regularize(0.5).unwrap(),
            ConvexFunction::support_box(pt(&[-1.0]), pt(&[0.5])).unwrap(),
            ConvexFunction::support_ball(pt(&[0.3]), 0.6).unwrap(),
            ConvexFunction::indicator_halfspace(pt(&[2.0]), 1.0).unwrap(),
        ];
        for f in &cases {
            for &(lambda, x) in &[(1.0, 2.3), (0.5, -1.1), (2.0, 0.2), (1.0, -3.0)] {
                let y = f.prox_closed_form(lambda, &pt(&[x])).unwrap()[0];
                let g = grid_argmin(f, lambda, x, -5.0, 5.0);
                assert!((y - g).abs() < 1e-4, "{f} λ={lambda} x={x}: {y} vs grid {g}");
            }
        }
    }

    #[test]
    fn prox_is_nonexpansive_on_samples() {
        let fs = vec![
            ConvexFunction::norm(1.0, 3).unwrap(),
            ConvexFunction::indicator_box(pt(&[-1.0, 0.0, 0.5]), pt(&[1.0, 2.0, 0.5])).unwrap(),
            ConvexFunction::support_ball(pt(&[0.2, 0.0, -0.1]), 1.3).unwrap(),
            ConvexFunction::half_sq_norm(3).unwrap().envelope(2.0).unwrap(),
        ];
        let mut rng = Lcg64::new(11);
        let origin = Point::zeros(3);
        for f in &fs {
            for _ in 0..200 {
                let x = rng.in_ball(&origin, 4.0);
                let z = rng.in_ball(&origin, 4.0);
                let px = f.prox_closed_form(0.7, &x).unwrap();
                let pz = f.prox_closed_form(0.7, &z).unwrap();
                assert!(px.dist(&pz) <= x.dist(&z) + 1e-9);
            }
        }
    }
}
