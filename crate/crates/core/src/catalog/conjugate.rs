//! Closed-form Legendre-Fenchel conjugates.

use super::{mat_vec, quad_form, ConvexFunction, Node};
use crate::error::{Error, Result};
use crate::point::Point;

impl ConvexFunction {
    /// The conjugate `f*` by the rule table.
    ///
    /// Combinator rules, with tilt meaning `f − ⟨a,·⟩`:
    /// `(tilt(f, a))* = translate(f*, a)`, `(translate(f, t))* = tilt(f*, t)`,
    /// `(f + c)* = f* − c`, `(f_λ)* = f* + (λ/2)‖·‖²` and
    /// `(f + (μ/2)‖·‖²)* = (f*)_{1/μ}`.
    pub fn conjugate_closed_form(&self) -> Result<ConvexFunction> {
        let n = self.dim();
        match self.node() {
            Node::Affine { a, c } => with_const(ConvexFunction::indicator_point(a.clone())?, -c),
            Node::Quadratic { q, b, c } => {
                if q.iter().all(|v| *v == 0.0) {
                    return with_const(ConvexFunction::indicator_point(b.clone())?, -c);
                }
                let chol = q.clone().cholesky().ok_or_else(|| {
                    Error::UnsupportedConjugate(format!("{self} (singular quadratic)"))
                })?;
                let inv = chol.inverse();
                let inv = (&inv + inv.transpose()) * 0.5;
                let inv_b = mat_vec(&inv, b);
                ConvexFunction::quadratic(inv.clone(), -&inv_b, 0.5 * quad_form(&inv, b) - c)
            }
            Node::ScaledNorm { ell, center } => {
                let base = if *ell == 0.0 {
                    return ConvexFunction::indicator_point(Point::zeros(n));
                } else {
                    ConvexFunction::indicator_ball(Point::zeros(n), *ell)?
                };
                if center.iter().all(|c| *c == 0.0) {
                    Ok(base)
                } else {
                    base.tilt(-center)
                }
            }
            Node::IndicatorPoint { p } => ConvexFunction::affine(p.clone(), 0.0),
            Node::IndicatorBall { center, radius } => {
                ConvexFunction::support_ball(center.clone(), *radius)
            }
            Node::IndicatorBox { lo, hi } => ConvexFunction::support_box(lo.clone(), hi.clone()),
            Node::IndicatorHalfspace { .. } => Err(Error::UnsupportedConjugate(self.to_string())),
            Node::SupportBall { center, radius } => {
                ConvexFunction::indicator_ball(center.clone(), *radius)
            }
            Node::SupportBox { lo, hi } => ConvexFunction::indicator_box(lo.clone(), hi.clone()),
            Node::Tilt { f, a } => f.conjugate_closed_form()?.translate(a.clone()),
            Node::Translate { f, t } => f.conjugate_closed_form()?.tilt(t.clone()),
            Node::AddConst { f, c } => f.conjugate_closed_form()?.add_const(-c),
            Node::Envelope { f, lambda } => f.conjugate_closed_form()?.regularize(*lambda),
            Node::Regularize { f, mu } => f.conjugate_closed_form()?.envelope(*mu),
        }
    }
}

fn with_const(f: ConvexFunction, c: f64) -> Result<ConvexFunction> {
    if c == 0.0 {
        Ok(f)
    } else {
        f.add_const(c)
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::pt;
    use super::*;
    use crate::rng::Lcg64;
    use nalgebra::DMatrix;

    #[test]
    fn half_square_is_self_conjugate() {
        let f = ConvexFunction::half_sq_norm(2).unwrap();
        let g = f.conjugate_closed_form().unwrap();
        match g.node() {
            Node::Quadratic { q, b, c } => {
                assert_eq!(*q, DMatrix::<f64>::identity(2, 2));
                assert_eq!(b.norm(), 0.0);
                assert_eq!(*c, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn point_indicator_conjugate_is_linear() {
        let f = ConvexFunction::indicator_point(pt(&[1.0, 0.0])).unwrap();
        match f.conjugate_closed_form().unwrap().node() {
            Node::Affine { a, c } => {
                assert_eq!(*a, pt(&[1.0, 0.0]));
                assert_eq!(*c, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Oracle: brute-force sup of ⟨y, v⟩ − ℓ|v| over a grid of radius 10ℓ.
    #[test]
    fn scaled_norm_conjugate_matches_brute_force() {
        let ell = 1.7;
        let f = ConvexFunction::norm(ell, 1).unwrap();
        let g = f.conjugate_closed_form().unwrap();
        assert!(matches!(g.node(), Node::IndicatorBall { radius, .. } if *radius == ell));
        let brute = |y: f64| {
            let n = 20_001;
            (0..n)
                .map(|i| {
                    let v = -10.0 * ell + 20.0 * ell * i as f64 / (n - 1) as f64;
                    y * v - ell * v.abs()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        // Interior: sup is 0. Exterior: sup grows with the grid radius.
        for y in [-1.5, -0.3, 0.0, 1.0, 1.69] {
            assert!(brute(y).abs() < 1e-6);
            assert_eq!(g.evaluate(&pt(&[y])).unwrap().value(), Some(0.0));
        }
        for y in [1.8, -2.5] {
            assert!(brute(y) > 1.0);
            assert!(g.evaluate(&pt(&[y])).unwrap().is_infinite());
        }
    }

    fn catalog_2d() -> Vec<ConvexFunction> {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        vec![
            ConvexFunction::affine(pt(&[1.0, -2.0]), 0.5).unwrap(),
            ConvexFunction::quadratic(q, pt(&[0.3, -0.1]), 1.0).unwrap(),
            ConvexFunction::scaled_norm(1.5, pt(&[0.5, 0.5])).unwrap(),
            ConvexFunction::indicator_point(pt(&[0.2, 0.4])).unwrap(),
            ConvexFunction::indicator_ball(pt(&[1.0, 0.0]), 2.0).unwrap(),
            ConvexFunction::indicator_box(pt(&[-1.0, 0.0]), pt(&[1.0, 3.0])).unwrap(),
            ConvexFunction::support_ball(pt(&[0.0, 1.0]), 0.5).unwrap(),
            ConvexFunction::support_box(pt(&[-2.0, -1.0]), pt(&[0.0, 1.0])).unwrap(),
            ConvexFunction::norm(1.0, 2).unwrap().tilt(pt(&[0.3, 0.2])).unwrap(),
            ConvexFunction::norm(1.0, 2).unwrap().translate(pt(&[0.3, 0.2])).unwrap(),
            ConvexFunction::half_sq_norm(2).unwrap().add_const(-2.0).unwrap(),
            ConvexFunction::norm(2.0, 2).unwrap().envelope(0.5).unwrap(),
            ConvexFunction::indicator_ball(pt(&[0.0, 0.0]), 1.0)
                .unwrap()
                .regularize(2.0)
                .unwrap(),
        ]
    }

    #[test]
    fn fenchel_inequality_on_samples() {
        let mut rng = Lcg64::new(5);
        let origin = Point::zeros(2);
        for f in catalog_2d() {
            let g = f.conjugate_closed_form().unwrap();
            let mut pairs = 0;
            while pairs < 100 {
                let x = rng.in_ball(&origin, 3.0);
                let y = rng.in_ball(&origin, 3.0);
                let (fx, gy) = (f.evaluate(&x).unwrap(), g.evaluate(&y).unwrap());
                if let (Some(fx), Some(gy)) = (fx.value(), gy.value()) {
                    assert!(fx + gy >= x.dot(&y) - 1e-9, "{f}: x={x} y={y}");
                }
                pairs += 1;
            }
        }
    }

    #[test]
    fn involution_on_samples() {
        let mut rng = Lcg64::new(6);
        let origin = Point::zeros(2);
        for f in catalog_2d() {
            let ff = f.conjugate_closed_form().unwrap().conjugate_closed_form().unwrap();
            for _ in 0..50 {
                let x = rng.in_ball(&origin, 3.0);
                let (a, b) = (f.evaluate(&x).unwrap(), ff.evaluate(&x).unwrap());
                match (a.value(), b.value()) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{f} at {x}: {a} vs {b}"),
                    (None, None) => {}
                    _ => panic!("{f} at {x}: finiteness differs ({a} vs {b})"),
                }
            }
        }
    }

    #[test]
    fn halfspace_conjugate_is_unsupported() {
        let f = ConvexFunction::indicator_halfspace(pt(&[1.0, 1.0]), 0.0).unwrap();
        assert!(matches!(f.conjugate_closed_form(), Err(Error::UnsupportedConjugate(_))));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let f = ConvexFunction::quadratic(singular, pt(&[0.0, 0.0]), 0.0).unwrap();
        assert!(matches!(f.conjugate_closed_form(), Err(Error::UnsupportedConjugate(_))));
    }
}
