//! Subdifferentials as explicit closed convex sets.

use super::{mat_vec, ConvexFunction, Node, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::prox_engine::{self, SolverBudget};
use crate::rng::Lcg64;

/// A point within this distance of a kink is treated as lying on it.
const KINK_TOL: f64 = 1e-12;

/// Coordinate constraint of an orthant-like normal cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Zero,
    NonNeg,
    NonPos,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConeKind {
    /// {t·u : t ≥ 0}, `u` a unit vector.
    Ray(Point),
    /// Product of per-coordinate constraints. Covers box normal cones and
    /// the whole space (all `Free`).
    Orthant(Vec<Sign>),
}

/// A nonempty closed convex subset of ℝⁿ, or `Empty` outside the domain.
#[derive(Clone, Debug, PartialEq)]
pub enum SubdiffSet {
    Singleton(Point),
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Segment { p: Point, q: Point },
    /// `apex + K` for a closed convex cone `K`.
    Cone { apex: Point, kind: ConeKind },
    Empty,
}

impl SubdiffSet {
    pub fn ball(center: Point, radius: f64) -> Self {
        if radius <= 0.0 {
            SubdiffSet::Singleton(center)
        } else {
            SubdiffSet::Ball { center, radius }
        }
    }

    pub fn boxed(lo: Point, hi: Point) -> Self {
        if (0..lo.dim()).all(|i| lo[i] == hi[i]) {
            SubdiffSet::Singleton(lo)
        } else {
            SubdiffSet::Box { lo, hi }
        }
    }

    pub fn ray(apex: Point, dir: &Point) -> Self {
        let n = dir.norm();
        if n == 0.0 {
            SubdiffSet::Singleton(apex)
        } else {
            SubdiffSet::Cone {
                apex,
                kind: ConeKind::Ray(dir.scale(1.0 / n)),
            }
        }
    }

    pub fn orthant(apex: Point, signs: Vec<Sign>) -> Self {
        if signs.iter().all(|s| *s == Sign::Zero) {
            return SubdiffSet::Singleton(apex);
        }
        let apex = Point::from_iter_unchecked(
            (0..apex.dim()).map(|i| if signs[i] == Sign::Free { 0.0 } else { apex[i] }),
        );
        SubdiffSet::Cone {
            apex,
            kind: ConeKind::Orthant(signs),
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::orthant(Point::zeros(dim), vec![Sign::Free; dim])
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SubdiffSet::Empty)
    }

    /// `self + shift`
    pub fn translate(&self, shift: &Point) -> SubdiffSet {
        match self {
            SubdiffSet::Singleton(g) => SubdiffSet::Singleton(g + shift),
            SubdiffSet::Ball { center, radius } => SubdiffSet::Ball {
                center: center + shift,
                radius: *radius,
            },
            SubdiffSet::Box { lo, hi } => SubdiffSet::Box {
                lo: lo + shift,
                hi: hi + shift,
            },
            SubdiffSet::Segment { p, q } => SubdiffSet::Segment {
                p: p + shift,
                q: q + shift,
            },
            SubdiffSet::Cone { apex, kind } => match kind {
                ConeKind::Ray(_) => SubdiffSet::Cone {
                    apex: apex + shift,
                    kind: kind.clone(),
                },
                ConeKind::Orthant(signs) => Self::orthant(apex + shift, signs.clone()),
            },
            SubdiffSet::Empty => SubdiffSet::Empty,
        }
    }

    /// Projection of the origin onto the set.
    pub fn min_norm_element(&self) -> Result<Point> {
        Ok(match self {
            SubdiffSet::Singleton(g) => g.clone(),
            SubdiffSet::Ball { center, radius } => {
                let n = center.norm();
                if n <= *radius {
                    Point::zeros(center.dim())
                } else {
                    center.scale(1.0 - radius / n)
                }
            }
            SubdiffSet::Box { lo, hi } => {
                Point::from_iter_unchecked((0..lo.dim()).map(|i| 0.0f64.clamp(lo[i], hi[i])))
            }
            SubdiffSet::Segment { p, q } => closest_on_segment(&Point::zeros(p.dim()), p, q),
            SubdiffSet::Cone { apex, kind } => match kind {
                ConeKind::Ray(u) => apex.axpy((-apex.dot(u)).max(0.0), u),
                ConeKind::Orthant(signs) => {
                    Point::from_iter_unchecked((0..apex.dim()).map(|i| match signs[i] {
                        Sign::Zero => apex[i],
                        Sign::NonNeg => apex[i].max(0.0),
                        Sign::NonPos => apex[i].min(0.0),
                        Sign::Free => 0.0,
                    }))
                }
            },
            SubdiffSet::Empty => return Err(Error::EmptySubdifferential),
        })
    }

    pub fn contains(&self, v: &Point, tol: f64) -> bool {
        match self {
            SubdiffSet::Singleton(g) => v.dist(g) <= tol,
            SubdiffSet::Ball { center, radius } => v.dist(center) <= radius + tol,
            SubdiffSet::Box { lo, hi } => (0..v.dim()).all(|i| v[i] >= lo[i] - tol && v[i] <= hi[i] + tol),
            SubdiffSet::Segment { p, q } => closest_on_segment(v, p, q).dist(v) <= tol,
            SubdiffSet::Cone { apex, kind } => {
                let w = v - apex;
                match kind {
                    ConeKind::Ray(u) => {
                        let t = w.dot(u);
                        t >= -tol && w.axpy(-t, u).norm() <= tol
                    }
                    ConeKind::Orthant(signs) => (0..w.dim()).all(|i| match signs[i] {
                        Sign::Zero => w[i].abs() <= tol,
                        Sign::NonNeg => w[i] >= -tol,
                        Sign::NonPos => w[i] <= tol,
                        Sign::Free => true,
                    }),
                }
            }
            SubdiffSet::Empty => false,
        }
    }

    /// Support function `sup_{s ∈ S} ⟨s, d⟩`; −∞ for the empty set.
    pub fn support(&self, d: &Point) -> f64 {
        match self {
            SubdiffSet::Singleton(g) => g.dot(d),
            SubdiffSet::Ball { center, radius } => center.dot(d) + radius * d.norm(),
            SubdiffSet::Box { lo, hi } => (0..d.dim()).map(|i| (lo[i] * d[i]).max(hi[i] * d[i])).sum(),
            SubdiffSet::Segment { p, q } => p.dot(d).max(q.dot(d)),
            SubdiffSet::Cone { apex, kind } => {
                let unbounded = match kind {
                    ConeKind::Ray(u) => u.dot(d) > 0.0,
                    ConeKind::Orthant(signs) => (0..d.dim()).any(|i| match signs[i] {
                        Sign::Zero => false,
                        Sign::NonNeg => d[i] > 0.0,
                        Sign::NonPos => d[i] < 0.0,
                        Sign::Free => d[i] != 0.0,
                    }),
                };
                if unbounded {
                    f64::INFINITY
                } else {
                    apex.dot(d)
                }
            }
            SubdiffSet::Empty => f64::NEG_INFINITY,
        }
    }

    /// Draws `count` elements of the set; cones are sampled up to distance
    /// `reach` from their apex.
    pub fn sample(&self, rng: &mut Lcg64, count: usize, reach: f64) -> Vec<Point> {
        (0..count)
            .filter_map(|_| match self {
                SubdiffSet::Singleton(g) => Some(g.clone()),
                SubdiffSet::Ball { center, radius } => Some(rng.in_ball(center, *radius)),
                SubdiffSet::Box { lo, hi } => Some(rng.in_box(lo, hi)),
                SubdiffSet::Segment { p, q } => Some(p.axpy(rng.uniform(), &(q - p))),
                SubdiffSet::Cone { apex, kind } => Some(match kind {
                    ConeKind::Ray(u) => apex.axpy(reach * rng.uniform(), u),
                    ConeKind::Orthant(signs) => {
                        Point::from_iter_unchecked((0..apex.dim()).map(|i| {
                            let r = reach * rng.uniform();
                            apex[i]
                                + match signs[i] {
                                    Sign::Zero => 0.0,
                                    Sign::NonNeg => r,
                                    Sign::NonPos => -r,
                                    Sign::Free => 2.0 * r - reach,
                                }
                        }).collect::<Vec<_>>())
                    }
                }),
                SubdiffSet::Empty => None,
            })
            .collect()
    }

    /// Structural comparison for sets of the same kind. `None` when the
    /// kinds differ and the caller has to fall back to probing.
    pub fn structurally_equal(&self, other: &SubdiffSet, tol: f64) -> Option<bool> {
        use SubdiffSet::*;
        Some(match (self, other) {
            (Singleton(a), Singleton(b)) => a.dist(b) <= tol,
            (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
                c1.dist(c2) <= tol && (r1 - r2).abs() <= tol
            }
            (Box { lo: l1, hi: h1 }, Box { lo: l2, hi: h2 }) => l1.dist(l2) <= tol && h1.dist(h2) <= tol,
            (Segment { p: p1, q: q1 }, Segment { p: p2, q: q2 }) => {
                (p1.dist(p2) <= tol && q1.dist(q2) <= tol) || (p1.dist(q2) <= tol && q1.dist(p2) <= tol)
            }
            (Cone { apex: a1, kind: k1 }, Cone { apex: a2, kind: k2 }) => {
                a1.dist(a2) <= tol
                    && match (k1, k2) {
                        (ConeKind::Ray(u1), ConeKind::Ray(u2)) => u1.dist(u2) <= tol,
                        (ConeKind::Orthant(s1), ConeKind::Orthant(s2)) => s1 == s2,
                        _ => return None,
                    }
            }
            (Empty, Empty) => true,
            (Empty, _) | (_, Empty) => false,
            _ => return None,
        })
    }
}

fn closest_on_segment(x: &Point, p: &Point, q: &Point) -> Point {
    let d = q - p;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return p.clone();
    }
    let t = ((x - p).dot(&d) / len2).clamp(0.0, 1.0);
    p.axpy(t, &d)
}

impl ConvexFunction {
    /// `∂f(x)` as an explicit set.
    pub fn subdifferential(&self, x: &Point) -> Result<SubdiffSet> {
        x.check_dim(self.dim(), "subdifferential point")?;
        let n = self.dim();
        Ok(match self.node() {
            Node::Affine { a, .. } => SubdiffSet::Singleton(a.clone()),
            Node::Quadratic { q, b, .. } => SubdiffSet::Singleton(&mat_vec(q, x) + b),
            Node::ScaledNorm { ell, center } => {
                let d = x - center;
                let r = d.norm();
                if *ell == 0.0 {
                    SubdiffSet::Singleton(Point::zeros(n))
                } else if r <= KINK_TOL * (1.0 + center.norm()) {
                    SubdiffSet::ball(Point::zeros(n), *ell)
                } else {
                    SubdiffSet::Singleton(d.scale(ell / r))
                }
            }
            Node::IndicatorPoint { p } => {
                if x.dist(p) <= FEASIBILITY_TOL * (1.0 + p.norm()) {
                    SubdiffSet::whole_space(n)
                } else {
                    SubdiffSet::Empty
                }
            }
            Node::IndicatorBall { center, radius } => {
                let d = x - center;
                let r = d.norm();
                let tol = FEASIBILITY_TOL * (1.0 + radius);
                if r > radius + tol {
                    SubdiffSet::Empty
                } else if r < radius - tol {
                    SubdiffSet::Singleton(Point::zeros(n))
                } else {
                    SubdiffSet::ray(Point::zeros(n), &d)
                }
            }
            Node::IndicatorBox { lo, hi } => {
                let mut signs = Vec::with_capacity(n);
                for i in 0..n {
                    let tol = FEASIBILITY_TOL * (1.0 + lo[i].abs().max(hi[i].abs()));
                    if x[i] < lo[i] - tol || x[i] > hi[i] + tol {
                        return Ok(SubdiffSet::Empty);
                    }
                    let at_lo = (x[i] - lo[i]).abs() <= tol;
                    let at_hi = (x[i] - hi[i]).abs() <= tol;
                    signs.push(match (at_lo, at_hi) {
                        (true, true) => Sign::Free,
                        (true, false) => Sign::NonPos,
                        (false, true) => Sign::NonNeg,
                        (false, false) => Sign::Zero,
                    });
                }
                SubdiffSet::orthant(Point::zeros(n), signs)
            }
            Node::IndicatorHalfspace { a, beta } => {
                let tol = FEASIBILITY_TOL * (1.0 + beta.abs() + a.norm() * x.norm());
                let s = a.dot(x) - beta;
                if s > tol {
                    SubdiffSet::Empty
                } else if s < -tol {
                    SubdiffSet::Singleton(Point::zeros(n))
                } else {
                    SubdiffSet::ray(Point::zeros(n), a)
                }
            }
            Node::SupportBall { center, radius } => {
                let r = x.norm();
                if r <= KINK_TOL {
                    SubdiffSet::ball(center.clone(), *radius)
                } else {
                    SubdiffSet::Singleton(center.axpy(radius / r, x))
                }
            }
            Node::SupportBox { lo, hi } => {
                let pick = |i: usize| -> (f64, f64) {
                    if x[i] > KINK_TOL {
                        (hi[i], hi[i])
                    } else if x[i] < -KINK_TOL {
                        (lo[i], lo[i])
                    } else {
                        (lo[i], hi[i])
                    }
                };
                let (l, h): (Vec<f64>, Vec<f64>) = (0..n).map(pick).unzip();
                SubdiffSet::boxed(Point::new(l)?, Point::new(h)?)
            }
            Node::Tilt { f, a } => f.subdifferential(x)?.translate(&-a),
            Node::Translate { f, t } => f.subdifferential(&(x + t))?,
            Node::AddConst { f, .. } => f.subdifferential(x)?,
            Node::Envelope { f, lambda } => {
                let p = prox_engine::prox(f, *lambda, x, &SolverBudget::default())?;
                SubdiffSet::Singleton((x - &p.minimizer).scale(1.0 / lambda))
            }
            Node::Regularize { f, mu } => f.subdifferential(x)?.translate(&x.scale(*mu)),
        })
    }

    /// The least-norm element of `∂f(x)`.
    pub fn minimal_selection(&self, x: &Point) -> Result<Point> {
        self.subdifferential(x)?.min_norm_element()
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::pt;
    use super::*;

    #[test]
    fn norm_at_origin_is_unit_ball() {
        let f = ConvexFunction::norm(1.0, 2).unwrap();
        assert_eq!(
            f.subdifferential(&pt(&[0.0, 0.0])).unwrap(),
            SubdiffSet::Ball {
                center: pt(&[0.0, 0.0]),
                radius: 1.0
            }
        );
        assert_eq!(f.minimal_selection(&pt(&[0.0, 0.0])).unwrap(), pt(&[0.0, 0.0]));
        let g = f.minimal_selection(&pt(&[3.0, 4.0])).unwrap();
        assert!(g.dist(&pt(&[0.6, 0.8])) < 1e-15);
    }

    #[test]
    fn quadratic_gradient() {
        let f = ConvexFunction::half_sq_norm(2)
            .unwrap()
            .tilt(pt(&[-1.0, 2.0])) // b = (1, -2)
            .unwrap();
        let x = pt(&[0.5, 0.5]);
        let g = f.minimal_selection(&x).unwrap();
        assert!(g.dist(&pt(&[1.5, -1.5])) < 1e-15);
    }

    #[test]
    fn tilted_norm_at_origin_contains_zero() {
        let f = ConvexFunction::norm(1.0, 2).unwrap().tilt(pt(&[0.5, 0.0])).unwrap();
        let s = f.subdifferential(&pt(&[0.0, 0.0])).unwrap();
        assert_eq!(
            s,
            SubdiffSet::Ball {
                center: pt(&[-0.5, 0.0]),
                radius: 1.0
            }
        );
        assert_eq!(s.min_norm_element().unwrap(), pt(&[0.0, 0.0]));
    }

    /// Oracle: the normal-cone definition ⟨v, c − x⟩ ≤ 0 for every box point c.
    #[test]
    fn box_normal_cone_on_face() {
        let f = ConvexFunction::indicator_box(pt(&[0.0, 0.0]), pt(&[1.0, 1.0])).unwrap();
        let x = pt(&[1.0, 0.5]);
        let s = f.subdifferential(&x).unwrap();
        assert_eq!(
            s,
            SubdiffSet::Cone {
                apex: pt(&[0.0, 0.0]),
                kind: ConeKind::Orthant(vec![Sign::NonNeg, Sign::Zero])
            }
        );
        let mut rng = Lcg64::new(2);
        let box_pts: Vec<Point> = (0..500)
            .map(|_| rng.in_box(&pt(&[0.0, 0.0]), &pt(&[1.0, 1.0])))
            .collect();
        let is_normal = |v: &Point| box_pts.iter().all(|c| v.dot(&(c - &x)) <= 1e-12);
        assert!(is_normal(&pt(&[2.0, 0.0])) && s.contains(&pt(&[2.0, 0.0]), 1e-12));
        assert!(!is_normal(&pt(&[1.0, 0.3])) && !s.contains(&pt(&[1.0, 0.3]), 1e-12));
        assert!(!is_normal(&pt(&[-1.0, 0.0])) && !s.contains(&pt(&[-1.0, 0.0]), 1e-12));
    }

    #[test]
    fn outside_domain_is_empty() {
        let f = ConvexFunction::indicator_ball(pt(&[0.0, 0.0]), 1.0).unwrap();
        assert!(f.subdifferential(&pt(&[2.0, 0.0])).unwrap().is_empty());
        assert!(matches!(
            f.minimal_selection(&pt(&[2.0, 0.0])),
            Err(Error::EmptySubdifferential)
        ));
        let p = ConvexFunction::indicator_point(pt(&[1.0])).unwrap();
        assert!(p.subdifferential(&pt(&[0.0])).unwrap().is_empty());
        assert_eq!(p.minimal_selection(&pt(&[1.0])).unwrap(), pt(&[0.0]));
    }

    #[test]
    fn envelope_subdifferential_uses_gradient_formula() {
        let f = ConvexFunction::norm(1.0, 2).unwrap().envelope(1.0).unwrap();
        let g = f.minimal_selection(&pt(&[3.0, 4.0])).unwrap();
        assert!(g.dist(&pt(&[0.6, 0.8])) < 1e-12);
    }

    fn sample_functions() -> Vec<(ConvexFunction, Vec<Point>)> {
        let z = pt(&[0.0, 0.0]);
        vec![
            (
                ConvexFunction::norm(2.0, 2).unwrap().tilt(pt(&[1.0, 1.0])).unwrap(),
                vec![z.clone(), pt(&[1.0, -2.0])],
            ),
            (
                ConvexFunction::indicator_box(pt(&[-1.0, -1.0]), pt(&[1.0, 1.0])).unwrap(),
                vec![pt(&[1.0, 1.0]), pt(&[-1.0, 0.2]), z.clone()],
            ),
            (
                ConvexFunction::indicator_ball(pt(&[1.0, 0.0]), 1.0).unwrap().tilt(pt(&[0.5, 0.5])).unwrap(),
                vec![pt(&[2.0, 0.0]), z.clone(), pt(&[1.0, 0.0])],
            ),
            (
                ConvexFunction::indicator_halfspace(pt(&[1.0, 2.0]), 1.0).unwrap(),
                vec![pt(&[1.0, 0.0]), pt(&[-1.0, 0.0])],
            ),
            (
                ConvexFunction::support_box(pt(&[-1.0, 2.0]), pt(&[3.0, 4.0])).unwrap(),
                vec![z.clone(), pt(&[0.0, -1.0])],
            ),
            (
                ConvexFunction::support_ball(pt(&[3.0, 0.0]), 1.0).unwrap(),
                vec![z.clone(), pt(&[1.0, 1.0])],
            ),
            (
                ConvexFunction::indicator_point(pt(&[0.5, 0.5])).unwrap(),
                vec![pt(&[0.5, 0.5])],
            ),
        ]
    }

    #[test]
    fn minimal_selection_is_member_and_least_norm() {
        let mut rng = Lcg64::new(4);
        for (f, xs) in sample_functions() {
            for x in xs {
                let s = f.subdifferential(&x).unwrap();
                let m = s.min_norm_element().unwrap();
                assert!(s.contains(&m, 1e-12), "{f} at {x}: {m} not in {s:?}");
                for e in s.sample(&mut rng, 50, 5.0) {
                    assert!(s.contains(&e, 1e-9));
                    assert!(m.norm() <= e.norm() + 1e-12, "{f} at {x}: {m} vs {e}");
                }
            }
        }
    }

    #[test]
    fn support_function_of_sets() {
        let b = SubdiffSet::ball(pt(&[1.0, 0.0]), 2.0);
        assert_eq!(b.support(&pt(&[0.0, 1.0])), 2.0);
        let ray = SubdiffSet::ray(pt(&[0.0, 0.0]), &pt(&[1.0, 0.0]));
        assert_eq!(ray.support(&pt(&[1.0, 0.0])), f64::INFINITY);
        assert_eq!(ray.support(&pt(&[-1.0, 3.0])), 0.0);
        assert_eq!(SubdiffSet::Empty.support(&pt(&[1.0, 0.0])), f64::NEG_INFINITY);
        let seg = SubdiffSet::Segment {
            p: pt(&[1.0, 1.0]),
            q: pt(&[3.0, -1.0]),
        };
        assert_eq!(seg.min_norm_element().unwrap(), pt(&[1.0, 1.0]));
        assert!(seg.contains(&pt(&[2.0, 0.0]), 1e-12));
    }
}
