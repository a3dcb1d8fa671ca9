//! Numerical minimization of the prox objective
//! `φ(y) = f(y) + ‖x − y‖² / (2λ)`.
//!
//! In one dimension φ' is monotone and bisection brackets the minimizer;
//! the reported residual is the half-width of the final bracket.
//!
//! Otherwise the solver runs a proximal cutting-plane method: f is modelled
//! by the maximum of its affine minorants `f(yᵢ) + ⟨sᵢ, · − yᵢ⟩` collected
//! so far, the quadratic term is kept exact, and the next iterate is the
//! minimizer of that model. The model subproblem is solved through its dual
//! on the simplex of cut weights. When f is polyhedral near the prox the
//! model becomes exact there after finitely many cuts, so kinks are located
//! rather than approached. The residual is the displacement between the
//! last two iterates. An iterate that reproduces itself is optimal.

use crate::error::{Error, Result};
use crate::point::{ExtReal, Point};

/// What the solver needs from `f`.
pub trait ProxObjective {
    fn dim(&self) -> usize;

    fn value(&self, y: &Point) -> Result<ExtReal>;

    /// An element of `∂f(y) + shift`, preferably the one of least norm so
    /// that exact optimality can be recognized.
    fn shifted_subgradient(&self, y: &Point, shift: &Point) -> Result<Point>;
}

#[derive(Clone, Debug)]
pub(crate) struct SolveOutcome {
    pub point: Point,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Below this norm a subgradient of φ counts as zero.
const ZERO_SUBGRADIENT: f64 = 1e-15;

pub(crate) fn minimize<O: ProxObjective + ?Sized>(
    obj: &O,
    lambda: f64,
    x: &Point,
    max_iters: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    let start = find_start(obj, x)?;
    let shift = |y: &Point| (y - x).scale(1.0 / lambda);
    let g0 = obj.shifted_subgradient(&start, &shift(&start))?;
    if g0.norm() <= ZERO_SUBGRADIENT * (1.0 + x.norm()) {
        return Ok(SolveOutcome {
            point: start,
            iterations: 1,
            residual: 0.0,
            converged: true,
        });
    }
    if obj.dim() == 1 {
        // ‖y₀ − y*‖ ≤ λ‖g₀‖ by strong convexity
        let radius = lambda * g0.norm() * (1.0 + 1e-9) + f64::EPSILON * (1.0 + start.norm());
        let grad_phi = |y: &Point| obj.shifted_subgradient(y, &shift(y));
        bisect(&grad_phi, &start, radius, max_iters, tol)
    } else {
        cutting_plane(obj, lambda, x, start, max_iters, tol)
    }
}

/// The prox point itself when f is finite there, else the first finite
/// point among a few axis probes around it.
fn find_start<O: ProxObjective + ?Sized>(obj: &O, x: &Point) -> Result<Point> {
    if obj.value(x)?.is_finite() {
        return Ok(x.clone());
    }
    for scale in [1.0, 10.0, 100.0] {
        for axis in 0..obj.dim() {
            for sign in [1.0, -1.0] {
                let probe = x.axpy(sign * scale, &Point::unit(obj.dim(), axis));
                if obj.value(&probe)?.is_finite() {
                    return Ok(probe);
                }
            }
        }
    }
    Err(Error::DomainUnreachable)
}

fn bisect(
    grad_phi: &dyn Fn(&Point) -> Result<Point>,
    start: &Point,
    radius: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    let (mut lo, mut hi) = (start[0] - radius, start[0] + radius);
    let mut iterations = 1;
    while iterations < max_iters {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * tol || mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let g = grad_phi(&Point::from_iter_unchecked([mid]))?[0];
        if g.abs() <= ZERO_SUBGRADIENT {
            return Ok(SolveOutcome {
                point: Point::from_iter_unchecked([mid]),
                iterations,
                residual: 0.0,
                converged: true,
            });
        } else if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let half = 0.5 * (hi - lo);
    Ok(SolveOutcome {
        point: Point::from_iter_unchecked([0.5 * (lo + hi)]),
        iterations,
        residual: half,
        converged: half <= tol || (hi - lo) <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) * 4.0,
    })
}

/// Affine minorants `ℓᵢ(u) = ⟨sᵢ, u⟩ + bᵢ` of `u ↦ f(x + u)` with their
/// current dual weights.
struct Bundle {
    slopes: Vec<Point>,
    offsets: Vec<f64>,
    weights: Vec<f64>,
    capacity: usize,
}

impl Bundle {
    fn push(&mut self, s: Point, b: f64) {
        if self.slopes.len() >= self.capacity {
            self.compress();
        }
        let first = self.slopes.is_empty();
        self.slopes.push(s);
        self.offsets.push(b);
        self.weights.push(if first { 1.0 } else { 0.0 });
    }

    /// Drops inactive cuts, oldest first; if every cut is active, replaces
    /// the bundle by its aggregate, which keeps the dual value.
    fn compress(&mut self) {
        let keep: Vec<usize> = (0..self.slopes.len()).filter(|&i| self.weights[i] > 0.0).collect();
        if keep.len() < self.capacity {
            let mut drop = self.slopes.len() - self.capacity + 1;
            let mut i = 0;
            while drop > 0 && i < self.slopes.len() {
                if self.weights[i] == 0.0 {
                    self.slopes.remove(i);
                    self.offsets.remove(i);
                    self.weights.remove(i);
                    drop -= 1;
                } else {
                    i += 1;
                }
            }
            return;
        }
        let n = self.slopes[0].dim();
        let mut s = Point::zeros(n);
        let mut b = 0.0;
        for ((si, bi), w) in self.slopes.iter().zip(&self.offsets).zip(&self.weights) {
            s = s.axpy(*w, si);
            b += w * bi;
        }
        self.slopes = vec![s];
        self.offsets = vec![b];
        self.weights = vec![1.0];
    }

    /// Maximizes `Σwᵢbᵢ − (λ/2)‖Σwᵢsᵢ‖²` over the simplex by pairwise
    /// exchanges. Returns the model minimizer `u = −λΣwᵢsᵢ` and whether the
    /// weights reached optimality.
    fn solve(&mut self, lambda: f64) -> (Point, bool) {
        let m = self.slopes.len();
        let n = self.slopes[0].dim();
        let mut agg = Point::zeros(n);
        for (s, w) in self.slopes.iter().zip(&self.weights) {
            agg = agg.axpy(*w, s);
        }
        let mut optimal = false;
        for _ in 0..100 * m {
            let h: Vec<f64> = (0..m)
                .map(|k| self.offsets[k] - lambda * self.slopes[k].dot(&agg))
                .collect();
            let i = (0..m).max_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap_or(0);
            let low = (0..m)
                .filter(|&k| self.weights[k] > 0.0)
                .min_by(|&a, &b| h[a].total_cmp(&h[b]))
                .unwrap_or(i);
            // rounding level of the cut values
            let noise = (0..m)
                .map(|k| self.offsets[k].abs() + lambda * self.slopes[k].norm() * agg.norm())
                .fold(0.0, f64::max)
                * 4.0
                * f64::EPSILON;
            if i == low || h[i] - h[low] <= noise {
                optimal = true;
                break;
            }
            // partner with the largest exact gain for the pair
            let gain = |k: usize| {
                let gap = h[i] - h[k];
                let curv = lambda * self.slopes[i].dist(&self.slopes[k]).powi(2);
                if curv > 0.0 { gap * gap / curv } else { f64::INFINITY }
            };
            let j = (0..m)
                .filter(|&k| self.weights[k] > 0.0 && h[k] < h[i])
                .max_by(|&a, &b| gain(a).total_cmp(&gain(b)))
                .unwrap_or(low);
            let gap = h[i] - h[j];
            let d = &self.slopes[i] - &self.slopes[j];
            let curv = lambda * d.norm_sq();
            let t = if curv > 0.0 { (gap / curv).min(self.weights[j]) } else { self.weights[j] };
            if t <= 0.0 {
                optimal = true;
                break;
            }
            self.weights[i] += t;
            self.weights[j] -= t;
            if self.weights[j] < 1e-300 {
                self.weights[j] = 0.0;
            }
            let moved = agg.axpy(t, &d);
            if moved == agg {
                // no representable progress left
                optimal = true;
                break;
            }
            agg = moved;
        }
        (agg.scale(-lambda), optimal)
    }
}

fn cutting_plane<O: ProxObjective + ?Sized>(
    obj: &O,
    lambda: f64,
    x: &Point,
    start: Point,
    max_iters: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    let n = obj.dim();
    let mut bundle = Bundle {
        slopes: Vec::new(),
        offsets: Vec::new(),
        weights: Vec::new(),
        capacity: 4 * n + 8,
    };
    let mut u = &start - x;
    let mut iterations = 0;
    let mut displacement = f64::INFINITY;
    while iterations < max_iters {
        iterations += 1;
        let y = x + &u;
        let shift = u.scale(1.0 / lambda);
        let g = obj.shifted_subgradient(&y, &shift)?;
        if g.norm() <= ZERO_SUBGRADIENT * (1.0 + y.norm()) {
            return Ok(SolveOutcome {
                point: y,
                iterations,
                residual: 0.0,
                converged: true,
            });
        }
        let fy = obj.value(&y)?.value().ok_or(Error::DomainUnreachable)?;
        let s = &g - &shift;
        let b = fy - s.dot(&u);
        bundle.push(s, b);
        let (next, optimal) = bundle.solve(lambda);
        displacement = if optimal { next.dist(&u) } else { next.dist(&u).max(tol * 2.0) };
        u = next;
        if displacement <= tol {
            break;
        }
    }
    Ok(SolveOutcome {
        point: x + &u,
        iterations,
        residual: displacement,
        converged: displacement <= tol,
    })
}
