use rayon::prelude::*;

use super::report::{CheckReport, Status, Tolerances, WitnessLog};
use super::{CLOSED_FORM_TOL, NUMERICAL_TOL};
use crate::catalog::{ConvexFunction, SubdiffSet};
use crate::determination::determine_from_norm;
use crate::error::{Error, Result};
use crate::point::{fmt_real, Point};
use crate::prox_engine::{prox, ProxResult, SolverBudget};
use crate::rng::{Lcg64, SampleSpec};

fn prox1(f: &ConvexFunction, x: &Point) -> Result<ProxResult> {
    prox(f, 1.0, x, &SolverBudget::default())
}

fn proxes(f: &ConvexFunction, samples: &[Point]) -> Result<Vec<Point>> {
    samples.par_iter().map(|x| Ok(prox1(f, x)?.minimizer)).collect()
}

/// Closed-form tolerance when every function has a closed-form prox,
/// numerical tolerance otherwise.
pub fn default_tolerance(fs: &[&ConvexFunction]) -> Tolerances {
    let closed = fs
        .iter()
        .all(|f| f.prox_closed_form(1.0, &Point::zeros(f.dim())).is_ok());
    Tolerances::uniform(if closed { CLOSED_FORM_TOL } else { NUMERICAL_TOL })
}

fn same_dim(f: &ConvexFunction, g: &ConvexFunction) -> Result<()> {
    if f.dim() == g.dim() {
        Ok(())
    } else {
        Err(Error::dim("second function", f.dim(), g.dim()))
    }
}

fn anchor_value(f: &ConvexFunction, x0: &Point) -> Result<f64> {
    f.evaluate(x0)?
        .value()
        .ok_or_else(|| Error::AnchorOutsideDomain(f.to_string()))
}

/// Samples together with the prox points of each function, which lie in
/// the respective domains and so make domain-sensitive conclusions testable.
fn probe_points<'a>(samples: &'a [Point], extra: &'a [Vec<Point>]) -> Vec<&'a Point> {
    samples.iter().chain(extra.iter().flatten()).collect()
}

fn judge(report: &mut CheckReport, hyp: WitnessLog, con: WitnessLog) {
    let h = report.hypothesis_holds();
    report.status = match (h, report.conclusion_holds()) {
        (false, _) => Status::HypothesisFails,
        (true, true) => Status::Verified,
        (true, false) => Status::Counterexample,
    };
    report.witnesses = if h { con.into_witnesses() } else { hyp.into_witnesses() };
}

/// If `‖prox_f(x) − x₀‖ ≤ ‖prox_g(x) − x₀‖` on the samples, then
/// `g − g(x₀) ≤ f − f(x₀)` is checked at the samples and at the prox points.
pub fn check_comparison(
    f: &ConvexFunction,
    g: &ConvexFunction,
    x0: &Point,
    samples: &[Point],
    tol: Tolerances,
) -> Result<CheckReport> {
    same_dim(f, g)?;
    x0.check_dim(f.dim(), "anchor")?;
    let (fa, ga) = (anchor_value(f, x0)?, anchor_value(g, x0)?);
    let pf = proxes(f, samples)?;
    let pg = proxes(g, samples)?;

    let mut report = CheckReport::new("comparison", tol);
    let mut hyp = WitnessLog::new();
    for (x, (a, b)) in samples.iter().zip(pf.iter().zip(&pg)) {
        let r = (a.dist(x0) - b.dist(x0)).max(0.0);
        report.hypothesis_residual = report.hypothesis_residual.max(r);
        if r > tol.hypothesis {
            hyp.push(x.clone(), format!("prox distance excess {}", fmt_real(r)), r);
        }
    }
    let extra = [pf, pg];
    let mut con = WitnessLog::new();
    for x in probe_points(samples, &extra) {
        let r = match (f.evaluate(x)?.value(), g.evaluate(x)?.value()) {
            (None, _) => 0.0,
            (Some(_), None) => f64::INFINITY,
            (Some(fx), Some(gx)) => ((gx - ga) - (fx - fa)).max(0.0),
        };
        report.conclusion_residual = report.conclusion_residual.max(r);
        if r > tol.conclusion {
            con.push(x.clone(), format!("g - g(x0) exceeds f - f(x0) by {}", fmt_real(r)), r);
        }
    }
    judge(&mut report, hyp, con);
    report.notes.push(format!("f = {f}; g = {g}; anchor {x0}"));
    Ok(report)
}

/// The infimum of a function as far as it can be determined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Infimum {
    /// `inf f = −f*(0)` from the closed-form conjugate.
    Exact(f64),
    /// `f*(0) = +∞`: unbounded below.
    Unbounded,
    /// Minimum over the samples; no closed-form conjugate.
    Sampled(f64),
}

fn infimum(f: &ConvexFunction, samples: &[Point]) -> Result<Infimum> {
    match f.conjugate_closed_form() {
        Ok(c) => Ok(match c.evaluate(&Point::zeros(f.dim()))?.value() {
            Some(v) => Infimum::Exact(-v),
            None => Infimum::Unbounded,
        }),
        Err(Error::UnsupportedConjugate(_)) => {
            let mut m = f64::INFINITY;
            for x in samples {
                if let Some(v) = f.evaluate(x)?.value() {
                    m = m.min(v);
                }
            }
            Ok(Infimum::Sampled(m))
        }
        Err(e) => Err(e),
    }
}

fn gradient(f: &ConvexFunction, x: &Point) -> Result<Option<Point>> {
    Ok(match f.subdifferential(x)? {
        SubdiffSet::Singleton(g) => Some(g),
        _ => None,
    })
}

/// For differentiable, bounded-below `f` and `g`: if `‖∇f‖ ≤ ‖∇g‖` on the
/// samples, then `f − inf f ≤ g − inf g` there. With `lambda` both
/// functions are first replaced by their Moreau envelopes.
pub fn check_gradient_comparison(
    f: &ConvexFunction,
    g: &ConvexFunction,
    lambda: Option<f64>,
    samples: &[Point],
    tol: Tolerances,
) -> Result<CheckReport> {
    same_dim(f, g)?;
    let (f, g) = match lambda {
        Some(l) => (f.envelope(l)?, g.envelope(l)?),
        None => (f.clone(), g.clone()),
    };
    let mut report = CheckReport::new("gradient_comparison", tol);
    report.notes.push(format!("f = {f}; g = {g}"));

    let (inf_f, inf_g) = (infimum(&f, samples)?, infimum(&g, samples)?);
    let level = |i: Infimum| match i {
        Infimum::Exact(v) | Infimum::Sampled(v) => Some(v),
        Infimum::Unbounded => None,
    };
    let (Some(mf), Some(mg)) = (level(inf_f), level(inf_g)) else {
        report.status = Status::PreconditionViolated;
        report.notes.push("a function is unbounded below".into());
        return Ok(report);
    };
    for (name, i) in [("f", inf_f), ("g", inf_g)] {
        if let Infimum::Sampled(_) = i {
            report.notes.push(format!("inf {name} is a sampled minimum"));
        }
    }

    let grads = samples
        .par_iter()
        .map(|x| Ok((gradient(&f, x)?, gradient(&g, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut hyp = WitnessLog::new();
    let mut con = WitnessLog::new();
    for (x, (gf, gg)) in samples.iter().zip(&grads) {
        let (Some(gf), Some(gg)) = (gf, gg) else {
            report.status = Status::PreconditionViolated;
            report.witnesses.push(super::Witness {
                point: x.clone(),
                detail: "not differentiable here".into(),
            });
            return Ok(report);
        };
        let r = (gf.norm() - gg.norm()).max(0.0);
        report.hypothesis_residual = report.hypothesis_residual.max(r);
        if r > tol.hypothesis {
            hyp.push(x.clone(), format!("gradient norm excess {}", fmt_real(r)), r);
        }
        let r = match (f.evaluate(x)?.value(), g.evaluate(x)?.value()) {
            (None, _) => 0.0,
            (Some(_), None) => f64::INFINITY,
            (Some(fx), Some(gx)) => ((fx - mf) - (gx - mg)).max(0.0),
        };
        report.conclusion_residual = report.conclusion_residual.max(r);
        if r > tol.conclusion {
            con.push(x.clone(), format!("f - inf f exceeds g - inf g by {}", fmt_real(r)), r);
        }
    }
    judge(&mut report, hyp, con);
    Ok(report)
}

/// If `‖x‖ − ℓ ≤ ‖prox_g(x)‖` on the samples, then `g − g(0) ≤ ℓ‖·‖`; for
/// `ℓ = 0` the sampled values must also be constant.
pub fn check_norm_lower_bound(g: &ConvexFunction, ell: f64, samples: &[Point], tol: Tolerances) -> Result<CheckReport> {
    if !(ell >= 0.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!("ell must be >= 0, got {ell}")));
    }
    let g0 = anchor_value(g, &Point::zeros(g.dim()))?;
    let pg = proxes(g, samples)?;
    let mut report = CheckReport::new("norm_lower_bound", tol);
    let mut hyp = WitnessLog::new();
    for (x, p) in samples.iter().zip(&pg) {
        let r = (x.norm() - ell - p.norm()).max(0.0);
        report.hypothesis_residual = report.hypothesis_residual.max(r);
        if r > tol.hypothesis {
            hyp.push(x.clone(), format!("bound fails by {}", fmt_real(r)), r);
        }
    }
    let extra = [pg];
    let mut con = WitnessLog::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in probe_points(samples, &extra) {
        let r = match g.evaluate(x)?.value() {
            None => 0.0,
            Some(v) => {
                lo = lo.min(v);
                hi = hi.max(v);
                (v - g0 - ell * x.norm()).max(0.0)
            }
        };
        report.conclusion_residual = report.conclusion_residual.max(r);
        if r > tol.conclusion {
            con.push(x.clone(), format!("g - g(0) exceeds ell |x| by {}", fmt_real(r)), r);
        }
    }
    if ell == 0.0 {
        let spread = hi - lo;
        report.conclusion_residual = report.conclusion_residual.max(spread);
        report.notes.push(format!("sampled spread of g: {}", fmt_real(spread)));
    }
    judge(&mut report, hyp, con);
    report.notes.push(format!("g = {g}; ell = {}", fmt_real(ell)));
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct LipschitzReport {
    pub report: CheckReport,
    /// `max |f(u) − f(v)| / ‖u − v‖` over pairs of x-samples.
    pub lipschitz_estimate: f64,
    /// `max (‖x‖ − ℓ − ‖prox_f(x + y) − y‖)₊` over the sample product.
    pub inequality_residual: f64,
    /// The two sides of the equivalence agree.
    pub consistent: bool,
    /// The pair `(x, y)` with the largest inequality violation.
    pub worst_pair: Option<(Point, Point)>,
}

/// `f` is ℓ-Lipschitz iff `‖x‖ − ℓ ≤ ‖prox_f(x + y) − y‖` for all `x, y`.
/// Both sides are estimated on samples: passing on both gives `verified`,
/// failing on both `hypothesis_fails` (consistent), and a split is a
/// `counterexample` to the equivalence.
pub fn check_lipschitz(
    f: &ConvexFunction,
    ell: f64,
    samples_x: &[Point],
    samples_y: &[Point],
    tol: Tolerances,
) -> Result<LipschitzReport> {
    if !(ell >= 0.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!("ell must be >= 0, got {ell}")));
    }
    let mut report = CheckReport::new("lipschitz", tol);
    report.notes.push(format!("f = {f}; ell = {}", fmt_real(ell)));
    let mut values = Vec::with_capacity(samples_x.len());
    for x in samples_x {
        match f.evaluate(x)?.value() {
            Some(v) => values.push(v),
            None => {
                report.status = Status::PreconditionViolated;
                report.witnesses.push(super::Witness {
                    point: x.clone(),
                    detail: "f is infinite here".into(),
                });
                return Ok(LipschitzReport {
                    report,
                    lipschitz_estimate: f64::INFINITY,
                    inequality_residual: 0.0,
                    consistent: true,
                    worst_pair: None,
                });
            }
        }
    }

    let mut l_hat: f64 = 0.0;
    let mut l_pair = None;
    for i in 0..samples_x.len() {
        for j in (i + 1)..samples_x.len() {
            let d = samples_x[i].dist(&samples_x[j]);
            if d > 0.0 {
                let q = (values[i] - values[j]).abs() / d;
                if q > l_hat {
                    l_hat = q;
                    l_pair = Some(i);
                }
            }
        }
    }

    let rows = samples_x
        .par_iter()
        .map(|x| {
            let mut best = (0.0, 0usize);
            for (k, y) in samples_y.iter().enumerate() {
                let p = prox1(f, &(x + y))?.minimizer;
                let r = x.norm() - ell - p.dist(y);
                if r > best.0 {
                    best = (r, k);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<(f64, usize)>>>()?;

    let mut log = WitnessLog::new();
    let mut worst = (0.0, None);
    for (x, &(r, k)) in samples_x.iter().zip(&rows) {
        if r > worst.0 {
            worst = (r, Some((x.clone(), samples_y[k].clone())));
        }
        if r > tol.conclusion {
            log.push(
                x.clone(),
                format!("with y = {}: violation {}", samples_y[k], fmt_real(r)),
                r,
            );
        }
    }

    let lipschitz_holds = l_hat <= ell + tol.hypothesis;
    let inequality_holds = worst.0 <= tol.conclusion;
    report.hypothesis_residual = (l_hat - ell).max(0.0);
    report.conclusion_residual = worst.0;
    report.status = match (lipschitz_holds, inequality_holds) {
        (true, true) => Status::Verified,
        (false, false) => Status::HypothesisFails,
        _ => Status::Counterexample,
    };
    report.witnesses = log.into_witnesses();
    if let (false, Some(i)) = (lipschitz_holds, l_pair) {
        report.notes.push(format!(
            "sampled Lipschitz estimate {} near {}",
            fmt_real(l_hat),
            samples_x[i]
        ));
    }
    let consistent = lipschitz_holds == inequality_holds;
    Ok(LipschitzReport {
        report,
        lipschitz_estimate: l_hat,
        inequality_residual: worst.0,
        consistent,
        worst_pair: worst.1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemOutcome {
    pub label: &'static str,
    /// `None` when the item could not be evaluated.
    pub holds: Option<bool>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub report: CheckReport,
    pub items: [ItemOutcome; 5],
    /// `f*` and `g*` bounded below, i.e. `0 ∈ dom f ∩ dom g`.
    pub precondition_holds: bool,
    /// Minimum of the closed-form conjugates over a wide sample ball, for
    /// comparison with the exact `−f(0)`.
    pub sampled_conjugate_infima: (Option<f64>, Option<f64>),
}

pub const CONJUGATE_SAMPLE_RADIUS: f64 = 50.0;
pub const CONJUGATE_SAMPLE_COUNT: usize = 10_000;

/// Minimum of `f*` over a seeded sample of the ball of radius 50, when `f`
/// has a closed-form conjugate.
pub fn conjugate_infimum(f: &ConvexFunction, seed: u64) -> Result<Option<f64>> {
    let conj = match f.conjugate_closed_form() {
        Ok(c) => c,
        Err(Error::UnsupportedConjugate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let pts = SampleSpec::new(f.dim(), CONJUGATE_SAMPLE_COUNT, CONJUGATE_SAMPLE_RADIUS, seed).draw();
    let vals = pts
        .par_iter()
        .map(|y| Ok(conj.evaluate(y)?.as_f64()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Some(vals.into_iter().fold(f64::INFINITY, f64::min)))
}

fn sets_equal(a: &SubdiffSet, b: &SubdiffSet, tol: f64, rng: &mut Lcg64) -> Result<f64> {
    if let Some(eq) = a.structurally_equal(b, tol) {
        return Ok(if eq { 0.0 } else { f64::INFINITY });
    }
    let mut r = match (a.min_norm_element(), b.min_norm_element()) {
        (Ok(p), Ok(q)) => p.dist(&q),
        (Err(_), Err(_)) => 0.0,
        _ => f64::INFINITY,
    };
    let n = match a {
        SubdiffSet::Empty => return Ok(r),
        _ => a.min_norm_element()?.dim(),
    };
    for _ in 0..20 {
        let d = rng.unit_vector(n);
        let (sa, sb) = (a.support(&d), b.support(&d));
        let gap = if sa == sb { 0.0 } else { (sa - sb).abs() };
        r = r.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    Ok(r)
}

/// Evaluates the five equivalent conditions on samples:
/// (i) `‖prox_f‖ = ‖prox_g‖`, (ii) `f = g + inf g* − inf f*`,
/// (iii) equal least-norm subgradients, (iv) equal subdifferentials,
/// (v) `prox_f = prox_g`.
///
/// Precondition: `f*` and `g*` bounded below. With
/// `inf f* = −f**(0) = −f(0)` this is tested as `0 ∈ dom f` and `0 ∈ dom g`;
/// the sampled conjugate minima are reported alongside. Items (ii) to (iv)
/// are probed at the samples and at the prox points of both functions.
pub fn check_equivalences(
    f: &ConvexFunction,
    g: &ConvexFunction,
    samples: &[Point],
    tol: Tolerances,
    seed: u64,
) -> Result<EquivalenceReport> {
    same_dim(f, g)?;
    let origin = Point::zeros(f.dim());
    let f0 = f.evaluate(&origin)?.value();
    let g0 = g.evaluate(&origin)?.value();
    let precondition_holds = f0.is_some() && g0.is_some();
    let sampled = (conjugate_infimum(f, seed)?, conjugate_infimum(g, seed)?);

    let pf = proxes(f, samples)?;
    let pg = proxes(g, samples)?;
    let t = tol.conclusion;

    let mut res = [0.0f64; 5];
    let mut logs: [WitnessLog; 5] = Default::default();
    let mut note = |k: usize, x: &Point, r: f64, what: &str, logs: &mut [WitnessLog; 5]| {
        res[k] = res[k].max(r);
        let limit = if k == 0 { tol.hypothesis } else { t };
        if r > limit {
            logs[k].push(x.clone(), format!("{what}: {}", fmt_real(r)), r);
        }
    };
    for (x, (a, b)) in samples.iter().zip(pf.iter().zip(&pg)) {
        note(0, x, (a.norm() - b.norm()).abs(), "(i) prox norms differ", &mut logs);
        note(4, x, a.dist(b), "(v) proxes differ", &mut logs);
    }

    let offset = match (f0, g0) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let extra = [pf.clone(), pg.clone()];
    let mut subdiff_supported = true;
    let mut rng = Lcg64::new(seed ^ 0x5ab);
    for x in probe_points(samples, &extra) {
        let r2 = match (f.evaluate(x)?.value(), g.evaluate(x)?.value()) {
            (None, None) => 0.0,
            (Some(a), Some(b)) => match offset {
                Some(c) => (a - b - c).abs(),
                None => f64::INFINITY,
            },
            _ => f64::INFINITY,
        };
        note(1, x, r2, "(ii) f - g off the predicted constant", &mut logs);

        if subdiff_supported {
            match (f.subdifferential(x), g.subdifferential(x)) {
                (Ok(sf), Ok(sg)) => {
                    let r3 = match (sf.min_norm_element(), sg.min_norm_element()) {
                        (Ok(p), Ok(q)) => p.dist(&q),
                        (Err(_), Err(_)) => 0.0,
                        _ => f64::INFINITY,
                    };
                    note(2, x, r3, "(iii) least-norm subgradients differ", &mut logs);
                    let r4 = sets_equal(&sf, &sg, t, &mut rng)?;
                    note(3, x, r4, "(iv) subdifferentials differ", &mut logs);
                }
                (Err(Error::UnsupportedSubdifferential(_)), _) | (_, Err(Error::UnsupportedSubdifferential(_))) => {
                    subdiff_supported = false;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }

    const LABELS: [&str; 5] = ["(i)", "(ii)", "(iii)", "(iv)", "(v)"];
    let items: [ItemOutcome; 5] = std::array::from_fn(|k| {
        let skipped = (k == 2 || k == 3) && !subdiff_supported;
        let limit = if k == 0 { tol.hypothesis } else { t };
        ItemOutcome {
            label: LABELS[k],
            holds: if skipped { None } else { Some(res[k] <= limit) },
            residual: if skipped { 0.0 } else { res[k] },
        }
    });

    let mut report = CheckReport::new("equivalences", tol);
    report.hypothesis_residual = res[0];
    report.conclusion_residual = items[1..].iter().map(|i| i.residual).fold(0.0, f64::max);
    let evaluated: Vec<bool> = items.iter().filter_map(|i| i.holds).collect();
    let all_hold = evaluated.iter().all(|h| *h);
    let none_hold = evaluated.iter().all(|h| !*h);
    report.status = if !precondition_holds {
        Status::PreconditionViolated
    } else if all_hold {
        Status::Verified
    } else if none_hold {
        Status::HypothesisFails
    } else {
        Status::Counterexample
    };
    if report.status == Status::Counterexample || report.status == Status::PreconditionViolated {
        for (item, log) in items.iter().zip(logs) {
            if item.holds == Some(false) {
                report.witnesses.extend(log.into_witnesses().into_iter().take(1));
            }
        }
    } else if report.status == Status::HypothesisFails {
        report.witnesses = std::mem::take(&mut logs[0]).into_witnesses();
    }
    let pattern: Vec<String> = items
        .iter()
        .map(|i| {
            let s = match i.holds {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "skipped",
            };
            format!("{} {s}", i.label)
        })
        .collect();
    report.notes.push(pattern.join(", "));
    report.notes.push(format!("f = {f}; g = {g}"));
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), fmt_real);
    report.notes.push(format!(
        "inf f* = {}, inf g* = {} (exact, from -f(0)); sampled over radius {} with {} points: {}, {}",
        f0.map_or("-inf".into(), |v| fmt_real(-v)),
        g0.map_or("-inf".into(), |v| fmt_real(-v)),
        fmt_real(CONJUGATE_SAMPLE_RADIUS),
        CONJUGATE_SAMPLE_COUNT,
        show(sampled.0),
        show(sampled.1),
    ));
    Ok(EquivalenceReport {
        report,
        items,
        precondition_holds,
        sampled_conjugate_infima: sampled,
    })
}

#[derive(Clone, Debug)]
pub struct SupportDistanceReport {
    pub report: CheckReport,
    /// `max |‖prox_{σ_C}(x)‖ − d_C(x)|` over the samples.
    pub forward_residual: f64,
}

/// For a closed convex `C ∋ 0` given as an indicator, `‖prox_f‖ = d_C`
/// exactly when `f` is `σ_C` up to a constant. The forward direction is
/// checked on `σ_C` itself; the backward direction checks the distance
/// identity for `f` and, when it holds, determination against `σ_C`.
pub fn check_support_distance(
    f: &ConvexFunction,
    set: &ConvexFunction,
    samples: &[Point],
    tol: Tolerances,
) -> Result<SupportDistanceReport> {
    same_dim(f, set)?;
    let origin = Point::zeros(set.dim());
    if set.evaluate(&origin)?.value() != Some(0.0) {
        return Err(Error::OriginNotInC);
    }
    let sigma = set.conjugate_closed_form()?;
    let rows = samples
        .par_iter()
        .map(|x| {
            let d = x.dist(&prox1(set, x)?.minimizer);
            let ps = prox1(&sigma, x)?.minimizer.norm();
            let pf = prox1(f, x)?.minimizer.norm();
            Ok(((ps - d).abs(), (pf - d).abs()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let mut report = CheckReport::new("support_distance", tol);
    let mut forward = 0.0f64;
    let mut fwd_log = WitnessLog::new();
    let mut hyp_log = WitnessLog::new();
    for (x, &(rs, rf)) in samples.iter().zip(&rows) {
        forward = forward.max(rs);
        if rs > tol.conclusion {
            fwd_log.push(x.clone(), format!("support prox norm off the distance by {}", fmt_real(rs)), rs);
        }
        report.hypothesis_residual = report.hypothesis_residual.max(rf);
        if rf > tol.hypothesis {
            hyp_log.push(x.clone(), format!("prox norm off the distance by {}", fmt_real(rf)), rf);
        }
    }
    report.notes.push(format!("f = {f}; C from {set}; support {sigma}"));
    report.notes.push(format!("forward residual {}", fmt_real(forward)));

    if forward > tol.conclusion {
        report.status = Status::Counterexample;
        report.witnesses = fwd_log.into_witnesses();
    } else if !report.hypothesis_holds() {
        report.status = Status::HypothesisFails;
        report.witnesses = hyp_log.into_witnesses();
    } else {
        let det = determine_from_norm(f, &sigma, None, samples, tol)?;
        report.conclusion_residual = det.conclusion_residual;
        report.status = match det.status {
            Status::Verified => Status::Verified,
            Status::PreconditionViolated => Status::PreconditionViolated,
            _ => Status::Counterexample,
        };
        report.witnesses = det.witnesses;
    }
    Ok(SupportDistanceReport {
        report,
        forward_residual: forward,
    })
}

/// Settings for the full battery run on a pair of functions.
#[derive(Clone, Debug, PartialEq)]
pub struct BatteryConfig {
    pub anchor: Point,
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    /// ℓ for the norm-bound and Lipschitz checks.
    pub ell: f64,
    /// Envelope index for the gradient comparison.
    pub lambda: f64,
    pub tolerances: Option<Tolerances>,
}

impl BatteryConfig {
    pub fn new(anchor: Point, seed: u64) -> Self {
        BatteryConfig {
            anchor,
            samples: 200,
            radius: 5.0,
            seed,
            ell: 1.0,
            lambda: 1.0,
            tolerances: None,
        }
    }
}

fn or_precondition(name: &str, tol: Tolerances, r: Result<CheckReport>) -> Result<CheckReport> {
    match r {
        Err(e @ (Error::AnchorOutsideDomain(_) | Error::OriginNotInC)) => {
            let mut report = CheckReport::new(name, tol);
            report.status = Status::PreconditionViolated;
            report.notes.push(e.to_string());
            Ok(report)
        }
        other => other,
    }
}

fn renamed(mut r: CheckReport, name: &str) -> CheckReport {
    r.name = name.to_string();
    r
}

/// Runs every pairwise and single-function check on `f` and `g`.
pub fn verify_all(f: &ConvexFunction, g: &ConvexFunction, cfg: &BatteryConfig) -> Result<Vec<CheckReport>> {
    same_dim(f, g)?;
    cfg.anchor.check_dim(f.dim(), "anchor")?;
    let tol = cfg.tolerances.unwrap_or_else(|| default_tolerance(&[f, g]));
    let samples = SampleSpec::new(f.dim(), cfg.samples, cfg.radius, cfg.seed).draw();
    let ys = SampleSpec::new(f.dim(), cfg.samples.min(50), cfg.radius, cfg.seed.wrapping_add(1)).draw();
    let x0 = &cfg.anchor;

    let mut out = Vec::new();
    out.push(or_precondition("comparison_fg", tol, check_comparison(f, g, x0, &samples, tol).map(|r| renamed(r, "comparison_fg")))?);
    out.push(or_precondition("comparison_gf", tol, check_comparison(g, f, x0, &samples, tol).map(|r| renamed(r, "comparison_gf")))?);
    out.push(check_gradient_comparison(f, g, Some(cfg.lambda), &samples, tol)?);
    for (name, h) in [("f", f), ("g", g)] {
        let label = format!("norm_lower_bound_{name}");
        out.push(or_precondition(&label, tol, check_norm_lower_bound(h, cfg.ell, &samples, tol).map(|r| renamed(r, &label)))?);
        let label = format!("lipschitz_{name}");
        out.push(renamed(check_lipschitz(h, cfg.ell, &samples, &ys, tol)?.report, &label));
    }
    out.push(check_equivalences(f, g, &samples, tol, cfg.seed)?.report);
    out.push(or_precondition(
        "determination_from_norm",
        tol,
        determine_from_norm(f, g, Some(x0), &samples, tol),
    )?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn samples(n: usize) -> Vec<Point> {
        SampleSpec::new(n, 200, 5.0, 7).draw()
    }

    const TOL: Tolerances = Tolerances {
        hypothesis: 1e-8,
        conclusion: 1e-8,
    };

    #[test]
    fn comparison_examples() {
        let s = samples(2);
        let o = pt(&[0.0, 0.0]);
        let point = ConvexFunction::indicator_point(o.clone()).unwrap();
        let q = ConvexFunction::half_sq_norm(2).unwrap();
        let r = check_comparison(&point, &q, &o, &s, TOL).unwrap();
        assert_eq!(r.status, Status::Verified, "{r:?}");
        let r = check_comparison(&q, &point, &o, &s, TOL).unwrap();
        assert_eq!(r.status, Status::HypothesisFails);
        assert!(!r.witnesses.is_empty());

        let n1 = ConvexFunction::norm(1.0, 2).unwrap();
        let n2 = ConvexFunction::norm(2.0, 2).unwrap();
        // ‖prox_{2‖·‖}‖ ≤ ‖prox_{‖·‖}‖, so ‖·‖ − 0 ≤ 2‖·‖ − 0
        let r = check_comparison(&n2, &n1, &o, &s, TOL).unwrap();
        assert_eq!(r.status, Status::Verified);
        let r = check_comparison(&n1, &n1, &o, &s, TOL).unwrap();
        assert_eq!((r.status, r.hypothesis_residual, r.conclusion_residual), (Status::Verified, 0.0, 0.0));
    }

    #[test]
    fn comparison_needs_anchor_in_both_domains() {
        let s = samples(1);
        let a = ConvexFunction::indicator_ball(pt(&[3.0]), 1.0).unwrap();
        let b = ConvexFunction::norm(1.0, 1).unwrap();
        assert!(matches!(
            check_comparison(&a, &b, &pt(&[0.0]), &s, TOL),
            Err(Error::AnchorOutsideDomain(_))
        ));
    }

    #[test]
    fn gradient_comparison_examples() {
        let s = samples(2);
        let point = ConvexFunction::indicator_point(pt(&[0.0, 0.0])).unwrap();
        let f = point.envelope(1.0).unwrap();
        let g = point.envelope(0.5).unwrap();
        let r = check_gradient_comparison(&f, &g, None, &s, TOL).unwrap();
        assert_eq!(r.status, Status::Verified, "{r:?}");
        let r = check_gradient_comparison(&f, &f, None, &s, TOL).unwrap();
        assert_eq!(r.status, Status::Verified);

        let n = ConvexFunction::norm(1.0, 2).unwrap();
        let q = ConvexFunction::half_sq_norm(2).unwrap();
        let r = check_gradient_comparison(&n, &q, Some(1.0), &s, TOL).unwrap();
        assert_eq!(r.status, Status::HypothesisFails);
        // ‖x‖ = 1.5 is such a witness: min(1.5, 1) > 0.75
        let x = pt(&[1.5, 0.0]);
        let r = check_gradient_comparison(&n, &q, Some(1.0), &[x], TOL).unwrap();
        assert!((r.hypothesis_residual - 0.25).abs() < 1e-12);
    }

    #[test]
    fn norm_lower_bound_examples() {
        let s = samples(2);
        let n = ConvexFunction::norm(1.0, 2).unwrap();
        assert_eq!(check_norm_lower_bound(&n, 1.0, &s, TOL).unwrap().status, Status::Verified);

        let c = ConvexFunction::affine(pt(&[0.0, 0.0]), 3.0).unwrap();
        let r = check_norm_lower_bound(&c, 0.0, &s, TOL).unwrap();
        assert_eq!(r.status, Status::Verified);

        let q = ConvexFunction::half_sq_norm(2).unwrap();
        let r = check_norm_lower_bound(&q, 1.0, &s, TOL).unwrap();
        assert_eq!(r.status, Status::HypothesisFails);
        // ‖x‖ = 4: 3 ≤ 2 fails by 1
        let r = check_norm_lower_bound(&q, 1.0, &[pt(&[4.0, 0.0])], TOL).unwrap();
        assert!((r.hypothesis_residual - 1.0).abs() < 1e-12);

        let off = ConvexFunction::indicator_ball(pt(&[3.0, 0.0]), 1.0).unwrap();
        assert!(matches!(
            check_norm_lower_bound(&off, 1.0, &s, TOL),
            Err(Error::AnchorOutsideDomain(_))
        ));
    }

    #[test]
    fn lipschitz_examples() {
        let s = samples(2);
        let ys = SampleSpec::new(2, 40, 5.0, 8).draw();
        let n = ConvexFunction::norm(1.0, 2).unwrap();
        let r = check_lipschitz(&n, 1.0, &s, &ys, TOL).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);
        assert!(r.lipschitz_estimate <= 1.0 + 1e-12);
        assert!(r.inequality_residual < 1e-12);

        let q = ConvexFunction::half_sq_norm(2).unwrap();
        let r = check_lipschitz(&q, 1.0, &s, &ys, TOL).unwrap();
        assert_eq!(r.report.status, Status::HypothesisFails);
        assert!(r.consistent);
        let (x, y) = r.worst_pair.unwrap();
        let p = prox1(&q, &(&x + &y)).unwrap().minimizer;
        assert!(x.norm() - 1.0 > p.dist(&y));

        let a = pt(&[0.6, -0.8]);
        let aff = ConvexFunction::affine(a.clone(), 0.0).unwrap();
        let r = check_lipschitz(&aff, a.norm(), &s, &ys, TOL).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);
    }

    #[test]
    fn equivalence_examples() {
        let s = samples(2);
        let n = ConvexFunction::norm(1.0, 2).unwrap();
        let shifted = n.add_const(2.0).unwrap();
        let r = check_equivalences(&n, &shifted, &s, TOL, 1).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);
        assert!(r.items.iter().all(|i| i.holds == Some(true)));
        // inf f* = 0, inf g* = −2 on the sampled ball as well
        assert_eq!(r.sampled_conjugate_infima, (Some(0.0), Some(-2.0)));

        let q = ConvexFunction::half_sq_norm(2).unwrap();
        let r = check_equivalences(&q, &q, &s, TOL, 1).unwrap();
        assert_eq!(r.report.status, Status::Verified);

        let r = check_equivalences(&n, &q, &s, TOL, 1).unwrap();
        assert_eq!(r.report.status, Status::HypothesisFails, "{:?}", r.report);
        assert!(r.items.iter().all(|i| i.holds == Some(false)));
    }

    #[test]
    fn sharpness_example() {
        let s = samples(2);
        let f = ConvexFunction::indicator_point(pt(&[1.0, 0.0])).unwrap();
        let g = ConvexFunction::indicator_point(pt(&[0.0, 1.0])).unwrap();
        let r = check_equivalences(&f, &g, &s, TOL, 1).unwrap();
        assert_eq!(r.items[0].holds, Some(true));
        assert_eq!(r.items[4].holds, Some(false));
        assert!(!r.precondition_holds);
        assert_eq!(r.report.status, Status::PreconditionViolated);
        // ⟨x₁, ·⟩ sampled over radius 50 reaches about −50 only
        let inf = r.sampled_conjugate_infima.0.unwrap();
        assert!(inf < -45.0 && inf > -1e6);
    }

    #[test]
    fn support_distance_examples() {
        let s = samples(2);
        let ball = ConvexFunction::indicator_ball(pt(&[0.0, 0.0]), 1.0).unwrap();
        let n = ConvexFunction::norm(1.0, 2).unwrap();
        let r = check_support_distance(&n, &ball, &s, TOL).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);
        assert!(r.forward_residual < 1e-12);

        let origin = ConvexFunction::indicator_point(pt(&[0.0, 0.0])).unwrap();
        let zero = ConvexFunction::affine(pt(&[0.0, 0.0]), 0.0).unwrap();
        let r = check_support_distance(&zero, &origin, &s, TOL).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);

        let boxed = ConvexFunction::indicator_box(pt(&[-1.0, -1.0]), pt(&[1.0, 1.0])).unwrap();
        let sb = ConvexFunction::support_box(pt(&[-1.0, -1.0]), pt(&[1.0, 1.0])).unwrap().add_const(4.0).unwrap();
        let r = check_support_distance(&sb, &boxed, &s, TOL).unwrap();
        assert_eq!(r.report.status, Status::Verified, "{:?}", r.report);

        // a different function fails the distance identity
        let r = check_support_distance(&n, &boxed, &s, TOL).unwrap();
        assert_eq!(r.report.status, Status::HypothesisFails);

        let away = ConvexFunction::indicator_ball(pt(&[5.0, 0.0]), 1.0).unwrap();
        assert!(matches!(check_support_distance(&n, &away, &s, TOL), Err(Error::OriginNotInC)));
    }

    #[test]
    fn battery_is_reproducible() {
        let q = ConvexFunction::quadratic(DMatrix::identity(2, 2), pt(&[0.0, 0.0]), 0.0).unwrap();
        let cfg = BatteryConfig::new(pt(&[0.0, 0.0]), 7);
        let a = verify_all(&q, &q, &cfg).unwrap();
        let b = verify_all(&q, &q, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.status != Status::Counterexample), "{a:#?}");
    }
}
