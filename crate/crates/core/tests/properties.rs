use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use proxcalc::prox_engine::{moreau_decomposition, prox_with, ProxMode};
use proxcalc::{prox, ConvexFunction, Point, SolverBudget};

const DIM: usize = 2;

fn point(range: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(-range..range, DIM).prop_map(|v| Point::new(v).unwrap())
}

fn atom() -> impl Strategy<Value = ConvexFunction> {
    prop_oneof![
        (0.1f64..3.0, point(2.0)).prop_map(|(l, c)| ConvexFunction::scaled_norm(l, c).unwrap()),
        point(2.0).prop_map(|c| ConvexFunction::half_sq_dist(&c).unwrap()),
        (point(1.0), 0.2f64..3.0).prop_map(|(c, r)| ConvexFunction::indicator_ball(c, r).unwrap()),
        (point(1.0), 0.2f64..3.0).prop_map(|(c, r)| ConvexFunction::support_ball(c, r).unwrap()),
        (point(2.0), point(2.0)).prop_map(|(a, b)| {
            let lo = a.zip_map(&b, f64::min);
            let hi = a.zip_map(&b, f64::max).map(|c| c + 0.1);
            ConvexFunction::indicator_box(lo, hi).unwrap()
        }),
        (point(2.0), point(2.0)).prop_map(|(a, b)| {
            let lo = a.zip_map(&b, f64::min);
            let hi = a.zip_map(&b, f64::max);
            ConvexFunction::support_box(lo, hi).unwrap()
        }),
        (point(2.0), -3.0f64..3.0).prop_map(|(a, c)| ConvexFunction::affine(a, c).unwrap()),
    ]
}

fn function() -> impl Strategy<Value = ConvexFunction> {
    atom().prop_flat_map(|f| {
        let base = f.clone();
        prop_oneof![
            Just(base),
            point(1.5).prop_map({
                let f = f.clone();
                move |a| f.tilt(a).unwrap()
            }),
            point(1.5).prop_map({
                let f = f.clone();
                move |t| f.translate(t).unwrap()
            }),
            (-2.0f64..2.0).prop_map({
                let f = f.clone();
                move |c| f.add_const(c).unwrap()
            }),
            (0.2f64..3.0).prop_map({
                let f = f.clone();
                move |l| f.envelope(l).unwrap()
            }),
            (0.2f64..3.0).prop_map(move |m| f.regularize(m).unwrap()),
        ]
    })
}

fn value(f: &ConvexFunction, x: &Point) -> f64 {
    f.evaluate(x).unwrap().as_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn prox_is_firmly_nonexpansive(f in function(), x in point(6.0), y in point(6.0), lambda in 0.1f64..4.0) {
        let b = SolverBudget::default();
        let p = prox(&f, lambda, &x, &b).unwrap().minimizer;
        let q = prox(&f, lambda, &y, &b).unwrap().minimizer;
        let d = &p - &q;
        prop_assert!(d.norm_sq() <= d.dot(&(&x - &y)) + 1e-9 * (1.0 + x.dist(&y).powi(2)));
    }

    #[test]
    fn closed_form_decomposition_is_exact(f in function(), x in point(6.0)) {
        let d = moreau_decomposition(&f, &x, &SolverBudget::default(), ProxMode::Auto).unwrap();
        prop_assert!(d.residual <= 1e-8 * (1.0 + x.norm()), "residual {}", d.residual);
    }

    #[test]
    fn fenchel_young_holds_with_equality_on_prox_pairs(f in function(), x in point(6.0), y in point(6.0)) {
        let fc = f.conjugate_closed_form().unwrap();
        let lhs = value(&f, &x) + value(&fc, &y);
        prop_assert!(lhs >= x.dot(&y) - 1e-9 * (1.0 + x.norm() * y.norm()));

        let p = prox(&f, 1.0, &x, &SolverBudget::default()).unwrap().minimizer;
        let s = &x - &p;
        let gap = value(&f, &p) + value(&fc, &s) - p.dot(&s);
        prop_assert!(gap.abs() <= 1e-7 * (1.0 + p.norm() * s.norm() + value(&f, &p).abs()), "gap {gap}");
    }

    #[test]
    fn conjugation_is_an_involution(f in function(), x in point(4.0)) {
        let back = f.conjugate_closed_form().unwrap().conjugate_closed_form().unwrap();
        let (a, b) = (f.evaluate(&x).unwrap(), back.evaluate(&x).unwrap());
        prop_assert_eq!(a.is_finite(), b.is_finite());
        if let (Some(a), Some(b)) = (a.value(), b.value()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn envelope_lies_between_prox_value_and_function(f in function(), x in point(6.0), lambda in 0.1f64..4.0) {
        let r = prox(&f, lambda, &x, &SolverBudget::default()).unwrap();
        let env = r.envelope_value;
        prop_assert!(value(&f, &r.minimizer) <= env + 1e-12 * (1.0 + env.abs()));
        let fx = f.evaluate(&x).unwrap();
        if let Some(fx) = fx.value() {
            prop_assert!(env <= fx + 1e-9 * (1.0 + fx.abs()));
        }
    }

    #[test]
    fn numerical_prox_matches_closed_form(f in function(), x in point(5.0), lambda in 0.2f64..3.0) {
        let b = SolverBudget::default();
        let exact = prox(&f, lambda, &x, &b).unwrap().minimizer;
        let num = prox_with(&f, lambda, &x, &b, ProxMode::Numerical).unwrap();
        prop_assert!(num.minimizer.dist(&exact) <= 1e-6, "{} vs {}", num.minimizer, exact);
    }

    #[test]
    fn documents_round_trip(f in function(), x in point(5.0)) {
        let text = f.to_json_string().unwrap();
        let g = ConvexFunction::from_json_str(&text).unwrap();
        prop_assert_eq!(g.to_json_string().unwrap(), text);
        let (a, b) = (f.evaluate(&x).unwrap(), g.evaluate(&x).unwrap());
        prop_assert_eq!(a.is_finite(), b.is_finite());
        if let (Some(a), Some(b)) = (a.value(), b.value()) {
            prop_assert_eq!(a, b);
        }
    }
}
