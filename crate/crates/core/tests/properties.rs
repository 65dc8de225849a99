//! Property tests over generated expressions.

use proptest::prelude::*;
use proxbound::check::estimate_consistent;
use proxbound::numerics::{envelope_sweep, estimate_threshold_liminf, moreau_envelope, prox_points, sweep_points};
use proxbound::{
    attributes, compute_threshold, parse_expr, to_dsl, BoundedKind, FuncExpr, Region, RegionPartition,
    SolverConfig, ThresholdBound,
};

fn coeff() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

fn bounded_kind() -> impl Strategy<Value = BoundedKind> {
    prop_oneof![Just(BoundedKind::Sin), Just(BoundedKind::Cos), Just(BoundedKind::Atan)]
}

/// Finite-valued one-dimensional atoms.
fn finite_atom() -> impl Strategy<Value = FuncExpr> {
    prop_oneof![
        coeff().prop_map(FuncExpr::constant),
        (coeff(), coeff()).prop_map(|(a, b)| FuncExpr::affine(vec![a], b)),
        (coeff(), coeff(), coeff()).prop_map(|(q, b, c)| FuncExpr::quadratic_1d(q, b, c)),
        (coeff(), prop_oneof![Just(1.5), Just(2.5), Just(4.0)])
            .prop_map(|(k, p)| FuncExpr::power(k, p, false, 0).unwrap()),
        (coeff(), Just(3.0)).prop_map(|(k, p)| FuncExpr::power(k, p, true, 0).unwrap()),
        coeff().prop_map(FuncExpr::abs_norm),
        (bounded_kind(), coeff()).prop_map(|(k, a)| FuncExpr::bounded(k, a, 0)),
    ]
}

fn indicator() -> impl Strategy<Value = FuncExpr> {
    (coeff(), 0.0..5.0f64, any::<bool>()).prop_map(|(lo, w, ray)| {
        let hi = if ray { f64::INFINITY } else { lo + w };
        FuncExpr::indicator(Region::interval(lo, true, hi, hi.is_finite()))
    })
}

fn split(s: f64, left: FuncExpr, right: FuncExpr) -> FuncExpr {
    let cells = vec![
        Region::interval(f64::NEG_INFINITY, false, s, false),
        Region::interval(s, true, f64::INFINITY, false),
    ];
    FuncExpr::piecewise(RegionPartition::new(cells), vec![left, right]).unwrap()
}

/// Finite-valued trees over one variable.
fn finite_expr() -> impl Strategy<Value = FuncExpr> {
    finite_atom().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|t| FuncExpr::sum(t).unwrap()),
            (0.0..5.0f64, inner.clone()).prop_map(|(l, g)| FuncExpr::scale(l, g).unwrap()),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|t| FuncExpr::max(t).unwrap()),
            (coeff(), inner.clone(), inner.clone()).prop_map(|(s, a, b)| split(s, a, b)),
            (finite_atom(), inner).prop_map(|(o, i)| FuncExpr::compose(o, i).unwrap()),
        ]
    })
}

/// Trees that may also take the value `+inf`.
fn any_expr() -> impl Strategy<Value = FuncExpr> {
    prop_oneof![
        3 => finite_expr(),
        1 => (finite_expr(), indicator()).prop_map(|(f, i)| FuncExpr::sum(vec![f, i]).unwrap()),
        1 => indicator(),
    ]
}

/// Polynomial atoms of degree at most two.
fn poly_atom() -> impl Strategy<Value = FuncExpr> {
    prop_oneof![
        coeff().prop_map(FuncExpr::constant),
        (coeff(), coeff()).prop_map(|(a, b)| FuncExpr::affine(vec![a], b)),
        (coeff(), coeff(), coeff()).prop_map(|(q, b, c)| FuncExpr::quadratic_1d(q, b, c)),
    ]
}

/// Expressions with a threshold the rules resolve: quadratics with bounded
/// or affine addends, scalings, splits and affine compositions.
fn threshold_expr() -> impl Strategy<Value = FuncExpr> {
    let quad = || (-4.0..2.0f64, coeff(), coeff()).prop_map(|(q, b, c)| FuncExpr::quadratic_1d(q, b, c));
    prop_oneof![
        quad(),
        (quad(), bounded_kind(), coeff())
            .prop_map(|(f, k, a)| FuncExpr::sum(vec![f, FuncExpr::bounded(k, a, 0)]).unwrap()),
        (quad(), coeff(), coeff())
            .prop_map(|(f, a, b)| FuncExpr::sum(vec![f, FuncExpr::affine(vec![a], b)]).unwrap()),
        (0.0..3.0f64, quad()).prop_map(|(l, f)| FuncExpr::scale(l, f).unwrap()),
        (coeff(), quad(), quad()).prop_map(|(s, a, b)| split(s, a, b)),
        (quad(), -2.0..2.0f64, coeff())
            .prop_map(|(o, a, b)| FuncExpr::compose(o, FuncExpr::affine(vec![a], b)).unwrap()),
    ]
}

fn sample_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, 1..16)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dsl_round_trip(f in any_expr()) {
        let text = to_dsl(&f);
        let back = parse_expr(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, f, "{}", text);
    }

    #[test]
    fn json_round_trip(f in any_expr()) {
        let json = serde_json::to_string(&f).unwrap();
        let back: FuncExpr = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn max_matches_its_piecewise_form(terms in prop::collection::vec(poly_atom(), 1..5), xs in sample_points()) {
        let f = FuncExpr::max(terms.clone()).unwrap();
        let pw = f.max_as_piecewise().expect("polynomial terms");
        for x in xs {
            let want = terms.iter().map(|t| t.value_at(&[x])).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(f.value_at(&[x]), want);
            prop_assert!(close(pw.value_at(&[x]), want, 1e-9), "x = {}: {} vs {}", x, pw.value_at(&[x]), want);
        }
    }

    #[test]
    fn piecewise_agrees_with_the_piece_inside_its_cell(s in coeff(), a in any_expr(), b in any_expr(), xs in sample_points()) {
        let f = split(s, a.clone(), b.clone());
        for x in xs {
            let want = if x < s { a.value_at(&[x]) } else { b.value_at(&[x]) };
            prop_assert_eq!(f.value_at(&[x]).to_bits(), want.to_bits());
        }
    }

    #[test]
    fn lipschitz_constants_bound_difference_quotients(f in finite_expr(), pairs in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..16)) {
        if let Some(k) = attributes(&f).lipschitz {
            for (x, y) in pairs {
                if (x - y).abs() < 1e-3 {
                    continue;
                }
                let (fx, fy) = (f.value_at(&[x]), f.value_at(&[y]));
                let rounding = 1e-12 * (1.0 + fx.abs().max(fy.abs())) / (x - y).abs();
                let q = (fx - fy).abs() / (x - y).abs();
                prop_assert!(q <= k + 1e-9 + rounding, "{}: quotient {} > K = {} at {}, {}", to_dsl(&f), q, k, x, y);
            }
        }
    }

    #[test]
    fn convexity_claims_hold_at_midpoints(f in any_expr(), pairs in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..16)) {
        if attributes(&f).convex == Some(true) {
            for (x, y) in pairs {
                let mid = f.value_at(&[0.5 * (x + y)]);
                let chord = 0.5 * (f.value_at(&[x]) + f.value_at(&[y]));
                prop_assert!(mid <= chord + 1e-9 * (1.0 + chord.abs()), "{} at {}, {}", to_dsl(&f), x, y);
            }
        }
    }

    #[test]
    fn boundedness_claims_hold_on_samples(f in finite_expr(), xs in sample_points()) {
        let a = attributes(&f);
        // A bounded-below claim must survive moving far out along both rays.
        if a.bounded_below == Some(true) && a.bounded_above == Some(true) {
            let v0 = f.value_at(&[0.0]);
            let spread: Vec<f64> = xs.iter().chain(&[1e6, -1e6]).map(|x| (f.value_at(&[*x]) - v0).abs()).collect();
            let near = spread.iter().take(xs.len()).cloned().fold(0.0, f64::max);
            let far = spread[xs.len()..].iter().cloned().fold(0.0, f64::max);
            prop_assert!(far <= 10.0 * near.max(100.0), "{}", to_dsl(&f));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_multiplies_the_threshold(f in threshold_expr(), lambda in 0.0..5.0f64) {
        let base = compute_threshold(&f).unwrap().bound;
        let scaled = compute_threshold(&FuncExpr::scale(lambda, f.clone()).unwrap()).unwrap().bound;
        match base {
            ThresholdBound::Exact { value } => prop_assert!(
                close(scaled.exact_value().expect("exact"), lambda * value, 1e-12),
                "{}: {} vs {}", to_dsl(&f), scaled, lambda * value
            ),
            ThresholdBound::NotProxBounded if lambda > 0.0 => prop_assert_eq!(scaled, ThresholdBound::NotProxBounded),
            _ => {}
        }
    }

    #[test]
    fn smaller_functions_have_larger_thresholds(q in -4.0..2.0f64, b in coeff(), c in coeff(), gap in 0.0..3.0f64, d in 0.0..5.0f64) {
        // f2 = f1 + (gap/2) x² + d lies above f1 everywhere.
        let f1 = FuncExpr::quadratic_1d(q, b, c);
        let f2 = FuncExpr::quadratic_1d(q + gap, b, c + d);
        for x in [-100.0, -1.0, 0.0, 0.5, 7.0, 1e3] {
            prop_assert!(f1.value_at(&[x]) <= f2.value_at(&[x]));
        }
        let r1 = compute_threshold(&f1).unwrap().bound.exact_value().unwrap();
        let r2 = compute_threshold(&f2).unwrap().bound.exact_value().unwrap();
        prop_assert!(r1 >= r2);
        // Independent oracle: the threshold of a quadratic with curvature q is max(0, -q).
        prop_assert_eq!(r1, (-q).max(0.0));
    }

    #[test]
    fn exact_thresholds_match_the_liminf_estimate(f in threshold_expr()) {
        let symbolic = compute_threshold(&f).unwrap().bound;
        let numeric = estimate_threshold_liminf(&f, &SolverConfig::default());
        if let Some(ok) = estimate_consistent(symbolic, numeric.result.bound, numeric.estimate) {
            prop_assert!(ok, "{}: symbolic {} numeric {:?}", to_dsl(&f), symbolic, numeric.estimate);
        }
        if let ThresholdBound::Exact { value } = symbolic {
            let est = numeric.estimate.expect("estimate for a prox-bounded function");
            prop_assert!((est - value).abs() <= 0.05_f64.max(0.02 * value), "{}: {} vs {}", to_dsl(&f), est, value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn envelope_lies_below_f_and_grows_with_r(f in threshold_expr(), x in -5.0..5.0f64, extra in 0.5..4.0f64) {
        let Some(rbar) = compute_threshold(&f).unwrap().bound.exact_value() else { return Ok(()) };
        let cfg = SolverConfig::default();
        let r = rbar + extra;
        let e1 = moreau_envelope(&f, r, &[x], &cfg).unwrap().value.finite().expect("finite above the threshold");
        let e2 = moreau_envelope(&f, 2.0 * r, &[x], &cfg).unwrap().value.finite().unwrap();
        let fx = f.value_at(&[x]);
        prop_assert!(e1 <= fx + 1e-9 * (1.0 + fx.abs()));
        prop_assert!(e1 <= e2 + 1e-9 * (1.0 + e2.abs()), "{}: e_r {} > e_2r {}", to_dsl(&f), e1, e2);
        prop_assert!(e2 <= fx + 1e-9 * (1.0 + fx.abs()));
    }

    #[test]
    fn prox_points_attain_the_envelope(f in threshold_expr(), x in -5.0..5.0f64, extra in 0.5..4.0f64) {
        let Some(rbar) = compute_threshold(&f).unwrap().bound.exact_value() else { return Ok(()) };
        let cfg = SolverConfig::default();
        let r = rbar + extra;
        let e = moreau_envelope(&f, r, &[x], &cfg).unwrap().value.finite().unwrap();
        for p in prox_points(&f, r, &[x], &cfg).unwrap() {
            let v = f.value_at(&p) + 0.5 * r * (p[0] - x).powi(2);
            prop_assert!((v - e).abs() <= 1e-6 * (1.0 + e.abs()), "{}: {} vs {}", to_dsl(&f), v, e);
        }
    }
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let cfg = SolverConfig::default();
    let f = parse_expr("-(1/4)*x^2 + abs(y) + sin(x)").unwrap();
    let points = sweep_points(&[(-2.0, 2.0), (-1.0, 1.0)], 3);
    let one = in_pool(1, || envelope_sweep(&f, 1.0, &points, &cfg).unwrap());
    let four = in_pool(4, || envelope_sweep(&f, 1.0, &points, &cfg).unwrap());
    assert_eq!(one, four);
    let g = parse_expr("piecewise{x < 0: x^2; x >= 0: -(x^2)} + cos(x)").unwrap();
    let points = sweep_points(&[(-3.0, 3.0)], 31);
    let one = in_pool(1, || envelope_sweep(&g, 2.5, &points, &cfg).unwrap());
    let four = in_pool(4, || envelope_sweep(&g, 2.5, &points, &cfg).unwrap());
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.value.to_f64().to_bits(), b.value.to_f64().to_bits());
        assert_eq!(a.minimizers, b.minimizers);
    }
}
