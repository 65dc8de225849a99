//! Worked examples through the public API.

use proxbound::numerics::{estimate_threshold_liminf, moreau_envelope};
use proxbound::{
    attributes, compute_threshold, minorant_curvature, parse_expr, to_dsl, BoundedKind, ExtReal, FuncExpr,
    Region, RegionPartition, SolverConfig, ThresholdBound,
};

const F1: &str = "piecewise{x < 0: x^2; x >= 0: -(x^2)}";
const F2: &str = "piecewise{x < 0: -(x^2); x >= 0: x^2}";

fn glued() -> String {
    format!("piecewise{{x < 0: {F1}; x >= 0: {F2}}}")
}

fn p(s: &str) -> FuncExpr {
    parse_expr(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn bound(s: &str) -> ThresholdBound {
    compute_threshold(&p(s)).unwrap().bound
}

fn exact(v: f64) -> ThresholdBound {
    ThresholdBound::exact(v)
}

#[test]
fn parses_a_two_piece_function() {
    let f = p("piecewise{ x<0: x^2 ; x>=0: -(x^2) }");
    let FuncExpr::Piecewise { pieces, partition } = &f else { panic!("{f:?}") };
    assert_eq!(partition.len(), 2);
    assert!(pieces.iter().all(|q| matches!(q, FuncExpr::Quadratic { .. })));
    assert_eq!(p(&to_dsl(&f)), f);
}

#[test]
fn parses_constants_and_compositions() {
    assert_eq!(p("0"), FuncExpr::Constant { value: 0.0 });
    let FuncExpr::Compose { outer, inner } = p("compose(-(1/2)*u^2, -2*x)") else { panic!() };
    assert!(matches!(*outer, FuncExpr::Quadratic { .. }));
    assert_eq!(*inner, FuncExpr::affine(vec![-2.0], 0.0));
}

#[test]
fn evaluates_pieces_indicators_and_sums() {
    assert_eq!(p(F1).eval(&[1.0]), ExtReal::Finite(-1.0));
    assert_eq!(p(F1).eval(&[-3.0]), ExtReal::Finite(9.0));
    assert_eq!(p("ind[0, inf)").eval(&[-1.0]), ExtReal::PosInf);
    assert_eq!(p("ind[0, inf)").eval(&[0.0]), ExtReal::Finite(0.0));
    assert_eq!(p("x^3 + (-x^3)").eval(&[7.0]), ExtReal::Finite(0.0));
}

#[test]
fn boundary_ties_go_to_the_first_cell() {
    let f = p("piecewise{x <= 0: 1; x >= 0: 2}");
    assert_eq!(f.value_at(&[0.0]), 1.0);
    assert_eq!(f.value_at(&[1e-300]), 2.0);
}

#[test]
fn attribute_examples() {
    let a = attributes(&p("compose(sin(u), cos(x))"));
    assert_eq!(a.lipschitz, Some(1.0));
    let a = attributes(&p("x^2"));
    assert_eq!(a.bounded_below, Some(true));
    assert_eq!(a.convex, Some(true));
    let a = attributes(&p("-(x^2) + sin(x)"));
    assert_ne!(a.bounded_below, Some(true));
}

#[test]
fn constrained_pieces() {
    let f = p(&glued());
    let first = f.constrained_piece(0).unwrap();
    let FuncExpr::Sum { terms } = &first else { panic!("{first:?}") };
    assert_eq!(terms[0], p(F1));
    assert_eq!(terms[1], FuncExpr::indicator(Region::interval(f64::NEG_INFINITY, false, 0.0, false)));
    assert!(f.constrained_piece(2).is_err());

    let single = FuncExpr::piecewise(RegionPartition::new(vec![Region::full()]), vec![p("-(x^2)")]).unwrap();
    let piece = single.constrained_piece(0).unwrap();
    for x in [-3.0, 0.0, 2.5] {
        assert_eq!(piece.value_at(&[x]), -x * x);
    }

    let piece = p("max(x, -x)").constrained_piece(0).unwrap();
    assert_eq!(piece.value_at(&[2.0]), 2.0);
    assert_eq!(piece.value_at(&[-2.0]), f64::INFINITY);
}

#[test]
fn atom_thresholds() {
    assert_eq!(bound("-(x^2)"), exact(2.0));
    assert_eq!(bound("x^2"), exact(0.0));
    assert_eq!(bound("-x^3"), ThresholdBound::NotProxBounded);
    assert_eq!(bound("-abs(x)"), exact(0.0));
    assert_eq!(bound("ind[0, inf)"), exact(0.0));
    assert_eq!(bound("sin(x)"), exact(0.0));
}

#[test]
fn piecewise_thresholds() {
    for f in [F1, F2] {
        let r = compute_threshold(&p(f)).unwrap();
        assert_eq!(r.bound, exact(2.0), "{f}");
        assert!(r.cites("Thm3.3"));
    }
    assert_eq!(bound(&glued()), exact(0.0));
    let swapped = format!("piecewise{{x < 0: {F2}; x >= 0: {F1}}}");
    let r = compute_threshold(&p(&swapped)).unwrap();
    assert_eq!(r.bound, exact(2.0));
    assert!(r.cites("Thm3.3"));
    assert_eq!(bound("piecewise{x < 0: -(x^2); x >= 0: -(x^2)}"), exact(2.0));
}

#[test]
fn sum_thresholds() {
    let r = compute_threshold(&p("-(1/2)*x^2 + sin(x)")).unwrap();
    assert_eq!(r.bound, exact(1.0));
    assert!(r.cites("Prop4.9"));
    let r = compute_threshold(&p("-(1/2)*x^2 + (2*x + 3)")).unwrap();
    assert_eq!(r.bound, exact(1.0));
    assert!(r.cites("Prop4.10"));
    assert_eq!(bound("-(1/2)*x^2 + (-(x^2))"), ThresholdBound::Interval { lo: 0.0, hi: 3.0 });
    assert_eq!(bound("x^3 + (-x^3)"), ThresholdBound::Unknown);
}

#[test]
fn scale_thresholds() {
    assert_eq!(bound("scale(3, -(x^2))"), exact(6.0));
    assert_eq!(bound("scale(0, -x^3)"), exact(0.0));
    assert_eq!(bound("scale(1, -(x^2) + sin(x))"), bound("-(x^2) + sin(x)"));
}

#[test]
fn composition_thresholds() {
    let r = compute_threshold(&p("compose(-(1/2)*u^2, -2*x)")).unwrap();
    assert_eq!(r.bound, exact(4.0));
    assert!(r.cites("CompProp.iii"));
    let r = compute_threshold(&p("compose(3*u + 1, -(x^2))")).unwrap();
    assert_eq!(r.bound, exact(6.0));
    assert!(r.cites("CompProp.ii"));
    let r = compute_threshold(&p("compose(sin(u), cos(x))")).unwrap();
    assert_eq!(r.bound, exact(0.0));
    assert!(r.cites("CompProp.i"));

    let quartic = p("compose(-(u^2), x^2)");
    assert_eq!(compute_threshold(&quartic).unwrap().bound, ThresholdBound::Unknown);
    let numeric = estimate_threshold_liminf(&quartic, &SolverConfig::default());
    assert_eq!(numeric.result.bound, ThresholdBound::NotProxBounded);
}

#[test]
fn minorant_curvature_is_half_the_threshold() {
    assert_eq!(minorant_curvature(&p("-(x^2)")).unwrap(), 1.0);
    assert_eq!(minorant_curvature(&p("-(1/2)*x^2 + sin(x)")).unwrap(), 0.5);
    assert!(minorant_curvature(&p("-x^3")).is_err());
}

#[test]
fn every_claim_has_a_trace() {
    for s in [F1, "x^2", "-x^3", "-(1/2)*x^2 + (-(x^2))", "scale(2, abs(x))", "compose(-(1/2)*u^2, -2*x)"] {
        let r = compute_threshold(&p(s)).unwrap();
        assert!(!r.trace.is_empty(), "{s}");
        if let Some((lo, hi)) = r.bound.range() {
            assert!(0.0 <= lo && lo <= hi, "{s}");
        }
    }
}

#[test]
fn bounded_atoms_carry_their_sup() {
    let f = FuncExpr::bounded(BoundedKind::Atan, 2.0, 0);
    let a = attributes(&f);
    assert!(a.is_bounded());
    for x in [-1e9, -1.0, 0.0, 3.0, 1e9] {
        assert!(f.value_at(&[x]).abs() <= 2.0 * BoundedKind::Atan.sup_abs());
    }
}

#[test]
fn envelope_of_a_kink() {
    let cfg = SolverConfig::default();
    let f = p("abs(x)");
    // Huber function: x²/2 near zero, |x| - 1/2 beyond.
    for (x, want) in [(0.5, 0.125), (2.0, 1.5), (-3.0, 2.5)] {
        let e = moreau_envelope(&f, 1.0, &[x], &cfg).unwrap();
        assert!((e.value.finite().unwrap() - want).abs() < 1e-8, "{x}");
    }
}
