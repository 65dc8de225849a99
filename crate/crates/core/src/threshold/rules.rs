//! Rules as pure functions on bounds and attribute records.
//!
//! Each rule returns the `(rule name, id, bound)` triples it can justify;
//! an empty list means the rule does not apply.

use super::ThresholdBound;
use crate::expr::AttributeRecord;

pub type Fired = (&'static str, &'static str, ThresholdBound);

/// Intersection of two claims about the same threshold. `Err` when they
/// contradict each other. Endpoints that cross by rounding error collapse
/// to the exact value of the first operand (or the second).
pub fn intersect(a: ThresholdBound, b: ThresholdBound) -> Result<ThresholdBound, ()> {
    use ThresholdBound::*;
    match (a, b) {
        (Unknown, x) | (x, Unknown) => Ok(x),
        (NotProxBounded, NotProxBounded) => Ok(NotProxBounded),
        (NotProxBounded, _) | (_, NotProxBounded) => Err(()),
        _ => {
            let (lo1, hi1) = a.range().expect("finite claim");
            let (lo2, hi2) = b.range().expect("finite claim");
            let lo = lo1.max(lo2);
            let hi = hi1.min(hi2);
            if lo <= hi {
                return Ok(ThresholdBound::interval(lo, hi));
            }
            let tol = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
            if lo - hi > tol {
                return Err(());
            }
            Ok(ThresholdBound::exact(a.exact_value().or(b.exact_value()).unwrap_or(hi)))
        }
    }
}

/// `λ f` has threshold `λ r̄`; the zero multiple is the zero function on
/// the domain.
pub fn rule_scale(lambda: f64, inner: ThresholdBound) -> ThresholdBound {
    if lambda == 0.0 {
        return ThresholdBound::exact(0.0);
    }
    match inner {
        ThresholdBound::Exact { value } => ThresholdBound::exact(lambda * value),
        ThresholdBound::Interval { lo, hi } => ThresholdBound::interval(lambda * lo, lambda * hi),
        other => other,
    }
}

/// An addend of a sum: its threshold claim and attribute tags.
#[derive(Debug, Clone)]
pub struct SumOperand {
    pub bound: ThresholdBound,
    pub attrs: AttributeRecord,
}

/// Rules for `f1 + f2`. The generic bound `r1 + r2` needs both addends
/// prox-bounded; the sharper rules keep the threshold of one addend when
/// the other is bounded, affine, or has threshold zero and is bounded above
/// or majorized by an affine function. Non-prox-boundedness passes through
/// an affine addend only.
pub fn rule_sum_pair(f1: &SumOperand, f2: &SumOperand) -> Vec<Fired> {
    let mut out = Vec::new();
    if let (Some((_, h1)), Some((_, h2))) = (f1.bound.range(), f2.bound.range()) {
        out.push(("sum_upper_bound", "Prop4.9", ThresholdBound::interval(0.0, h1 + h2)));
    }
    for (keep, addend) in [(f1, f2), (f2, f1)] {
        if addend.attrs.affine.is_some() && !keep.bound.is_unknown() {
            out.push(("affine_addend", "Prop4.10", keep.bound));
        }
        if keep.bound.range().is_none() {
            continue;
        }
        let zero = addend.bound.exact_value() == Some(0.0);
        if addend.attrs.is_bounded() {
            out.push(("bounded_addend", "Prop4.9", keep.bound));
        } else if zero && addend.attrs.bounded_above == Some(true) {
            out.push(("bounded_above_addend", "Cor4.9b", keep.bound));
        } else if zero && addend.attrs.majorized_by_affine == Some(true) {
            out.push(("affine_majorized_addend", "Cor4.10b", keep.bound));
        }
    }
    out
}

/// What is known about one piece of a piecewise function: the threshold of
/// `f_i + ι_{S_i}` and of `f_i` alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct PieceThresholds {
    pub constrained: Option<ThresholdBound>,
    pub unconstrained: Option<ThresholdBound>,
}

/// Piecewise rules. A constrained piece that is not prox-bounded makes the
/// whole function not prox-bounded. When every constrained piece has a
/// finite claim the threshold is their maximum. The unconstrained
/// thresholds bound each constrained one from above, and their maximum
/// bounds the threshold with no lower bound beyond zero.
pub fn rule_piecewise(pieces: &[PieceThresholds]) -> Vec<Fired> {
    let mut out = Vec::new();
    if pieces
        .iter()
        .any(|p| p.constrained == Some(ThresholdBound::NotProxBounded))
    {
        out.push(("constrained_piece_unbounded", "Prop3.2", ThresholdBound::NotProxBounded));
        return out;
    }
    let unconstrained: Option<Vec<(f64, f64)>> =
        pieces.iter().map(|p| p.unconstrained.and_then(|b| b.range())).collect();
    if let Some(ranges) = &unconstrained {
        let hi = ranges.iter().map(|r| r.1).fold(0.0, f64::max);
        out.push(("piecewise_upper_bound", "Thm3.4", ThresholdBound::interval(0.0, hi)));
    }
    let mut used_constrained = false;
    let mut effective = Vec::with_capacity(pieces.len());
    for p in pieces {
        let upper = p.unconstrained.and_then(|b| b.range()).map(|r| ThresholdBound::interval(0.0, r.1));
        let constrained = p.constrained.filter(|b| b.range().is_some());
        used_constrained |= constrained.is_some();
        let claim = match (constrained, upper) {
            (Some(c), Some(u)) => intersect(c, u).ok(),
            (Some(c), None) => Some(c),
            (None, u) => u,
        };
        match claim.and_then(|c| c.range()) {
            Some(r) => effective.push(r),
            None => return out,
        }
    }
    if used_constrained {
        let lo = effective.iter().map(|r| r.0).fold(0.0, f64::max);
        let hi = effective.iter().map(|r| r.1).fold(0.0, f64::max);
        out.push(("max_of_constrained_pieces", "Thm3.3", ThresholdBound::interval(lo, hi)));
    }
    out
}

/// Outer function `a u + b` with `a >= 0`: threshold `a r2`.
pub fn rule_composition_outer_affine(a: f64, inner: ThresholdBound) -> Option<ThresholdBound> {
    if a < 0.0 || inner.is_unknown() {
        return None;
    }
    Some(rule_scale(a, inner))
}

/// Inner function `⟨a, x⟩ + b` with `a != 0`: threshold `‖a‖² r1`.
pub fn rule_composition_inner_affine(slope_norm_sq: f64, outer: ThresholdBound) -> Option<ThresholdBound> {
    if slope_norm_sq == 0.0 || outer.is_unknown() {
        return None;
    }
    Some(rule_scale(slope_norm_sq, outer))
}
