use super::rules::{
    intersect, rule_composition_inner_affine, rule_composition_outer_affine, rule_piecewise, rule_scale,
    rule_sum_pair, Fired, PieceThresholds, SumOperand,
};
use super::tail::{constrained_tail_threshold, recession_directions};
use super::{ThresholdBound, ThresholdError, ThresholdResult, TraceEntry};
use crate::expr::{attributes, to_dsl, AttributeRecord, FuncExpr, Region, RegionPartition};
use crate::linalg::min_eigenvalue;

/// Threshold of prox-boundedness derived from the calculus rules.
pub fn compute_threshold(f: &FuncExpr) -> Result<ThresholdResult, ThresholdError> {
    let mut trace = Vec::new();
    let bound = derive(f, &mut trace)?;
    Ok(ThresholdResult { bound, trace })
}

/// [`compute_threshold`] restricted to leaves of the expression tree.
pub fn atom_threshold(f: &FuncExpr) -> Result<ThresholdResult, ThresholdError> {
    if !f.is_atom() {
        return Err(ThresholdError::NonAtomic(to_dsl(f)));
    }
    compute_threshold(f)
}

/// Curvature `r̄/2` of the flattest quadratic minorant `-(r̄/2)‖x‖² + m`.
/// Only defined for a positive exact threshold.
pub fn minorant_curvature(f: &FuncExpr) -> Result<f64, ThresholdError> {
    match compute_threshold(f)?.bound {
        ThresholdBound::Exact { value } if value > 0.0 => Ok(value / 2.0),
        ThresholdBound::Exact { .. } => Err(ThresholdError::ZeroThreshold),
        other => Err(ThresholdError::NotExact(other)),
    }
}

struct Node {
    label: String,
    fired: Vec<(Fired, Vec<String>)>,
}

impl Node {
    fn new(f: &FuncExpr) -> Self {
        Node { label: to_dsl(f), fired: Vec::new() }
    }

    fn fire(&mut self, rule: Fired, inputs: Vec<String>) {
        self.fired.push((rule, inputs));
    }

    /// Intersects everything that fired and appends it to the trace.
    fn finish(self, trace: &mut Vec<TraceEntry>) -> Result<ThresholdBound, ThresholdError> {
        let mut acc = ThresholdBound::Unknown;
        for ((rule, id, bound), extra) in self.fired {
            acc = intersect(acc, bound).map_err(|()| ThresholdError::Soundness {
                expr: self.label.clone(),
                first: acc,
                second: bound,
            })?;
            let mut inputs = vec![self.label.clone()];
            inputs.extend(extra);
            trace.push(TraceEntry::new(rule, id, inputs, bound));
        }
        Ok(acc)
    }
}

fn generic_rules(attrs: &AttributeRecord, node: &mut Node) {
    let zero = ThresholdBound::exact(0.0);
    let before = node.fired.len();
    if attrs.bounded_below == Some(true) {
        node.fire(("bounded_below", "Fact2.7", zero), Vec::new());
    }
    if attrs.convex == Some(true) {
        node.fire(("convex", "Fact2.10", zero), Vec::new());
    }
    if let Some(k) = attrs.lipschitz {
        node.fire(("lipschitz", "Prop3.1", zero), vec![format!("K = {k}")]);
    }
    if node.fired.len() == before && attrs.linear_lower_growth == Some(true) {
        node.fire(("linear_lower_growth", "Fact2.9", zero), Vec::new());
    }
}

fn atom_rules(f: &FuncExpr, node: &mut Node) {
    match f {
        FuncExpr::Quadratic { matrix, .. } => {
            let lam = min_eigenvalue(matrix);
            let scale = matrix.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
            let r = if -lam <= 1e-12 * scale { 0.0 } else { -lam };
            node.fire(
                ("quadratic_curvature", "Fact4.3.iv", ThresholdBound::exact(r)),
                vec![format!("lambda_min = {lam}")],
            );
        }
        FuncExpr::Power { coeff, exponent, signed, .. } => {
            let worst = if *signed { -coeff.abs() } else { *coeff };
            if worst >= 0.0 {
                return;
            }
            let bound = if *exponent < 2.0 {
                ThresholdBound::exact(0.0)
            } else if *exponent == 2.0 {
                ThresholdBound::exact(-2.0 * worst)
            } else {
                ThresholdBound::NotProxBounded
            };
            node.fire(("power_growth", "Fact4.3.iv", bound), vec![format!("p = {exponent}")]);
        }
        _ => {}
    }
}

fn derive(f: &FuncExpr, trace: &mut Vec<TraceEntry>) -> Result<ThresholdBound, ThresholdError> {
    let mut node = Node::new(f);
    generic_rules(&attributes(f), &mut node);
    match f {
        FuncExpr::Sum { terms } => sum_rules(terms, &mut node, trace)?,
        FuncExpr::Scale { factor, inner } => {
            let b = derive(inner, trace)?;
            node.fire(("scale", "Fact4.13", rule_scale(*factor, b)), vec![format!("lambda = {factor}"), format!("r = {b}")]);
        }
        FuncExpr::Max { terms } => max_rules(f, terms, &mut node, trace)?,
        FuncExpr::Piecewise { partition, pieces } => {
            let dim = f.dim();
            piecewise_rules(partition, pieces, dim, &mut node, trace)?;
        }
        FuncExpr::Compose { outer, inner } => compose_rules(outer, inner, &mut node, trace)?,
        atom => atom_rules(atom, &mut node),
    }
    node.finish(trace)
}

fn sum_rules(terms: &[FuncExpr], node: &mut Node, trace: &mut Vec<TraceEntry>) -> Result<(), ThresholdError> {
    let bounds = terms.iter().map(|t| derive(t, trace)).collect::<Result<Vec<_>, _>>()?;
    if terms.len() == 1 {
        node.fire(("single_term", "Prop4.9", bounds[0]), Vec::new());
        return Ok(());
    }
    if let Some((rest, cell)) = split_indicators(terms) {
        let dim = terms.iter().map(FuncExpr::dim).max().unwrap_or(1);
        if let Some(b) = constrained_tail_threshold(&rest, &cell, dim) {
            let (rule, id) = if bounded_cell(&cell, dim) {
                ("bounded_cell", "Fact2.7")
            } else {
                ("constrained_piece_growth", "Fact4.3.iv")
            };
            node.fire((rule, id, b), vec![format!("restricted to {}", to_dsl(&FuncExpr::indicator(cell)))]);
        }
    }
    let mut acc = SumOperand { bound: bounds[0], attrs: attributes(&terms[0]) };
    for k in 1..terms.len() {
        let next = SumOperand { bound: bounds[k], attrs: attributes(&terms[k]) };
        let inputs = vec![format!("r1 = {}", acc.bound), format!("r2 = {}", next.bound)];
        let fired = rule_sum_pair(&acc, &next);
        if k + 1 == terms.len() {
            for rule in fired {
                node.fire(rule, inputs.clone());
            }
            break;
        }
        // Partial sums get their own trace entries.
        let partial = FuncExpr::Sum { terms: terms[..=k].to_vec() };
        let attrs = attributes(&partial);
        let mut step = Node::new(&partial);
        generic_rules(&attrs, &mut step);
        for rule in fired {
            step.fire(rule, inputs.clone());
        }
        acc = SumOperand { bound: step.finish(trace)?, attrs };
    }
    Ok(())
}

/// `f + ι_S` as `(f, S)`, intersecting the regions of all indicator terms.
fn split_indicators(terms: &[FuncExpr]) -> Option<(FuncExpr, Region)> {
    let mut halfspaces = Vec::new();
    let mut rest = Vec::new();
    for t in terms {
        match t {
            FuncExpr::Indicator { region } => halfspaces.extend(region.halfspaces.iter().cloned()),
            other => rest.push(other.clone()),
        }
    }
    if rest.len() == terms.len() || rest.is_empty() {
        return None;
    }
    let rest = if rest.len() == 1 { rest.pop().expect("one term") } else { FuncExpr::Sum { terms: rest } };
    Some((rest, Region::new(halfspaces)))
}

fn max_rules(f: &FuncExpr, terms: &[FuncExpr], node: &mut Node, trace: &mut Vec<TraceEntry>) -> Result<(), ThresholdError> {
    let bounds = terms.iter().map(|t| derive(t, trace)).collect::<Result<Vec<_>, _>>()?;
    // max >= f_i, so its threshold is at most each r_i.
    if let Some(hi) = bounds.iter().filter_map(|b| b.range()).map(|r| r.1).reduce(f64::min) {
        node.fire(("max_dominates_terms", "Cor4.7", ThresholdBound::interval(0.0, hi)), Vec::new());
    }
    if let Some(FuncExpr::Piecewise { partition, pieces }) = f.max_as_piecewise() {
        let dim = f.dim();
        let mut inner = Node::new(f);
        piecewise_rules(&partition, &pieces, dim, &mut inner, trace)?;
        let rewritten = FuncExpr::Piecewise { partition, pieces };
        for (rule, mut inputs) in inner.fired {
            inputs.insert(0, format!("active-set cells: {}", to_dsl(&rewritten)));
            node.fire(rule, inputs);
        }
    }
    Ok(())
}

fn piecewise_rules(
    partition: &RegionPartition,
    pieces: &[FuncExpr],
    dim: usize,
    node: &mut Node,
    trace: &mut Vec<TraceEntry>,
) -> Result<(), ThresholdError> {
    let mut summary = Vec::with_capacity(pieces.len());
    for (i, (cell, piece)) in partition.cells.iter().zip(pieces).enumerate() {
        let unconstrained = derive(piece, trace)?;
        let constrained = constrained_tail_threshold(piece, cell, dim);
        if let Some(b) = constrained {
            let restricted = FuncExpr::Sum { terms: vec![piece.clone(), FuncExpr::indicator(cell.clone())] };
            let (rule, id) = if bounded_cell(cell, dim) {
                ("bounded_cell", "Fact2.7")
            } else {
                ("constrained_piece_growth", "Fact4.3.iv")
            };
            trace.push(TraceEntry::new(rule, id, vec![to_dsl(&restricted), format!("piece {i}")], b));
        }
        summary.push(PieceThresholds { constrained, unconstrained: Some(unconstrained) });
    }
    let inputs: Vec<String> = summary
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = p.constrained.map_or("unknown".to_string(), |b| b.to_string());
            let u = p.unconstrained.map_or("unknown".to_string(), |b| b.to_string());
            format!("piece {i}: constrained {c}, unconstrained {u}")
        })
        .collect();
    for rule in rule_piecewise(&summary) {
        node.fire(rule, inputs.clone());
    }
    Ok(())
}

fn bounded_cell(cell: &Region, dim: usize) -> bool {
    recession_directions(cell, dim.max(1), &[]).is_empty()
}

fn compose_rules(
    outer: &FuncExpr,
    inner: &FuncExpr,
    node: &mut Node,
    trace: &mut Vec<TraceEntry>,
) -> Result<(), ThresholdError> {
    let r1 = derive(outer, trace)?;
    let r2 = derive(inner, trace)?;
    let ao = attributes(outer);
    let ai = attributes(inner);
    if let (Some(k1), Some(k2)) = (ao.lipschitz, ai.lipschitz) {
        node.fire(
            ("lipschitz_composition", "CompProp.i", ThresholdBound::exact(0.0)),
            vec![format!("K1 = {k1}"), format!("K2 = {k2}")],
        );
    }
    if let Some((slope, _)) = &ao.affine {
        let a = slope.first().copied().unwrap_or(0.0);
        if let Some(b) = rule_composition_outer_affine(a, r2) {
            node.fire(("affine_outer", "CompProp.ii", b), vec![format!("a = {a}"), format!("r2 = {r2}")]);
        }
    }
    if let Some((slope, offset)) = &ai.affine {
        let norm_sq: f64 = slope.iter().map(|v| v * v).sum();
        if norm_sq == 0.0 {
            if outer.value_at(&[*offset]).is_finite() {
                node.fire(("constant_inner", "Fact2.7", ThresholdBound::exact(0.0)), Vec::new());
            }
        } else if let Some(b) = rule_composition_inner_affine(norm_sq, r1) {
            node.fire(
                ("affine_inner", "CompProp.iii", b),
                vec![format!("|a|^2 = {norm_sq}"), format!("r1 = {r1}")],
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn bound(text: &str) -> ThresholdBound {
        compute_threshold(&parse_expr(text).unwrap()).unwrap().bound
    }

    fn exact(v: f64) -> ThresholdBound {
        ThresholdBound::exact(v)
    }

    #[test]
    fn atoms() {
        assert_eq!(bound("-(x^2)"), exact(2.0));
        assert_eq!(bound("x^2"), exact(0.0));
        assert_eq!(bound("-(x^3)"), ThresholdBound::NotProxBounded);
        assert_eq!(bound("-abs(x)"), exact(0.0));
        assert_eq!(bound("5"), exact(0.0));
        assert!(atom_threshold(&parse_expr("max(x, 1)").unwrap()).is_err());
    }

    #[test]
    fn sums() {
        assert_eq!(bound("-(1/2)*x^2 + sin(x)"), exact(1.0));
        assert_eq!(bound("-(1/2)*x^2 + (2*x + 3)"), exact(1.0));
        assert_eq!(bound("-(1/2)*x^2 + (-(x^2))"), ThresholdBound::interval(0.0, 3.0));
        assert_eq!(bound("x^3 + (-(x^3))"), ThresholdBound::Unknown);
        assert_eq!(bound("-(x^3) + (2*x)"), ThresholdBound::NotProxBounded);
    }

    #[test]
    fn scaling() {
        assert_eq!(bound("scale(3, -(x^2))"), exact(6.0));
        assert_eq!(bound("scale(0, -(x^3))"), exact(0.0));
        assert_eq!(bound("scale(2, piecewise{x<0: -(x^2); x>=0: -(x^2)})"), exact(4.0));
    }

    #[test]
    fn compositions() {
        let r = compute_threshold(&parse_expr("compose(-(1/2)*u^2, -2*x)").unwrap()).unwrap();
        assert_eq!(r.bound, exact(4.0));
        assert!(r.cites("CompProp.iii"));
        assert_eq!(bound("compose(3*u + 1, -(x^2))"), exact(6.0));
        assert_eq!(bound("compose(sin(u), cos(x))"), exact(0.0));
        assert_eq!(bound("compose(-(u^2), x^2)"), ThresholdBound::Unknown);
        // (-b u) after (-(a/2) x^2) is (ab/2) x^2.
        assert_eq!(bound("compose(-2*u, -(1/2)*x^2)"), exact(0.0));
    }

    #[test]
    fn piecewise_thresholds() {
        let f1 = "piecewise{x<0: x^2; x>=0: -(x^2)}";
        let f2 = "piecewise{x<0: -(x^2); x>=0: x^2}";
        assert_eq!(bound(f1), exact(2.0));
        assert_eq!(bound(f2), exact(2.0));
        let glued = format!("piecewise{{x<0: {f1}; x>=0: {f2}}}");
        let r = compute_threshold(&parse_expr(&glued).unwrap()).unwrap();
        assert_eq!(r.bound, exact(0.0));
        assert!(r.cites("Thm3.3"));
        assert!(r.cites("Thm3.4"));
        let swapped = format!("piecewise{{x<0: {f2}; x>=0: {f1}}}");
        assert_eq!(bound(&swapped), exact(2.0));
    }

    #[test]
    fn max_goes_through_active_cells() {
        assert_eq!(bound("max(x, -x)"), exact(0.0));
        assert_eq!(bound("max(-(x^2), -2*x^2 + 1)"), exact(2.0));
    }

    #[test]
    fn minorant() {
        assert_eq!(minorant_curvature(&parse_expr("-(x^2)").unwrap()), Ok(1.0));
        assert_eq!(minorant_curvature(&parse_expr("scale(3, -(x^2))").unwrap()), Ok(3.0));
        assert_eq!(minorant_curvature(&parse_expr("-abs(x)").unwrap()), Err(ThresholdError::ZeroThreshold));
    }

    #[test]
    fn indicator_addend_restricts_the_tail() {
        assert_eq!(bound("-(x^2) + ind[1, inf)"), exact(2.0));
        assert_eq!(bound("-(x^2) + ind[-1, 1]"), exact(0.0));
        assert_eq!(bound("x^2 - 3*x^2 + ind[0, inf) + ind(-inf, 5]"), exact(0.0));
        assert_eq!(bound("-x^3 + ind(-inf, 0]"), exact(0.0));
        assert_eq!(bound("-x^3 + ind[0, inf)"), ThresholdBound::NotProxBounded);
    }

    #[test]
    fn every_claim_has_a_trace() {
        for text in ["0", "-(x^2)", "x^3", "max(x, -x)", "compose(sin(u), x)"] {
            let r = compute_threshold(&parse_expr(text).unwrap()).unwrap();
            if !r.bound.is_unknown() {
                assert!(!r.trace.is_empty(), "{text}");
            }
        }
    }
}
