//! Quadratic growth at infinity along directions.
//!
//! The threshold of a proper lsc `f` is `max(0, -2 L)` with
//! `L = liminf f(x)/‖x‖²`. For a function restricted to a polyhedral cell
//! the liminf runs only over the cell's recession directions. In one
//! dimension there are at most two directions and the limit along each is
//! computed structurally; in two dimensions only polynomial pieces are
//! handled, where the limit `½ dᵀQd` is uniform in `d` and its minimum over
//! an arc of directions sits at an endpoint or an eigenvector.

use super::ThresholdBound;
use crate::expr::{attributes, FuncExpr, Region};
use crate::ext::ExtReal;
use crate::linalg::symmetric_eigen;

const CONE_TOL: f64 = 1e-12;

fn dot(a: &[f64], d: &[f64]) -> f64 {
    a.iter().zip(d).map(|(x, y)| x * y).sum()
}

fn normal2(h: &[f64]) -> [f64; 2] {
    [h.first().copied().unwrap_or(0.0), h.get(1).copied().unwrap_or(0.0)]
}

/// Whether a constraint with zero normal excludes everything.
fn trivially_empty(region: &Region) -> bool {
    region.halfspaces.iter().any(|h| {
        h.normal.iter().all(|a| *a == 0.0) && (h.offset < 0.0 || (h.strict && h.offset == 0.0))
    })
}

fn in_cone(region: &Region, d: &[f64]) -> bool {
    region.halfspaces.iter().all(|h| dot(&h.normal, d) <= CONE_TOL)
}

/// Unit recession directions of `region` among the candidates that are
/// extreme for quadratic forms: `±1` in one dimension; in two dimensions the
/// boundary rays of the recession cone, the coordinate axes and `extra`.
/// Empty when the region is bounded or empty.
pub fn recession_directions(region: &Region, dim: usize, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if trivially_empty(region) {
        return Vec::new();
    }
    if dim <= 1 {
        if let Some((lo, hi)) = region.interval_hull() {
            if lo > hi {
                return Vec::new();
            }
        }
        return [vec![1.0], vec![-1.0]].into_iter().filter(|d| in_cone(region, d)).collect();
    }
    let mut candidates: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    for h in &region.halfspaces {
        let [a, b] = normal2(&h.normal);
        let norm = a.hypot(b);
        if norm > 0.0 {
            candidates.push(vec![-b / norm, a / norm]);
            candidates.push(vec![b / norm, -a / norm]);
        }
    }
    candidates.extend(extra.iter().cloned());
    candidates.into_iter().filter(|d| in_cone(region, d)).collect()
}

fn scale_tail(k: f64, t: ExtReal) -> ExtReal {
    match t {
        ExtReal::Finite(v) => ExtReal::Finite(k * v),
        ExtReal::PosInf if k >= 0.0 => ExtReal::PosInf,
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::NegInf if k >= 0.0 => ExtReal::NegInf,
        ExtReal::NegInf => ExtReal::PosInf,
    }
}

/// `lim f(t d)/t²` as `t -> inf` for a one-dimensional `f` and `d = ±1`,
/// when it can be determined from the structure of `f`.
pub fn directional_tail(f: &FuncExpr, d: f64) -> Option<ExtReal> {
    if f.dim() > 1 {
        return None;
    }
    let finite = ExtReal::Finite;
    Some(match f {
        FuncExpr::Constant { .. } | FuncExpr::Affine { .. } | FuncExpr::AbsNorm { .. } | FuncExpr::Bounded { .. } => {
            finite(0.0)
        }
        FuncExpr::Quadratic { matrix, .. } => finite(0.5 * matrix[0][0]),
        FuncExpr::Power { coeff, exponent, signed, .. } => {
            let c = if *signed { coeff * d } else { *coeff };
            if *exponent < 2.0 {
                finite(0.0)
            } else if *exponent == 2.0 {
                finite(c)
            } else if c > 0.0 {
                ExtReal::PosInf
            } else {
                ExtReal::NegInf
            }
        }
        FuncExpr::Indicator { region } => {
            if recession_directions(region, 1, &[]).contains(&vec![d]) {
                finite(0.0)
            } else {
                ExtReal::PosInf
            }
        }
        FuncExpr::Sum { terms } => {
            let tails = terms.iter().map(|t| directional_tail(t, d)).collect::<Option<Vec<_>>>()?;
            let pos = tails.contains(&ExtReal::PosInf);
            let neg = tails.contains(&ExtReal::NegInf);
            match (pos, neg) {
                (true, true) => return None,
                (true, false) => ExtReal::PosInf,
                (false, true) => ExtReal::NegInf,
                (false, false) => finite(tails.iter().map(|t| t.to_f64()).sum()),
            }
        }
        FuncExpr::Scale { factor, inner } => {
            let t = directional_tail(inner, d)?;
            if *factor == 0.0 && t != ExtReal::PosInf {
                finite(0.0)
            } else {
                scale_tail(*factor, t)
            }
        }
        FuncExpr::Max { terms } => terms
            .iter()
            .map(|t| directional_tail(t, d))
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .fold(ExtReal::NegInf, |a, b| if b > a { b } else { a }),
        FuncExpr::Piecewise { partition, pieces } => {
            let cell = partition
                .cells
                .iter()
                .position(|c| recession_directions(c, 1, &[]).contains(&vec![d]))?;
            directional_tail(&pieces[cell], d)?
        }
        FuncExpr::Compose { outer, inner } => {
            if let Some((slope, _)) = attributes(outer).affine {
                let a = slope.first().copied().unwrap_or(0.0);
                let t = directional_tail(inner, d)?;
                if a == 0.0 {
                    if t == ExtReal::PosInf {
                        ExtReal::PosInf
                    } else {
                        finite(0.0)
                    }
                } else {
                    scale_tail(a, t)
                }
            } else if let Some((slope, b)) = attributes(inner).affine {
                let s = slope.first().copied().unwrap_or(0.0);
                if s == 0.0 {
                    if outer.value_at(&[b]).is_finite() {
                        finite(0.0)
                    } else {
                        ExtReal::PosInf
                    }
                } else {
                    scale_tail(s * s, directional_tail(outer, (s * d).signum())?)
                }
            } else {
                return None;
            }
        }
    })
}

/// The matrix `Q` of `½ xᵀQx + ...` for sums and scalings of polynomial
/// atoms of degree at most two.
fn quadratic_form(f: &FuncExpr, dim: usize) -> Option<Vec<Vec<f64>>> {
    let zero = || vec![vec![0.0; dim]; dim];
    match f {
        FuncExpr::Constant { .. } | FuncExpr::Affine { .. } => Some(zero()),
        FuncExpr::Quadratic { matrix, .. } => {
            let mut q = zero();
            for (i, row) in matrix.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    *q.get_mut(i)?.get_mut(j)? = *v;
                }
            }
            Some(q)
        }
        FuncExpr::Sum { terms } => {
            let mut q = zero();
            for t in terms {
                let qt = quadratic_form(t, dim)?;
                for i in 0..dim {
                    for j in 0..dim {
                        q[i][j] += qt[i][j];
                    }
                }
            }
            Some(q)
        }
        FuncExpr::Scale { factor, inner } => {
            let mut q = quadratic_form(inner, dim)?;
            q.iter_mut().flatten().for_each(|v| *v *= factor);
            Some(q)
        }
        _ => None,
    }
}

fn tail_to_bound(t: ExtReal) -> ThresholdBound {
    match t {
        ExtReal::NegInf => ThresholdBound::NotProxBounded,
        ExtReal::PosInf => ThresholdBound::exact(0.0),
        ExtReal::Finite(v) => ThresholdBound::exact((-2.0 * v).max(0.0)),
    }
}

/// Threshold of `piece + ι_cell` from the growth of `piece` along the
/// recession directions of `cell`. A bounded (or empty) cell gives zero.
pub fn constrained_tail_threshold(piece: &FuncExpr, cell: &Region, dim: usize) -> Option<ThresholdBound> {
    if dim <= 1 {
        let dirs = recession_directions(cell, 1, &[]);
        let mut worst = ExtReal::PosInf;
        for d in dirs {
            let t = directional_tail(piece, d[0])?;
            if t < worst {
                worst = t;
            }
        }
        return Some(tail_to_bound(worst));
    }
    if dim != 2 {
        return None;
    }
    if recession_directions(cell, 2, &[]).is_empty() {
        return Some(ThresholdBound::exact(0.0));
    }
    let q = quadratic_form(piece, 2)?;
    let extra: Vec<Vec<f64>> = symmetric_eigen(&q)
        .into_iter()
        .flat_map(|(_, v)| [v.clone(), v.iter().map(|c| -c).collect()])
        .collect();
    let worst = recession_directions(cell, 2, &extra)
        .iter()
        .map(|d| {
            let qd: Vec<f64> = q.iter().map(|row| dot(row, d)).collect();
            0.5 * dot(d, &qd)
        })
        .fold(f64::INFINITY, f64::min);
    Some(tail_to_bound(ExtReal::Finite(worst)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn cell(lo: f64, hi: f64) -> Region {
        Region::interval(lo, true, hi, false)
    }

    #[test]
    fn half_line_directions() {
        assert_eq!(recession_directions(&cell(0.0, f64::INFINITY), 1, &[]), vec![vec![1.0]]);
        assert!(recession_directions(&cell(-1.0, 1.0), 1, &[]).is_empty());
        assert_eq!(recession_directions(&Region::full(), 1, &[]).len(), 2);
    }

    #[test]
    fn tails_of_atoms() {
        let t = |s: &str, d: f64| directional_tail(&parse_expr(s).unwrap(), d).unwrap();
        assert_eq!(t("-(x^2)", 1.0), ExtReal::Finite(-1.0));
        assert_eq!(t("x^3", -1.0), ExtReal::NegInf);
        assert_eq!(t("-abs(x)", 1.0), ExtReal::Finite(0.0));
        assert_eq!(t("compose(-(1/2)*u^2, -2*x)", 1.0), ExtReal::Finite(-2.0));
        assert_eq!(t("ind[0, 1] + x", 1.0), ExtReal::PosInf);
        assert!(directional_tail(&parse_expr("x^3 + (-(x^3))").unwrap(), 1.0).is_none());
    }

    #[test]
    fn constrained_piece_of_concave_quadratic() {
        let piece = parse_expr("-(x^2)").unwrap();
        assert_eq!(
            constrained_tail_threshold(&piece, &cell(0.0, f64::INFINITY), 1),
            Some(ThresholdBound::exact(2.0))
        );
        assert_eq!(constrained_tail_threshold(&piece, &cell(-3.0, 4.0), 1), Some(ThresholdBound::exact(0.0)));
    }

    #[test]
    fn two_dimensional_cone() {
        // -x^2 + y^2 on the wedge y >= |x|: the worst direction is the edge.
        let piece = parse_expr("-(x^2) + (y^2)").unwrap();
        let wedge = parse_expr("ind{x - y <= 0 & -x - y <= 0}").unwrap();
        let FuncExpr::Indicator { region } = wedge else { panic!() };
        let b = constrained_tail_threshold(&piece, &region, 2).unwrap();
        assert!(matches!(b, ThresholdBound::Exact { value } if value.abs() < 1e-12));
        let half = parse_expr("ind{y <= 0}").unwrap();
        let FuncExpr::Indicator { region } = half else { panic!() };
        let b = constrained_tail_threshold(&piece, &region, 2).unwrap();
        assert!(matches!(b, ThresholdBound::Exact { value } if (value - 2.0).abs() < 1e-12));
    }
}
