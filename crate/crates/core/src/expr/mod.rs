//! Function expressions: the tree model, evaluation, attributes, the textual
//! DSL and its serializations.

mod attributes;
mod parse;
mod region;
mod serialize;

pub use attributes::{attributes, AttributeRecord};
pub use parse::{parse_expr, ParseError, ParseErrorKind};
pub use region::{Halfspace, PartitionError, Region, RegionPartition};
pub use serialize::{json_tree, to_dsl};

use crate::ext::ExtReal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedKind {
    Sin,
    Cos,
    Atan,
}

impl BoundedKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundedKind::Sin => "sin",
            BoundedKind::Cos => "cos",
            BoundedKind::Atan => "atan",
        }
    }

    /// Supremum of `|g|` for the unit-amplitude atom.
    pub fn sup_abs(self) -> f64 {
        match self {
            BoundedKind::Sin | BoundedKind::Cos => 1.0,
            BoundedKind::Atan => std::f64::consts::FRAC_PI_2,
        }
    }

    fn apply(self, t: f64) -> f64 {
        match self {
            BoundedKind::Sin => t.sin(),
            BoundedKind::Cos => t.cos(),
            BoundedKind::Atan => t.atan(),
        }
    }
}

/// An immutable expression for a proper function `R^n -> R ∪ {+inf}`.
///
/// Quadratics are `½ xᵀQx + bᵀx + c`, so the curvature along a unit
/// direction `d` is `dᵀQd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuncExpr {
    Constant {
        value: f64,
    },
    Affine {
        slope: Vec<f64>,
        offset: f64,
    },
    Quadratic {
        matrix: Vec<Vec<f64>>,
        linear: Vec<f64>,
        constant: f64,
    },
    /// `coeff * |x_var|^exponent`, or `coeff * sign(x_var) |x_var|^exponent`
    /// when `signed` (odd integer powers such as `x^3`).
    Power {
        coeff: f64,
        exponent: f64,
        signed: bool,
        var: usize,
    },
    /// `coeff * ‖x‖`.
    AbsNorm {
        coeff: f64,
    },
    Bounded {
        atom: BoundedKind,
        amplitude: f64,
        var: usize,
    },
    Indicator {
        region: Region,
    },
    Sum {
        terms: Vec<FuncExpr>,
    },
    Scale {
        factor: f64,
        inner: Box<FuncExpr>,
    },
    Max {
        terms: Vec<FuncExpr>,
    },
    Piecewise {
        partition: RegionPartition,
        pieces: Vec<FuncExpr>,
    },
    /// `outer(inner(x))` with `outer` a function of one variable.
    Compose {
        outer: Box<FuncExpr>,
        inner: Box<FuncExpr>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("scale factor must be finite and nonnegative, got {0}")]
    NegativeScale(f64),
    #[error("power exponent must be at least 1, got {0}")]
    BadExponent(f64),
    #[error("signed powers need an odd integer exponent, got {0}")]
    SignedExponent(f64),
    #[error("piecewise function has {cells} cells but {pieces} pieces")]
    PieceCount { cells: usize, pieces: usize },
    #[error("invalid partition: {0}")]
    Partition(#[from] PartitionError),
    #[error("{0} needs at least one term")]
    EmptyTerms(&'static str),
    #[error("outer function of a composition must be one-dimensional, got dimension {0}")]
    OuterDimension(usize),
    #[error("quadratic matrix must be square and symmetric")]
    BadMatrix,
    #[error("piece index {index} out of range for {count} pieces")]
    PieceIndex { index: usize, count: usize },
    #[error("expression is not piecewise")]
    NotPiecewise,
    #[error("range of the inner function leaves the domain of the outer at x = {0:?}")]
    RangeCondition(Vec<f64>),
    #[error("non-finite coefficient")]
    NonFinite,
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl FuncExpr {
    pub fn constant(value: f64) -> Self {
        FuncExpr::Constant { value }
    }

    /// `slope · x + offset`; collapses to a constant when the slope vanishes.
    /// Trailing zero coordinates are dropped.
    pub fn affine(mut slope: Vec<f64>, offset: f64) -> Self {
        while slope.last() == Some(&0.0) {
            slope.pop();
        }
        if slope.is_empty() {
            FuncExpr::Constant { value: offset }
        } else {
            FuncExpr::Affine { slope, offset }
        }
    }

    /// `½ xᵀQx + bᵀx + c`; collapses to an affine function when `Q = 0`.
    pub fn quadratic(matrix: Vec<Vec<f64>>, linear: Vec<f64>, constant: f64) -> Result<Self, ExprError> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(ExprError::BadMatrix);
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(ExprError::BadMatrix);
                }
            }
        }
        if !matrix.iter().all(|row| all_finite(row)) || !all_finite(&linear) || !constant.is_finite() {
            return Err(ExprError::NonFinite);
        }
        if matrix.iter().flatten().all(|q| *q == 0.0) {
            return Ok(FuncExpr::affine(linear, constant));
        }
        // Trim trailing coordinates that appear nowhere.
        let used = |k: usize| {
            linear.get(k).is_some_and(|b| *b != 0.0)
                || (k < n && (matrix[k].iter().any(|q| *q != 0.0) || matrix.iter().any(|r| r[k] != 0.0)))
        };
        let keep = (0..n.max(linear.len())).rev().find(|&k| used(k)).map_or(1, |k| k + 1);
        let matrix: Vec<Vec<f64>> = (0..keep)
            .map(|i| (0..keep).map(|j| matrix.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)).collect())
            .collect();
        let mut linear = linear;
        linear.resize(keep, 0.0);
        Ok(FuncExpr::Quadratic { matrix, linear, constant })
    }

    /// One-dimensional `(curvature / 2) x^2 + b x + c`.
    pub fn quadratic_1d(curvature: f64, b: f64, c: f64) -> Self {
        FuncExpr::quadratic(vec![vec![curvature]], vec![b], c).expect("1x1 matrix is symmetric")
    }

    pub fn power(coeff: f64, exponent: f64, signed: bool, var: usize) -> Result<Self, ExprError> {
        if !coeff.is_finite() || !exponent.is_finite() {
            return Err(ExprError::NonFinite);
        }
        if exponent < 1.0 {
            return Err(ExprError::BadExponent(exponent));
        }
        if signed && !(exponent.fract() == 0.0 && exponent as i64 % 2 == 1) {
            return Err(ExprError::SignedExponent(exponent));
        }
        if coeff == 0.0 {
            return Ok(FuncExpr::constant(0.0));
        }
        if signed && exponent == 1.0 {
            let mut slope = vec![0.0; var + 1];
            slope[var] = coeff;
            return Ok(FuncExpr::affine(slope, 0.0));
        }
        if !signed && exponent == 2.0 {
            let n = var + 1;
            let mut matrix = vec![vec![0.0; n]; n];
            matrix[var][var] = 2.0 * coeff;
            return FuncExpr::quadratic(matrix, vec![0.0; n], 0.0);
        }
        Ok(FuncExpr::Power { coeff, exponent, signed, var })
    }

    pub fn abs_norm(coeff: f64) -> Self {
        FuncExpr::AbsNorm { coeff }
    }

    pub fn bounded(atom: BoundedKind, amplitude: f64, var: usize) -> Self {
        FuncExpr::Bounded { atom, amplitude, var }
    }

    pub fn indicator(region: Region) -> Self {
        FuncExpr::Indicator { region }
    }

    pub fn sum(terms: Vec<FuncExpr>) -> Result<Self, ExprError> {
        if terms.is_empty() {
            return Err(ExprError::EmptyTerms("sum"));
        }
        Ok(FuncExpr::Sum { terms })
    }

    pub fn max(terms: Vec<FuncExpr>) -> Result<Self, ExprError> {
        if terms.is_empty() {
            return Err(ExprError::EmptyTerms("max"));
        }
        Ok(FuncExpr::Max { terms })
    }

    pub fn scale(factor: f64, inner: FuncExpr) -> Result<Self, ExprError> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(ExprError::NegativeScale(factor));
        }
        Ok(FuncExpr::Scale { factor, inner: Box::new(inner) })
    }

    /// Builds a piecewise function after sample-validating the partition.
    pub fn piecewise(partition: RegionPartition, pieces: Vec<FuncExpr>) -> Result<Self, ExprError> {
        if partition.len() != pieces.len() {
            return Err(ExprError::PieceCount { cells: partition.len(), pieces: pieces.len() });
        }
        let dim = pieces
            .iter()
            .map(FuncExpr::dim)
            .chain(std::iter::once(partition.dim()))
            .max()
            .unwrap_or(1);
        partition.validate(dim)?;
        Ok(FuncExpr::Piecewise { partition, pieces })
    }

    pub fn compose(outer: FuncExpr, inner: FuncExpr) -> Result<Self, ExprError> {
        if outer.dim() > 1 {
            return Err(ExprError::OuterDimension(outer.dim()));
        }
        let f = FuncExpr::Compose { outer: Box::new(outer), inner: Box::new(inner) };
        f.check_range_condition()?;
        Ok(f)
    }

    /// Sampled check that `inner` maps into the domain of `outer`. Skipped
    /// when the outer function is finite everywhere.
    fn check_range_condition(&self) -> Result<(), ExprError> {
        let FuncExpr::Compose { outer, inner } = self else {
            return Ok(());
        };
        if outer.is_finite_valued() {
            return Ok(());
        }
        let dim = inner.dim();
        let axis: Vec<f64> = (0..201).map(|i| -100.0 + i as f64).collect();
        let mut point = vec![0.0; dim];
        let probe = |p: &[f64]| -> Result<(), ExprError> {
            let v = inner.value_at(p);
            if v.is_finite() && outer.value_at(&[v]) == f64::INFINITY {
                return Err(ExprError::RangeCondition(p.to_vec()));
            }
            Ok(())
        };
        if dim <= 1 {
            for &a in &axis {
                probe(&[a])?;
            }
        } else {
            for &a in &axis {
                for &b in &axis {
                    point[0] = a;
                    point[1] = b;
                    probe(&point)?;
                }
            }
        }
        Ok(())
    }

    /// Smallest ambient dimension the expression needs (at least 1).
    pub fn dim(&self) -> usize {
        match self {
            FuncExpr::Constant { .. } | FuncExpr::AbsNorm { .. } => 1,
            FuncExpr::Affine { slope, .. } => slope.len().max(1),
            FuncExpr::Quadratic { matrix, linear, .. } => matrix.len().max(linear.len()).max(1),
            FuncExpr::Power { var, .. } | FuncExpr::Bounded { var, .. } => var + 1,
            FuncExpr::Indicator { region } => region.dim().max(1),
            FuncExpr::Sum { terms } | FuncExpr::Max { terms } => {
                terms.iter().map(FuncExpr::dim).max().unwrap_or(1)
            }
            FuncExpr::Scale { inner, .. } => inner.dim(),
            FuncExpr::Piecewise { partition, pieces } => pieces
                .iter()
                .map(FuncExpr::dim)
                .max()
                .unwrap_or(1)
                .max(partition.dim()),
            FuncExpr::Compose { inner, .. } => inner.dim(),
        }
    }

    /// Function value as a double, `+inf` outside the domain.
    ///
    /// Coordinates missing from `x` read as zero.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let coord = |i: usize| x.get(i).copied().unwrap_or(0.0);
        match self {
            FuncExpr::Constant { value } => *value,
            FuncExpr::Affine { slope, offset } => {
                slope.iter().enumerate().map(|(i, a)| a * coord(i)).sum::<f64>() + offset
            }
            FuncExpr::Quadratic { matrix, linear, constant } => {
                let mut quad = 0.0;
                for (i, row) in matrix.iter().enumerate() {
                    let xi = coord(i);
                    for (j, q) in row.iter().enumerate() {
                        quad += q * xi * coord(j);
                    }
                }
                let lin: f64 = linear.iter().enumerate().map(|(i, b)| b * coord(i)).sum();
                0.5 * quad + lin + constant
            }
            FuncExpr::Power { coeff, exponent, signed, var } => {
                let t = coord(*var);
                let mag = t.abs().powf(*exponent);
                if *signed {
                    coeff * t.signum() * mag
                } else {
                    coeff * mag
                }
            }
            FuncExpr::AbsNorm { coeff } => coeff * x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            FuncExpr::Bounded { atom, amplitude, var } => amplitude * atom.apply(coord(*var)),
            FuncExpr::Indicator { region } => {
                if region.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            FuncExpr::Sum { terms } => {
                let mut total = 0.0;
                for t in terms {
                    let v = t.value_at(x);
                    if v == f64::INFINITY || v.is_nan() {
                        return f64::INFINITY;
                    }
                    total += v;
                }
                total
            }
            FuncExpr::Scale { factor, inner } => {
                let v = inner.value_at(x);
                if *factor == 0.0 {
                    if v == f64::INFINITY {
                        // 0 * (+inf) = +inf keeps the domain of the scaled function.
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    factor * v
                }
            }
            FuncExpr::Max { terms } => terms
                .iter()
                .map(|t| t.value_at(x))
                .fold(f64::NEG_INFINITY, |acc, v| if v.is_nan() { f64::INFINITY } else { acc.max(v) }),
            FuncExpr::Piecewise { partition, pieces } => match partition.locate(x) {
                Some(i) => pieces[i].value_at(x),
                None => f64::INFINITY,
            },
            FuncExpr::Compose { outer, inner } => {
                let u = inner.value_at(x);
                if u == f64::INFINITY || u.is_nan() {
                    f64::INFINITY
                } else {
                    outer.value_at(&[u])
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> ExtReal {
        ExtReal::from(self.value_at(x))
    }

    /// True when the expression can never take the value `+inf`.
    pub fn is_finite_valued(&self) -> bool {
        match self {
            FuncExpr::Indicator { region } => region.is_full(),
            FuncExpr::Piecewise { pieces, .. } => pieces.iter().all(FuncExpr::is_finite_valued),
            FuncExpr::Sum { terms } | FuncExpr::Max { terms } => {
                terms.iter().all(FuncExpr::is_finite_valued)
            }
            FuncExpr::Scale { inner, .. } => inner.is_finite_valued(),
            FuncExpr::Compose { outer, inner } => outer.is_finite_valued() && inner.is_finite_valued(),
            _ => true,
        }
    }

    /// Atoms are the leaves of the tree.
    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            FuncExpr::Constant { .. }
                | FuncExpr::Affine { .. }
                | FuncExpr::Quadratic { .. }
                | FuncExpr::Power { .. }
                | FuncExpr::AbsNorm { .. }
                | FuncExpr::Bounded { .. }
                | FuncExpr::Indicator { .. }
        )
    }

    /// Polynomial atoms of degree at most two.
    pub fn is_polynomial(&self) -> bool {
        matches!(
            self,
            FuncExpr::Constant { .. } | FuncExpr::Affine { .. } | FuncExpr::Quadratic { .. }
        )
    }

    /// `-f` when it stays inside the expression language without a negative
    /// scale factor.
    pub fn negated(&self) -> Option<FuncExpr> {
        Some(match self {
            FuncExpr::Constant { value } => FuncExpr::constant(-value),
            FuncExpr::Affine { slope, offset } => {
                FuncExpr::affine(slope.iter().map(|a| -a).collect(), -offset)
            }
            FuncExpr::Quadratic { matrix, linear, constant } => FuncExpr::Quadratic {
                matrix: matrix.iter().map(|r| r.iter().map(|q| -q).collect()).collect(),
                linear: linear.iter().map(|b| -b).collect(),
                constant: -constant,
            },
            FuncExpr::Power { coeff, exponent, signed, var } => FuncExpr::Power {
                coeff: -coeff,
                exponent: *exponent,
                signed: *signed,
                var: *var,
            },
            FuncExpr::AbsNorm { coeff } => FuncExpr::AbsNorm { coeff: -coeff },
            FuncExpr::Bounded { atom, amplitude, var } => FuncExpr::Bounded {
                atom: *atom,
                amplitude: -amplitude,
                var: *var,
            },
            FuncExpr::Sum { terms } => FuncExpr::Sum {
                terms: terms.iter().map(FuncExpr::negated).collect::<Option<Vec<_>>>()?,
            },
            _ => return None,
        })
    }

    /// Multiplies an atom's coefficients by `c`, or wraps in a scale node
    /// when `c >= 0`.
    pub fn times(&self, c: f64) -> Option<FuncExpr> {
        Some(match self {
            FuncExpr::Constant { value } => FuncExpr::constant(c * value),
            FuncExpr::Affine { slope, offset } => {
                FuncExpr::affine(slope.iter().map(|a| c * a).collect(), c * offset)
            }
            FuncExpr::Quadratic { matrix, linear, constant } => FuncExpr::quadratic(
                matrix.iter().map(|r| r.iter().map(|q| c * q).collect()).collect(),
                linear.iter().map(|b| c * b).collect(),
                c * constant,
            )
            .ok()?,
            FuncExpr::Power { coeff, exponent, signed, var } => {
                FuncExpr::power(c * coeff, *exponent, *signed, *var).ok()?
            }
            FuncExpr::AbsNorm { coeff } => FuncExpr::AbsNorm { coeff: c * coeff },
            FuncExpr::Bounded { atom, amplitude, var } => FuncExpr::Bounded {
                atom: *atom,
                amplitude: c * amplitude,
                var: *var,
            },
            other if c >= 0.0 => FuncExpr::scale(c, other.clone()).ok()?,
            other if c == -1.0 => other.negated()?,
            _ => return None,
        })
    }

    /// Slope and offset when the expression is an affine function of its
    /// argument, read off the attributes.
    pub fn affine_params(&self) -> Option<(Vec<f64>, f64)> {
        attributes(self).affine
    }

    /// The function `f_i + ι_{S_i}` for the `index`-th piece (zero-based).
    /// Finite-max functions are first rewritten over their active-set cells.
    pub fn constrained_piece(&self, index: usize) -> Result<FuncExpr, ExprError> {
        let rewritten;
        let (partition, pieces) = match self {
            FuncExpr::Piecewise { partition, pieces } => (partition, pieces),
            FuncExpr::Max { .. } => {
                rewritten = self.max_as_piecewise().ok_or(ExprError::NotPiecewise)?;
                match &rewritten {
                    FuncExpr::Piecewise { partition, pieces } => (partition, pieces),
                    _ => unreachable!("max_as_piecewise returns a piecewise node"),
                }
            }
            _ => return Err(ExprError::NotPiecewise),
        };
        let piece = pieces
            .get(index)
            .ok_or(ExprError::PieceIndex { index, count: pieces.len() })?;
        FuncExpr::sum(vec![piece.clone(), FuncExpr::indicator(partition.cells[index].clone())])
    }

    /// Rewrites a one-dimensional finite max of polynomial atoms (degree at
    /// most two) as a piecewise function whose cells are the closed intervals
    /// on which each term is active. Cells are listed by term index, then left
    /// to right. Returns `None` outside that class.
    pub fn max_as_piecewise(&self) -> Option<FuncExpr> {
        let FuncExpr::Max { terms } = self else {
            return None;
        };
        if terms.iter().any(|t| !t.is_polynomial() || t.dim() > 1) {
            return None;
        }
        let coeffs: Vec<[f64; 3]> = terms.iter().map(poly1_coeffs).collect();
        // Drop duplicate terms: identical active sets would overlap in their interiors.
        let mut distinct: Vec<usize> = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            if !distinct.iter().any(|&j| coeffs[j] == *c) {
                distinct.push(i);
            }
        }
        let mut breaks: Vec<f64> = Vec::new();
        for (a, &i) in distinct.iter().enumerate() {
            for &j in &distinct[a + 1..] {
                let d = [
                    coeffs[i][0] - coeffs[j][0],
                    coeffs[i][1] - coeffs[j][1],
                    coeffs[i][2] - coeffs[j][2],
                ];
                breaks.extend(real_roots(d));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(breaks.iter().copied());
        edges.push(f64::INFINITY);
        let eval = |k: usize, t: f64| coeffs[k][0] * t * t + coeffs[k][1] * t + coeffs[k][2];
        // (term, lo, hi) segments where `term` is the lowest-index maximizer.
        let mut segments: Vec<(usize, f64, f64)> = Vec::new();
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (false, true) => hi - 1.0,
                (true, false) => lo + 1.0,
                (false, false) => 0.0,
            };
            let best = distinct
                .iter()
                .copied()
                .max_by(|&a, &b| eval(a, mid).total_cmp(&eval(b, mid)).then(b.cmp(&a)))
                .expect("max has at least one term");
            match segments.last_mut() {
                Some(last) if last.0 == best => last.2 = hi,
                _ => segments.push((best, lo, hi)),
            }
        }
        segments.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let cells = segments
            .iter()
            .map(|&(_, lo, hi)| Region::interval(lo, lo.is_finite(), hi, hi.is_finite()))
            .collect();
        let pieces = segments.iter().map(|&(k, _, _)| terms[k].clone()).collect();
        Some(FuncExpr::Piecewise { partition: RegionPartition::new(cells), pieces })
    }
}

/// `[a, b, c]` for `a x^2 + b x + c` from a one-dimensional polynomial atom.
pub(crate) fn poly1_coeffs(f: &FuncExpr) -> [f64; 3] {
    match f {
        FuncExpr::Constant { value } => [0.0, 0.0, *value],
        FuncExpr::Affine { slope, offset } => [0.0, slope.first().copied().unwrap_or(0.0), *offset],
        FuncExpr::Quadratic { matrix, linear, constant } => [
            0.5 * matrix[0][0],
            linear.first().copied().unwrap_or(0.0),
            *constant,
        ],
        _ => [f64::NAN; 3],
    }
}

/// Real roots of `a t^2 + b t + c` (none when identically zero).
fn real_roots([a, b, c]: [f64; 3]) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Numerically stable pair.
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = if q == 0.0 { vec![0.0] } else { vec![q / a, c / q] };
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}
