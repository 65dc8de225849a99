//! Three-valued semantic tags propagated bottom-up through an expression.
//!
//! Every field is `None` when unknown. Propagation is sound: a tag is only
//! set to `Some(true)` (or a constant) when it follows from the children.

use super::FuncExpr;
use crate::linalg::{min_eigenvalue, quadratic_bounded_below};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AttributeRecord {
    pub convex: Option<bool>,
    pub bounded_below: Option<bool>,
    pub bounded_above: Option<bool>,
    pub lipschitz: Option<f64>,
    /// `(slope, offset)` when the function is affine.
    pub affine: Option<(Vec<f64>, f64)>,
    /// `λ_min(Q)` for quadratic atoms.
    pub min_curvature: Option<f64>,
    /// `liminf f(x)/‖x‖ > -inf`.
    pub linear_lower_growth: Option<bool>,
    /// `f <= <a, x> + b` for some affine function.
    pub majorized_by_affine: Option<bool>,
}

impl AttributeRecord {
    pub fn is_bounded(&self) -> bool {
        self.bounded_below == Some(true) && self.bounded_above == Some(true)
    }

    /// Closes the record under the implications between tags.
    fn normalized(mut self) -> Self {
        if let Some((slope, _)) = &self.affine {
            self.convex = Some(true);
            self.majorized_by_affine = Some(true);
            if self.lipschitz.is_none() {
                self.lipschitz = Some(slope.iter().map(|a| a * a).sum::<f64>().sqrt());
            }
        }
        if self.bounded_above == Some(true) {
            self.majorized_by_affine = Some(true);
        }
        if self.lipschitz.is_some() || self.bounded_below == Some(true) || self.convex == Some(true) {
            // Convex proper functions have an affine minorant.
            self.linear_lower_growth = Some(true);
        }
        self
    }
}

fn all(values: impl IntoIterator<Item = Option<bool>>) -> Option<bool> {
    let mut result = Some(true);
    for v in values {
        match v {
            Some(true) => {}
            Some(false) => return Some(false),
            None => result = None,
        }
    }
    result
}

fn all_true(values: impl IntoIterator<Item = Option<bool>>) -> Option<bool> {
    if values.into_iter().all(|v| v == Some(true)) {
        Some(true)
    } else {
        None
    }
}

/// Attribute propagation.
pub fn attributes(f: &FuncExpr) -> AttributeRecord {
    let rec = match f {
        FuncExpr::Constant { value } => AttributeRecord {
            convex: Some(true),
            bounded_below: Some(true),
            bounded_above: Some(true),
            lipschitz: Some(0.0),
            affine: Some((Vec::new(), *value)),
            ..Default::default()
        },
        FuncExpr::Affine { slope, offset } => {
            let flat = slope.iter().all(|a| *a == 0.0);
            AttributeRecord {
                bounded_below: Some(flat),
                bounded_above: Some(flat),
                affine: Some((slope.clone(), *offset)),
                ..Default::default()
            }
        }
        FuncExpr::Quadratic { matrix, linear, .. } => {
            let lam = min_eigenvalue(matrix);
            let neg: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|q| -q).collect()).collect();
            let neg_lin: Vec<f64> = linear.iter().map(|b| -b).collect();
            AttributeRecord {
                convex: Some(lam >= 0.0),
                bounded_below: Some(quadratic_bounded_below(matrix, linear)),
                bounded_above: Some(quadratic_bounded_below(&neg, &neg_lin)),
                lipschitz: None,
                min_curvature: Some(lam),
                linear_lower_growth: Some(lam >= 0.0),
                majorized_by_affine: Some(min_eigenvalue(&neg) >= 0.0),
                ..Default::default()
            }
        }
        FuncExpr::Power { coeff, exponent, signed, .. } => {
            let c = *coeff;
            if *signed {
                AttributeRecord {
                    convex: Some(false),
                    bounded_below: Some(false),
                    bounded_above: Some(false),
                    linear_lower_growth: Some(false),
                    majorized_by_affine: Some(false),
                    ..Default::default()
                }
            } else {
                AttributeRecord {
                    convex: Some(c >= 0.0),
                    bounded_below: Some(c >= 0.0),
                    bounded_above: Some(c <= 0.0),
                    lipschitz: (*exponent == 1.0).then(|| c.abs()),
                    linear_lower_growth: Some(c >= 0.0 || *exponent == 1.0),
                    majorized_by_affine: Some(c <= 0.0),
                    ..Default::default()
                }
            }
        }
        FuncExpr::AbsNorm { coeff } => AttributeRecord {
            convex: Some(*coeff >= 0.0),
            bounded_below: Some(*coeff >= 0.0),
            bounded_above: Some(*coeff <= 0.0),
            lipschitz: Some(coeff.abs()),
            majorized_by_affine: Some(*coeff <= 0.0),
            ..Default::default()
        },
        FuncExpr::Bounded { amplitude, .. } => AttributeRecord {
            convex: (*amplitude == 0.0).then_some(true),
            bounded_below: Some(true),
            bounded_above: Some(true),
            // sin, cos and atan all have derivatives bounded by 1.
            lipschitz: Some(amplitude.abs()),
            affine: (*amplitude == 0.0).then(|| (Vec::new(), 0.0)),
            majorized_by_affine: Some(true),
            ..Default::default()
        },
        FuncExpr::Indicator { region } => AttributeRecord {
            convex: Some(true),
            bounded_below: Some(true),
            bounded_above: Some(region.is_full()),
            lipschitz: region.is_full().then_some(0.0),
            affine: region.is_full().then(|| (Vec::new(), 0.0)),
            ..Default::default()
        },
        FuncExpr::Sum { terms } => sum_attributes(terms),
        FuncExpr::Scale { factor, inner } => {
            let a = attributes(inner);
            if *factor == 0.0 {
                // The zero multiple of a proper function: 0 on its domain.
                AttributeRecord {
                    convex: a.convex.filter(|c| *c),
                    bounded_below: Some(true),
                    bounded_above: Some(true),
                    lipschitz: inner.is_finite_valued().then_some(0.0),
                    affine: inner.is_finite_valued().then(|| (Vec::new(), 0.0)),
                    ..Default::default()
                }
            } else {
                AttributeRecord {
                    convex: a.convex,
                    bounded_below: a.bounded_below,
                    bounded_above: a.bounded_above,
                    lipschitz: a.lipschitz.map(|k| factor * k),
                    affine: a
                        .affine
                        .map(|(s, b)| (s.iter().map(|v| factor * v).collect(), factor * b)),
                    min_curvature: a.min_curvature.map(|m| factor * m),
                    linear_lower_growth: a.linear_lower_growth,
                    majorized_by_affine: a.majorized_by_affine,
                }
            }
        }
        FuncExpr::Max { terms } => {
            let children: Vec<AttributeRecord> = terms.iter().map(attributes).collect();
            let single = (children.len() == 1).then(|| children[0].clone());
            if let Some(only) = single {
                only
            } else {
                AttributeRecord {
                    convex: all_true(children.iter().map(|c| c.convex)),
                    bounded_below: children
                        .iter()
                        .any(|c| c.bounded_below == Some(true))
                        .then_some(true),
                    bounded_above: all(children.iter().map(|c| c.bounded_above)),
                    lipschitz: children
                        .iter()
                        .map(|c| c.lipschitz)
                        .collect::<Option<Vec<f64>>>()
                        .map(|ks| ks.into_iter().fold(0.0, f64::max)),
                    linear_lower_growth: children
                        .iter()
                        .any(|c| c.linear_lower_growth == Some(true))
                        .then_some(true),
                    ..Default::default()
                }
            }
        }
        FuncExpr::Piecewise { pieces, partition } => {
            let children: Vec<AttributeRecord> = pieces.iter().map(attributes).collect();
            if children.len() == 1 && partition.cells[0].is_full() {
                children[0].clone()
            } else {
                AttributeRecord {
                    bounded_below: all_true(children.iter().map(|c| c.bounded_below)),
                    bounded_above: all_true(children.iter().map(|c| c.bounded_above)),
                    linear_lower_growth: all_true(children.iter().map(|c| c.linear_lower_growth)),
                    ..Default::default()
                }
            }
        }
        FuncExpr::Compose { outer, inner } => compose_attributes(outer, inner),
    };
    rec.normalized()
}

fn sum_attributes(terms: &[FuncExpr]) -> AttributeRecord {
    let children: Vec<AttributeRecord> = terms.iter().map(attributes).collect();
    if children.len() == 1 {
        return children[0].clone();
    }
    let bounded_below = if children.iter().all(|c| c.bounded_below == Some(true)) {
        Some(true)
    } else if children.iter().enumerate().any(|(i, c)| {
        c.bounded_below == Some(false)
            && children
                .iter()
                .enumerate()
                .all(|(j, d)| j == i || d.bounded_above == Some(true))
    }) {
        // An unbounded-below term plus terms bounded above stays unbounded below.
        Some(false)
    } else {
        None
    };
    let bounded_above = if children.iter().all(|c| c.bounded_above == Some(true)) {
        Some(true)
    } else if children.iter().enumerate().any(|(i, c)| {
        c.bounded_above == Some(false)
            && children
                .iter()
                .enumerate()
                .all(|(j, d)| j == i || d.bounded_below == Some(true))
    }) {
        Some(false)
    } else {
        None
    };
    let affine = children
        .iter()
        .map(|c| c.affine.clone())
        .collect::<Option<Vec<_>>>()
        .map(|parts| {
            let n = parts.iter().map(|(s, _)| s.len()).max().unwrap_or(0);
            let mut slope = vec![0.0; n];
            let mut offset = 0.0;
            for (s, b) in parts {
                for (i, v) in s.iter().enumerate() {
                    slope[i] += v;
                }
                offset += b;
            }
            (slope, offset)
        });
    AttributeRecord {
        convex: all_true(children.iter().map(|c| c.convex)),
        bounded_below,
        bounded_above,
        lipschitz: children
            .iter()
            .map(|c| c.lipschitz)
            .collect::<Option<Vec<f64>>>()
            .map(|ks| ks.iter().sum()),
        affine,
        min_curvature: None,
        linear_lower_growth: all_true(children.iter().map(|c| c.linear_lower_growth)),
        majorized_by_affine: all_true(children.iter().map(|c| c.majorized_by_affine)),
    }
}

fn compose_attributes(outer: &FuncExpr, inner: &FuncExpr) -> AttributeRecord {
    let o = attributes(outer);
    let i = attributes(inner);
    let mut rec = AttributeRecord {
        lipschitz: match (o.lipschitz, i.lipschitz) {
            (Some(k1), Some(k2)) => Some(k1 * k2),
            _ => None,
        },
        ..Default::default()
    };
    if o.is_bounded() {
        rec.bounded_below = Some(true);
        rec.bounded_above = Some(true);
    } else if o.bounded_below == Some(true) {
        rec.bounded_below = Some(true);
    } else if o.bounded_above == Some(true) {
        rec.bounded_above = Some(true);
    }
    if let Some((slope, offset)) = &o.affine {
        let s = slope.first().copied().unwrap_or(0.0);
        if s > 0.0 {
            rec.bounded_below = rec.bounded_below.or(i.bounded_below);
            rec.bounded_above = rec.bounded_above.or(i.bounded_above);
            rec.convex = i.convex;
            rec.majorized_by_affine = i.majorized_by_affine;
        } else if s < 0.0 {
            rec.bounded_below = rec.bounded_below.or(i.bounded_above);
            rec.bounded_above = rec.bounded_above.or(i.bounded_below);
        } else {
            rec.bounded_below = Some(true);
            rec.bounded_above = Some(true);
        }
        if let Some((a, b)) = &i.affine {
            rec.affine = Some((a.iter().map(|v| s * v).collect(), s * b + offset));
        }
    }
    if i.affine.is_some() && o.convex == Some(true) {
        rec.convex = Some(true);
    }
    rec
}
