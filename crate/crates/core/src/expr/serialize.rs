//! Canonical DSL text and JSON tree output.
//!
//! `parse_expr(&to_dsl(f))` rebuilds `f` node for node for expressions in
//! one or two variables. Polynomial atoms inside sums are parenthesized so
//! they are not merged with their neighbours on reparse.

use super::{attributes, FuncExpr, Halfspace, Region};
use crate::fmt::fmt_f64;
use serde_json::{json, Value};

#[derive(Clone, Copy)]
struct Ctx {
    /// Ambient dimension of the whole expression.
    dim: usize,
    /// Inside the outer function of a composition, where the variable is `u`.
    outer: bool,
}

impl Ctx {
    fn var(self, i: usize) -> String {
        match (self.outer, i) {
            (true, _) => "u".to_string(),
            (false, 0) => "x".to_string(),
            (false, 1) => "y".to_string(),
            (false, k) => format!("x{k}"),
        }
    }
}

/// Canonical DSL text for `f`.
pub fn to_dsl(f: &FuncExpr) -> String {
    let mut out = String::new();
    write_expr(f, Ctx { dim: f.dim(), outer: false }, &mut out);
    out
}

/// `k*m` with unit coefficients elided; `m` empty means a bare number.
fn coeff_term(k: f64, m: &str) -> String {
    if m.is_empty() {
        fmt_f64(k)
    } else if k == 1.0 {
        m.to_string()
    } else if k == -1.0 {
        format!("-{m}")
    } else {
        format!("{}*{m}", fmt_f64(k))
    }
}

/// Joins signed terms as `a + b - c`.
fn join_signed(terms: &[(f64, String)]) -> String {
    let mut s = String::new();
    for (k, m) in terms.iter().filter(|(k, _)| *k != 0.0) {
        if s.is_empty() {
            s.push_str(&coeff_term(*k, m));
        } else if *k < 0.0 {
            s.push_str(" - ");
            s.push_str(&coeff_term(-k, m));
        } else {
            s.push_str(" + ");
            s.push_str(&coeff_term(*k, m));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn poly_text(matrix: &[Vec<f64>], linear: &[f64], constant: f64, ctx: Ctx) -> String {
    let mut terms = Vec::new();
    let n = matrix.len().max(linear.len());
    for i in 0..matrix.len() {
        terms.push((0.5 * matrix[i][i], format!("{}^2", ctx.var(i))));
        for j in i + 1..matrix.len() {
            terms.push((matrix[i][j], format!("{}*{}", ctx.var(i), ctx.var(j))));
        }
    }
    for i in 0..n {
        terms.push((linear.get(i).copied().unwrap_or(0.0), ctx.var(i)));
    }
    terms.push((constant, String::new()));
    join_signed(&terms)
}

fn halfspace_text(h: &Halfspace, ctx: Ctx) -> String {
    let rel = |strict: bool, less: bool| match (strict, less) {
        (true, true) => "<",
        (false, true) => "<=",
        (true, false) => ">",
        (false, false) => ">=",
    };
    if h.normal.len() == 1 && h.normal[0] == -1.0 {
        return format!("{} {} {}", ctx.var(0), rel(h.strict, false), fmt_f64(-h.offset));
    }
    let terms: Vec<(f64, String)> = h.normal.iter().enumerate().map(|(i, a)| (*a, ctx.var(i))).collect();
    format!("{} {} {}", join_signed(&terms), rel(h.strict, true), fmt_f64(h.offset))
}

fn region_text(r: &Region, ctx: Ctx) -> String {
    if r.is_full() {
        return "true".to_string();
    }
    r.halfspaces.iter().map(|h| halfspace_text(h, ctx)).collect::<Vec<_>>().join(" & ")
}

fn write_expr(f: &FuncExpr, ctx: Ctx, out: &mut String) {
    match f {
        FuncExpr::Constant { value } => out.push_str(&fmt_f64(*value)),
        FuncExpr::Affine { slope, offset } => out.push_str(&poly_text(&[], slope, *offset, ctx)),
        FuncExpr::Quadratic { matrix, linear, constant } => {
            out.push_str(&poly_text(matrix, linear, *constant, ctx))
        }
        FuncExpr::Power { coeff, exponent, signed, var } => {
            let v = ctx.var(*var);
            let even = exponent.fract() == 0.0 && *exponent >= 4.0 && (*exponent as i64) % 2 == 0;
            let m = if *signed || even {
                format!("{v}^{}", fmt_f64(*exponent))
            } else {
                format!("abs({v})^{}", fmt_f64(*exponent))
            };
            out.push_str(&coeff_term(*coeff, &m));
        }
        FuncExpr::AbsNorm { coeff } => {
            let m = if ctx.outer || ctx.dim <= 1 {
                format!("abs({})", ctx.var(0))
            } else {
                let vars: Vec<String> = (0..ctx.dim).map(|i| ctx.var(i)).collect();
                format!("norm({})", vars.join(", "))
            };
            out.push_str(&coeff_term(*coeff, &m));
        }
        FuncExpr::Bounded { atom, amplitude, var } => {
            out.push_str(&coeff_term(*amplitude, &format!("{}({})", atom.name(), ctx.var(*var))));
        }
        FuncExpr::Indicator { region } => {
            out.push_str("ind{");
            out.push_str(&region_text(region, ctx));
            out.push('}');
        }
        FuncExpr::Sum { terms } => {
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                let wrap = t.is_polynomial() || matches!(t, FuncExpr::Sum { .. });
                if wrap {
                    out.push('(');
                }
                write_expr(t, ctx, out);
                if wrap {
                    out.push(')');
                }
            }
        }
        FuncExpr::Scale { factor, inner } => {
            out.push_str("scale(");
            out.push_str(&fmt_f64(*factor));
            out.push_str(", ");
            write_expr(inner, ctx, out);
            out.push(')');
        }
        FuncExpr::Max { terms } => {
            out.push_str("max(");
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(t, ctx, out);
            }
            out.push(')');
        }
        FuncExpr::Piecewise { partition, pieces } => {
            out.push_str("piecewise{ ");
            for (cell, piece) in partition.cells.iter().zip(pieces) {
                out.push_str(&region_text(cell, ctx));
                out.push_str(": ");
                write_expr(piece, ctx, out);
                out.push_str("; ");
            }
            out.push('}');
        }
        FuncExpr::Compose { outer, inner } => {
            out.push_str("compose(");
            write_expr(outer, Ctx { dim: 1, outer: true }, out);
            out.push_str(", ");
            write_expr(inner, Ctx { outer: false, ..ctx }, out);
            out.push(')');
        }
    }
}

/// JSON tree: node kind, node parameters, children and attribute tags.
pub fn json_tree(f: &FuncExpr) -> Value {
    let children: Vec<Value> = match f {
        FuncExpr::Sum { terms } | FuncExpr::Max { terms } => terms.iter().map(json_tree).collect(),
        FuncExpr::Scale { inner, .. } => vec![json_tree(inner)],
        FuncExpr::Piecewise { pieces, .. } => pieces.iter().map(json_tree).collect(),
        FuncExpr::Compose { outer, inner } => vec![json_tree(outer), json_tree(inner)],
        _ => Vec::new(),
    };
    let params = match f {
        FuncExpr::Constant { value } => json!({ "value": value }),
        FuncExpr::Affine { slope, offset } => json!({ "slope": slope, "offset": offset }),
        FuncExpr::Quadratic { matrix, linear, constant } => {
            json!({ "matrix": matrix, "linear": linear, "constant": constant })
        }
        FuncExpr::Power { coeff, exponent, signed, var } => {
            json!({ "coeff": coeff, "exponent": exponent, "signed": signed, "var": var })
        }
        FuncExpr::AbsNorm { coeff } => json!({ "coeff": coeff }),
        FuncExpr::Bounded { atom, amplitude, var } => {
            json!({ "atom": atom, "amplitude": amplitude, "var": var })
        }
        FuncExpr::Indicator { region } => json!({ "region": region }),
        FuncExpr::Scale { factor, .. } => json!({ "factor": factor }),
        FuncExpr::Piecewise { partition, .. } => json!({ "cells": partition.cells }),
        FuncExpr::Sum { .. } | FuncExpr::Max { .. } | FuncExpr::Compose { .. } => json!({}),
    };
    let kind = match f {
        FuncExpr::Constant { .. } => "constant",
        FuncExpr::Affine { .. } => "affine",
        FuncExpr::Quadratic { .. } => "quadratic",
        FuncExpr::Power { .. } => "power",
        FuncExpr::AbsNorm { .. } => "abs_norm",
        FuncExpr::Bounded { .. } => "bounded",
        FuncExpr::Indicator { .. } => "indicator",
        FuncExpr::Sum { .. } => "sum",
        FuncExpr::Scale { .. } => "scale",
        FuncExpr::Max { .. } => "max",
        FuncExpr::Piecewise { .. } => "piecewise",
        FuncExpr::Compose { .. } => "compose",
    };
    json!({
        "kind": kind,
        "params": params,
        "children": children,
        "attributes": attributes(f),
    })
}
