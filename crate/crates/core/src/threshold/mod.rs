//! Symbolic threshold calculus.
//!
//! [`compute_threshold`] walks an expression bottom-up. At every node all
//! applicable rules fire, each contributes a bound to the trace, and the
//! bounds are intersected. An empty intersection means a rule is wrong and
//! is reported as [`ThresholdError::Soundness`].

mod engine;
mod rules;
mod tail;

pub use engine::{atom_threshold, compute_threshold, minorant_curvature};
pub use rules::{
    intersect, rule_composition_inner_affine, rule_composition_outer_affine, rule_piecewise, rule_scale,
    rule_sum_pair, PieceThresholds, SumOperand,
};
pub use tail::{constrained_tail_threshold, directional_tail, recession_directions};

use crate::ext::ExtReal;
use serde::{Serialize, Serializer};
use std::fmt;
use thiserror::Error;

fn serialize_ext<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    ExtReal::from(*v).serialize(s)
}

/// What is known about the threshold `r̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdBound {
    Exact {
        value: f64,
    },
    /// `lo <= r̄ <= hi`; `hi` may be `+inf`.
    Interval {
        lo: f64,
        #[serde(serialize_with = "serialize_ext")]
        hi: f64,
    },
    NotProxBounded,
    Unknown,
}

impl ThresholdBound {
    pub fn exact(value: f64) -> Self {
        ThresholdBound::Exact { value }
    }

    /// An interval, collapsed to `Exact` when the endpoints agree.
    pub fn interval(lo: f64, hi: f64) -> Self {
        let lo = lo.max(0.0);
        if lo == hi {
            ThresholdBound::Exact { value: lo }
        } else {
            ThresholdBound::Interval { lo, hi }
        }
    }

    /// `[lo, hi]` for finite claims.
    pub fn range(&self) -> Option<(f64, f64)> {
        match *self {
            ThresholdBound::Exact { value } => Some((value, value)),
            ThresholdBound::Interval { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn exact_value(&self) -> Option<f64> {
        match *self {
            ThresholdBound::Exact { value } => Some(value),
            _ => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ThresholdBound::Unknown)
    }

    /// Whether the claim admits `r`, with absolute slack `tol`.
    pub fn admits(&self, r: f64, tol: f64) -> bool {
        match self.range() {
            Some((lo, hi)) => r >= lo - tol && r <= hi + tol,
            None => false,
        }
    }
}

impl fmt::Display for ThresholdBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdBound::Exact { value } => write!(f, "exact {value}"),
            ThresholdBound::Interval { lo, hi } => write!(f, "interval [{lo}, {}]", ExtReal::from(*hi)),
            ThresholdBound::NotProxBounded => write!(f, "not prox-bounded"),
            ThresholdBound::Unknown => write!(f, "unknown"),
        }
    }
}

/// One applied rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub rule: String,
    /// Identifier of the result the rule implements, such as `Thm3.3`.
    pub paper_id: String,
    /// The expression the rule was applied to and the facts it used.
    pub inputs: Vec<String>,
    pub bound: ThresholdBound,
}

impl TraceEntry {
    pub fn new(rule: &str, paper_id: &str, inputs: Vec<String>, bound: ThresholdBound) -> Self {
        TraceEntry { rule: rule.to_string(), paper_id: paper_id.to_string(), inputs, bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub bound: ThresholdBound,
    pub trace: Vec<TraceEntry>,
}

impl ThresholdResult {
    pub fn unknown() -> Self {
        ThresholdResult { bound: ThresholdBound::Unknown, trace: Vec::new() }
    }

    /// Whether any trace entry cites `paper_id`.
    pub fn cites(&self, paper_id: &str) -> bool {
        self.trace.iter().any(|e| e.paper_id == paper_id)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("rules disagree on {expr}: {first} vs {second}")]
    Soundness { expr: String, first: ThresholdBound, second: ThresholdBound },
    #[error("expected an atom, got {0}")]
    NonAtomic(String),
    #[error("minorant curvature needs an exact threshold, got {0}")]
    NotExact(ThresholdBound),
    #[error("minorant curvature is undetermined when the threshold is zero")]
    ZeroThreshold,
}
