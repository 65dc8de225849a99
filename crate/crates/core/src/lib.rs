//! Thresholds of prox-boundedness.
//!
//! Functions are described by [`FuncExpr`] trees (usually parsed from the
//! text DSL with [`parse_expr`]). [`compute_threshold`] derives the threshold
//! symbolically from calculus rules and records which rules fired; the
//! [`numerics`] module evaluates Moreau envelopes, proximal points and
//! Fenchel conjugates by derivative-free search and estimates thresholds
//! independently.

pub mod check;
pub mod expr;
pub mod ext;
pub mod fmt;
mod linalg;
pub mod numerics;
pub mod threshold;

pub use expr::{
    attributes, json_tree, parse_expr, to_dsl, AttributeRecord, BoundedKind, ExprError, FuncExpr, Halfspace,
    ParseError, ParseErrorKind, PartitionError, Region, RegionPartition,
};
pub use ext::ExtReal;
pub use numerics::{EnvelopeResult, EnvelopeValue, NumericEstimate, NumericsError, SolverConfig};
pub use threshold::{
    compute_threshold, minorant_curvature, ThresholdBound, ThresholdError, ThresholdResult, TraceEntry,
};
