//! Criterion benchmarks for the `proxbound` crate; see `benches/`.
