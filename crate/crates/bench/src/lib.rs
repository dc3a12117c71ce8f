//! Criterion benchmarks for the offloading crate live in `benches/`.
