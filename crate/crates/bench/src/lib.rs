//! Criterion benchmarks for ccs-core live in `benches/`.
