//! Criterion benchmarks for `bidopt`; see `benches/`.
