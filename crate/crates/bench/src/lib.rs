//! Criterion benchmarks for polysymp; see `benches/`.
