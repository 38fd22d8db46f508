//! Criterion benchmarks for the packing pipeline; see `benches/`.
