//! Criterion benchmarks for the gsmvlc kernels; see `benches/`.
