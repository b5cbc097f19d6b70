//! Criterion benchmarks for the genvi integrators live under `benches/`.
