//! Criterion benchmarks for the engine and evaluation loop live under `benches/`.
