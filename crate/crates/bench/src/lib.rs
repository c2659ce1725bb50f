//! Criterion benchmarks for qscramble live under `benches/`.
