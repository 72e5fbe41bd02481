//! Criterion benchmarks for `tag-core`; see `benches/`.
