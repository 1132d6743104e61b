//! Criterion benchmarks for `fogcache-core`; see `benches/`.
