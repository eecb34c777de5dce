//! Benchmarks for `jetmorse-core`; see `benches/`.
