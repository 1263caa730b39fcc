//! Criterion benchmarks for the correction pipeline live in `benches/`.
//! Run with `cargo bench -p mcbal-bench`.
