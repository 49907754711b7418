//! Criterion benchmarks for `shellavg-core`; see `benches/kernels.rs`.
