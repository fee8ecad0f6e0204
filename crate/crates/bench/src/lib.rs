//! Benchmarks for the numerical kernels and codecs; see `benches/`.
