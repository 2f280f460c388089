//! Benchmark harness package; see benches/kernels.rs.
