//! Benchmark-only crate. See `benches/sim.rs`.
