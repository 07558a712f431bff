//! Shared fixtures for the benchmarks.

pub use carnot_core;
