//! Benchmark orchestration, trace replay and scenario validation.

pub mod audit;
pub mod render;
pub mod replay;
pub mod suite;
pub mod validate;
