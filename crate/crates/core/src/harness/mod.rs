//! Orchestration: stream orderings, the partitioning pipeline, synthetic
//! data and experiment matrices.

pub mod experiment;
pub mod generate;
pub mod order;
pub mod pipeline;
pub mod seeds;
