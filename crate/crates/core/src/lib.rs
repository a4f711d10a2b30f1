//! Fault-tree inference from failure data.
//!
//! Trees built from And, Or and k-out-of-n gates are scored against a
//! [`dataset::FailureDataset`] on size, prediction error and cut-set
//! similarity, and searched with a multi-objective evolutionary algorithm.

pub mod beset;
pub mod cases;
pub mod dataset;
pub mod exec;
pub mod metrics;
pub mod moea;
pub mod tree;

pub use beset::{BeSet, MAX_BES};
pub use dataset::{FailureDataset, McsMatrix};
pub use metrics::{MofSetup, ObjectiveVector};
pub use moea::{run, MoeaConfig, ParentStrategy, RunResult};
pub use tree::{parse_ft, serialize_ft, FaultTree, GateType, Universe};
