//! Flow-level simulation of DAG-structured jobs on a big-switch datacenter
//! fabric, with metaflow-aware (MSA), coflow (Varys-style) and per-flow fair
//! schedulers.
//!
//! A *metaflow* is the set of flows consumed by one compute task. MSA ranks
//! metaflows by how much computation their completion unlocks and assigns
//! bandwidth with MADD so each metaflow's flows finish together.

pub mod dagfile;
pub mod engine;
pub mod experiment;
pub mod fabric;
pub mod fixtures;
pub mod model;
pub mod schedulers;
pub mod workload;

/// Tolerance for capacity and completion comparisons.
pub const EPS: f64 = 1e-9;

pub use engine::{run, run_with_log, RunLog, RunOptions, SimReport};
pub use fabric::{Fabric, PortId, RateAllocation};
pub use model::{FlowKey, JobDag, JobId, MetaflowId, MetaflowKey, TaskId};
pub use schedulers::{Gain, SchedulerKind, SchedulerOptions};
