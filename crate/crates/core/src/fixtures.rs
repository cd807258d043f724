//! Small hand-built instances used by the CLI, tests and documentation.

use crate::fabric::Fabric;
use crate::model::{FlowSpec, JobDag, JobId, MetaflowSpec, TaskSpec};

/// Two jobs on a three-machine fabric (machines 0, 1, 2).
///
/// Job 1 sends 3 units from machine 1 to machine 0, then computes for 3 time
/// units on machine 0. Job 2 sends 3 units from machine 0 and 1 unit from
/// machine 1, both into machine 2. The 1-unit flow feeds task 0 (load 3); the
/// 3-unit flow feeds task 1 (load 3), which also waits for task 0. Both tasks
/// run on machine 2.
///
/// This DAG was selected by exhaustive search over small candidate DAGs and
/// time-sliced schedules (see `tests/motivation_search.rs`): the schedule
/// minimising average CCT yields CCT 3.5 / JCT 8, and the schedule minimising
/// average JCT yields JCT 7 with CCT 4. The search fixes the shape; job 2's
/// loads of (3, 3) could equally be (1, 5) or (2, 4).
pub fn motivation() -> (Fabric, Vec<JobDag>) {
    let fabric = Fabric::unit(3).expect("three machines");
    let j1 = JobDag::build(
        JobId(1),
        0.0,
        vec![TaskSpec::new(0, 0, 3.0)],
        vec![MetaflowSpec::new(0, 0)],
        vec![FlowSpec::new(0, 0, 1, 0, 3.0)],
    )
    .expect("valid job 1");
    let j2 = JobDag::build(
        JobId(2),
        0.0,
        vec![
            TaskSpec::new(0, 2, 3.0),
            TaskSpec::new(1, 2, 3.0).after_tasks([0]),
        ],
        vec![MetaflowSpec::new(0, 1), MetaflowSpec::new(1, 0)],
        vec![FlowSpec::new(0, 0, 0, 2, 3.0), FlowSpec::new(1, 1, 1, 2, 1.0)],
    )
    .expect("valid job 2");
    (fabric, vec![j1, j2])
}

/// Flow sizes of the four-metaflow job, indexed `[metaflow][flow]`.
pub const FOUR_MF_SIZES: [[u32; 2]; 4] = [[1, 3], [2, 6], [1, 1], [5, 3]];
/// Compute loads of tasks c1..c4.
pub const FOUR_MF_LOADS: [u32; 4] = [6, 3, 2, 7];

/// One job with four senders (machines 0..4) and two receivers (4 and 5).
///
/// Receiver 4 hosts c1 and c2, fed by MF1 (senders 0, 1) and MF2 (senders
/// 2, 3). Receiver 5 hosts c3 and c4, fed by MF3 and MF4 the same way.
/// Edges: c1 <- MF1; c2 <- MF2; c3 <- {MF3, c1}; c4 <- {MF4, c2, c3}.
pub fn four_metaflow_job() -> JobDag {
    let mut flows = Vec::new();
    for (mf, sizes) in FOUR_MF_SIZES.iter().enumerate() {
        let receiver = 4 + mf / 2;
        let first_sender = 2 * (mf % 2);
        for (k, &size) in sizes.iter().enumerate() {
            let id = (2 * mf + k) as u32;
            flows.push(FlowSpec::new(id, mf as u32, first_sender + k, receiver, f64::from(size)));
        }
    }
    JobDag::build(
        JobId(0),
        0.0,
        vec![
            TaskSpec::new(0, 4, f64::from(FOUR_MF_LOADS[0])),
            TaskSpec::new(1, 4, f64::from(FOUR_MF_LOADS[1])),
            TaskSpec::new(2, 5, f64::from(FOUR_MF_LOADS[2])).after_tasks([0]),
            TaskSpec::new(3, 5, f64::from(FOUR_MF_LOADS[3])).after_tasks([1, 2]),
        ],
        (0..4).map(|m| MetaflowSpec::new(m, m)).collect(),
        flows,
    )
    .expect("valid four-metaflow job")
}
