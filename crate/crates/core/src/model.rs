//! Jobs, compute-task DAGs, metaflows and flows.
//!
//! Identifiers are dense per job: a job with `n` tasks uses task ids `0..n`,
//! likewise for metaflows and flows. Cross-job references go through the
//! `*Key` types, which order by job first.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::EPS;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(JobId, "j");
id_type!(TaskId, "c");
id_type!(MetaflowId, "mf");
id_type!(FlowId, "f");

macro_rules! key_type {
    ($name:ident, $field:ident, $id:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name {
            pub job: JobId,
            pub $field: $id,
        }

        impl $name {
            pub fn new(job: JobId, $field: $id) -> Self {
                $name { job, $field }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}.{}", self.job, self.$field)
            }
        }
    };
}

key_type!(FlowKey, flow, FlowId);
key_type!(MetaflowKey, metaflow, MetaflowId);
key_type!(TaskKey, task, TaskId);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("task dependencies form a cycle through {0}")]
    Cycle(TaskId),
    #[error("metaflow {0} has no flows")]
    EmptyMetaflow(MetaflowId),
    #[error("flow {flow} references missing metaflow {metaflow}")]
    MissingMetaflow { flow: FlowId, metaflow: MetaflowId },
    #[error("metaflow {metaflow} references missing consumer task {task}")]
    MissingConsumer { metaflow: MetaflowId, task: TaskId },
    #[error("task {task} depends on missing task {dep}")]
    MissingTaskDep { task: TaskId, dep: TaskId },
    #[error("task {task} depends on missing metaflow {dep}")]
    MissingMetaflowDep { task: TaskId, dep: MetaflowId },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("{kind} id {id} is outside the dense range 0..{count}")]
    SparseId { kind: &'static str, id: u32, count: usize },
    #[error("task {0} has invalid load {1}")]
    BadLoad(TaskId, f64),
    #[error("flow {0} has invalid size (total {1}, remaining {2})")]
    BadSize(FlowId, f64, f64),
    #[error("invalid release time {0}")]
    BadRelease(f64),
    #[error("job has no tasks")]
    NoTasks,
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("unknown metaflow {0}")]
    UnknownMetaflow(MetaflowId),
}

/// A point-to-point transfer feeding exactly one metaflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub id: FlowId,
    pub job: JobId,
    pub metaflow: MetaflowId,
    pub src: usize,
    pub dst: usize,
    pub size_total: f64,
    pub size_remaining: f64,
}

/// The flows consumed by a single compute task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metaflow {
    pub id: MetaflowId,
    pub job: JobId,
    pub flows: Vec<FlowId>,
    pub consumer_task: TaskId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetaflowState {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeTask {
    pub id: TaskId,
    pub job: JobId,
    pub machine: usize,
    pub load: f64,
    pub metaflow_deps: Vec<MetaflowId>,
    pub task_deps: Vec<TaskId>,
}

/// Unvalidated task row handed to [`JobDag::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub machine: usize,
    pub load: f64,
    pub metaflow_deps: Vec<MetaflowId>,
    pub task_deps: Vec<TaskId>,
}

impl TaskSpec {
    pub fn new(id: u32, machine: usize, load: f64) -> Self {
        TaskSpec {
            id: TaskId(id),
            machine,
            load,
            metaflow_deps: Vec::new(),
            task_deps: Vec::new(),
        }
    }

    pub fn after_metaflows(mut self, deps: impl IntoIterator<Item = u32>) -> Self {
        self.metaflow_deps.extend(deps.into_iter().map(MetaflowId));
        self
    }

    pub fn after_tasks(mut self, deps: impl IntoIterator<Item = u32>) -> Self {
        self.task_deps.extend(deps.into_iter().map(TaskId));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaflowSpec {
    pub id: MetaflowId,
    pub consumer: TaskId,
}

impl MetaflowSpec {
    pub fn new(id: u32, consumer: u32) -> Self {
        MetaflowSpec {
            id: MetaflowId(id),
            consumer: TaskId(consumer),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub id: FlowId,
    pub metaflow: MetaflowId,
    pub src: usize,
    pub dst: usize,
    pub size: f64,
    /// Defaults to `size` when `None`.
    pub remaining: Option<f64>,
}

impl FlowSpec {
    pub fn new(id: u32, metaflow: u32, src: usize, dst: usize, size: f64) -> Self {
        FlowSpec {
            id: FlowId(id),
            metaflow: MetaflowId(metaflow),
            src,
            dst,
            size,
            remaining: None,
        }
    }

    pub fn with_remaining(mut self, remaining: f64) -> Self {
        self.remaining = Some(remaining);
        self
    }
}

/// A validated job: compute tasks, the metaflows feeding them, and their flows.
#[derive(Debug, Clone, PartialEq)]
pub struct JobDag {
    job: JobId,
    release_time: f64,
    tasks: Vec<ComputeTask>,
    metaflows: Vec<Metaflow>,
    flows: Vec<Flow>,
    topo_order: Vec<TaskId>,
    // every metaflow that must finish before the task can start, sorted
    ancestors: Vec<Vec<MetaflowId>>,
    metaflow_dependents: Vec<Vec<TaskId>>,
    task_children: Vec<Vec<TaskId>>,
}

fn place_dense<T>(
    kind: &'static str,
    items: Vec<T>,
    id_of: impl Fn(&T) -> u32,
) -> Result<Vec<T>, ModelError> {
    let count = items.len();
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    for item in items {
        let id = id_of(&item);
        let slot = slots
            .get_mut(id as usize)
            .ok_or(ModelError::SparseId { kind, id, count })?;
        if slot.is_some() {
            return Err(ModelError::DuplicateId { kind, id });
        }
        *slot = Some(item);
    }
    Ok(slots.into_iter().map(|s| s.expect("dense ids fill every slot")).collect())
}

fn sorted_unique<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl JobDag {
    /// Validates and assembles a job.
    ///
    /// Each metaflow's consumer implicitly depends on it, so listing the
    /// metaflow among the consumer's `metaflow_deps` is optional.
    pub fn build(
        job: JobId,
        release_time: f64,
        tasks: Vec<TaskSpec>,
        metaflows: Vec<MetaflowSpec>,
        flows: Vec<FlowSpec>,
    ) -> Result<JobDag, ModelError> {
        if !(release_time >= 0.0 && release_time.is_finite()) {
            return Err(ModelError::BadRelease(release_time));
        }
        if tasks.is_empty() {
            return Err(ModelError::NoTasks);
        }
        let tasks = place_dense("task", tasks, |t| t.id.0)?;
        let metaflow_specs = place_dense("metaflow", metaflows, |m| m.id.0)?;
        let flow_specs = place_dense("flow", flows, |f| f.id.0)?;

        let num_tasks = tasks.len();
        let num_metaflows = metaflow_specs.len();

        let mut metaflows: Vec<Metaflow> = metaflow_specs
            .iter()
            .map(|m| {
                if m.consumer.index() >= num_tasks {
                    return Err(ModelError::MissingConsumer {
                        metaflow: m.id,
                        task: m.consumer,
                    });
                }
                Ok(Metaflow {
                    id: m.id,
                    job,
                    flows: Vec::new(),
                    consumer_task: m.consumer,
                })
            })
            .collect::<Result<_, _>>()?;

        let mut flow_table = Vec::with_capacity(flow_specs.len());
        for f in flow_specs {
            let remaining = f.remaining.unwrap_or(f.size);
            if !(f.size > 0.0 && f.size.is_finite()) || !(remaining >= 0.0 && remaining <= f.size) {
                return Err(ModelError::BadSize(f.id, f.size, remaining));
            }
            let mf = metaflows
                .get_mut(f.metaflow.index())
                .ok_or(ModelError::MissingMetaflow {
                    flow: f.id,
                    metaflow: f.metaflow,
                })?;
            mf.flows.push(f.id);
            flow_table.push(Flow {
                id: f.id,
                job,
                metaflow: f.metaflow,
                src: f.src,
                dst: f.dst,
                size_total: f.size,
                size_remaining: remaining,
            });
        }
        if let Some(m) = metaflows.iter().find(|m| m.flows.is_empty()) {
            return Err(ModelError::EmptyMetaflow(m.id));
        }

        let mut compute: Vec<ComputeTask> = Vec::with_capacity(num_tasks);
        for t in tasks {
            if !(t.load >= 0.0 && t.load.is_finite()) {
                return Err(ModelError::BadLoad(t.id, t.load));
            }
            for &d in &t.task_deps {
                if d.index() >= num_tasks {
                    return Err(ModelError::MissingTaskDep { task: t.id, dep: d });
                }
            }
            for &d in &t.metaflow_deps {
                if d.index() >= num_metaflows {
                    return Err(ModelError::MissingMetaflowDep { task: t.id, dep: d });
                }
            }
            compute.push(ComputeTask {
                id: t.id,
                job,
                machine: t.machine,
                load: t.load,
                metaflow_deps: t.metaflow_deps,
                task_deps: t.task_deps,
            });
        }
        for m in &metaflows {
            compute[m.consumer_task.index()].metaflow_deps.push(m.id);
        }
        for t in &mut compute {
            t.metaflow_deps = sorted_unique(std::mem::take(&mut t.metaflow_deps));
            t.task_deps = sorted_unique(std::mem::take(&mut t.task_deps));
        }

        let mut task_children = vec![Vec::new(); num_tasks];
        let mut metaflow_dependents = vec![Vec::new(); num_metaflows];
        for t in &compute {
            for &d in &t.task_deps {
                task_children[d.index()].push(t.id);
            }
            for &m in &t.metaflow_deps {
                metaflow_dependents[m.index()].push(t.id);
            }
        }

        // Kahn's algorithm; smallest ready id first keeps the order canonical.
        let mut indegree: Vec<usize> = compute.iter().map(|t| t.task_deps.len()).collect();
        let mut ready: BTreeSet<TaskId> =
            compute.iter().filter(|t| t.task_deps.is_empty()).map(|t| t.id).collect();
        let mut topo_order = Vec::with_capacity(num_tasks);
        while let Some(t) = ready.pop_first() {
            topo_order.push(t);
            for &c in &task_children[t.index()] {
                indegree[c.index()] -= 1;
                if indegree[c.index()] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo_order.len() < num_tasks {
            let stuck = (0..num_tasks).find(|&i| indegree[i] > 0).expect("some task is on a cycle");
            return Err(ModelError::Cycle(TaskId(stuck as u32)));
        }

        let mut ancestors: Vec<Vec<MetaflowId>> = vec![Vec::new(); num_tasks];
        for &t in &topo_order {
            let task = &compute[t.index()];
            let mut acc: Vec<MetaflowId> = task.metaflow_deps.clone();
            for &d in &task.task_deps {
                acc.extend_from_slice(&ancestors[d.index()]);
            }
            ancestors[t.index()] = sorted_unique(acc);
        }

        Ok(JobDag {
            job,
            release_time,
            tasks: compute,
            metaflows,
            flows: flow_table,
            topo_order,
            ancestors,
            metaflow_dependents,
            task_children,
        })
    }

    pub fn job(&self) -> JobId {
        self.job
    }

    pub fn release_time(&self) -> f64 {
        self.release_time
    }

    pub fn tasks(&self) -> &[ComputeTask] {
        &self.tasks
    }

    pub fn metaflows(&self) -> &[Metaflow] {
        &self.metaflows
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn task(&self, id: TaskId) -> Result<&ComputeTask, ModelError> {
        self.tasks.get(id.index()).ok_or(ModelError::UnknownTask(id))
    }

    pub fn metaflow(&self, id: MetaflowId) -> Result<&Metaflow, ModelError> {
        self.metaflows.get(id.index()).ok_or(ModelError::UnknownMetaflow(id))
    }

    pub fn flow(&self, id: FlowId) -> Option<&Flow> {
        self.flows.get(id.index())
    }

    /// Tasks in a fixed topological order.
    pub fn topo_order(&self) -> &[TaskId] {
        &self.topo_order
    }

    /// Tasks that list `task` among their task dependencies.
    pub fn task_children(&self, task: TaskId) -> &[TaskId] {
        &self.task_children[task.index()]
    }

    /// Tasks that list `metaflow` among their metaflow dependencies.
    pub fn metaflow_dependents(&self, metaflow: MetaflowId) -> &[TaskId] {
        &self.metaflow_dependents[metaflow.index()]
    }

    /// Same job with release time replaced.
    pub fn with_release(mut self, release_time: f64) -> Self {
        self.release_time = release_time;
        self
    }

    /// Every metaflow that must finish before `task` can start, sorted by id.
    pub fn ancestor_metaflows(&self, task: TaskId) -> Result<&[MetaflowId], ModelError> {
        self.ancestors
            .get(task.index())
            .map(Vec::as_slice)
            .ok_or(ModelError::UnknownTask(task))
    }

    /// Remaining bytes of `metaflow` based on the flows' own `size_remaining`.
    pub fn remaining_size(&self, metaflow: MetaflowId) -> Result<f64, ModelError> {
        let mf = self.metaflow(metaflow)?;
        Ok(mf.flows.iter().map(|f| self.flows[f.index()].size_remaining).sum())
    }

    /// Remaining bytes of `metaflow` given a live per-flow remaining table.
    pub fn remaining_size_with(&self, metaflow: MetaflowId, remaining: &[f64]) -> f64 {
        self.metaflows[metaflow.index()]
            .flows
            .iter()
            .map(|f| remaining[f.index()])
            .sum()
    }

    pub fn metaflow_state(&self, metaflow: MetaflowId) -> Result<MetaflowState, ModelError> {
        let mf = self.metaflow(metaflow)?;
        let done = mf
            .flows
            .iter()
            .all(|f| self.flows[f.index()].size_remaining <= EPS * self.flows[f.index()].size_total);
        Ok(if done { MetaflowState::Finished } else { MetaflowState::Active })
    }

    /// Total bytes across all flows.
    pub fn total_bytes(&self) -> f64 {
        self.flows.iter().map(|f| f.size_total).sum()
    }

    /// Tasks that become runnable only because `metaflow` completes.
    ///
    /// Completing `metaflow` and then firing, in zero time, every task whose
    /// prerequisites are met yields a closure; the result is that closure minus
    /// what already fires without `metaflow`. Running-but-unfinished tasks count
    /// as satisfied prerequisites.
    pub fn unlockable_tasks(
        &self,
        metaflow: MetaflowId,
        progress: &JobProgress,
    ) -> Result<BTreeSet<TaskId>, ModelError> {
        self.metaflow(metaflow)?;
        Ok(Readiness::new(self, progress).unlockable(self, metaflow))
    }
}

/// Which metaflows and tasks of one job have finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobProgress {
    metaflows: Vec<bool>,
    tasks: Vec<bool>,
}

impl JobProgress {
    pub fn new(dag: &JobDag) -> Self {
        JobProgress {
            metaflows: vec![false; dag.metaflows.len()],
            tasks: vec![false; dag.tasks.len()],
        }
    }

    pub fn with_finished(
        dag: &JobDag,
        metaflows: impl IntoIterator<Item = MetaflowId>,
        tasks: impl IntoIterator<Item = TaskId>,
    ) -> Self {
        let mut p = Self::new(dag);
        metaflows.into_iter().for_each(|m| p.finish_metaflow(m));
        tasks.into_iter().for_each(|t| p.finish_task(t));
        p
    }

    pub fn finish_metaflow(&mut self, m: MetaflowId) {
        self.metaflows[m.index()] = true;
    }

    pub fn finish_task(&mut self, t: TaskId) {
        self.tasks[t.index()] = true;
    }

    pub fn metaflow_finished(&self, m: MetaflowId) -> bool {
        self.metaflows[m.index()]
    }

    pub fn task_finished(&self, t: TaskId) -> bool {
        self.tasks[t.index()]
    }

    pub fn all_tasks_finished(&self) -> bool {
        self.tasks.iter().all(|&d| d)
    }
}

/// Dependency bookkeeping for one progress snapshot, shared across the
/// per-metaflow unlock queries of a scheduling round.
#[derive(Debug, Clone)]
pub struct Readiness {
    // task fires without any further metaflow completing
    fired: Vec<bool>,
    missing_metaflows: Vec<u32>,
    missing_tasks: Vec<u32>,
    finished_metaflows: Vec<bool>,
}

impl Readiness {
    pub fn new(dag: &JobDag, progress: &JobProgress) -> Self {
        let n = dag.tasks.len();
        let mut fired = vec![false; n];
        let mut missing_metaflows = vec![0u32; n];
        let mut missing_tasks = vec![0u32; n];
        for &t in &dag.topo_order {
            let task = &dag.tasks[t.index()];
            let mm = task
                .metaflow_deps
                .iter()
                .filter(|m| !progress.metaflow_finished(**m))
                .count() as u32;
            let mt = task.task_deps.iter().filter(|d| !fired[d.index()]).count() as u32;
            missing_metaflows[t.index()] = mm;
            missing_tasks[t.index()] = mt;
            fired[t.index()] = progress.task_finished(t) || (mm == 0 && mt == 0);
        }
        Readiness {
            fired,
            missing_metaflows,
            missing_tasks,
            finished_metaflows: progress.metaflows.clone(),
        }
    }

    /// True when the task could fire with no further metaflow completing.
    pub fn fires(&self, task: TaskId) -> bool {
        self.fired[task.index()]
    }

    pub fn unlockable(&self, dag: &JobDag, metaflow: MetaflowId) -> BTreeSet<TaskId> {
        let mut unlocked = BTreeSet::new();
        if self.finished_metaflows[metaflow.index()] {
            return unlocked;
        }
        let depends_on = |t: TaskId| dag.tasks[t.index()].metaflow_deps.binary_search(&metaflow).is_ok();
        let mut satisfied_deps: HashMap<TaskId, u32> = HashMap::new();
        let mut queue: VecDeque<TaskId> = VecDeque::new();
        for &t in dag.metaflow_dependents(metaflow) {
            if !self.fired[t.index()] && self.missing_metaflows[t.index()] == 1 && self.missing_tasks[t.index()] == 0 {
                queue.push_back(t);
            }
        }
        while let Some(t) = queue.pop_front() {
            if !unlocked.insert(t) {
                continue;
            }
            for &c in dag.task_children(t) {
                if self.fired[c.index()] {
                    continue;
                }
                let got = satisfied_deps.entry(c).or_insert(0);
                *got += 1;
                let mf_left = self.missing_metaflows[c.index()] - u32::from(depends_on(c));
                if mf_left == 0 && *got == self.missing_tasks[c.index()] {
                    queue.push_back(c);
                }
            }
        }
        unlocked
    }
}
