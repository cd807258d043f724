//! Rate allocators: the metaflow scheduler (MSA), a Varys-style coflow
//! baseline (SEBF + MADD) and per-flow max-min fair sharing.
//!
//! Every scheduler is a pure function of a [`SchedulerState`] snapshot and
//! returns rates valid until the next simulation event.

mod fair;
mod madd;
mod msa;
mod varys;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fair::fair_schedule;
pub use madd::{madd_rates, FlowDemand, MaddOutcome};
pub use msa::msa_schedule;
pub use varys::{coflow_bottleneck, varys_schedule};

use crate::fabric::{Fabric, FlowTable, PortCapacities, RateAllocation};
use crate::model::{FlowKey, JobDag, JobId, JobProgress, MetaflowId, MetaflowKey, Readiness};
use crate::EPS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("unknown job {0}")]
    UnknownJob(JobId),
    #[error("unknown metaflow {0}")]
    UnknownMetaflow(MetaflowKey),
    #[error("metaflow {0} is already finished")]
    Finished(MetaflowKey),
    #[error("metaflow {0} belongs to a job that is not released yet")]
    Unreleased(MetaflowKey),
    #[error("duplicate job id {0}")]
    DuplicateJob(JobId),
    #[error("unknown scheduler {0:?}, expected msa, varys or fair")]
    UnknownScheduler(String),
}

/// Live view of one job during a run.
#[derive(Debug, Clone)]
pub struct JobState<'a> {
    pub dag: &'a JobDag,
    /// Remaining bytes per flow, indexed by flow id.
    pub remaining: Vec<f64>,
    pub progress: JobProgress,
    pub released: bool,
}

impl<'a> JobState<'a> {
    pub fn new(dag: &'a JobDag) -> Self {
        JobState {
            dag,
            remaining: dag.flows().iter().map(|f| f.size_remaining).collect(),
            progress: JobProgress::new(dag),
            released: false,
        }
    }

    pub fn released(mut self) -> Self {
        self.released = true;
        self
    }

    pub fn metaflow_remaining(&self, m: MetaflowId) -> f64 {
        self.dag.remaining_size_with(m, &self.remaining)
    }

    /// Released and not finished.
    pub fn metaflow_active(&self, m: MetaflowId) -> bool {
        self.released && !self.progress.metaflow_finished(m) && self.metaflow_remaining(m) > 0.0
    }

    /// Remaining per-flow demands of a metaflow, skipping drained flows.
    pub fn demands(&self, m: MetaflowId) -> Vec<FlowDemand> {
        let job = self.dag.job();
        self.dag.metaflows()[m.index()]
            .flows
            .iter()
            .filter(|f| self.remaining[f.index()] > 0.0)
            .map(|&f| {
                let flow = &self.dag.flows()[f.index()];
                FlowDemand {
                    key: FlowKey::new(job, f),
                    src: flow.src,
                    dst: flow.dst,
                    remaining: self.remaining[f.index()],
                }
            })
            .collect()
    }

    /// Every flow of the job that still has bytes, in flow-id order.
    pub fn all_demands(&self) -> Vec<FlowDemand> {
        if !self.released {
            return Vec::new();
        }
        let job = self.dag.job();
        self.dag
            .flows()
            .iter()
            .filter(|f| self.remaining[f.id.index()] > 0.0)
            .map(|f| FlowDemand {
                key: FlowKey::new(job, f.id),
                src: f.src,
                dst: f.dst,
                remaining: self.remaining[f.id.index()],
            })
            .collect()
    }
}

/// Everything a scheduler may look at. Jobs are kept sorted by id.
#[derive(Debug, Clone)]
pub struct SchedulerState<'a> {
    pub fabric: Fabric,
    pub now: f64,
    jobs: Vec<JobState<'a>>,
}

impl<'a> SchedulerState<'a> {
    pub fn new(fabric: Fabric, now: f64, mut jobs: Vec<JobState<'a>>) -> Result<Self, ScheduleError> {
        jobs.sort_by_key(|j| j.dag.job());
        if let Some(w) = jobs.windows(2).find(|w| w[0].dag.job() == w[1].dag.job()) {
            return Err(ScheduleError::DuplicateJob(w[0].dag.job()));
        }
        Ok(SchedulerState { fabric, now, jobs })
    }

    pub fn jobs(&self) -> &[JobState<'a>] {
        &self.jobs
    }

    pub fn jobs_mut(&mut self) -> &mut [JobState<'a>] {
        &mut self.jobs
    }

    pub fn job(&self, id: JobId) -> Option<&JobState<'a>> {
        self.jobs
            .binary_search_by_key(&id, |j| j.dag.job())
            .ok()
            .map(|i| &self.jobs[i])
    }

    /// Active metaflows of released jobs, in key order.
    pub fn active_metaflows(&self) -> impl Iterator<Item = MetaflowKey> + '_ {
        self.jobs.iter().flat_map(|j| {
            j.dag
                .metaflows()
                .iter()
                .filter(move |m| j.metaflow_active(m.id))
                .map(move |m| MetaflowKey::new(j.dag.job(), m.id))
        })
    }
}

impl FlowTable for SchedulerState<'_> {
    fn endpoints(&self, flow: FlowKey) -> Option<(usize, usize)> {
        let f = self.job(flow.job)?.dag.flow(flow.flow)?;
        Some((f.src, f.dst))
    }

    fn remaining(&self, flow: FlowKey) -> Option<f64> {
        self.job(flow.job)?.remaining.get(flow.flow.index()).copied()
    }
}

/// Scheduling value of a metaflow.
///
/// `Direct` is unlocked compute load per remaining byte; `Indirect` is the
/// remaining bytes that must still arrive before the consumer can start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gain {
    Direct(f64),
    Indirect(f64),
}

impl Gain {
    pub fn value(self) -> f64 {
        match self {
            Gain::Direct(v) | Gain::Indirect(v) => v,
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(self, Gain::Direct(_))
    }

    /// Priority order: direct before indirect, larger direct first, smaller
    /// indirect first.
    pub fn priority_cmp(self, other: Gain) -> Ordering {
        match (self, other) {
            (Gain::Direct(a), Gain::Direct(b)) => b.total_cmp(&a),
            (Gain::Indirect(a), Gain::Indirect(b)) => a.total_cmp(&b),
            (Gain::Direct(_), Gain::Indirect(_)) => Ordering::Less,
            (Gain::Indirect(_), Gain::Direct(_)) => Ordering::Greater,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedMetaflow {
    pub key: MetaflowKey,
    pub release: f64,
    pub gain: Gain,
}

/// Orders metaflows by gain, breaking ties by earlier release and then key.
pub fn sort_metaflows(mut entries: Vec<RankedMetaflow>) -> Vec<RankedMetaflow> {
    entries.sort_by(|a, b| {
        a.gain
            .priority_cmp(b.gain)
            .then(a.release.total_cmp(&b.release))
            .then(a.key.cmp(&b.key))
    });
    entries
}

fn gain_with(job: &JobState<'_>, readiness: &Readiness, m: MetaflowId) -> Gain {
    let dag = job.dag;
    let unlocked = readiness.unlockable(dag, m);
    if unlocked.is_empty() {
        let consumer = dag.metaflows()[m.index()].consumer_task;
        let needed = dag
            .ancestor_metaflows(consumer)
            .expect("consumer exists")
            .iter()
            .map(|&a| job.metaflow_remaining(a))
            .sum();
        Gain::Indirect(needed)
    } else {
        let load: f64 = unlocked.iter().map(|t| dag.tasks()[t.index()].load).sum();
        let remaining = job.metaflow_remaining(m).max(EPS);
        Gain::Direct(load / remaining)
    }
}

/// Gain of one active metaflow.
pub fn gain(state: &SchedulerState<'_>, metaflow: MetaflowKey) -> Result<Gain, ScheduleError> {
    let job = state.job(metaflow.job).ok_or(ScheduleError::UnknownJob(metaflow.job))?;
    if job.dag.metaflow(metaflow.metaflow).is_err() {
        return Err(ScheduleError::UnknownMetaflow(metaflow));
    }
    if !job.released {
        return Err(ScheduleError::Unreleased(metaflow));
    }
    if !job.metaflow_active(metaflow.metaflow) {
        return Err(ScheduleError::Finished(metaflow));
    }
    let readiness = Readiness::new(job.dag, &job.progress);
    Ok(gain_with(job, &readiness, metaflow.metaflow))
}

/// Gains of every active metaflow, unsorted, in key order.
pub fn active_gains(state: &SchedulerState<'_>) -> Vec<RankedMetaflow> {
    let mut out = Vec::new();
    for job in state.jobs() {
        if !job.released {
            continue;
        }
        let active: Vec<MetaflowId> = job
            .dag
            .metaflows()
            .iter()
            .map(|m| m.id)
            .filter(|&m| job.metaflow_active(m))
            .collect();
        if active.is_empty() {
            continue;
        }
        let readiness = Readiness::new(job.dag, &job.progress);
        for m in active {
            out.push(RankedMetaflow {
                key: MetaflowKey::new(job.dag.job(), m),
                release: job.dag.release_time(),
                gain: gain_with(job, &readiness, m),
            });
        }
    }
    out
}

/// Output of one scheduling round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleDecision {
    pub allocation: RateAllocation,
    /// Metaflows in the order the scheduler considered them (MSA only).
    pub ordered_metaflows: Vec<RankedMetaflow>,
    /// Coflows with their effective bottleneck, in SEBF order (Varys only).
    pub ordered_coflows: Vec<(JobId, f64)>,
}

/// Hands leftover port capacity to flows, in priority order.
///
/// Groups that already received a MADD allocation are scaled up uniformly,
/// which keeps their flows finishing together. Capacity still free then goes
/// greedily to the flows that got nothing, such as those of blocked groups.
pub fn backfill(
    allocation: &mut RateAllocation,
    residual: &mut PortCapacities,
    groups: &[Vec<FlowDemand>],
) {
    for group in groups {
        let assigned: Vec<&FlowDemand> = group.iter().filter(|d| allocation.rate(d.key) > 0.0).collect();
        if assigned.is_empty() {
            continue;
        }
        let mut usage = PortCapacities::zero(residual.num_machines());
        for d in &assigned {
            let r = allocation.rate(d.key);
            usage.consume(d.src, d.dst, -r);
        }
        let scale = usage
            .iter()
            .filter(|&(_, used)| used > 0.0)
            .map(|(port, used)| residual.get(port) / used)
            .fold(f64::INFINITY, f64::min);
        if scale.is_finite() && scale > EPS {
            for d in &assigned {
                let extra = allocation.rate(d.key) * scale;
                allocation.add(d.key, extra);
                residual.consume(d.src, d.dst, extra);
            }
        }
    }
    for d in groups.iter().flatten() {
        if allocation.rate(d.key) > 0.0 {
            continue;
        }
        let room = residual.path(d.src, d.dst);
        if room > EPS {
            allocation.add(d.key, room);
            residual.consume(d.src, d.dst, room);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Msa,
    Varys,
    Fair,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] = [SchedulerKind::Msa, SchedulerKind::Varys, SchedulerKind::Fair];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Msa => "msa",
            SchedulerKind::Varys => "varys",
            SchedulerKind::Fair => "fair",
        }
    }

    pub fn build(self, options: SchedulerOptions) -> Box<dyn Scheduler + Send + Sync> {
        match self {
            SchedulerKind::Msa => Box::new(Msa {
                work_conserving: options.work_conserving,
            }),
            SchedulerKind::Varys => Box::new(Varys),
            SchedulerKind::Fair => Box::new(Fair),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "msa" => Ok(SchedulerKind::Msa),
            "varys" => Ok(SchedulerKind::Varys),
            "fair" => Ok(SchedulerKind::Fair),
            _ => Err(ScheduleError::UnknownScheduler(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerOptions {
    /// Backfill leftover capacity after the MSA pass. Varys always backfills.
    pub work_conserving: bool,
}

pub trait Scheduler {
    fn name(&self) -> &str;
    fn schedule(&self, state: &SchedulerState<'_>) -> ScheduleDecision;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Msa {
    pub work_conserving: bool,
}

impl Scheduler for Msa {
    fn name(&self) -> &str {
        "msa"
    }

    fn schedule(&self, state: &SchedulerState<'_>) -> ScheduleDecision {
        msa_schedule(state, self.work_conserving)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Varys;

impl Scheduler for Varys {
    fn name(&self) -> &str {
        "varys"
    }

    fn schedule(&self, state: &SchedulerState<'_>) -> ScheduleDecision {
        varys_schedule(state)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Fair;

impl Scheduler for Fair {
    fn name(&self) -> &str {
        "fair"
    }

    fn schedule(&self, state: &SchedulerState<'_>) -> ScheduleDecision {
        fair_schedule(state)
    }
}
