//! Event-driven fluid simulation over a big-switch fabric.
//!
//! Between two events every flow moves at the constant rate its scheduler
//! assigned. Events are job releases, flow and metaflow completions and task
//! completions; the scheduler is consulted again after each of them.
//!
//! All metaflows of a job are transmittable from its release; DAG edges gate
//! computation only. Each machine runs one task at a time, FIFO by the instant
//! the task became ready (ties by job, then task id).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fabric::{Fabric, FlowTable, RateAllocation};
use crate::model::{FlowId, FlowKey, JobDag, JobId, MetaflowId, MetaflowKey, TaskId, TaskKey};
use crate::schedulers::{JobState, ScheduleError, Scheduler, SchedulerState};
use crate::EPS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("no progress possible at t={time}: blocked metaflows {metaflows:?}, waiting tasks {tasks:?}")]
    Deadlock {
        time: f64,
        metaflows: Vec<MetaflowKey>,
        tasks: Vec<TaskKey>,
    },
    #[error("job {job} places {what} on machine {machine}, fabric has {machines}")]
    MachineOutOfRange {
        job: JobId,
        what: String,
        machine: usize,
        machines: usize,
    },
    #[error("scheduler {scheduler} produced an infeasible allocation at t={time}: {detail}")]
    InvalidAllocation {
        scheduler: String,
        time: f64,
        detail: String,
    },
    #[error(transparent)]
    State(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    JobRelease,
    FlowComplete { flow: FlowId },
    MetaflowComplete { metaflow: MetaflowId },
    TaskComplete { task: TaskId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub job: JobId,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Constant-rate stretch between two consecutive events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub allocation: RateAllocation,
}

/// Everything that happened during a run, in time order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub events: Vec<SimEvent>,
    /// Only filled when [`RunOptions::record_intervals`] is set.
    pub intervals: Vec<Interval>,
    flow_finish: BTreeMap<FlowKey, f64>,
    metaflow_finish: BTreeMap<MetaflowKey, f64>,
    task_finish: BTreeMap<TaskKey, f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_intervals: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job: JobId,
    pub release: f64,
    pub jct: f64,
    pub cct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub flow: FlowKey,
    /// Completion minus job release.
    pub fct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaflowRecord {
    pub metaflow: MetaflowKey,
    /// Absolute time the last member flow finished.
    pub finish_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub per_job: Vec<JobRecord>,
    pub per_flow: Vec<FlowRecord>,
    pub per_metaflow: Vec<MetaflowRecord>,
    pub avg_jct: f64,
    pub avg_cct: f64,
}

impl SimReport {
    pub fn job(&self, job: JobId) -> Option<&JobRecord> {
        self.per_job.iter().find(|r| r.job == job)
    }
}

/// Runs `jobs` to completion under `scheduler`.
pub fn run(
    jobs: &[JobDag],
    fabric: Fabric,
    scheduler: &dyn Scheduler,
    options: &RunOptions,
) -> Result<SimReport, EngineError> {
    run_with_log(jobs, fabric, scheduler, options).map(|(report, _)| report)
}

pub fn run_with_log(
    jobs: &[JobDag],
    fabric: Fabric,
    scheduler: &dyn Scheduler,
    options: &RunOptions,
) -> Result<(SimReport, RunLog), EngineError> {
    let mut sim = Simulation::new(jobs, fabric, *options)?;
    loop {
        sim.execute_tasks();
        if sim.finished() {
            break;
        }
        let decision = scheduler.schedule(&sim.state);
        sim.check_allocation(scheduler.name(), &decision.allocation)?;
        if sim.advance(&decision.allocation).is_none() {
            return Err(sim.deadlock());
        }
    }
    let log = sim.log;
    let report = compute_metrics(jobs, &log);
    Ok((report, log))
}

/// Aggregates a finished run into per-entity and average metrics.
pub fn compute_metrics(jobs: &[JobDag], log: &RunLog) -> SimReport {
    let mut sorted: Vec<&JobDag> = jobs.iter().collect();
    sorted.sort_by_key(|j| j.job());
    let mut per_job = Vec::with_capacity(jobs.len());
    let mut per_flow = Vec::new();
    let mut per_metaflow = Vec::new();
    for dag in sorted {
        let job = dag.job();
        let release = dag.release_time();
        let mut cct: f64 = 0.0;
        for f in dag.flows() {
            let key = FlowKey::new(job, f.id);
            let fct = log.flow_finish.get(&key).map_or(0.0, |t| t - release);
            cct = cct.max(fct);
            per_flow.push(FlowRecord { flow: key, fct });
        }
        for m in dag.metaflows() {
            let key = MetaflowKey::new(job, m.id);
            per_metaflow.push(MetaflowRecord {
                metaflow: key,
                finish_time: log.metaflow_finish.get(&key).copied().unwrap_or(release),
            });
        }
        let last_task = dag
            .tasks()
            .iter()
            .filter_map(|t| log.task_finish.get(&TaskKey::new(job, t.id)))
            .fold(release, |a, &b| a.max(b));
        per_job.push(JobRecord {
            job,
            release,
            jct: last_task - release,
            cct,
        });
    }
    let n = per_job.len().max(1) as f64;
    let avg_jct = per_job.iter().map(|r| r.jct).sum::<f64>() / n;
    let avg_cct = per_job.iter().map(|r| r.cct).sum::<f64>() / n;
    SimReport {
        per_job,
        per_flow,
        per_metaflow,
        avg_jct,
        avg_cct,
    }
}

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TaskStatus {
    Waiting,
    Queued,
    Running,
    Done,
}

#[derive(Debug, Clone, Default)]
struct Machine {
    running: Option<(usize, TaskId, f64)>,
    // (ready time, job slot, task)
    queue: Vec<(f64, usize, TaskId)>,
}

struct Simulation<'a> {
    state: SchedulerState<'a>,
    options: RunOptions,
    machines: Vec<Machine>,
    status: Vec<Vec<TaskStatus>>,
    // unfinished prerequisites (metaflows + tasks) per task
    missing: Vec<Vec<usize>>,
    tasks_left: usize,
    log: RunLog,
}

impl<'a> Simulation<'a> {
    fn new(jobs: &'a [JobDag], fabric: Fabric, options: RunOptions) -> Result<Self, EngineError> {
        let machines = fabric.num_machines();
        for dag in jobs {
            let out_of_range = |what: String, machine: usize| EngineError::MachineOutOfRange {
                job: dag.job(),
                what,
                machine,
                machines,
            };
            for t in dag.tasks() {
                if t.machine >= machines {
                    return Err(out_of_range(format!("task {}", t.id), t.machine));
                }
            }
            for f in dag.flows() {
                if let Some(&m) = [f.src, f.dst].iter().find(|&&m| m >= machines) {
                    return Err(out_of_range(format!("flow {}", f.id), m));
                }
            }
        }
        let state = SchedulerState::new(fabric, 0.0, jobs.iter().map(JobState::new).collect())?;
        let status = state.jobs().iter().map(|j| vec![TaskStatus::Waiting; j.dag.tasks().len()]).collect();
        let missing = state
            .jobs()
            .iter()
            .map(|j| {
                j.dag
                    .tasks()
                    .iter()
                    .map(|t| t.metaflow_deps.len() + t.task_deps.len())
                    .collect()
            })
            .collect();
        let tasks_left = jobs.iter().map(|j| j.tasks().len()).sum();
        Ok(Simulation {
            state,
            options,
            machines: vec![Machine::default(); machines],
            status,
            missing,
            tasks_left,
            log: RunLog::default(),
        })
    }

    fn finished(&self) -> bool {
        self.tasks_left == 0
    }

    fn push_event(&mut self, job: JobId, kind: EventKind) {
        self.log.events.push(SimEvent {
            time: self.state.now,
            job,
            kind,
        });
    }

    /// Releases due jobs, completes due tasks and starts queued ones, until
    /// nothing more happens at the current instant.
    fn execute_tasks(&mut self) {
        loop {
            let mut changed = false;
            let now = self.state.now;

            for slot in 0..self.state.jobs().len() {
                let job = &self.state.jobs()[slot];
                if !job.released && job.dag.release_time() <= now + TIME_EPS {
                    let id = job.dag.job();
                    self.state.jobs_mut()[slot].released = true;
                    self.push_event(id, EventKind::JobRelease);
                    self.finish_drained_metaflows(slot);
                    for t in 0..self.missing[slot].len() {
                        if self.missing[slot][t] == 0 {
                            self.enqueue(slot, TaskId(t as u32));
                        }
                    }
                    changed = true;
                }
            }

            for m in 0..self.machines.len() {
                if let Some((slot, task, end)) = self.machines[m].running {
                    if end <= now + TIME_EPS {
                        self.machines[m].running = None;
                        self.complete_task(slot, task);
                        changed = true;
                    }
                }
            }

            for m in 0..self.machines.len() {
                if self.machines[m].running.is_some() || self.machines[m].queue.is_empty() {
                    continue;
                }
                let queue = &mut self.machines[m].queue;
                let pick = (0..queue.len())
                    .min_by(|&a, &b| {
                        let (ta, sa, ia) = queue[a];
                        let (tb, sb, ib) = queue[b];
                        ta.total_cmp(&tb).then(sa.cmp(&sb)).then(ia.cmp(&ib))
                    })
                    .expect("non-empty queue");
                let (_, slot, task) = queue.swap_remove(pick);
                let load = self.state.jobs()[slot].dag.tasks()[task.index()].load;
                self.status[slot][task.index()] = TaskStatus::Running;
                self.machines[m].running = Some((slot, task, now + load));
                changed = true;
            }

            if !changed {
                break;
            }
        }
    }

    fn enqueue(&mut self, slot: usize, task: TaskId) {
        if self.status[slot][task.index()] != TaskStatus::Waiting {
            return;
        }
        self.status[slot][task.index()] = TaskStatus::Queued;
        let machine = self.state.jobs()[slot].dag.tasks()[task.index()].machine;
        self.machines[machine].queue.push((self.state.now, slot, task));
    }

    fn satisfy(&mut self, slot: usize, task: TaskId) {
        let left = &mut self.missing[slot][task.index()];
        *left -= 1;
        if *left == 0 && self.state.jobs()[slot].released {
            self.enqueue(slot, task);
        }
    }

    fn complete_task(&mut self, slot: usize, task: TaskId) {
        let dag = self.state.jobs()[slot].dag;
        self.status[slot][task.index()] = TaskStatus::Done;
        self.state.jobs_mut()[slot].progress.finish_task(task);
        self.tasks_left -= 1;
        self.log.task_finish.insert(TaskKey::new(dag.job(), task), self.state.now);
        self.push_event(dag.job(), EventKind::TaskComplete { task });
        for &c in dag.task_children(task) {
            self.satisfy(slot, c);
        }
    }

    fn complete_metaflow(&mut self, slot: usize, m: MetaflowId) {
        let dag = self.state.jobs()[slot].dag;
        self.state.jobs_mut()[slot].progress.finish_metaflow(m);
        self.log.metaflow_finish.insert(MetaflowKey::new(dag.job(), m), self.state.now);
        self.push_event(dag.job(), EventKind::MetaflowComplete { metaflow: m });
        for &t in dag.metaflow_dependents(m) {
            self.satisfy(slot, t);
        }
    }

    // Metaflows whose flows start out fully sent finish at release.
    fn finish_drained_metaflows(&mut self, slot: usize) {
        let job = &self.state.jobs()[slot];
        let dag = job.dag;
        for f in dag.flows() {
            if job.remaining[f.id.index()] <= EPS * f.size_total {
                self.log.flow_finish.entry(FlowKey::new(dag.job(), f.id)).or_insert(self.state.now);
            }
        }
        let drained: Vec<MetaflowId> = dag
            .metaflows()
            .iter()
            .filter(|m| !job.progress.metaflow_finished(m.id) && job.metaflow_remaining(m.id) <= 0.0)
            .map(|m| m.id)
            .collect();
        for m in drained {
            self.complete_metaflow(slot, m);
        }
    }

    fn check_allocation(&self, scheduler: &str, allocation: &RateAllocation) -> Result<(), EngineError> {
        let report = self.state.fabric.validate_allocation(allocation, &self.state);
        let mut problems: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        for (&key, &rate) in allocation.iter() {
            if rate > 0.0 && self.state.job(key.job).is_some_and(|j| !j.released) {
                problems.push(format!("unreleased flow {key} has rate {rate}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(EngineError::InvalidAllocation {
                scheduler: scheduler.to_string(),
                time: self.state.now,
                detail: problems.join("; "),
            })
        }
    }

    /// Moves time to the next event and drains bytes at the given rates.
    /// Returns the new time, or `None` when nothing can ever happen again.
    fn advance(&mut self, allocation: &RateAllocation) -> Option<f64> {
        let now = self.state.now;
        let mut horizon = f64::INFINITY;
        for job in self.state.jobs() {
            if !job.released {
                horizon = horizon.min(job.dag.release_time());
            }
        }
        for m in &self.machines {
            if let Some((_, _, end)) = m.running {
                horizon = horizon.min(end);
            }
        }
        for (&key, &rate) in allocation.iter() {
            if rate > 0.0 {
                let remaining = self.state.remaining(key).unwrap_or(0.0);
                horizon = horizon.min(now + remaining / rate);
            }
        }
        if !horizon.is_finite() {
            return None;
        }
        let dt = (horizon - now).max(0.0);

        let mut touched: Vec<(usize, MetaflowId)> = Vec::new();
        for (&key, &rate) in allocation.iter() {
            if rate <= 0.0 {
                continue;
            }
            let slot = self
                .state
                .jobs()
                .binary_search_by_key(&key.job, |j| j.dag.job())
                .expect("validated flow");
            let job = &mut self.state.jobs_mut()[slot];
            let flow = &job.dag.flows()[key.flow.index()];
            let left = &mut job.remaining[key.flow.index()];
            *left -= rate * dt;
            if *left <= EPS * flow.size_total {
                *left = 0.0;
                let metaflow = flow.metaflow;
                self.log.flow_finish.insert(key, horizon);
                self.log.events.push(SimEvent {
                    time: horizon,
                    job: key.job,
                    kind: EventKind::FlowComplete { flow: key.flow },
                });
                touched.push((slot, metaflow));
            }
        }
        if self.options.record_intervals && dt > 0.0 {
            self.log.intervals.push(Interval {
                start: now,
                end: horizon,
                allocation: allocation.clone(),
            });
        }

        self.state.now = horizon;
        touched.sort();
        touched.dedup();
        for (slot, m) in touched {
            let job = &self.state.jobs()[slot];
            if !job.progress.metaflow_finished(m) && job.metaflow_remaining(m) <= 0.0 {
                self.complete_metaflow(slot, m);
            }
        }
        Some(horizon)
    }

    fn deadlock(&self) -> EngineError {
        let metaflows = self.state.active_metaflows().collect();
        let tasks = self
            .state
            .jobs()
            .iter()
            .enumerate()
            .flat_map(|(slot, j)| {
                j.dag
                    .tasks()
                    .iter()
                    .filter(move |t| self.status[slot][t.id.index()] != TaskStatus::Done)
                    .map(move |t| TaskKey::new(j.dag.job(), t.id))
            })
            .collect();
        EngineError::Deadlock {
            time: self.state.now,
            metaflows,
            tasks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{FlowSpec, MetaflowSpec, TaskSpec};
    use crate::schedulers::{Fair, Msa, ScheduleDecision, SchedulerKind, SchedulerOptions, Varys};

    fn single_flow_job() -> JobDag {
        JobDag::build(
            JobId(0),
            0.0,
            vec![TaskSpec::new(0, 1, 2.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 0, 1, 5.0)],
        )
        .unwrap()
    }

    #[test]
    fn serial_sum_under_every_scheduler() {
        let jobs = [single_flow_job()];
        for kind in SchedulerKind::ALL {
            let s = kind.build(SchedulerOptions::default());
            let r = run(&jobs, Fabric::unit(2).unwrap(), s.as_ref(), &RunOptions::default()).unwrap();
            assert_eq!(r.per_job[0].jct, 7.0, "{kind}");
            assert_eq!(r.per_job[0].cct, 5.0, "{kind}");
            assert_eq!(r.per_flow[0].fct, 5.0, "{kind}");
        }
    }

    #[test]
    fn motivation_varys_and_msa() {
        let (fabric, jobs) = fixtures::motivation();
        let v = run(&jobs, fabric, &Varys, &RunOptions::default()).unwrap();
        assert_eq!((v.avg_cct, v.avg_jct), (3.5, 8.0));
        let jcts: Vec<f64> = v.per_job.iter().map(|r| r.jct).collect();
        let ccts: Vec<f64> = v.per_job.iter().map(|r| r.cct).collect();
        assert_eq!(jcts, vec![6.0, 10.0]);
        assert_eq!(ccts, vec![3.0, 4.0]);
        let m = run(&jobs, fabric, &Msa::default(), &RunOptions::default()).unwrap();
        assert_eq!((m.avg_cct, m.avg_jct), (4.0, 7.0));
    }

    #[test]
    fn release_before_flow_completion() {
        let a = single_flow_job().with_release(0.0);
        let b = JobDag::build(
            JobId(1),
            2.0,
            vec![TaskSpec::new(0, 2, 0.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 3, 2, 1.0)],
        )
        .unwrap();
        let (_, log) = run_with_log(&[a, b], Fabric::unit(4).unwrap(), &Msa::default(), &RunOptions::default()).unwrap();
        let releases: Vec<(f64, JobId)> = log
            .events
            .iter()
            .filter(|e| e.kind == EventKind::JobRelease)
            .map(|e| (e.time, e.job))
            .collect();
        assert_eq!(releases, vec![(0.0, JobId(0)), (2.0, JobId(1))]);
        let times: Vec<f64> = log.events.iter().map(|e| e.time).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]), "{times:?}");
    }

    #[test]
    fn simultaneous_flow_completions_in_id_order() {
        let dag = JobDag::build(
            JobId(0),
            0.0,
            vec![TaskSpec::new(0, 2, 0.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 0, 2, 1.0), FlowSpec::new(1, 0, 1, 3, 1.0)],
        )
        .unwrap();
        let (_, log) = run_with_log(&[dag], Fabric::unit(4).unwrap(), &Fair, &RunOptions::default()).unwrap();
        let flows: Vec<FlowId> = log
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::FlowComplete { flow } => Some(flow),
                _ => None,
            })
            .collect();
        assert_eq!(flows, vec![FlowId(0), FlowId(1)]);
        assert!(log.events.iter().filter(|e| matches!(e.kind, EventKind::FlowComplete { .. })).all(|e| e.time == 1.0));
    }

    #[test]
    fn fifo_on_one_machine() {
        // two tasks ready at t=1 on machine 1, loads 2 and 3
        let dag = JobDag::build(
            JobId(0),
            0.0,
            vec![TaskSpec::new(0, 1, 2.0).after_metaflows([0]), TaskSpec::new(1, 1, 3.0)],
            vec![MetaflowSpec::new(0, 1)],
            vec![FlowSpec::new(0, 0, 0, 1, 1.0)],
        )
        .unwrap();
        let (_, log) = run_with_log(&[dag], Fabric::unit(2).unwrap(), &Msa::default(), &RunOptions::default()).unwrap();
        assert_eq!(log.task_finish[&TaskKey::new(JobId(0), TaskId(0))], 3.0);
        assert_eq!(log.task_finish[&TaskKey::new(JobId(0), TaskId(1))], 6.0);
    }

    #[test]
    fn zero_load_task_completes_when_ready() {
        let dag = JobDag::build(
            JobId(0),
            0.0,
            vec![TaskSpec::new(0, 1, 0.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 0, 1, 4.0)],
        )
        .unwrap();
        let r = run(&[dag], Fabric::unit(2).unwrap(), &Varys, &RunOptions::default()).unwrap();
        assert_eq!(r.per_job[0].jct, 4.0);
        assert_eq!(r.per_job[0].cct, 4.0);
    }

    #[test]
    fn task_load_after_arrival() {
        // load-3 task ready at t=3 on an idle machine finishes at 6
        let (fabric, jobs) = fixtures::motivation();
        let (_, log) = run_with_log(&jobs, fabric, &Varys, &RunOptions::default()).unwrap();
        assert_eq!(log.metaflow_finish[&MetaflowKey::new(JobId(1), MetaflowId(0))], 3.0);
        assert_eq!(log.task_finish[&TaskKey::new(JobId(1), TaskId(0))], 6.0);
    }

    struct Idle;

    impl Scheduler for Idle {
        fn name(&self) -> &str {
            "idle"
        }
        fn schedule(&self, _: &SchedulerState<'_>) -> ScheduleDecision {
            ScheduleDecision::default()
        }
    }

    struct Greedy;

    impl Scheduler for Greedy {
        fn name(&self) -> &str {
            "greedy"
        }
        fn schedule(&self, state: &SchedulerState<'_>) -> ScheduleDecision {
            let allocation = state
                .jobs()
                .iter()
                .flat_map(|j| j.all_demands())
                .map(|d| (d.key, 1.0))
                .collect();
            ScheduleDecision {
                allocation,
                ..Default::default()
            }
        }
    }

    #[test]
    fn idle_scheduler_deadlocks() {
        let err = run(&[single_flow_job()], Fabric::unit(2).unwrap(), &Idle, &RunOptions::default()).unwrap_err();
        match err {
            EngineError::Deadlock { metaflows, tasks, .. } => {
                assert_eq!(metaflows, vec![MetaflowKey::new(JobId(0), MetaflowId(0))]);
                assert_eq!(tasks, vec![TaskKey::new(JobId(0), TaskId(0))]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_scheduler_is_caught() {
        let dag = JobDag::build(
            JobId(0),
            0.0,
            vec![TaskSpec::new(0, 1, 0.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 0, 1, 1.0), FlowSpec::new(1, 0, 0, 1, 1.0)],
        )
        .unwrap();
        let err = run(&[dag], Fabric::unit(2).unwrap(), &Greedy, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::InvalidAllocation { .. }), "{err}");
    }

    #[test]
    fn machine_out_of_range() {
        let err = run(&[single_flow_job()], Fabric::unit(1).unwrap(), &Varys, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::MachineOutOfRange { .. }));
    }

    #[test]
    fn presend_metaflow_finishes_at_release() {
        let dag = JobDag::build(
            JobId(0),
            1.5,
            vec![TaskSpec::new(0, 1, 1.0)],
            vec![MetaflowSpec::new(0, 0)],
            vec![FlowSpec::new(0, 0, 0, 1, 2.0).with_remaining(0.0)],
        )
        .unwrap();
        let r = run(&[dag], Fabric::unit(2).unwrap(), &Msa::default(), &RunOptions::default()).unwrap();
        assert_eq!(r.per_job[0].jct, 1.0);
        assert_eq!(r.per_metaflow[0].finish_time, 1.5);
    }
}
