//! Reference computations and random instances for the integration tests.
//! Nothing here calls the library's schedulers, engine or dependency
//! queries; jobs are only built through `JobDag::build`.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeSet, HashMap};

use metaflow::model::{FlowSpec, MetaflowSpec, TaskSpec};
use metaflow::{JobDag, JobId};
use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::Rng;

/// Endpoints and size of a flow on a unit-capacity big switch.
#[derive(Debug, Clone, Copy)]
pub struct RefFlow {
    pub src: usize,
    pub dst: usize,
    pub size: f64,
}

/// Can every flow finish by its deadline, starting at time 0, with arbitrary
/// (fluid) rates? Solved as a feasibility LP over the intervals between
/// distinct deadlines.
pub fn deadlines_feasible(flows: &[RefFlow], deadlines: &[f64]) -> bool {
    deadlines_feasible_with(flows, deadlines, |_, _| 1.0)
}

/// Same with per-port capacities, `capacity(is_egress, machine)`.
pub fn deadlines_feasible_with(
    flows: &[RefFlow],
    deadlines: &[f64],
    capacity: impl Fn(bool, usize) -> f64,
) -> bool {
    assert_eq!(flows.len(), deadlines.len());
    let mut cuts: Vec<f64> = deadlines.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut per_flow: Vec<Vec<Variable>> = vec![Vec::new(); flows.len()];
    let mut start = 0.0;
    for &end in &cuts {
        let len = end - start;
        if len <= 0.0 {
            start = end;
            continue;
        }
        // (is_egress, machine) -> vars crossing it in this interval
        let mut ports: HashMap<(bool, usize), Vec<Variable>> = HashMap::new();
        for (i, f) in flows.iter().enumerate() {
            if deadlines[i] >= end {
                let v = lp.add_var(0.0, (0.0, f64::INFINITY));
                per_flow[i].push(v);
                ports.entry((true, f.src)).or_default().push(v);
                ports.entry((false, f.dst)).or_default().push(v);
            }
        }
        for (&(egress, machine), vars) in &ports {
            let terms: Vec<(Variable, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
            lp.add_constraint(&terms[..], ComparisonOp::Le, len * capacity(egress, machine));
        }
        start = end;
    }
    for (i, f) in flows.iter().enumerate() {
        if per_flow[i].is_empty() {
            if f.size > 0.0 {
                return false;
            }
            continue;
        }
        let terms: Vec<(Variable, f64)> = per_flow[i].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Ge, f.size - 1e-9);
    }
    lp.solve().is_ok()
}

/// A compute task as seen by [`task_finish_times`].
#[derive(Debug, Clone)]
pub struct RefTask {
    pub machine: usize,
    pub load: f64,
    /// Instant all the task's metaflows (and its job's release) are done.
    pub inputs_ready: f64,
    /// Indices of prerequisite tasks within the same job.
    pub after: Vec<usize>,
}

/// Finish time of every task when each machine runs one task at a time,
/// choosing among ready tasks by (ready time, job index, task index).
/// Loads must be positive.
pub fn task_finish_times(jobs: &[Vec<RefTask>]) -> Vec<Vec<f64>> {
    let machines = jobs
        .iter()
        .flatten()
        .map(|t| t.machine + 1)
        .max()
        .unwrap_or(0);
    let mut free = vec![0.0f64; machines];
    let mut finish: Vec<Vec<Option<f64>>> = jobs.iter().map(|j| vec![None; j.len()]).collect();
    let total: usize = jobs.iter().map(Vec::len).sum();
    for _ in 0..total {
        // (start, machine, ready, job, task)
        let mut best: Option<(f64, usize, f64, usize, usize)> = None;
        for (m, &free_at) in free.iter().enumerate() {
            let mut ready_here: Vec<(f64, usize, usize)> = Vec::new();
            for (j, tasks) in jobs.iter().enumerate() {
                for (t, task) in tasks.iter().enumerate() {
                    if task.machine != m || finish[j][t].is_some() {
                        continue;
                    }
                    assert!(task.load > 0.0, "reference evaluator needs positive loads");
                    let deps: Option<Vec<f64>> = task.after.iter().map(|&d| finish[j][d]).collect();
                    if let Some(deps) = deps {
                        let ready = deps.into_iter().fold(task.inputs_ready, f64::max);
                        ready_here.push((ready, j, t));
                    }
                }
            }
            let Some(earliest) = ready_here.iter().map(|r| r.0).reduce(f64::min) else {
                continue;
            };
            let start = free_at.max(earliest);
            let pick = ready_here
                .iter()
                .filter(|r| r.0 <= start)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
                .copied()
                .expect("earliest task qualifies");
            if best.is_none_or(|b| start < b.0) {
                best = Some((start, m, pick.0, pick.1, pick.2));
            }
        }
        let (start, m, _, j, t) = best.expect("some task can start; task graph must be acyclic");
        let end = start + jobs[j][t].load;
        finish[j][t] = Some(end);
        free[m] = end;
    }
    finish
        .into_iter()
        .map(|j| j.into_iter().map(|t| t.expect("all tasks ran")).collect())
        .collect()
}

/// All quarter-step instants in `(0, horizon]`.
pub fn quarter_grid(horizon: f64) -> Vec<f64> {
    (1..=(horizon * 4.0).round() as u32).map(|i| f64::from(i) * 0.25).collect()
}

/// A random job on `machines` machines: up to 4 tasks with backward task
/// edges, up to 5 metaflows of 1 to 3 flows each. Loads may be zero.
pub fn random_job(rng: &mut impl Rng, job: u32, machines: usize, release: f64) -> JobDag {
    let n_tasks = rng.gen_range(1..=4u32);
    let tasks: Vec<TaskSpec> = (0..n_tasks)
        .map(|t| {
            let load = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.25..4.0) };
            let deps: Vec<u32> = (0..t).filter(|_| rng.gen_bool(0.4)).collect();
            TaskSpec::new(t, rng.gen_range(0..machines), load).after_tasks(deps)
        })
        .collect();
    let n_mfs = rng.gen_range(1..=5u32);
    let metaflows: Vec<MetaflowSpec> = (0..n_mfs)
        .map(|m| MetaflowSpec::new(m, rng.gen_range(0..n_tasks)))
        .collect();
    let mut flows = Vec::new();
    for m in 0..n_mfs {
        for _ in 0..rng.gen_range(1..=3) {
            let src = rng.gen_range(0..machines);
            let dst = (src + rng.gen_range(1..machines)) % machines;
            flows.push(FlowSpec::new(flows.len() as u32, m, src, dst, rng.gen_range(0.25..5.0)));
        }
    }
    JobDag::build(JobId(job), release, tasks, metaflows, flows).expect("random job is valid")
}

/// 1 to `max_jobs` random jobs on 2 to 5 machines, released on a half-unit
/// grid. Returns the machine count too.
pub fn random_workload(rng: &mut impl Rng, max_jobs: u32) -> (usize, Vec<JobDag>) {
    let machines = rng.gen_range(2..=5);
    let n = rng.gen_range(1..=max_jobs);
    let jobs = (0..n)
        .map(|j| {
            let release = f64::from(rng.gen_range(0..4u32)) * 0.5;
            random_job(rng, j, machines, release)
        })
        .collect();
    (machines, jobs)
}

/// Tasks that fire given finished metaflows and tasks, by repeatedly firing
/// any task whose prerequisites are all met.
pub fn fire_closure(dag: &JobDag, finished_mfs: &[bool], finished_tasks: &[bool]) -> Vec<bool> {
    let mut fired = finished_tasks.to_vec();
    loop {
        let mut changed = false;
        for t in dag.tasks() {
            let i = t.id.index();
            if fired[i] {
                continue;
            }
            let mfs_done = dag
                .metaflows()
                .iter()
                .filter(|m| m.consumer_task == t.id || t.metaflow_deps.contains(&m.id))
                .all(|m| finished_mfs[m.id.index()]);
            if mfs_done && t.task_deps.iter().all(|d| fired[d.index()]) {
                fired[i] = true;
                changed = true;
            }
        }
        if !changed {
            return fired;
        }
    }
}

/// Tasks that fire once `metaflow` finishes but not before.
pub fn unlock_oracle(dag: &JobDag, finished_mfs: &[bool], finished_tasks: &[bool], metaflow: usize) -> BTreeSet<u32> {
    if finished_mfs[metaflow] {
        return BTreeSet::new();
    }
    let before = fire_closure(dag, finished_mfs, finished_tasks);
    let mut with = finished_mfs.to_vec();
    with[metaflow] = true;
    let after = fire_closure(dag, &with, finished_tasks);
    (0..before.len())
        .filter(|&i| after[i] && !before[i])
        .map(|i| i as u32)
        .collect()
}

/// Every metaflow a task needs, directly or through its prerequisite tasks.
pub fn ancestor_oracle(dag: &JobDag, task: usize) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    let mut stack = vec![task];
    let mut seen = vec![false; dag.tasks().len()];
    while let Some(t) = stack.pop() {
        if std::mem::replace(&mut seen[t], true) {
            continue;
        }
        let spec = &dag.tasks()[t];
        for m in dag.metaflows() {
            if m.consumer_task.index() == t || spec.metaflow_deps.contains(&m.id) {
                out.insert(m.id.0);
            }
        }
        stack.extend(spec.task_deps.iter().map(|d| d.index()));
    }
    out
}

/// Largest per-port rate sum minus capacity; negative or zero when valid.
pub fn worst_port_excess(rates: impl IntoIterator<Item = (usize, usize, f64)>, machines: usize, capacity: f64) -> f64 {
    let mut egress = vec![0.0; machines];
    let mut ingress = vec![0.0; machines];
    for (src, dst, r) in rates {
        egress[src] += r;
        ingress[dst] += r;
    }
    egress
        .iter()
        .chain(&ingress)
        .map(|s| s - capacity)
        .fold(f64::NEG_INFINITY, f64::max)
}
