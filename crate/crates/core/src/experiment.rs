//! Batch experiments: sample trace jobs, generate DAGs, simulate each
//! scheduler, and tabulate per-job CCT/JCT.
//!
//! Work is cut into independent [`Unit`]s so callers can fan out across
//! threads; [`assemble`] merges unit results in a fixed order, so the output
//! does not depend on how the units were executed.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run, run_with_log, EngineError, RunLog, RunOptions};
use crate::fabric::{Fabric, FabricError};
use crate::fixtures;
use crate::model::{JobDag, JobId};
use crate::schedulers::{SchedulerKind, SchedulerOptions};
use crate::workload::{generate_dag, sample_jobs, DagParams, DagTopology, FlowSplit, LoadModel, Trace, WorkloadError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Fabric(#[from] FabricError),
    #[error("{scheduler} on job {job:?}: {source}")]
    Engine {
        scheduler: SchedulerKind,
        job: Option<JobId>,
        #[source]
        source: EngineError,
    },
    #[error("invalid config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every job runs alone on an empty fabric.
    #[default]
    Isolated,
    /// All sampled jobs share one fabric, released at
    /// `arrival_ms * release_scale`.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: DagTopology,
    pub schedulers: Vec<SchedulerKind>,
    pub n_jobs: usize,
    pub seed: u64,
    pub rho: f64,
    pub k_per_reducer: usize,
    pub work_conserving: bool,
    pub split: FlowSplit,
    pub mode: Mode,
    pub release_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: DagTopology::TotalOrder,
            schedulers: vec![SchedulerKind::Msa, SchedulerKind::Varys],
            n_jobs: 50,
            seed: 1,
            rho: 1.0,
            k_per_reducer: 2,
            work_conserving: false,
            split: FlowSplit::Lump,
            mode: Mode::Isolated,
            release_scale: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_jobs == 0 {
            return Err(ExperimentError::Config("n_jobs must be at least 1".into()));
        }
        if self.schedulers.is_empty() {
            return Err(ExperimentError::Config("no schedulers selected".into()));
        }
        if !(self.release_scale >= 0.0 && self.release_scale.is_finite()) {
            return Err(ExperimentError::Config(format!("release scale {}", self.release_scale)));
        }
        Ok(())
    }

    fn dag_params(&self) -> DagParams {
        DagParams {
            topology: self.topology,
            loads: LoadModel {
                rho: self.rho,
                seed: self.seed,
            },
            k_per_reducer: self.k_per_reducer,
            split: self.split,
            release_scale: match self.mode {
                Mode::Isolated => 0.0,
                Mode::Shared => self.release_scale,
            },
        }
    }

    fn scheduler_list(&self) -> Vec<SchedulerKind> {
        let mut s = self.schedulers.clone();
        s.sort();
        s.dedup();
        s
    }
}

/// Sampled jobs turned into DAGs, ready to simulate.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub fabric: Fabric,
    pub jobs: Vec<JobDag>,
}

pub fn prepare(config: &ExperimentConfig, trace: &Trace) -> Result<Prepared, ExperimentError> {
    config.validate()?;
    let sampled = sample_jobs(&trace.jobs, config.n_jobs, config.seed)?;
    let params = config.dag_params();
    let mut jobs = sampled
        .iter()
        .map(|j| generate_dag(j, &params))
        .collect::<Result<Vec<_>, _>>()?;
    jobs.sort_by_key(|j| j.job());
    if jobs.windows(2).any(|w| w[0].job() == w[1].job()) {
        return Err(ExperimentError::Config("trace has duplicate job ids".into()));
    }
    Ok(Prepared {
        config: config.clone(),
        fabric: Fabric::unit(trace.num_machines)?,
        jobs,
    })
}

/// One independent simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unit {
    pub scheduler: SchedulerKind,
    /// Index into [`Prepared::jobs`] in isolated mode, `None` when shared.
    pub job: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRow {
    pub scheduler: SchedulerKind,
    pub job_id: JobId,
    pub release: f64,
    pub cct: f64,
    pub jct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheduler: SchedulerKind,
    pub n_jobs: usize,
    pub avg_cct: f64,
    pub avg_jct: f64,
    /// avg JCT under varys divided by this scheduler's, when varys ran.
    pub speedup_vs_varys: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<JobRow>,
    pub summaries: Vec<Summary>,
}

impl Prepared {
    pub fn units(&self) -> Vec<Unit> {
        let mut units = Vec::new();
        for scheduler in self.config.scheduler_list() {
            match self.config.mode {
                Mode::Isolated => units.extend((0..self.jobs.len()).map(|j| Unit { scheduler, job: Some(j) })),
                Mode::Shared => units.push(Unit { scheduler, job: None }),
            }
        }
        units
    }

    pub fn run_unit(&self, unit: Unit) -> Result<Vec<JobRow>, ExperimentError> {
        self.run_unit_logged(unit).map(|(rows, _)| rows)
    }

    /// Like [`Prepared::run_unit`], also returning the event stream.
    pub fn run_unit_logged(&self, unit: Unit) -> Result<(Vec<JobRow>, RunLog), ExperimentError> {
        let scheduler = unit.scheduler.build(SchedulerOptions {
            work_conserving: self.config.work_conserving,
        });
        let jobs = match unit.job {
            Some(i) => std::slice::from_ref(&self.jobs[i]),
            None => &self.jobs[..],
        };
        let (report, log) = run_with_log(jobs, self.fabric, scheduler.as_ref(), &RunOptions::default())
            .map_err(|source| ExperimentError::Engine {
                scheduler: unit.scheduler,
                job: unit.job.map(|i| self.jobs[i].job()),
                source,
            })?;
        let rows = report
            .per_job
            .into_iter()
            .map(|r| JobRow {
                scheduler: unit.scheduler,
                job_id: r.job,
                release: r.release,
                cct: r.cct,
                jct: r.jct,
            })
            .collect();
        Ok((rows, log))
    }
}

/// Merges unit outputs (any order) into rows sorted by scheduler then job.
pub fn assemble(config: &ExperimentConfig, parts: Vec<Vec<JobRow>>) -> ExperimentResult {
    let mut rows: Vec<JobRow> = parts.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.scheduler.cmp(&b.scheduler).then(a.job_id.cmp(&b.job_id)));
    let mut summaries: Vec<Summary> = config
        .scheduler_list()
        .into_iter()
        .map(|scheduler| {
            let mine: Vec<&JobRow> = rows.iter().filter(|r| r.scheduler == scheduler).collect();
            let n = mine.len();
            let mean = |f: fn(&JobRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n.max(1) as f64;
            Summary {
                scheduler,
                n_jobs: n,
                avg_cct: mean(|r| r.cct),
                avg_jct: mean(|r| r.jct),
                speedup_vs_varys: None,
            }
        })
        .collect();
    if let Some(base) = summaries.iter().find(|s| s.scheduler == SchedulerKind::Varys).map(|s| s.avg_jct) {
        for s in &mut summaries {
            s.speedup_vs_varys = Some(base / s.avg_jct);
        }
    }
    ExperimentResult {
        config: config.clone(),
        rows,
        summaries,
    }
}

/// Sequential run of every unit.
pub fn run_experiment(config: &ExperimentConfig, trace: &Trace) -> Result<ExperimentResult, ExperimentError> {
    let prepared = prepare(config, trace)?;
    let parts = prepared
        .units()
        .into_iter()
        .map(|u| prepared.run_unit(u))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(config, parts))
}

pub const CSV_HEADER: &str = "scheduler,job_id,release,cct,jct";

impl ExperimentResult {
    pub fn summary(&self, scheduler: SchedulerKind) -> Option<&Summary> {
        self.summaries.iter().find(|s| s.scheduler == scheduler)
    }

    /// Per-job rows, then `#avg,<scheduler>,<n_jobs>,<avg_cct>,<avg_jct>,<speedup>`
    /// lines. The speedup field is empty when varys did not run.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.scheduler, r.job_id.0, r.release, r.cct, r.jct);
        }
        for s in &self.summaries {
            let speedup = s.speedup_vs_varys.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "#avg,{},{},{},{},{}", s.scheduler, s.n_jobs, s.avg_cct, s.avg_jct, speedup);
        }
        out
    }
}

/// Fixed targets for the two-job motivation instance: (avg CCT, avg JCT).
pub const MOTIVATION_VARYS: (f64, f64) = (3.5, 8.0);
pub const MOTIVATION_MSA: (f64, f64) = (4.0, 7.0);
pub const MOTIVATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotivationReport {
    pub work_conserving: bool,
    pub rows: Vec<JobRow>,
    pub summaries: Vec<Summary>,
    /// Human-readable reasons the check failed; empty on success.
    pub failures: Vec<String>,
}

impl MotivationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn table(&self) -> String {
        let mut out = String::from("scheduler  job  cct  jct\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:<9}  {:<3}  {}  {}", r.scheduler.name(), r.job_id.0, r.cct, r.jct);
        }
        for s in &self.summaries {
            let _ = writeln!(out, "{:<9}  avg  {}  {}", s.scheduler.name(), s.avg_cct, s.avg_jct);
        }
        out
    }
}

/// Runs the two-job motivation instance under every scheduler and checks
/// varys and msa against their targets. With work conservation, msa only
/// has to be at least as good as its target JCT.
pub fn run_motivation(work_conserving: bool) -> Result<MotivationReport, ExperimentError> {
    let (fabric, jobs) = fixtures::motivation();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for kind in SchedulerKind::ALL {
        let sched = kind.build(SchedulerOptions { work_conserving });
        let report = run(&jobs, fabric, sched.as_ref(), &RunOptions::default()).map_err(|source| {
            ExperimentError::Engine {
                scheduler: kind,
                job: None,
                source,
            }
        })?;
        rows.extend(report.per_job.iter().map(|r| JobRow {
            scheduler: kind,
            job_id: r.job,
            release: r.release,
            cct: r.cct,
            jct: r.jct,
        }));
        summaries.push(Summary {
            scheduler: kind,
            n_jobs: report.per_job.len(),
            avg_cct: report.avg_cct,
            avg_jct: report.avg_jct,
            speedup_vs_varys: None,
        });
    }
    if let Some(base) = summaries.iter().find(|s| s.scheduler == SchedulerKind::Varys).map(|s| s.avg_jct) {
        for s in &mut summaries {
            s.speedup_vs_varys = Some(base / s.avg_jct);
        }
    }

    let mut failures = Vec::new();
    let off = |got: f64, want: f64| (got - want).abs() > MOTIVATION_TOLERANCE;
    for s in &summaries {
        let (want_cct, want_jct) = match s.scheduler {
            SchedulerKind::Varys => MOTIVATION_VARYS,
            SchedulerKind::Msa => MOTIVATION_MSA,
            SchedulerKind::Fair => continue,
        };
        if s.scheduler == SchedulerKind::Msa && work_conserving {
            if s.avg_jct > want_jct + MOTIVATION_TOLERANCE {
                failures.push(format!("msa avg jct {} exceeds {}", s.avg_jct, want_jct));
            }
            continue;
        }
        if off(s.avg_cct, want_cct) {
            failures.push(format!("{} avg cct {} != {}", s.scheduler, s.avg_cct, want_cct));
        }
        if off(s.avg_jct, want_jct) {
            failures.push(format!("{} avg jct {} != {}", s.scheduler, s.avg_jct, want_jct));
        }
    }
    Ok(MotivationReport {
        work_conserving,
        rows,
        summaries,
        failures,
    })
}
