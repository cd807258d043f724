use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use metaflow::dagfile::{parse_dags, write_dag};
use metaflow::engine::{run_with_log, RunLog, RunOptions};
use metaflow::experiment::{
    assemble, prepare, run_motivation, ExperimentConfig, ExperimentResult, JobRow, Mode, Unit,
};
use metaflow::workload::{format_trace, parse_trace, synthesize_trace, DagTopology, FlowSplit, SynthParams, Trace};
use metaflow::{Fabric, JobDag, SchedulerKind, SchedulerOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "metaflow", version, about = "Flow-level simulator for metaflow, coflow and fair scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-job motivation instance and check its averages.
    Motivation(MotivationArgs),
    /// Sample trace jobs, generate DAGs and compare schedulers.
    Run(RunArgs),
    /// Write one DAG document per sampled job.
    GenDag(GenDagArgs),
    /// Write a synthetic trace in the coflow-benchmark layout.
    GenTrace(GenTraceArgs),
    /// Simulate jobs read from DAG documents on one shared fabric.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Topology {
    Total,
    Partial,
    Disorder,
}

impl From<Topology> for DagTopology {
    fn from(t: Topology) -> Self {
        match t {
            Topology::Total => DagTopology::TotalOrder,
            Topology::Partial => DagTopology::PartialOrder,
            Topology::Disorder => DagTopology::Disorder,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sched {
    Msa,
    Varys,
    Fair,
}

impl From<Sched> for SchedulerKind {
    fn from(s: Sched) -> Self {
        match s {
            Sched::Msa => SchedulerKind::Msa,
            Sched::Varys => SchedulerKind::Varys,
            Sched::Fair => SchedulerKind::Fair,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Split {
    PerMapper,
    Lump,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Isolated,
    Shared,
}

#[derive(Args)]
struct MotivationArgs {
    /// Let MSA backfill leftover capacity.
    #[arg(long)]
    work_conserving: bool,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// Trace file; the built-in synthetic trace is used when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Data units per megabyte in the trace.
    #[arg(long, default_value_t = 1.0)]
    mb_scale: f64,
}

#[derive(Args)]
struct DagArgs {
    #[arg(long, value_enum, default_value_t = Topology::Total)]
    topology: Topology,
    /// Number of jobs sampled from the trace.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    n_jobs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Compute load per byte of input.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Metaflows (and consumer tasks) per reducer.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    k_per_reducer: u64,
    #[arg(long, value_enum, default_value_t = Split::Lump)]
    split: Split,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    trace: TraceArgs,
    #[command(flatten)]
    dag: DagArgs,
    /// Scheduler to run; repeat for several. Defaults to msa and varys.
    #[arg(long = "sched", value_enum)]
    sched: Vec<Sched>,
    #[arg(long)]
    work_conserving: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Isolated)]
    mode: ModeArg,
    /// Simulation time units per trace millisecond (shared mode).
    #[arg(long, default_value_t = 1e-3)]
    release_scale: f64,
    /// Results file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Dump every simulation event as JSON lines.
    #[arg(long)]
    run_log: Option<PathBuf>,
}

#[derive(Args)]
struct GenDagArgs {
    #[command(flatten)]
    trace: TraceArgs,
    #[command(flatten)]
    dag: DagArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenTraceArgs {
    #[arg(long, default_value_t = 150)]
    machines: usize,
    #[arg(long, default_value_t = 526)]
    jobs: usize,
    #[arg(long, default_value_t = 2010)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// DAG documents; a file may hold several jobs.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long = "sched", value_enum)]
    sched: Vec<Sched>,
    #[arg(long)]
    work_conserving: bool,
    /// Fabric size; defaults to one past the highest machine referenced.
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    run_log: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Motivation(a) => cmd_motivation(&a),
        Command::Run(a) => cmd_run(&a).map(|()| true),
        Command::GenDag(a) => cmd_gen_dag(&a).map(|()| true),
        Command::GenTrace(a) => cmd_gen_trace(&a).map(|()| true),
        Command::Simulate(a) => cmd_simulate(&a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_trace(args: &TraceArgs) -> Result<Trace> {
    match &args.trace {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_trace(&text, args.mb_scale).with_context(|| format!("parsing {}", path.display()))
        }
        None => Ok(synthesize_trace(&SynthParams::default())),
    }
}

fn schedulers(list: &[Sched]) -> Vec<SchedulerKind> {
    if list.is_empty() {
        vec![SchedulerKind::Msa, SchedulerKind::Varys]
    } else {
        list.iter().map(|&s| s.into()).collect()
    }
}

fn config(dag: &DagArgs) -> ExperimentConfig {
    ExperimentConfig {
        topology: dag.topology.into(),
        n_jobs: dag.n_jobs as usize,
        seed: dag.seed,
        rho: dag.rho,
        k_per_reducer: dag.k_per_reducer as usize,
        split: match dag.split {
            Split::PerMapper => FlowSplit::PerMapper,
            Split::Lump => FlowSplit::Lump,
        },
        ..Default::default()
    }
}

fn render(result: &ExperimentResult, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => result.to_csv(),
        Format::Json => serde_json::to_string_pretty(result)? + "\n",
    })
}

fn log_lines(scheduler: SchedulerKind, log: &RunLog, out: &mut String) -> Result<()> {
    for ev in &log.events {
        let mut v = serde_json::to_value(ev)?;
        v["scheduler"] = serde_json::Value::from(scheduler.name());
        out.push_str(&serde_json::to_string(&v)?);
        out.push('\n');
    }
    Ok(())
}

fn cmd_motivation(args: &MotivationArgs) -> Result<bool> {
    let report = run_motivation(args.work_conserving)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.table());
        for f in &report.failures {
            eprintln!("check failed: {f}");
        }
    }
    Ok(report.passed())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let cfg = ExperimentConfig {
        schedulers: schedulers(&args.sched),
        work_conserving: args.work_conserving,
        mode: match args.mode {
            ModeArg::Isolated => Mode::Isolated,
            ModeArg::Shared => Mode::Shared,
        },
        release_scale: args.release_scale,
        ..config(&args.dag)
    };
    let prepared = prepare(&cfg, &trace)?;
    let units: Vec<Unit> = prepared.units();
    let outputs: Vec<(Vec<JobRow>, RunLog)> = units
        .par_iter()
        .map(|&u| prepared.run_unit_logged(u))
        .collect::<Result<_, _>>()?;
    if let Some(path) = &args.run_log {
        let mut text = String::new();
        for (unit, (_, log)) in units.iter().zip(&outputs) {
            log_lines(unit.scheduler, log, &mut text)?;
        }
        emit(Some(path), &text)?;
    }
    let result = assemble(&cfg, outputs.into_iter().map(|(rows, _)| rows).collect());
    emit(args.out.as_deref(), &render(&result, args.format)?)
}

fn cmd_gen_dag(args: &GenDagArgs) -> Result<()> {
    let trace = load_trace(&args.trace)?;
    let prepared = prepare(&config(&args.dag), &trace)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for dag in &prepared.jobs {
        let path = args.out.join(format!("job-{}.dag", dag.job().0));
        fs::write(&path, write_dag(dag)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_gen_trace(args: &GenTraceArgs) -> Result<()> {
    if args.machines == 0 {
        bail!("--machines must be at least 1");
    }
    let trace = synthesize_trace(&SynthParams {
        num_machines: args.machines,
        num_jobs: args.jobs,
        seed: args.seed,
        ..Default::default()
    });
    emit(args.out.as_deref(), &format_trace(&trace, 1.0))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut jobs: Vec<JobDag> = Vec::new();
    for path in &args.files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        jobs.extend(parse_dags(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    jobs.sort_by_key(|j| j.job());
    let highest = jobs
        .iter()
        .flat_map(|j| {
            j.tasks()
                .iter()
                .map(|t| t.machine)
                .chain(j.flows().iter().flat_map(|f| [f.src, f.dst]))
        })
        .max()
        .unwrap_or(0);
    let machines = args.machines.unwrap_or(highest + 1);
    let fabric = Fabric::unit(machines)?;

    let kinds = schedulers(&args.sched);
    let outputs: Vec<(SchedulerKind, Vec<JobRow>, RunLog)> = kinds
        .par_iter()
        .map(|&kind| -> Result<_> {
            let sched = kind.build(SchedulerOptions {
                work_conserving: args.work_conserving,
            });
            let (report, log) = run_with_log(&jobs, fabric, sched.as_ref(), &RunOptions::default())
                .with_context(|| format!("simulating under {kind}"))?;
            let rows = report
                .per_job
                .iter()
                .map(|r| JobRow {
                    scheduler: kind,
                    job_id: r.job,
                    release: r.release,
                    cct: r.cct,
                    jct: r.jct,
                })
                .collect();
            Ok((kind, rows, log))
        })
        .collect::<Result<_>>()?;
    if let Some(path) = &args.run_log {
        let mut text = String::new();
        for (kind, _, log) in &outputs {
            log_lines(*kind, log, &mut text)?;
        }
        emit(Some(path), &text)?;
    }
    let cfg = ExperimentConfig {
        schedulers: kinds,
        n_jobs: jobs.len(),
        work_conserving: args.work_conserving,
        mode: Mode::Shared,
        ..Default::default()
    };
    let result = assemble(&cfg, outputs.into_iter().map(|(_, rows, _)| rows).collect());
    emit(args.out.as_deref(), &render(&result, args.format)?)
}
