//! Coflow-trace ingestion and DAG synthesis.
//!
//! Traces use the coflow-benchmark text layout: a header
//! `<num_machines> <num_jobs>` followed by one line per job,
//!
//! ```text
//! <id> <arrival_ms> <num_mappers> <m_1> .. <m_k> <num_reducers> <r_1>:<mb_1> .. <r_j>:<mb_j>
//! ```
//!
//! with 1-based machine indices. Traces only give the bytes each reducer
//! receives, so flows are reconstructed by splitting those totals over the
//! mappers, and compute DAGs are generated on top.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FlowSpec, JobDag, JobId, MetaflowSpec, ModelError, TaskSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("empty trace")]
    Empty,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("trace declares {declared} jobs but has {found} job lines")]
    Truncated { declared: usize, found: usize },
    #[error("cannot sample {requested} jobs from a trace of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("job {0} has a reducer with no flows")]
    EmptyReducer(u32),
    #[error("unknown topology {0:?}, expected total, partial or disorder")]
    UnknownTopology(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceJob {
    pub id: u32,
    pub arrival_ms: f64,
    /// 0-based machine indices.
    pub mappers: Vec<usize>,
    /// (0-based machine, data-units received).
    pub reducers: Vec<(usize, f64)>,
}

impl TraceJob {
    pub fn total_bytes(&self) -> f64 {
        self.reducers.iter().map(|r| r.1).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub num_machines: usize,
    pub jobs: Vec<TraceJob>,
}

fn malformed(line: usize, msg: impl Into<String>) -> WorkloadError {
    WorkloadError::Malformed { line, msg: msg.into() }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, WorkloadError> {
    let tok = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| malformed(line, format!("{what} {tok:?} is not a number")))
}

/// Parses a trace document; `mb_scale` converts megabytes to data units.
pub fn parse_trace(text: &str, mb_scale: f64) -> Result<Trace, WorkloadError> {
    if !(mb_scale > 0.0 && mb_scale.is_finite()) {
        return Err(WorkloadError::BadParameter(format!("mb scale {mb_scale}")));
    }
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(WorkloadError::Empty)?;
    let mut htoks = header.split_whitespace();
    let num_machines: usize = parse_num(htoks.next(), hline, "machine count")?;
    let num_jobs: usize = parse_num(htoks.next(), hline, "job count")?;
    if htoks.next().is_some() {
        return Err(malformed(hline, "header has extra fields"));
    }
    if num_machines == 0 {
        return Err(malformed(hline, "machine count must be positive"));
    }

    let machine = |tok: Option<&str>, line: usize| -> Result<usize, WorkloadError> {
        let m: usize = parse_num(tok, line, "machine index")?;
        if m == 0 || m > num_machines {
            return Err(malformed(line, format!("machine index {m} outside 1..={num_machines}")));
        }
        Ok(m - 1)
    };

    let mut jobs = Vec::with_capacity(num_jobs);
    for (line, text) in lines {
        if jobs.len() == num_jobs {
            return Err(malformed(line, format!("more job lines than the {num_jobs} declared")));
        }
        let mut toks = text.split_whitespace();
        let id: u32 = parse_num(toks.next(), line, "job id")?;
        let arrival_ms: f64 = parse_num(toks.next(), line, "arrival time")?;
        let nm: usize = parse_num(toks.next(), line, "mapper count")?;
        if nm == 0 {
            return Err(malformed(line, "job has no mappers"));
        }
        let mappers = (0..nm).map(|_| machine(toks.next(), line)).collect::<Result<Vec<_>, _>>()?;
        let nr: usize = parse_num(toks.next(), line, "reducer count")?;
        if nr == 0 {
            return Err(malformed(line, "job has no reducers"));
        }
        let mut reducers = Vec::with_capacity(nr);
        for _ in 0..nr {
            let tok = toks.next().ok_or_else(|| malformed(line, "missing reducer"))?;
            let (m, mb) = tok
                .split_once(':')
                .ok_or_else(|| malformed(line, format!("reducer {tok:?} is not <machine>:<mb>")))?;
            let m = machine(Some(m), line)?;
            let mb: f64 = parse_num(Some(mb), line, "reducer size")?;
            if !(mb > 0.0 && mb.is_finite()) {
                return Err(malformed(line, format!("reducer size {mb} must be positive")));
            }
            reducers.push((m, mb * mb_scale));
        }
        if toks.next().is_some() {
            return Err(malformed(line, "trailing fields after reducers"));
        }
        jobs.push(TraceJob {
            id,
            arrival_ms,
            mappers,
            reducers,
        });
    }
    if jobs.len() < num_jobs {
        return Err(WorkloadError::Truncated {
            declared: num_jobs,
            found: jobs.len(),
        });
    }
    Ok(Trace { num_machines, jobs })
}

/// Renders a trace back into the text layout.
pub fn format_trace(trace: &Trace, mb_scale: f64) -> String {
    let mut out = format!("{} {}\n", trace.num_machines, trace.jobs.len());
    for j in &trace.jobs {
        out.push_str(&format!("{} {} {}", j.id, j.arrival_ms, j.mappers.len()));
        for m in &j.mappers {
            out.push_str(&format!(" {}", m + 1));
        }
        out.push_str(&format!(" {}", j.reducers.len()));
        for (r, units) in &j.reducers {
            out.push_str(&format!(" {}:{}", r + 1, units / mb_scale));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowSplit {
    /// One flow per (mapper, reducer) pair, the reducer's bytes split evenly.
    PerMapper,
    /// One flow per reducer from the first listed mapper.
    #[default]
    Lump,
}

impl FromStr for FlowSplit {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-mapper" => Ok(FlowSplit::PerMapper),
            "lump" => Ok(FlowSplit::Lump),
            _ => Err(WorkloadError::BadParameter(format!("flow split {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandedFlow {
    pub src: usize,
    pub dst: usize,
    pub size: f64,
    /// Position of the destination in the job's reducer list.
    pub reducer: usize,
}

/// Turns per-reducer totals into flows, grouped by reducer in list order.
///
/// With `PerMapper`, each mapper gets `floor(bytes / mappers)` and the
/// remainder goes to the mapper with the lowest machine index; zero-sized
/// flows are dropped.
pub fn expand_flows(job: &TraceJob, split: FlowSplit) -> Vec<ExpandedFlow> {
    let mut flows = Vec::new();
    for (ri, &(dst, bytes)) in job.reducers.iter().enumerate() {
        match split {
            FlowSplit::Lump => flows.push(ExpandedFlow {
                src: job.mappers[0],
                dst,
                size: bytes,
                reducer: ri,
            }),
            FlowSplit::PerMapper => {
                let k = job.mappers.len() as f64;
                let base = (bytes / k).floor();
                let extra = bytes - base * k;
                let lowest = (0..job.mappers.len())
                    .min_by_key(|&i| (job.mappers[i], i))
                    .expect("at least one mapper");
                for (mi, &src) in job.mappers.iter().enumerate() {
                    let size = if mi == lowest { base + extra } else { base };
                    if size > 0.0 {
                        flows.push(ExpandedFlow { src, dst, size, reducer: ri });
                    }
                }
            }
        }
    }
    flows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DagTopology {
    /// Every consumer task of the job forms a single chain.
    TotalOrder,
    /// One independent chain per reducer.
    PartialOrder,
    /// Every task waits for every metaflow of the job.
    Disorder,
}

impl DagTopology {
    pub const ALL: [DagTopology; 3] = [DagTopology::TotalOrder, DagTopology::PartialOrder, DagTopology::Disorder];

    pub fn name(self) -> &'static str {
        match self {
            DagTopology::TotalOrder => "total",
            DagTopology::PartialOrder => "partial",
            DagTopology::Disorder => "disorder",
        }
    }
}

impl fmt::Display for DagTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DagTopology {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "total" | "total_order" | "total-order" => Ok(DagTopology::TotalOrder),
            "partial" | "partial_order" | "partial-order" => Ok(DagTopology::PartialOrder),
            "disorder" | "barrier" => Ok(DagTopology::Disorder),
            _ => Err(WorkloadError::UnknownTopology(s.to_string())),
        }
    }
}

/// How compute loads are drawn: `rho` times the metaflow's bytes, with
/// uniform ±20% noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadModel {
    pub rho: f64,
    pub seed: u64,
}

impl Default for LoadModel {
    fn default() -> Self {
        LoadModel { rho: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DagParams {
    pub topology: DagTopology,
    pub loads: LoadModel,
    pub k_per_reducer: usize,
    pub split: FlowSplit,
    /// Multiplies trace arrival milliseconds into simulation time.
    pub release_scale: f64,
}

impl Default for DagParams {
    fn default() -> Self {
        DagParams {
            topology: DagTopology::TotalOrder,
            loads: LoadModel::default(),
            k_per_reducer: 2,
            split: FlowSplit::Lump,
            release_scale: 0.0,
        }
    }
}

const LOAD_NOISE: f64 = 0.2;

fn job_rng(seed: u64, job: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ u64::from(job).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Builds a job DAG from a trace entry.
///
/// The flows into each reducer are cut into up to `k_per_reducer` metaflows
/// of consecutive mappers. Each metaflow gets its own consumer task on the
/// reducer, then the topology decides the task edges.
pub fn generate_dag(job: &TraceJob, params: &DagParams) -> Result<JobDag, WorkloadError> {
    if params.k_per_reducer == 0 {
        return Err(WorkloadError::BadParameter("k_per_reducer must be at least 1".into()));
    }
    if !(params.loads.rho >= 0.0 && params.loads.rho.is_finite()) {
        return Err(WorkloadError::BadParameter(format!("rho {}", params.loads.rho)));
    }
    let flows = expand_flows(job, params.split);
    let mut rng = job_rng(params.loads.seed, job.id);

    let mut tasks: Vec<TaskSpec> = Vec::new();
    let mut metaflows = Vec::new();
    let mut flow_specs = Vec::new();
    // task ids per reducer, in chain order
    let mut reducer_tasks: Vec<Vec<u32>> = Vec::with_capacity(job.reducers.len());

    for (ri, &(machine, _)) in job.reducers.iter().enumerate() {
        let into: Vec<&ExpandedFlow> = flows.iter().filter(|f| f.reducer == ri).collect();
        if into.is_empty() {
            return Err(WorkloadError::EmptyReducer(job.id));
        }
        let k = params.k_per_reducer.min(into.len());
        let mut chain = Vec::with_capacity(k);
        for part in 0..k {
            let lo = part * into.len() / k;
            let hi = (part + 1) * into.len() / k;
            let mf = metaflows.len() as u32;
            let task = tasks.len() as u32;
            let mut bytes = 0.0;
            for f in &into[lo..hi] {
                flow_specs.push(FlowSpec::new(flow_specs.len() as u32, mf, f.src, f.dst, f.size));
                bytes += f.size;
            }
            let noise = 1.0 + rng.gen_range(-LOAD_NOISE..=LOAD_NOISE);
            tasks.push(TaskSpec::new(task, machine, params.loads.rho * bytes * noise));
            metaflows.push(MetaflowSpec::new(mf, task));
            chain.push(task);
        }
        reducer_tasks.push(chain);
    }

    match params.topology {
        DagTopology::TotalOrder => {
            for (t, task) in tasks.iter_mut().enumerate().skip(1) {
                task.task_deps.push(crate::model::TaskId(t as u32 - 1));
            }
        }
        DagTopology::PartialOrder => {
            for chain in &reducer_tasks {
                for w in chain.windows(2) {
                    tasks[w[1] as usize].task_deps.push(crate::model::TaskId(w[0]));
                }
            }
        }
        DagTopology::Disorder => {
            let all: Vec<u32> = (0..metaflows.len() as u32).collect();
            for t in &mut tasks {
                t.metaflow_deps = all.iter().copied().map(crate::model::MetaflowId).collect();
            }
        }
    }

    let release = job.arrival_ms * params.release_scale;
    Ok(JobDag::build(JobId(job.id), release, tasks, metaflows, flow_specs)?)
}

/// Uniform sample of `n` jobs without replacement, kept in trace order.
pub fn sample_jobs(jobs: &[TraceJob], n: usize, seed: u64) -> Result<Vec<TraceJob>, WorkloadError> {
    if n > jobs.len() {
        return Err(WorkloadError::SampleTooLarge {
            requested: n,
            available: jobs.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, jobs.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| jobs[i].clone()).collect())
}

/// Shape of a synthetic trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub num_machines: usize,
    pub num_jobs: usize,
    pub seed: u64,
    /// Mean gap between arrivals in milliseconds.
    pub mean_gap_ms: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            num_machines: 150,
            num_jobs: 526,
            seed: 2010,
            mean_gap_ms: 6840.0,
        }
    }
}

fn width(rng: &mut ChaCha8Rng, bands: [(f64, usize, usize); 3], cap: usize) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (p, lo, hi) in bands {
        acc += p;
        if u < acc {
            return rng.gen_range(lo..=hi).min(cap);
        }
    }
    let (_, lo, hi) = bands[2];
    rng.gen_range(lo..=hi).min(cap)
}

/// Generates a trace in the same layout as the public one-hour coflow
/// benchmark: mostly narrow jobs with a heavy tail of wide ones, and
/// per-reducer volumes spread over three orders of magnitude.
pub fn synthesize_trace(params: &SynthParams) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = params.num_machines.max(1);
    let mut arrival = 0.0f64;
    let mut jobs = Vec::with_capacity(params.num_jobs);
    for id in 1..=params.num_jobs as u32 {
        let nm = width(&mut rng, [(0.5, 1, 4), (0.3, 5, 30), (0.2, 31, 150)], m);
        let nr = width(&mut rng, [(0.5, 1, 3), (0.3, 4, 20), (0.2, 21, 100)], m);
        let mut mappers = index::sample(&mut rng, m, nm).into_vec();
        mappers.sort_unstable();
        let mut reducer_machines = index::sample(&mut rng, m, nr).into_vec();
        reducer_machines.sort_unstable();
        let reducers = reducer_machines
            .into_iter()
            .map(|r| {
                let per_mapper = 10f64.powf(rng.gen_range(0.0..2.5));
                let mb = (per_mapper * nm as f64).round().max(1.0);
                (r, mb)
            })
            .collect();
        jobs.push(TraceJob {
            id,
            arrival_ms: arrival.round(),
            mappers,
            reducers,
        });
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        arrival += -params.mean_gap_ms * u.ln();
    }
    Trace {
        num_machines: m,
        jobs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskId;

    #[test]
    fn parses_minimal_trace() {
        let t = parse_trace("2 1\n1 0 1 1 1 2:3", 1.0).unwrap();
        assert_eq!(t.num_machines, 2);
        assert_eq!(
            t.jobs,
            vec![TraceJob {
                id: 1,
                arrival_ms: 0.0,
                mappers: vec![0],
                reducers: vec![(1, 3.0)],
            }]
        );
    }

    #[test]
    fn scale_converts_megabytes() {
        let t = parse_trace("2 1\n1 0 1 1 1 2:3", 0.5).unwrap();
        assert_eq!(t.jobs[0].reducers, vec![(1, 1.5)]);
    }

    #[test]
    fn truncated_trace() {
        let err = parse_trace("3 3\n1 0 1 1 1 2:3\n2 5 1 2 1 3:1\n", 1.0).unwrap_err();
        assert_eq!(err, WorkloadError::Truncated { declared: 3, found: 2 });
    }

    #[test]
    fn malformed_lines_name_their_line() {
        let cases = [
            "2 1\n1 0 1 3 1 2:3",   // machine out of range
            "2 1\n1 0 2 1 1 2:3",   // token count off (reducer count eaten as mapper)
            "2 1\n1 zero 1 1 1 2:3", // non-numeric
            "2 1\n1 0 1 1 1 2-3",    // bad reducer token
            "2 1\n1 0 1 1 1 2:3 9",  // trailing junk
            "2 1\n1 0 1 1 1 2:0",    // zero bytes
        ];
        for text in cases {
            match parse_trace(text, 1.0) {
                Err(WorkloadError::Malformed { line: 2, .. }) => {}
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(parse_trace("", 1.0), Err(WorkloadError::Empty)));
        assert!(matches!(parse_trace("x 1", 1.0), Err(WorkloadError::Malformed { line: 1, .. })));
        assert!(matches!(
            parse_trace("2 1\n1 0 1 1 1 2:3\n2 0 1 1 1 2:3", 1.0),
            Err(WorkloadError::Malformed { line: 3, .. })
        ));
    }

    #[test]
    fn wide_trace_line_fields() {
        // 150 machines, 5 mappers, 3 reducers
        let line = "150 1\n42 1200 5 3 17 44 101 150 3 1:9 75:12.5 150:30";
        let t = parse_trace(line, 1.0).unwrap();
        let j = &t.jobs[0];
        assert_eq!(j.id, 42);
        assert_eq!(j.arrival_ms, 1200.0);
        assert_eq!(j.mappers, vec![2, 16, 43, 100, 149]);
        assert_eq!(j.reducers, vec![(0, 9.0), (74, 12.5), (149, 30.0)]);
        let pairs = j.mappers.len() * j.reducers.len();
        assert_eq!(pairs, 15);
        assert_eq!(expand_flows(j, FlowSplit::PerMapper).len(), 15);
    }

    fn job(mappers: Vec<usize>, reducers: Vec<(usize, f64)>) -> TraceJob {
        TraceJob {
            id: 7,
            arrival_ms: 0.0,
            mappers,
            reducers,
        }
    }

    #[test]
    fn even_split_over_mappers() {
        let sizes: Vec<f64> = expand_flows(&job(vec![0, 1], vec![(2, 4.0)]), FlowSplit::PerMapper)
            .iter()
            .map(|f| f.size)
            .collect();
        assert_eq!(sizes, vec![2.0, 2.0]);
    }

    #[test]
    fn remainder_to_lowest_mapper() {
        let flows = expand_flows(&job(vec![5, 1, 3], vec![(0, 4.0)]), FlowSplit::PerMapper);
        let got: Vec<(usize, f64)> = flows.iter().map(|f| (f.src, f.size)).collect();
        assert_eq!(got, vec![(5, 1.0), (1, 2.0), (3, 1.0)]);
    }

    #[test]
    fn lump_uses_first_mapper() {
        let flows = expand_flows(&job(vec![5, 1], vec![(0, 4.0), (2, 1.0)]), FlowSplit::Lump);
        let got: Vec<(usize, usize, f64)> = flows.iter().map(|f| (f.src, f.dst, f.size)).collect();
        assert_eq!(got, vec![(5, 0, 4.0), (5, 2, 1.0)]);
    }

    #[test]
    fn four_by_two_job_gives_four_metaflows() {
        let j = job(vec![0, 1, 2, 3], vec![(4, 8.0), (5, 4.0)]);
        assert_eq!(expand_flows(&j, FlowSplit::PerMapper).len(), 8);
        let params = DagParams {
            split: FlowSplit::PerMapper,
            ..Default::default()
        };
        let dag = generate_dag(&j, &params).unwrap();
        assert_eq!(dag.metaflows().len(), 4);
        assert!(dag.metaflows().iter().all(|m| m.flows.len() == 2));
        assert_eq!(dag.tasks().len(), 4);
    }

    #[test]
    fn total_order_single_reducer_chain() {
        let j = job(vec![0, 1], vec![(2, 6.0)]);
        let params = DagParams {
            split: FlowSplit::PerMapper,
            ..Default::default()
        };
        let dag = generate_dag(&j, &params).unwrap();
        let t = dag.tasks();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].metaflow_deps, vec![crate::model::MetaflowId(0)]);
        assert!(t[0].task_deps.is_empty());
        assert_eq!(t[1].metaflow_deps, vec![crate::model::MetaflowId(1)]);
        assert_eq!(t[1].task_deps, vec![TaskId(0)]);
    }

    #[test]
    fn partial_order_has_one_component_per_reducer() {
        let j = job(vec![0, 1, 2], vec![(3, 9.0), (4, 9.0)]);
        let params = DagParams {
            topology: DagTopology::PartialOrder,
            split: FlowSplit::PerMapper,
            ..Default::default()
        };
        let dag = generate_dag(&j, &params).unwrap();
        // union-find over task edges
        let n = dag.tasks().len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for t in dag.tasks() {
            for d in &t.task_deps {
                let (a, b) = (find(&mut parent, t.id.index()), find(&mut parent, d.index()));
                parent[a] = b;
            }
        }
        let mut roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        roots.sort_unstable();
        roots.dedup();
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn loads_follow_rho_with_bounded_noise() {
        let j = job(vec![0, 1, 2, 3], vec![(4, 400.0)]);
        for rho in [0.0, 1.0, 2.5] {
            let params = DagParams {
                loads: LoadModel { rho, seed: 3 },
                split: FlowSplit::PerMapper,
                ..Default::default()
            };
            let dag = generate_dag(&j, &params).unwrap();
            for (t, m) in dag.tasks().iter().zip(dag.metaflows()) {
                let bytes = dag.remaining_size(m.id).unwrap();
                assert!(t.load >= rho * bytes * 0.8 - 1e-9 && t.load <= rho * bytes * 1.2 + 1e-9);
            }
        }
    }

    #[test]
    fn sampling_contract() {
        let trace = synthesize_trace(&SynthParams {
            num_jobs: 60,
            ..Default::default()
        });
        let all = sample_jobs(&trace.jobs, 60, 1).unwrap();
        assert_eq!(all, trace.jobs);
        assert!(sample_jobs(&trace.jobs, 0, 1).unwrap().is_empty());
        let a = sample_jobs(&trace.jobs, 50, 9).unwrap();
        let b = sample_jobs(&trace.jobs, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_jobs(&trace.jobs, 50, 10).unwrap());
        assert_eq!(
            sample_jobs(&trace.jobs, 61, 1),
            Err(WorkloadError::SampleTooLarge {
                requested: 61,
                available: 60
            })
        );
    }

    #[test]
    fn synthetic_trace_round_trips_through_parser() {
        let trace = synthesize_trace(&SynthParams::default());
        let text = format_trace(&trace, 1.0);
        assert!(text.starts_with("150 526\n"));
        let back = parse_trace(&text, 1.0).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn topology_names() {
        for t in DagTopology::ALL {
            assert_eq!(t.name().parse::<DagTopology>().unwrap(), t);
        }
        assert!("ring".parse::<DagTopology>().is_err());
    }
}
