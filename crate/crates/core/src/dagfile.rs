//! Plain-text job DAG documents.
//!
//! ```text
//! # anything after '#' is ignored
//! JOB 3
//! RELEASE 0.5
//! TASKS
//! 0 4 12.5 mf:0
//! 1 4 9.75 mf:1 task:0
//! METAFLOWS
//! 0 0
//! 1 1
//! FLOWS
//! 0 0 1 4 2
//! 1 1 2 4 2
//! END
//! ```
//!
//! Task rows are `id machine load deps..` where each dep is `mf:<id>` or
//! `task:<id>`; metaflow rows are `id consumer`; flow rows are
//! `id metaflow src dst size`. Machines are 0-based. A file may hold several
//! documents back to back.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{FlowSpec, JobDag, JobId, MetaflowSpec, ModelError, TaskSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DagFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("job document starting at line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error("no job documents found")]
    Empty,
}

/// Serializes a job. Floats use the shortest representation that parses
/// back to the same value.
pub fn write_dag(dag: &JobDag) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "JOB {}", dag.job().0);
    let _ = writeln!(out, "RELEASE {}", dag.release_time());
    out.push_str("TASKS\n");
    for t in dag.tasks() {
        let _ = write!(out, "{} {} {}", t.id.0, t.machine, t.load);
        for m in &t.metaflow_deps {
            let _ = write!(out, " mf:{}", m.0);
        }
        for d in &t.task_deps {
            let _ = write!(out, " task:{}", d.0);
        }
        out.push('\n');
    }
    out.push_str("METAFLOWS\n");
    for m in dag.metaflows() {
        let _ = writeln!(out, "{} {}", m.id.0, m.consumer_task.0);
    }
    out.push_str("FLOWS\n");
    for f in dag.flows() {
        let _ = write!(out, "{} {} {} {} {}", f.id.0, f.metaflow.0, f.src, f.dst, f.size_total);
        if f.size_remaining != f.size_total {
            let _ = write!(out, " {}", f.size_remaining);
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Tasks,
    Metaflows,
    Flows,
}

#[derive(Default)]
struct Doc {
    start: usize,
    job: Option<u32>,
    release: Option<f64>,
    tasks: Vec<TaskSpec>,
    metaflows: Vec<MetaflowSpec>,
    flows: Vec<FlowSpec>,
}

fn syntax(line: usize, msg: impl Into<String>) -> DagFileError {
    DagFileError::Syntax { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, DagFileError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("bad {what} {tok:?}")))
}

impl Doc {
    fn finish(self) -> Result<JobDag, DagFileError> {
        let job = self.job.ok_or_else(|| syntax(self.start, "document has no JOB line"))?;
        JobDag::build(
            JobId(job),
            self.release.unwrap_or(0.0),
            self.tasks,
            self.metaflows,
            self.flows,
        )
        .map_err(|source| DagFileError::Invalid { line: self.start, source })
    }
}

/// Parses every document in `text`.
pub fn parse_dags(text: &str) -> Result<Vec<JobDag>, DagFileError> {
    let mut out = Vec::new();
    let mut doc: Option<(Doc, Section)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().expect("non-empty line");
        let (d, section) = match doc.as_mut() {
            None => {
                if head != "JOB" {
                    return Err(syntax(line, format!("expected JOB, found {head:?}")));
                }
                let id: u32 = field(toks.next(), line, "job id")?;
                if toks.next().is_some() {
                    return Err(syntax(line, "trailing fields after JOB id"));
                }
                doc = Some((
                    Doc {
                        start: line,
                        job: Some(id),
                        ..Default::default()
                    },
                    Section::Header,
                ));
                continue;
            }
            Some((d, s)) => (d, s),
        };
        match head {
            "JOB" => return Err(syntax(line, "JOB inside an unterminated document")),
            "RELEASE" => {
                if d.release.is_some() {
                    return Err(syntax(line, "duplicate RELEASE"));
                }
                d.release = Some(field(toks.next(), line, "release time")?);
            }
            "TASKS" => *section = Section::Tasks,
            "METAFLOWS" => *section = Section::Metaflows,
            "FLOWS" => *section = Section::Flows,
            "END" => {
                let (d, _) = doc.take().expect("open document");
                out.push(d.finish()?);
                continue;
            }
            _ => {
                let mut toks = content.split_whitespace();
                match section {
                    Section::Header => return Err(syntax(line, format!("unexpected {head:?} before any section"))),
                    Section::Tasks => {
                        let id = field(toks.next(), line, "task id")?;
                        let machine = field(toks.next(), line, "machine")?;
                        let load = field(toks.next(), line, "load")?;
                        let mut spec = TaskSpec::new(id, machine, load);
                        for dep in toks {
                            match dep.split_once(':') {
                                Some(("mf", v)) => spec = spec.after_metaflows([field(Some(v), line, "metaflow dep")?]),
                                Some(("task", v)) => spec = spec.after_tasks([field(Some(v), line, "task dep")?]),
                                _ => return Err(syntax(line, format!("bad dependency {dep:?}"))),
                            }
                        }
                        d.tasks.push(spec);
                    }
                    Section::Metaflows => {
                        let id = field(toks.next(), line, "metaflow id")?;
                        let consumer = field(toks.next(), line, "consumer")?;
                        if toks.next().is_some() {
                            return Err(syntax(line, "trailing fields in metaflow row"));
                        }
                        d.metaflows.push(MetaflowSpec::new(id, consumer));
                    }
                    Section::Flows => {
                        let id = field(toks.next(), line, "flow id")?;
                        let mf = field(toks.next(), line, "metaflow")?;
                        let src = field(toks.next(), line, "src")?;
                        let dst = field(toks.next(), line, "dst")?;
                        let size = field(toks.next(), line, "size")?;
                        let mut spec = FlowSpec::new(id, mf, src, dst, size);
                        if let Some(rem) = toks.next() {
                            spec = spec.with_remaining(field(Some(rem), line, "remaining")?);
                        }
                        if toks.next().is_some() {
                            return Err(syntax(line, "trailing fields in flow row"));
                        }
                        d.flows.push(spec);
                    }
                }
            }
        }
        if matches!(head, "RELEASE" | "TASKS" | "METAFLOWS" | "FLOWS") && toks.next().is_some() {
            return Err(syntax(line, format!("trailing fields after {head}")));
        }
    }
    if let Some((d, _)) = doc {
        return Err(syntax(d.start, "document is missing END"));
    }
    if out.is_empty() {
        return Err(DagFileError::Empty);
    }
    Ok(out)
}

/// Parses a file expected to hold exactly one document.
pub fn parse_dag(text: &str) -> Result<JobDag, DagFileError> {
    let mut all = parse_dags(text)?;
    if all.len() > 1 {
        return Err(syntax(1, format!("expected one job document, found {}", all.len())));
    }
    Ok(all.remove(0))
}
