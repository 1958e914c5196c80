//! Algorithm comparison matrices reported relative to hashing.

use std::io::{self, Write};
use std::thread;

use serde::Serialize;

use crate::eval::ipt::{relative_ipt, EmbeddingIndex, IptError, IptOptions};
use crate::eval::workload::Workload;
use crate::graph::Edge;
use crate::harness::order::{order_stream, Ordering};
use crate::harness::pipeline::{run_partition, Algorithm, PartitionConfig, PipelineError};
use crate::io::{format_edge, graph_of, FormatError, StreamRecord};

pub const CSV_HEADER: &str =
    "dataset,ordering,k,algorithm,ipt,relative_ipt_vs_hash,imbalance,ms_per_10k_edges,window,seed";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Ipt(#[from] IptError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("empty experiment matrix: {0}")]
    Empty(&'static str),
}

pub struct Dataset {
    pub name: String,
    pub records: Vec<StreamRecord>,
    pub workload: Workload,
}

impl Dataset {
    pub fn from_edges(name: impl Into<String>, edges: &[Edge], workload: Workload) -> Self {
        let records = edges
            .iter()
            .enumerate()
            .map(|(i, e)| StreamRecord {
                line: i + 1,
                raw: format_edge(e),
                edge: e.clone(),
            })
            .collect();
        Dataset {
            name: name.into(),
            records,
            workload,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentMatrix {
    pub orderings: Vec<Ordering>,
    pub ks: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Window sizes tried for loom. Other algorithms run once.
    pub windows: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Every other knob.
    pub base: PartitionConfig,
    /// Upper bound on concurrent runs; 0 picks the core count.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub ordering: Ordering,
    pub k: usize,
    pub algorithm: Algorithm,
    pub ipt: f64,
    pub relative_ipt_vs_hash: f64,
    pub imbalance: f64,
    pub ms_per_10k_edges: Option<f64>,
    pub window: Option<usize>,
    pub seed: u64,
}

struct Prepared<'a> {
    data: &'a Dataset,
    index: EmbeddingIndex,
}

fn run_group(
    p: &Prepared<'_>,
    ordering: Ordering,
    k: usize,
    seed: u64,
    m: &ExperimentMatrix,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let ordered = order_stream(&p.data.records, ordering, seed);
    let stream: Vec<Edge> = ordered.into_iter().map(|r| r.edge).collect();
    let mut runs: Vec<(Algorithm, Option<usize>)> = vec![(Algorithm::Hash, None)];
    for &a in &m.algorithms {
        match a {
            Algorithm::Hash => {}
            Algorithm::Loom => runs.extend(m.windows.iter().map(|w| (a, Some(*w)))),
            _ => runs.push((a, None)),
        }
    }
    let mut rows = Vec::with_capacity(runs.len());
    let mut baseline = None;
    for (algorithm, window) in runs {
        let cfg = PartitionConfig {
            k,
            algorithm,
            seed,
            window: window.unwrap_or(m.base.window),
            ..m.base.clone()
        };
        let out = run_partition(&stream, &p.data.workload, &cfg)?;
        let report = p.index.ipt(&out.partitioning)?;
        let base = baseline.get_or_insert_with(|| report.clone());
        let relative = relative_ipt(&report, base).unwrap_or(f64::NAN);
        if algorithm == Algorithm::Hash && !m.algorithms.contains(&Algorithm::Hash) {
            continue;
        }
        rows.push(ExperimentRow {
            dataset: p.data.name.clone(),
            ordering,
            k,
            algorithm,
            ipt: report.total_weighted_ipt,
            relative_ipt_vs_hash: relative,
            imbalance: out.metrics.imbalance,
            ms_per_10k_edges: out.metrics.ms_per_10k_edges,
            window,
            seed,
        });
    }
    Ok(rows)
}

/// Runs every dataset × ordering × k × seed group. Each group runs hash
/// first as the baseline. Rows come back in matrix order regardless of
/// scheduling.
pub fn run_experiment(datasets: &[Dataset], m: &ExperimentMatrix) -> Result<Vec<ExperimentRow>, ExperimentError> {
    if datasets.is_empty() {
        return Err(ExperimentError::Empty("datasets"));
    }
    for (what, n) in [
        ("orderings", m.orderings.len()),
        ("k values", m.ks.len()),
        ("algorithms", m.algorithms.len()),
        ("seeds", m.seeds.len()),
    ] {
        if n == 0 {
            return Err(ExperimentError::Empty(what));
        }
    }
    if m.algorithms.contains(&Algorithm::Loom) && m.windows.is_empty() {
        return Err(ExperimentError::Empty("windows"));
    }
    let prepared: Vec<Prepared> = datasets
        .iter()
        .map(|d| {
            let graph = graph_of(&d.records)?;
            let index = EmbeddingIndex::build(&graph, &d.workload, IptOptions::default());
            Ok(Prepared { data: d, index })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let mut groups = Vec::new();
    for p in &prepared {
        for &o in &m.orderings {
            for &k in &m.ks {
                for &s in &m.seeds {
                    groups.push((p, o, k, s));
                }
            }
        }
    }
    let threads = if m.threads == 0 {
        thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        m.threads
    };
    let mut results: Vec<Option<Result<Vec<ExperimentRow>, ExperimentError>>> =
        (0..groups.len()).map(|_| None).collect();
    for (chunk, slots) in groups.chunks(threads).zip(results.chunks_mut(threads)) {
        thread::scope(|scope| {
            for (g, slot) in chunk.iter().zip(slots.iter_mut()) {
                scope.spawn(move || {
                    *slot = Some(run_group(g.0, g.1, g.2, g.3, m));
                });
            }
        });
    }
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r.expect("every group ran")?);
    }
    Ok(rows)
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_csv(rows: &[ExperimentRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.4},{:.6},{},{},{}",
            r.dataset,
            r.ordering,
            r.k,
            r.algorithm,
            r.ipt,
            r.relative_ipt_vs_hash,
            r.imbalance,
            opt(r.ms_per_10k_edges.map(|ms| format!("{ms:.3}"))),
            opt(r.window),
            r.seed
        )?;
    }
    Ok(())
}
