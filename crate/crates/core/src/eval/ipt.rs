//! Inter-partition traversal counting.

use std::io::{self, Write};

use serde::Serialize;

use crate::eval::iso::SubgraphFinder;
use crate::eval::workload::Workload;
use crate::graph::{LabelledGraph, Partitioning, VertexId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IptError {
    #[error("vertex {0} has no partition")]
    Unassigned(VertexId),
    #[error("baseline has zero ipt")]
    ZeroBaseline,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IptOptions {
    /// Count every raw embedding, including automorphic copies with the
    /// same edge image.
    pub count_automorphisms: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryIpt {
    pub name: String,
    pub frequency: f64,
    pub embeddings: u64,
    /// Cut edges summed over all embeddings.
    pub ipt: u64,
    pub weighted_ipt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IptReport {
    pub queries: Vec<QueryIpt>,
    pub total_embeddings: u64,
    pub total_ipt: u64,
    pub total_weighted_ipt: f64,
}

/// Embeddings of one pattern, stored as flat edge lists.
#[derive(Clone, Debug)]
struct IndexedQuery {
    name: String,
    frequency: f64,
    edges_per: usize,
    images: Vec<(VertexId, VertexId)>,
}

/// Every embedding of every workload pattern in a fixed graph, so that many
/// partitionings can be scored without re-running the search.
#[derive(Clone, Debug)]
pub struct EmbeddingIndex {
    vertices: Vec<VertexId>,
    queries: Vec<IndexedQuery>,
}

/// Label-preserving automorphisms of `q` as permutations of its sorted
/// vertex positions.
fn automorphisms(q: &LabelledGraph) -> Vec<Vec<usize>> {
    let order: Vec<VertexId> = q.vertices().map(|(v, _)| v).collect();
    let pos = |v: VertexId| order.binary_search(&v).unwrap();
    let mut out = Vec::new();
    SubgraphFinder::new(q).for_each(q, |pairs| {
        let mut perm = vec![0; order.len()];
        for &(a, b) in pairs {
            perm[pos(a)] = pos(b);
        }
        out.push(perm);
    });
    out
}

fn embeddings_of(g: &LabelledGraph, q: &LabelledGraph, options: IptOptions) -> (usize, Vec<(VertexId, VertexId)>) {
    let order: Vec<VertexId> = q.vertices().map(|(v, _)| v).collect();
    let pos = |v: VertexId| order.binary_search(&v).unwrap();
    let q_edges: Vec<(usize, usize)> = q.edges().map(|e| (pos(e.u()), pos(e.v()))).collect();
    let auts: Vec<Vec<usize>> = if options.count_automorphisms {
        Vec::new()
    } else {
        automorphisms(q)
            .into_iter()
            .filter(|p| p.iter().enumerate().any(|(i, &j)| i != j))
            .collect()
    };
    let mut image = vec![0; order.len()];
    let mut images = Vec::new();
    SubgraphFinder::new(g).for_each(q, |pairs| {
        for &(a, b) in pairs {
            image[pos(a)] = b;
        }
        // keep the lexicographically least member of each automorphism orbit
        let canonical = auts.iter().all(|perm| {
            let permuted = perm.iter().map(|&j| image[j]);
            image.iter().copied().cmp(permuted) != std::cmp::Ordering::Greater
        });
        if canonical {
            images.extend(q_edges.iter().map(|&(a, b)| (image[a], image[b])));
        }
    });
    (q_edges.len(), images)
}

impl EmbeddingIndex {
    pub fn build(g: &LabelledGraph, workload: &Workload, options: IptOptions) -> Self {
        let queries = workload
            .queries
            .iter()
            .map(|wq| {
                let (edges_per, images) = embeddings_of(g, &wq.pattern.graph, options);
                IndexedQuery {
                    name: wq.pattern.name.clone(),
                    frequency: wq.frequency,
                    edges_per,
                    images,
                }
            })
            .collect();
        EmbeddingIndex {
            vertices: g.vertices().map(|(v, _)| v).collect(),
            queries,
        }
    }

    pub fn embedding_count(&self) -> u64 {
        self.queries
            .iter()
            .map(|q| (q.images.len() / q.edges_per) as u64)
            .sum()
    }

    pub fn ipt(&self, partitioning: &Partitioning) -> Result<IptReport, IptError> {
        if let Some(v) = self.vertices.iter().find(|v| !partitioning.is_assigned(**v)) {
            return Err(IptError::Unassigned(*v));
        }
        let queries: Vec<QueryIpt> = self
            .queries
            .iter()
            .map(|q| {
                let ipt = q
                    .images
                    .iter()
                    .filter(|(a, b)| partitioning.partition_of(*a) != partitioning.partition_of(*b))
                    .count() as u64;
                QueryIpt {
                    name: q.name.clone(),
                    frequency: q.frequency,
                    embeddings: (q.images.len() / q.edges_per) as u64,
                    ipt,
                    weighted_ipt: q.frequency * ipt as f64,
                }
            })
            .collect();
        Ok(IptReport {
            total_embeddings: queries.iter().map(|q| q.embeddings).sum(),
            total_ipt: queries.iter().map(|q| q.ipt).sum(),
            total_weighted_ipt: queries.iter().map(|q| q.weighted_ipt).sum(),
            queries,
        })
    }
}

/// Embedding count and cut-edge sum for one pattern.
pub fn query_ipt(
    g: &LabelledGraph,
    q: &LabelledGraph,
    partitioning: &Partitioning,
    options: IptOptions,
) -> (u64, u64) {
    let (per, images) = embeddings_of(g, q, options);
    let cut = images
        .iter()
        .filter(|(a, b)| partitioning.partition_of(*a) != partitioning.partition_of(*b))
        .count() as u64;
    ((images.len() / per) as u64, cut)
}

pub fn count_ipt(
    g: &LabelledGraph,
    partitioning: &Partitioning,
    workload: &Workload,
    options: IptOptions,
) -> Result<IptReport, IptError> {
    if let Some((v, _)) = g.vertices().find(|(v, _)| !partitioning.is_assigned(*v)) {
        return Err(IptError::Unassigned(v));
    }
    EmbeddingIndex::build(g, workload, options).ipt(partitioning)
}

/// `report` as a percentage of `baseline`, by weighted totals.
pub fn relative_ipt(report: &IptReport, baseline: &IptReport) -> Result<f64, IptError> {
    if baseline.total_weighted_ipt <= 0.0 {
        return Err(IptError::ZeroBaseline);
    }
    Ok(100.0 * report.total_weighted_ipt / baseline.total_weighted_ipt)
}

impl IptReport {
    /// CSV with header `query,embeddings,ipt,weighted_ipt` and a trailing
    /// `total` row. With a baseline a `relative_pct` column is appended.
    pub fn write_csv(&self, baseline: Option<&IptReport>, mut out: impl Write) -> io::Result<()> {
        let rel = baseline.map(|b| relative_ipt(self, b));
        write!(out, "query,embeddings,ipt,weighted_ipt")?;
        if rel.is_some() {
            write!(out, ",relative_pct")?;
        }
        writeln!(out)?;
        for q in &self.queries {
            writeln!(out, "{},{},{},{}", q.name, q.embeddings, q.ipt, q.weighted_ipt)?;
        }
        write!(
            out,
            "total,{},{},{}",
            self.total_embeddings, self.total_ipt, self.total_weighted_ipt
        )?;
        match rel {
            Some(Ok(pct)) => write!(out, ",{pct:.4}")?,
            Some(Err(_)) => write!(out, ",NA")?,
            None => {}
        }
        writeln!(out)
    }
}
