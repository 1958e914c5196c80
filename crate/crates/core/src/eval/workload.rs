//! Query workloads: named pattern graphs with positive frequencies.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, GraphError, LabelledGraph, VertexId};

pub const DEFAULT_MAX_PATTERN_EDGES: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("query {query:?}: {reason}")]
    Invalid { query: String, reason: String },
    #[error("query {query:?}: pattern is disconnected")]
    Disconnected { query: String },
    #[error("query {query:?}: {source}")]
    Graph { query: String, source: GraphError },
    #[error("workload has no queries")]
    Empty,
}

#[derive(Clone, Debug)]
pub struct QueryPattern {
    pub name: String,
    pub graph: LabelledGraph,
}

#[derive(Clone, Debug)]
pub struct WeightedQuery {
    pub pattern: QueryPattern,
    pub frequency: f64,
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub queries: Vec<WeightedQuery>,
}

#[derive(Serialize, Deserialize)]
struct WorkloadFile {
    queries: Vec<QueryRecord>,
}

#[derive(Serialize, Deserialize)]
struct QueryRecord {
    name: String,
    freq: f64,
    edges: Vec<(VertexId, String, VertexId, String)>,
}

impl QueryPattern {
    pub fn new(name: impl Into<String>, edges: &[Edge], max_edges: usize) -> Result<Self, WorkloadError> {
        let name = name.into();
        if edges.is_empty() {
            return Err(WorkloadError::Invalid {
                query: name,
                reason: "no edges".into(),
            });
        }
        let graph = LabelledGraph::from_edges(edges).map_err(|source| WorkloadError::Graph {
            query: name.clone(),
            source,
        })?;
        if graph.edge_count() > max_edges {
            return Err(WorkloadError::Invalid {
                query: name,
                reason: format!("{} edges exceeds the limit of {max_edges}", graph.edge_count()),
            });
        }
        if !graph.is_connected() {
            return Err(WorkloadError::Disconnected { query: name });
        }
        Ok(QueryPattern { name, graph })
    }
}

impl Workload {
    pub fn new(queries: Vec<WeightedQuery>) -> Result<Self, WorkloadError> {
        if queries.is_empty() {
            return Err(WorkloadError::Empty);
        }
        for q in &queries {
            if !(q.frequency.is_finite() && q.frequency > 0.0) {
                return Err(WorkloadError::Invalid {
                    query: q.pattern.name.clone(),
                    reason: format!("frequency {} is not positive", q.frequency),
                });
            }
        }
        Ok(Workload { queries })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn total_frequency(&self) -> f64 {
        self.queries.iter().map(|q| q.frequency).sum()
    }

    /// `(graph, frequency)` pairs in file order, as consumed by the trie.
    pub fn weighted_graphs(&self) -> impl Iterator<Item = (&LabelledGraph, f64)> + '_ {
        self.queries.iter().map(|q| (&q.pattern.graph, q.frequency))
    }

    pub fn parse(text: &str) -> Result<Self, WorkloadError> {
        Self::parse_with_limit(text, DEFAULT_MAX_PATTERN_EDGES)
    }

    pub fn parse_with_limit(text: &str, max_edges: usize) -> Result<Self, WorkloadError> {
        let file: WorkloadFile = serde_json::from_str(text).map_err(|e| WorkloadError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut queries = Vec::with_capacity(file.queries.len());
        for rec in file.queries {
            let edges = rec
                .edges
                .iter()
                .map(|(u, lu, v, lv)| Edge::new(*u, lu.as_str(), *v, lv.as_str()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| WorkloadError::Graph {
                    query: rec.name.clone(),
                    source,
                })?;
            queries.push(WeightedQuery {
                pattern: QueryPattern::new(rec.name, &edges, max_edges)?,
                frequency: rec.freq,
            });
        }
        Workload::new(queries)
    }

    pub fn read(path: &Path) -> Result<Self, WorkloadError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = WorkloadFile {
            queries: self
                .queries
                .iter()
                .map(|q| QueryRecord {
                    name: q.pattern.name.clone(),
                    freq: q.frequency,
                    edges: q
                        .pattern
                        .graph
                        .edges()
                        .map(|e| (e.u(), e.label_u().to_string(), e.v(), e.label_v().to_string()))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("workload serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), WorkloadError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
