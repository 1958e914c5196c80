//! Labelled, undirected graphs and vertex partitionings.
//!
//! The same [`LabelledGraph`] type represents the data graph, query graphs,
//! window sub-graphs and the exemplar graphs stored in the pattern trie.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use smol_str::SmolStr;

pub type VertexId = u64;
pub type PartitionId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {vertex} already labelled `{existing}`, got `{new}`")]
    LabelConflict {
        vertex: VertexId,
        existing: Label,
        new: Label,
    },
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("edge set is empty")]
    Empty,
    #[error("edge set does not form a connected graph")]
    Disconnected,
    #[error("vertex {vertex} is already assigned to partition {partition}")]
    AlreadyAssigned {
        vertex: VertexId,
        partition: PartitionId,
    },
    #[error("partition {partition} out of range for k = {k}")]
    PartitionOutOfRange { partition: PartitionId, k: usize },
}

/// A vertex label drawn from a small finite alphabet.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(SmolStr);

impl Label {
    pub fn new(name: &str) -> Self {
        Label(SmolStr::new(name))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

/// An undirected labelled edge.
///
/// Endpoints are stored with the smaller id first, so `Edge(u, v)` and
/// `Edge(v, u)` compare and hash equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
    label_u: Label,
    label_v: Label,
}

impl Edge {
    pub fn new(
        u: VertexId,
        label_u: impl Into<Label>,
        v: VertexId,
        label_v: impl Into<Label>,
    ) -> Result<Self, GraphError> {
        let (label_u, label_v) = (label_u.into(), label_v.into());
        match u.cmp(&v) {
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(u)),
            std::cmp::Ordering::Less => Ok(Edge {
                u,
                v,
                label_u,
                label_v,
            }),
            std::cmp::Ordering::Greater => Ok(Edge {
                u: v,
                v: u,
                label_u: label_v,
                label_v: label_u,
            }),
        }
    }

    /// Lower endpoint id.
    pub fn u(&self) -> VertexId {
        self.u
    }

    /// Higher endpoint id.
    pub fn v(&self) -> VertexId {
        self.v
    }

    pub fn label_u(&self) -> &Label {
        &self.label_u
    }

    pub fn label_v(&self) -> &Label {
        &self.label_v
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey(self.u, self.v)
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }

    pub fn label_of(&self, x: VertexId) -> Option<&Label> {
        if x == self.u {
            Some(&self.label_u)
        } else if x == self.v {
            Some(&self.label_v)
        } else {
            None
        }
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}-{}:{})", self.u, self.label_u, self.v, self.label_v)
    }
}

/// Orientation-free identity of an edge, without labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct EdgeKey(pub VertexId, pub VertexId);

impl EdgeKey {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.0 == x || self.1 == x
    }
}

/// An edge tagged with its position in a stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamEdge {
    pub edge: Edge,
    pub arrival_index: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelledGraph {
    vertices: BTreeMap<VertexId, Label>,
    adjacency: BTreeMap<VertexId, BTreeSet<VertexId>>,
    edge_count: usize,
}

impl LabelledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> Result<Self, GraphError> {
        let mut g = LabelledGraph::new();
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    /// Adds a vertex, or checks its label if it is already present.
    pub fn add_vertex(&mut self, v: VertexId, label: Label) -> Result<(), GraphError> {
        match self.vertices.get(&v) {
            Some(existing) if *existing != label => Err(GraphError::LabelConflict {
                vertex: v,
                existing: existing.clone(),
                new: label,
            }),
            Some(_) => Ok(()),
            None => {
                self.vertices.insert(v, label);
                self.adjacency.entry(v).or_default();
                Ok(())
            }
        }
    }

    /// Inserts `e`, returning `false` if it was already present.
    pub fn add_edge(&mut self, e: &Edge) -> Result<bool, GraphError> {
        for (x, l) in [(e.u, &e.label_u), (e.v, &e.label_v)] {
            if let Some(existing) = self.vertices.get(&x) {
                if existing != l {
                    return Err(GraphError::LabelConflict {
                        vertex: x,
                        existing: existing.clone(),
                        new: l.clone(),
                    });
                }
            }
        }
        self.add_vertex(e.u, e.label_u.clone())?;
        self.add_vertex(e.v, e.label_v.clone())?;
        let fresh = self.adjacency.get_mut(&e.u).expect("vertex added").insert(e.v);
        if fresh {
            self.adjacency.get_mut(&e.v).expect("vertex added").insert(e.u);
            self.edge_count += 1;
        }
        Ok(fresh)
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        self.adjacency
            .get(&v)
            .map(BTreeSet::len)
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn label(&self, v: VertexId) -> Option<&Label> {
        self.vertices.get(&v)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn contains_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices in ascending id order with their labels.
    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Label)> + '_ {
        self.vertices.iter().map(|(v, l)| (*v, l))
    }

    /// Every edge once, in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency.iter().flat_map(move |(&u, ns)| {
            ns.range(u + 1..).map(move |&v| Edge {
                u,
                v,
                label_u: self.vertices[&u].clone(),
                label_v: self.vertices[&v].clone(),
            })
        })
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.vertices.values().cloned().collect()
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.keys().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == self.vertices.len()
    }
}

/// Builds the graph spanned by `edges`, failing unless it is connected.
pub fn connected_subgraph<'a>(
    edges: impl IntoIterator<Item = &'a Edge>,
) -> Result<LabelledGraph, GraphError> {
    let g = LabelledGraph::from_edges(edges)?;
    if g.edge_count() == 0 {
        return Err(GraphError::Empty);
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    Ok(g)
}

/// A vertex-centric k-way partitioning. Assignment is write-once.
#[derive(Clone, Debug)]
pub struct Partitioning {
    k: usize,
    assignment: HashMap<VertexId, PartitionId>,
    sizes: Vec<usize>,
}

impl Partitioning {
    pub fn new(k: usize) -> Self {
        assert!(k > 0, "partition count must be positive");
        Partitioning {
            k,
            assignment: HashMap::new(),
            sizes: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assign(&mut self, v: VertexId, p: PartitionId) -> Result<(), GraphError> {
        if p >= self.k {
            return Err(GraphError::PartitionOutOfRange {
                partition: p,
                k: self.k,
            });
        }
        if let Some(&existing) = self.assignment.get(&v) {
            return Err(GraphError::AlreadyAssigned {
                vertex: v,
                partition: existing,
            });
        }
        self.assignment.insert(v, p);
        self.sizes[p] += 1;
        Ok(())
    }

    /// Assigns `v` to `p` unless it already has a partition. Returns whether
    /// an assignment happened.
    pub fn assign_if_new(&mut self, v: VertexId, p: PartitionId) -> Result<bool, GraphError> {
        if self.assignment.contains_key(&v) {
            return Ok(false);
        }
        self.assign(v, p).map(|_| true)
    }

    pub fn partition_of(&self, v: VertexId) -> Option<PartitionId> {
        self.assignment.get(&v).copied()
    }

    pub fn is_assigned(&self, v: VertexId) -> bool {
        self.assignment.contains_key(&v)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, p: PartitionId) -> usize {
        self.sizes[p]
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.len()
    }

    /// Size of the smallest partition.
    pub fn min_size(&self) -> usize {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    /// Largest partition relative to a perfectly even split; 1.0 is balanced.
    pub fn imbalance(&self) -> f64 {
        let total = self.assignment.len();
        if total == 0 {
            return 1.0;
        }
        let max = self.sizes.iter().copied().max().unwrap_or(0);
        max as f64 * self.k as f64 / total as f64
    }

    /// `(vertex, partition)` pairs sorted by vertex id.
    pub fn sorted_assignment(&self) -> Vec<(VertexId, PartitionId)> {
        let mut out: Vec<_> = self.assignment.iter().map(|(&v, &p)| (v, p)).collect();
        out.sort_unstable();
        out
    }
}
