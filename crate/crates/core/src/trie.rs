//! The traversal pattern summary trie: a DAG whose nodes are the
//! signature-distinct connected sub-graphs of the workload's query graphs.
//!
//! Each child extends its parent by one edge, and the link is keyed by the
//! factors that edge contributes. A node's support is the frequency-weighted
//! fraction of queries containing its sub-graph, so support never grows going
//! down the DAG and a threshold cut keeps an ancestor-closed sub-DAG of
//! motifs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::{self, Write};

use serde::Serialize;

use crate::graph::{Edge, GraphError, LabelledGraph, VertexId};
use crate::signature::{edge_delta, FactorMultiset, PrimeConfig, SignatureError};

pub const DEFAULT_THRESHOLD: f64 = 0.40;
/// Largest query graph the trie accepts, in edges.
pub const MAX_QUERY_EDGES: usize = 64;

const SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrieError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("query frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("query has {0} edges; at most {MAX_QUERY_EDGES} supported")]
    QueryTooLarge(usize),
    #[error("support threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportThreshold(f64);

impl SupportThreshold {
    pub fn new(t: f64) -> Result<Self, TrieError> {
        if t > 0.0 && t <= 1.0 {
            Ok(SupportThreshold(t))
        } else {
            Err(TrieError::InvalidThreshold(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SupportThreshold {
    fn default() -> Self {
        SupportThreshold(DEFAULT_THRESHOLD)
    }
}

/// Defaults to the root.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct TrieNode {
    graph: LabelledGraph,
    signature: FactorMultiset,
    weight: f64,
    children: BTreeMap<FactorMultiset, NodeId>,
    parents: BTreeSet<NodeId>,
}

impl TrieNode {
    /// First sub-graph seen with this signature.
    pub fn graph(&self) -> &LabelledGraph {
        &self.graph
    }

    pub fn signature(&self) -> &FactorMultiset {
        &self.signature
    }

    pub fn depth(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn children(&self) -> impl Iterator<Item = (&FactorMultiset, NodeId)> + '_ {
        self.children.iter().map(|(d, c)| (d, *c))
    }

    pub fn parents(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.parents.iter().copied()
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }

    pub fn parent_count(&self) -> usize {
        self.parents.len()
    }
}

#[derive(Clone, Debug)]
pub struct Trie {
    cfg: PrimeConfig,
    nodes: Vec<TrieNode>,
    index: HashMap<FactorMultiset, NodeId>,
    total_weight: f64,
}

#[derive(Serialize)]
struct NodeDump {
    depth: usize,
    support: f64,
    factor_multiset: Vec<u32>,
    child_count: usize,
    parent_count: usize,
}

impl Trie {
    pub const ROOT: NodeId = NodeId(0);

    pub fn new(cfg: PrimeConfig) -> Self {
        let root = TrieNode {
            graph: LabelledGraph::new(),
            signature: FactorMultiset::new(),
            weight: 0.0,
            children: BTreeMap::new(),
            parents: BTreeSet::new(),
        };
        let index = HashMap::from([(FactorMultiset::new(), Self::ROOT)]);
        Trie {
            cfg,
            nodes: vec![root],
            index,
            total_weight: 0.0,
        }
    }

    /// Builds a trie from `(query, frequency)` pairs.
    pub fn build<'a>(
        cfg: PrimeConfig,
        workload: impl IntoIterator<Item = (&'a LabelledGraph, f64)>,
    ) -> Result<Self, TrieError> {
        let mut trie = Trie::new(cfg);
        for (q, freq) in workload {
            trie.add_query(q, freq)?;
        }
        Ok(trie)
    }

    pub fn config(&self) -> &PrimeConfig {
        &self.cfg
    }

    pub fn node(&self, id: NodeId) -> &TrieNode {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn lookup(&self, signature: &FactorMultiset) -> Option<NodeId> {
        self.index.get(signature).copied()
    }

    pub fn support(&self, id: NodeId) -> f64 {
        if self.total_weight > 0.0 {
            self.nodes[id.0].weight / self.total_weight
        } else {
            0.0
        }
    }

    /// Deepest node, in edges.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(TrieNode::depth).max().unwrap_or(0)
    }

    /// Adds every connected sub-graph of `q` to the trie and credits each
    /// distinct signature with `frequency` once.
    pub fn add_query(&mut self, q: &LabelledGraph, frequency: f64) -> Result<(), TrieError> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(TrieError::InvalidFrequency(frequency));
        }
        if q.edge_count() == 0 {
            return Err(GraphError::Empty.into());
        }
        if !q.is_connected() {
            return Err(GraphError::Disconnected.into());
        }
        if q.edge_count() > MAX_QUERY_EDGES {
            return Err(TrieError::QueryTooLarge(q.edge_count()));
        }
        let edges: Vec<Edge> = q.edges().collect();

        // Grow connected edge subsets one edge at a time. Subsets are memoised
        // by their exact edge set: two isomorphic subsets can sit differently
        // inside q and so admit different extensions.
        let mut visited: HashMap<u64, NodeId> = HashMap::new();
        let mut queue: VecDeque<u64> = VecDeque::new();
        for (i, e) in edges.iter().enumerate() {
            let delta = edge_delta(&self.cfg, e.label_u(), 0, e.label_v(), 0)?;
            let child = self.link(Self::ROOT, delta, || {
                LabelledGraph::from_edges([e]).expect("single edge")
            });
            let mask = 1u64 << i;
            if visited.insert(mask, child).is_none() {
                queue.push_back(mask);
            }
        }
        while let Some(mask) = queue.pop_front() {
            let parent = visited[&mask];
            let mut degree: HashMap<VertexId, usize> = HashMap::new();
            for e in members(&edges, mask) {
                *degree.entry(e.u()).or_default() += 1;
                *degree.entry(e.v()).or_default() += 1;
            }
            for (j, e) in edges.iter().enumerate() {
                let bit = 1u64 << j;
                if mask & bit != 0 {
                    continue;
                }
                let (du, dv) = (
                    degree.get(&e.u()).copied().unwrap_or(0),
                    degree.get(&e.v()).copied().unwrap_or(0),
                );
                if du == 0 && dv == 0 {
                    continue;
                }
                let delta = edge_delta(&self.cfg, e.label_u(), du, e.label_v(), dv)?;
                let grown = mask | bit;
                let child = self.link(parent, delta, || {
                    LabelledGraph::from_edges(members(&edges, grown)).expect("query sub-graph")
                });
                if visited.insert(grown, child).is_none() {
                    queue.push_back(grown);
                }
            }
        }

        let hits: BTreeSet<NodeId> = visited.into_values().collect();
        for id in hits {
            self.nodes[id.0].weight += frequency;
        }
        self.nodes[Self::ROOT.0].weight += frequency;
        self.total_weight += frequency;
        Ok(())
    }

    /// Finds or creates the node `parent ⊎ delta` and links it under `parent`.
    fn link(
        &mut self,
        parent: NodeId,
        delta: FactorMultiset,
        exemplar: impl FnOnce() -> LabelledGraph,
    ) -> NodeId {
        if let Some(&c) = self.nodes[parent.0].children.get(&delta) {
            return c;
        }
        let signature = self.nodes[parent.0].signature.union(&delta);
        let child = match self.index.get(&signature) {
            Some(&c) => c,
            None => {
                let id = NodeId(self.nodes.len());
                self.nodes.push(TrieNode {
                    graph: exemplar(),
                    signature: signature.clone(),
                    weight: 0.0,
                    children: BTreeMap::new(),
                    parents: BTreeSet::new(),
                });
                self.index.insert(signature, id);
                id
            }
        };
        self.nodes[parent.0].children.insert(delta, child);
        self.nodes[child.0].parents.insert(parent);
        child
    }

    /// The child of `node` reached by adding factors `delta`, if any.
    pub fn find_child(&self, node: NodeId, delta: &FactorMultiset) -> Option<NodeId> {
        self.nodes[node.0].children.get(delta).copied()
    }

    /// The depth-one node matching a single edge labelled like `e`.
    pub fn single_edge_motif(&self, e: &Edge) -> Option<NodeId> {
        let delta = edge_delta(&self.cfg, e.label_u(), 0, e.label_v(), 0).ok()?;
        self.find_child(Self::ROOT, &delta)
    }

    /// The sub-DAG of nodes whose support reaches `threshold`, reachable from
    /// the root through surviving nodes. Node ids are renumbered.
    pub fn motif_filter(&self, threshold: SupportThreshold) -> Trie {
        let t = threshold.value();
        let mut keep: BTreeSet<NodeId> = BTreeSet::from([Self::ROOT]);
        let mut queue = VecDeque::from([Self::ROOT]);
        while let Some(n) = queue.pop_front() {
            for (_, c) in self.nodes[n.0].children() {
                if self.support(c) + SUPPORT_EPS >= t && keep.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        let remap: HashMap<NodeId, NodeId> = keep
            .iter()
            .enumerate()
            .map(|(new, old)| (*old, NodeId(new)))
            .collect();
        let nodes: Vec<TrieNode> = keep
            .iter()
            .map(|old| {
                let n = &self.nodes[old.0];
                TrieNode {
                    graph: n.graph.clone(),
                    signature: n.signature.clone(),
                    weight: n.weight,
                    children: n
                        .children
                        .iter()
                        .filter_map(|(d, c)| remap.get(c).map(|nc| (d.clone(), *nc)))
                        .collect(),
                    parents: n.parents.iter().filter_map(|p| remap.get(p).copied()).collect(),
                }
            })
            .collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.signature.clone(), NodeId(i)))
            .collect();
        Trie {
            cfg: self.cfg.clone(),
            nodes,
            index,
            total_weight: self.total_weight,
        }
    }

    /// One JSON object per node, in node-id order.
    pub fn write_json_lines(&self, mut out: impl Write) -> io::Result<()> {
        for id in self.node_ids() {
            let n = self.node(id);
            let dump = NodeDump {
                depth: n.depth(),
                support: self.support(id),
                factor_multiset: n.signature.values().map(|f| f.value()).collect(),
                child_count: n.child_count(),
                parent_count: n.parent_count(),
            };
            serde_json::to_writer(&mut out, &dump)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn members(edges: &[Edge], mask: u64) -> impl Iterator<Item = &Edge> {
    edges
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask & (1u64 << i) != 0)
        .map(|(_, e)| e)
}
