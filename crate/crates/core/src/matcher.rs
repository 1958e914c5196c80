//! Sliding-window motif matching over an edge stream.
//!
//! Edges that match a single-edge motif are buffered in a FIFO window. Each
//! buffered edge is indexed as a one-edge match, then grown into larger
//! matches by extending existing matches it touches, and by joining a match
//! that contains it with a disjoint match on its other side. A match is only
//! ever extended along trie links, so every recorded match is signature-equal
//! to a motif.
//!
//! When the window overflows, the oldest edge is evicted together with every
//! match containing it, ordered by descending motif support.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::graph::{Edge, EdgeKey, StreamEdge, VertexId};
use crate::signature::edge_delta;
use crate::trie::{NodeId, Trie};

pub const DEFAULT_WINDOW: usize = 10_000;
pub const DEFAULT_MAX_MATCHES_PER_VERTEX: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatcherError {
    #[error("edge {0:?} is already buffered")]
    AlreadyBuffered(EdgeKey),
    #[error("window capacity must be at least one edge")]
    ZeroWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchId(pub u64);

/// A connected set of window edges that matches a motif.
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub id: MatchId,
    /// Sorted edge keys.
    pub edges: Vec<EdgeKey>,
    pub node: NodeId,
    pub support: f64,
}

impl Match {
    pub fn contains(&self, e: EdgeKey) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.edges.iter().flat_map(|e| [e.0, e.1]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// An edge leaving the window and the matches it took part in.
#[derive(Clone, Debug)]
pub struct Eviction {
    pub edge: Edge,
    /// Descending support, then fewer edges, then creation order.
    pub matches: Vec<Match>,
}

#[derive(Clone, Debug)]
pub enum IngestOutcome {
    /// The edge can never be part of a motif match.
    ImmediateAssign(Edge),
    Buffered {
        new_matches: Vec<Match>,
    },
    BufferedWithEviction {
        new_matches: Vec<Match>,
        eviction: Eviction,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct MatcherConfig {
    pub window: usize,
    pub max_matches_per_vertex: usize,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            window: DEFAULT_WINDOW,
            max_matches_per_vertex: DEFAULT_MAX_MATCHES_PER_VERTEX,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatchListStats {
    pub window_fill: usize,
    pub vertices_indexed: usize,
    pub matches: usize,
    pub max_match_edges: usize,
}

struct Buffered {
    edge: Edge,
    arrival: u64,
}

pub struct StreamMatcher {
    trie: Trie,
    config: MatcherConfig,
    fifo: VecDeque<EdgeKey>,
    live: HashMap<EdgeKey, Buffered>,
    matches: HashMap<MatchId, Match>,
    by_vertex: HashMap<VertexId, Vec<MatchId>>,
    by_edge: HashMap<EdgeKey, Vec<MatchId>>,
    by_edge_set: HashMap<Vec<EdgeKey>, MatchId>,
    next_id: u64,
    overflow: u64,
}

impl StreamMatcher {
    /// `motifs` should be a motif-filtered trie.
    pub fn new(motifs: Trie, config: MatcherConfig) -> Result<Self, MatcherError> {
        if config.window == 0 {
            return Err(MatcherError::ZeroWindow);
        }
        Ok(StreamMatcher {
            trie: motifs,
            config,
            fifo: VecDeque::new(),
            live: HashMap::new(),
            matches: HashMap::new(),
            by_vertex: HashMap::new(),
            by_edge: HashMap::new(),
            by_edge_set: HashMap::new(),
            next_id: 0,
            overflow: 0,
        })
    }

    pub fn trie(&self) -> &Trie {
        &self.trie
    }

    pub fn window_len(&self) -> usize {
        self.live.len()
    }

    pub fn is_buffered(&self, e: EdgeKey) -> bool {
        self.live.contains_key(&e)
    }

    /// Matches dropped because a vertex hit the per-vertex cap.
    pub fn overflow_events(&self) -> u64 {
        self.overflow
    }

    pub fn ingest(&mut self, se: StreamEdge) -> Result<IngestOutcome, MatcherError> {
        let StreamEdge { edge, arrival_index } = se;
        let Some(single) = self.trie.single_edge_motif(&edge) else {
            return Ok(IngestOutcome::ImmediateAssign(edge));
        };
        let key = edge.key();
        if self.live.contains_key(&key) {
            return Err(MatcherError::AlreadyBuffered(key));
        }
        let (u, v) = (edge.u(), edge.v());
        let before: Vec<MatchId> = self.ids_at(&[u, v]);
        self.fifo.push_back(key);
        self.live.insert(
            key,
            Buffered {
                edge,
                arrival: arrival_index,
            },
        );

        let mut fresh: Vec<MatchId> = Vec::new();
        fresh.extend(self.record(vec![key], single));

        // Grow every touching match by the new edge.
        for id in &before {
            let m = &self.matches[id];
            if let Some((edges, node)) = self.extend_by(&m.edges, m.node, key) {
                fresh.extend(self.record(edges, node));
            }
        }

        // Join a match containing the new edge with an edge-disjoint match
        // hanging off either endpoint.
        let with_new = fresh.clone();
        let others: Vec<MatchId> = self
            .ids_at(&[u, v])
            .into_iter()
            .filter(|id| !self.matches[id].contains(key))
            .collect();
        for a in &with_new {
            for b in &others {
                let (ma, mb) = (&self.matches[a], &self.matches[b]);
                if ma.edges.iter().any(|e| mb.contains(*e)) {
                    continue;
                }
                let (big, small) = if (ma.edges.len(), -ma.support) >= (mb.edges.len(), -mb.support) {
                    (ma, mb)
                } else {
                    (mb, ma)
                };
                if let Some((edges, node)) = self.join(big, small) {
                    fresh.extend(self.record(edges, node));
                }
            }
        }

        let new_matches = fresh.iter().map(|id| self.matches[id].clone()).collect();
        if self.live.len() > self.config.window {
            let eviction = self.evict_oldest().expect("window non-empty");
            Ok(IngestOutcome::BufferedWithEviction {
                new_matches,
                eviction,
            })
        } else {
            Ok(IngestOutcome::Buffered { new_matches })
        }
    }

    /// Evicts the oldest buffered edge, if any. Used to drain the window at
    /// the end of a stream.
    pub fn flush_next(&mut self) -> Option<Eviction> {
        self.evict_oldest()
    }

    /// Removes assigned edges from the window, along with every match that
    /// contains one of them. Returns how many edges were buffered.
    pub fn purge_assigned(&mut self, assigned: &[EdgeKey]) -> usize {
        let mut removed = 0;
        for key in assigned {
            if self.live.remove(key).is_some() {
                removed += 1;
            }
            for id in self.by_edge.remove(key).unwrap_or_default() {
                self.drop_match(id);
            }
        }
        removed
    }

    /// Matches indexed under `v`, in creation order.
    pub fn matches_at(&self, v: VertexId) -> Vec<&Match> {
        self.by_vertex
            .get(&v)
            .map(|ids| ids.iter().map(|id| &self.matches[id]).collect())
            .unwrap_or_default()
    }

    /// All current matches, in creation order.
    pub fn all_matches(&self) -> Vec<&Match> {
        let mut out: Vec<&Match> = self.matches.values().collect();
        out.sort_by_key(|m| m.id);
        out
    }

    /// Buffered edges, oldest first.
    pub fn window_edges(&self) -> Vec<Edge> {
        let mut out: Vec<&Buffered> = self.live.values().collect();
        out.sort_by_key(|b| b.arrival);
        out.into_iter().map(|b| b.edge.clone()).collect()
    }

    /// Distinct vertices touched by buffered edges.
    pub fn window_vertex_count(&self) -> usize {
        let vs: HashSet<VertexId> = self.live.keys().flat_map(|k| [k.0, k.1]).collect();
        vs.len()
    }

    pub fn stats(&self) -> MatchListStats {
        MatchListStats {
            window_fill: self.live.len(),
            vertices_indexed: self.by_vertex.len(),
            matches: self.matches.len(),
            max_match_edges: self.matches.values().map(|m| m.edges.len()).max().unwrap_or(0),
        }
    }

    /// Checks the index invariants; returns a description of the first
    /// violation found.
    pub fn verify(&self) -> Result<(), String> {
        if self.live.len() > self.config.window {
            return Err(format!("window holds {} edges", self.live.len()));
        }
        for m in self.matches.values() {
            for e in &m.edges {
                if !self.live.contains_key(e) {
                    return Err(format!("match {:?} holds evicted edge {e:?}", m.id));
                }
                if !self.by_edge.get(e).is_some_and(|ids| ids.contains(&m.id)) {
                    return Err(format!("match {:?} missing from edge index", m.id));
                }
            }
            for v in m.vertices() {
                if !self.by_vertex.get(&v).is_some_and(|ids| ids.contains(&m.id)) {
                    return Err(format!("match {:?} missing at vertex {v}", m.id));
                }
            }
        }
        for (v, ids) in &self.by_vertex {
            if ids.is_empty() {
                return Err(format!("empty entry for vertex {v}"));
            }
            for id in ids {
                let m = self.matches.get(id).ok_or(format!("dangling {id:?} at {v}"))?;
                if !m.edges.iter().any(|e| e.touches(*v)) {
                    return Err(format!("match {id:?} indexed at foreign vertex {v}"));
                }
            }
        }
        Ok(())
    }

    fn ids_at(&self, vs: &[VertexId]) -> Vec<MatchId> {
        let mut ids: Vec<MatchId> = vs
            .iter()
            .filter_map(|v| self.by_vertex.get(v))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn labelled(&self, key: EdgeKey) -> &Edge {
        &self.live[&key].edge
    }

    /// Follows the trie link for adding `key` to the match `(edges, node)`.
    fn extend_by(
        &self,
        edges: &[EdgeKey],
        node: NodeId,
        key: EdgeKey,
    ) -> Option<(Vec<EdgeKey>, NodeId)> {
        let e = self.labelled(key);
        let deg = |x: VertexId| edges.iter().filter(|k| k.touches(x)).count();
        let (du, dv) = (deg(e.u()), deg(e.v()));
        if du == 0 && dv == 0 {
            return None;
        }
        let delta = edge_delta(self.trie.config(), e.label_u(), du, e.label_v(), dv).ok()?;
        let child = self.trie.find_child(node, &delta)?;
        let mut grown = edges.to_vec();
        let at = grown.binary_search(&key).err()?;
        grown.insert(at, key);
        Some((grown, child))
    }

    /// Absorbs the edges of `small` into `big` one at a time along trie
    /// links; succeeds only if every edge is absorbed.
    fn join(&self, big: &Match, small: &Match) -> Option<(Vec<EdgeKey>, NodeId)> {
        if small.edges.len() >= 64 {
            return None;
        }
        let full = (1u64 << small.edges.len()) - 1;
        let mut failed: HashSet<u64> = HashSet::new();
        self.absorb(&big.edges, big.node, &small.edges, full, &mut failed)
    }

    fn absorb(
        &self,
        edges: &[EdgeKey],
        node: NodeId,
        pool: &[EdgeKey],
        remaining: u64,
        failed: &mut HashSet<u64>,
    ) -> Option<(Vec<EdgeKey>, NodeId)> {
        if remaining == 0 {
            return Some((edges.to_vec(), node));
        }
        if failed.contains(&remaining) {
            return None;
        }
        for (i, key) in pool.iter().enumerate() {
            if remaining & (1 << i) == 0 {
                continue;
            }
            if let Some((grown, child)) = self.extend_by(edges, node, *key) {
                if let Some(done) = self.absorb(&grown, child, pool, remaining & !(1 << i), failed)
                {
                    return Some(done);
                }
            }
        }
        failed.insert(remaining);
        None
    }

    fn record(&mut self, edges: Vec<EdgeKey>, node: NodeId) -> Option<MatchId> {
        if self.by_edge_set.contains_key(&edges) {
            return None;
        }
        let m = Match {
            id: MatchId(self.next_id),
            support: self.trie.support(node),
            node,
            edges,
        };
        let vertices = m.vertices();
        let cap = self.config.max_matches_per_vertex;
        if vertices
            .iter()
            .any(|v| self.by_vertex.get(v).is_some_and(|ids| ids.len() >= cap))
        {
            self.overflow += 1;
            return None;
        }
        self.next_id += 1;
        for v in vertices {
            self.by_vertex.entry(v).or_default().push(m.id);
        }
        for e in &m.edges {
            self.by_edge.entry(*e).or_default().push(m.id);
        }
        self.by_edge_set.insert(m.edges.clone(), m.id);
        let id = m.id;
        self.matches.insert(id, m);
        Some(id)
    }

    fn drop_match(&mut self, id: MatchId) {
        let Some(m) = self.matches.remove(&id) else {
            return;
        };
        self.by_edge_set.remove(&m.edges);
        for v in m.vertices() {
            if let Some(ids) = self.by_vertex.get_mut(&v) {
                ids.retain(|x| *x != id);
                if ids.is_empty() {
                    self.by_vertex.remove(&v);
                }
            }
        }
        for e in &m.edges {
            if let Some(ids) = self.by_edge.get_mut(e) {
                ids.retain(|x| *x != id);
                if ids.is_empty() {
                    self.by_edge.remove(e);
                }
            }
        }
    }

    fn evict_oldest(&mut self) -> Option<Eviction> {
        let key = loop {
            let key = self.fifo.pop_front()?;
            if self.live.contains_key(&key) {
                break key;
            }
        };
        let edge = self.live.remove(&key).expect("live edge").edge;
        let ids = self.by_edge.remove(&key).unwrap_or_default();
        let mut matches: Vec<Match> = ids
            .iter()
            .filter_map(|id| self.matches.get(id).cloned())
            .collect();
        for id in ids {
            self.drop_match(id);
        }
        matches.sort_by(|a, b| {
            b.support
                .total_cmp(&a.support)
                .then(a.edges.len().cmp(&b.edges.len()))
                .then(a.id.cmp(&b.id))
        });
        Some(Eviction { edge, matches })
    }
}
