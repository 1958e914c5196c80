//! Replay orders for stored graphs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::graph::VertexId;
use crate::harness::seeds::{SeedStreams, ORDERING};
use crate::io::StreamRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    Bfs,
    Dfs,
    Random,
    AsIs,
}

impl Ordering {
    pub const ALL: [Ordering; 4] = [Ordering::Bfs, Ordering::Dfs, Ordering::Random, Ordering::AsIs];

    pub fn name(self) -> &'static str {
        match self {
            Ordering::Bfs => "bfs",
            Ordering::Dfs => "dfs",
            Ordering::Random => "random",
            Ordering::AsIs => "as-is",
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordering::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown ordering {s:?} (expected bfs, dfs, random or as-is)"))
    }
}

/// Permutes `records`. Traversal orders start from a seeded random unvisited
/// vertex in each component and emit every edge the first time the traversal
/// scans it.
pub fn order_stream(records: &[StreamRecord], ordering: Ordering, seed: u64) -> Vec<StreamRecord> {
    let mut rng = SeedStreams::new(seed).rng(ORDERING);
    let idx: Vec<usize> = match ordering {
        Ordering::AsIs => (0..records.len()).collect(),
        Ordering::Random => {
            let mut idx: Vec<usize> = (0..records.len()).collect();
            idx.shuffle(&mut rng);
            idx
        }
        Ordering::Bfs | Ordering::Dfs => {
            let mut t = Traversal::new(records);
            let mut roots = t.vertices.clone();
            roots.shuffle(&mut rng);
            for r in roots {
                if !t.discovered[t.slot[&r]] {
                    if ordering == Ordering::Bfs {
                        t.bfs(r);
                    } else {
                        t.dfs(r);
                    }
                }
            }
            t.out
        }
    };
    idx.into_iter().map(|i| records[i].clone()).collect()
}

struct Traversal<'a> {
    records: &'a [StreamRecord],
    vertices: Vec<VertexId>,
    slot: HashMap<VertexId, usize>,
    /// Record indices incident to each vertex slot, in file order.
    incident: Vec<Vec<usize>>,
    discovered: Vec<bool>,
    emitted: Vec<bool>,
    out: Vec<usize>,
}

impl<'a> Traversal<'a> {
    fn new(records: &'a [StreamRecord]) -> Self {
        let mut vertices: Vec<VertexId> = records
            .iter()
            .flat_map(|r| [r.edge.u(), r.edge.v()])
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        let slot: HashMap<VertexId, usize> =
            vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut incident = vec![Vec::new(); vertices.len()];
        for (i, r) in records.iter().enumerate() {
            incident[slot[&r.edge.u()]].push(i);
            incident[slot[&r.edge.v()]].push(i);
        }
        Traversal {
            records,
            discovered: vec![false; vertices.len()],
            emitted: vec![false; records.len()],
            out: Vec::with_capacity(records.len()),
            vertices,
            slot,
            incident,
        }
    }

    fn other(&self, rec: usize, x: usize) -> usize {
        let e = &self.records[rec].edge;
        let y = if self.slot[&e.u()] == x { e.v() } else { e.u() };
        self.slot[&y]
    }

    fn bfs(&mut self, root: VertexId) {
        let start = self.slot[&root];
        self.discovered[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for i in 0..self.incident[x].len() {
                let rec = self.incident[x][i];
                if self.emitted[rec] {
                    continue;
                }
                self.emitted[rec] = true;
                self.out.push(rec);
                let y = self.other(rec, x);
                if !self.discovered[y] {
                    self.discovered[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }

    fn dfs(&mut self, root: VertexId) {
        let start = self.slot[&root];
        self.discovered[start] = true;
        // (vertex, next incident position)
        let mut stack = vec![(start, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (x, pos) = *top;
            if pos == self.incident[x].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let rec = self.incident[x][pos];
            if self.emitted[rec] {
                continue;
            }
            self.emitted[rec] = true;
            self.out.push(rec);
            let y = self.other(rec, x);
            if !self.discovered[y] {
                self.discovered[y] = true;
                stack.push((y, 0));
            }
        }
    }
}
