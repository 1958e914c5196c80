//! Partition assignment heuristics: hashing, LDG, Fennel, and equal
//! opportunism for motif-match clusters.

use std::collections::{BTreeSet, HashMap};

use crate::graph::{Edge, EdgeKey, GraphError, PartitionId, Partitioning, VertexId};
use crate::matcher::Match;

pub const DEFAULT_ALPHA: f64 = 2.0 / 3.0;
pub const DEFAULT_BALANCE_BOUND: f64 = 1.1;
pub const DEFAULT_GAMMA: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AllocError {
    #[error("every partition is at capacity")]
    CapacityExhausted,
    #[error("invalid allocator configuration: {0}")]
    InvalidConfig(String),
    #[error("no matches to allocate")]
    EmptyMatchSet,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How the per-partition vertex capacity `C` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Capacity {
    /// A fixed `C`, typically `b·|V|/k` when `|V|` is known up front.
    Static(f64),
    /// `C = b·(assigned + placing)/k`, recomputed for every placement.
    Adaptive,
}

impl Capacity {
    /// The static capacity for a stream with `vertices` vertices in total.
    pub fn for_vertex_count(vertices: usize, k: usize, balance_bound: f64) -> Capacity {
        Capacity::Static((balance_bound * vertices as f64 / k as f64).max(1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllocatorConfig {
    pub k: usize,
    pub alpha: f64,
    pub balance_bound: f64,
    pub gamma: f64,
    pub capacity: Capacity,
    pub seed: u64,
}

impl AllocatorConfig {
    pub fn new(k: usize) -> Self {
        AllocatorConfig {
            k,
            alpha: DEFAULT_ALPHA,
            balance_bound: DEFAULT_BALANCE_BOUND,
            gamma: DEFAULT_GAMMA,
            capacity: Capacity::Adaptive,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), AllocError> {
        let bad = |m: &str| Err(AllocError::InvalidConfig(m.to_string()));
        if self.k == 0 {
            return bad("k must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(1.0..).contains(&self.balance_bound) {
            return bad("balance bound must be at least 1");
        }
        if self.gamma.is_nan() || self.gamma <= 1.0 {
            return bad("gamma must exceed 1");
        }
        if let Capacity::Static(c) = self.capacity {
            if c.is_nan() || c <= 0.0 {
                return bad("capacity must be positive");
            }
        }
        Ok(())
    }

    /// Current capacity when `placing` new vertices are about to be assigned.
    pub fn capacity_now(&self, partitioning: &Partitioning, placing: usize) -> f64 {
        match self.capacity {
            Capacity::Static(c) => c,
            Capacity::Adaptive => {
                self.balance_bound * (partitioning.assigned_count() + placing) as f64
                    / self.k as f64
            }
        }
    }

    /// Partitions that may take new vertices.
    fn eligible(&self, partitioning: &Partitioning, placing: usize) -> Result<Vec<bool>, AllocError> {
        if placing == 0 {
            return Ok(vec![true; partitioning.k()]);
        }
        let c = self.capacity_now(partitioning, placing);
        // prefer partitions that can take every new vertex without overflowing
        let fits: Vec<bool> = partitioning
            .sizes()
            .iter()
            .map(|&s| (s + placing) as f64 <= c)
            .collect();
        if fits.iter().any(|&o| o) {
            return Ok(fits);
        }
        let open: Vec<bool> = partitioning.sizes().iter().map(|&s| (s as f64) < c).collect();
        if open.iter().any(|&o| o) {
            return Ok(open);
        }
        match self.capacity {
            Capacity::Static(_) => Err(AllocError::CapacityExhausted),
            // cannot happen unless b = 1 and all sizes are equal
            Capacity::Adaptive => Ok(vec![true; partitioning.k()]),
        }
    }
}

/// Adjacency of the stream seen so far, used by the neighbour-counting
/// heuristics.
#[derive(Clone, Debug, Default)]
pub struct NeighbourIndex {
    adjacency: HashMap<VertexId, Vec<VertexId>>,
    edges: usize,
}

impl NeighbourIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records an edge. Callers must not observe the same edge twice.
    pub fn observe(&mut self, e: &Edge) {
        self.adjacency.entry(e.u()).or_default().push(e.v());
        self.adjacency.entry(e.v()).or_default().push(e.u());
        self.edges += 1;
    }

    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        self.adjacency.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// `N(S_i, e)` for every partition: neighbours of `e`'s endpoints that
    /// are assigned to `S_i`.
    pub fn neighbour_counts(&self, e: &Edge, partitioning: &Partitioning) -> Vec<usize> {
        let mut counts = vec![0; partitioning.k()];
        for x in [e.u(), e.v()] {
            for &y in self.neighbours(x) {
                if let Some(p) = partitioning.partition_of(y) {
                    counts[p] += 1;
                }
            }
        }
        counts
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Fibonacci hashing of the seeded id onto `[0, k)`.
pub fn hash_assign(v: VertexId, cfg: &AllocatorConfig) -> PartitionId {
    let h = v
        .wrapping_add(splitmix64(cfg.seed))
        .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((h as u128 * cfg.k as u128) >> 64) as PartitionId
}

/// Index of the best score, breaking ties by smaller size, then lower index.
fn argmax(scores: &[f64], eligible: &[bool], partitioning: &Partitioning) -> PartitionId {
    let mut best: Option<PartitionId> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !eligible[i] {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let better = s > scores[b]
                    || (s == scores[b] && partitioning.size(i) < partitioning.size(b));
                Some(if better { i } else { b })
            }
        };
    }
    best.expect("at least one eligible partition")
}

fn unassigned_endpoints(e: &Edge, partitioning: &Partitioning) -> usize {
    [e.u(), e.v()]
        .iter()
        .filter(|x| !partitioning.is_assigned(**x))
        .count()
}

fn place_endpoints(e: &Edge, p: PartitionId, partitioning: &mut Partitioning) -> Result<(), AllocError> {
    partitioning.assign_if_new(e.u(), p)?;
    partitioning.assign_if_new(e.v(), p)?;
    Ok(())
}

/// LDG scores `N(S_i, e)·(1 − |V(S_i)|/C)` for every partition.
pub fn ldg_scores(
    e: &Edge,
    partitioning: &Partitioning,
    neighbours: &NeighbourIndex,
    capacity: f64,
) -> Vec<f64> {
    neighbours
        .neighbour_counts(e, partitioning)
        .into_iter()
        .enumerate()
        .map(|(i, n)| n as f64 * residual(partitioning.size(i), capacity))
        .collect()
}

fn residual(size: usize, capacity: f64) -> f64 {
    (1.0 - size as f64 / capacity).max(0.0)
}

/// Linear deterministic greedy: places `e`'s unassigned endpoints where they
/// have the most neighbours, discounted by how full each partition is.
pub fn ldg_assign(
    e: &Edge,
    partitioning: &mut Partitioning,
    neighbours: &NeighbourIndex,
    cfg: &AllocatorConfig,
) -> Result<PartitionId, AllocError> {
    let placing = unassigned_endpoints(e, partitioning);
    let eligible = cfg.eligible(partitioning, placing)?;
    let capacity = cfg.capacity_now(partitioning, placing);
    let scores = ldg_scores(e, partitioning, neighbours, capacity);
    let p = argmax(&scores, &eligible, partitioning);
    place_endpoints(e, p, partitioning)?;
    Ok(p)
}

/// Fennel scores `N(S_i, e) − a·γ·|V(S_i)|^(γ−1)` with `a = m·k^(γ−1)/n^γ`
/// taken from the running edge and vertex totals.
pub fn fennel_scores(
    e: &Edge,
    partitioning: &Partitioning,
    neighbours: &NeighbourIndex,
    cfg: &AllocatorConfig,
) -> Vec<f64> {
    let m = neighbours.edge_count().max(1) as f64;
    let n = neighbours.vertex_count().max(1) as f64;
    let k = cfg.k as f64;
    let a = m * k.powf(cfg.gamma - 1.0) / n.powf(cfg.gamma);
    neighbours
        .neighbour_counts(e, partitioning)
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c as f64 - a * cfg.gamma * (partitioning.size(i) as f64).powf(cfg.gamma - 1.0)
        })
        .collect()
}

/// Fennel placement. The capacity mode is ignored: partitions above `b`
/// times the mean size are rejected.
pub fn fennel_assign(
    e: &Edge,
    partitioning: &mut Partitioning,
    neighbours: &NeighbourIndex,
    cfg: &AllocatorConfig,
) -> Result<PartitionId, AllocError> {
    let placing = unassigned_endpoints(e, partitioning);
    // Fennel's own hard limit: b times the mean partition size
    let cap = AllocatorConfig {
        capacity: Capacity::Adaptive,
        ..cfg.clone()
    };
    let eligible = cap.eligible(partitioning, placing)?;
    let scores = fennel_scores(e, partitioning, neighbours, cfg);
    let p = argmax(&scores, &eligible, partitioning);
    place_endpoints(e, p, partitioning)?;
    Ok(p)
}

/// The ration `l(S_i)`: how much of a match cluster partition `i` may bid on
/// and receive. 1 for the smallest partitions, 0 beyond `b` times the
/// smallest, `alpha·S_min/|V(S_i)|` in between.
pub fn ration(i: PartitionId, partitioning: &Partitioning, cfg: &AllocatorConfig) -> f64 {
    let s_min = partitioning.min_size();
    let size = partitioning.size(i);
    if s_min == 0 || size == s_min {
        1.0
    } else if size as f64 > s_min as f64 * cfg.balance_bound {
        0.0
    } else {
        s_min as f64 * cfg.alpha / size as f64
    }
}

/// Number of leading matches a ration admits out of `len`.
pub fn ration_prefix(ration: f64, len: usize) -> usize {
    ((ration * len as f64) - 1e-9).ceil().max(0.0) as usize
}

/// `bid(S_i, ⟨E_k, m_k⟩) = 𝒩(S_i, E_k)·(1 − |V(S_i)|/C)·supp(m_k)`, where
/// `𝒩` counts the match's vertices already assigned to `S_i`.
pub fn bid(
    i: PartitionId,
    m: &Match,
    partitioning: &Partitioning,
    capacity: f64,
) -> f64 {
    let shared = m
        .vertices()
        .into_iter()
        .filter(|v| partitioning.partition_of(*v) == Some(i))
        .count();
    shared as f64 * residual(partitioning.size(i), capacity) * m.support
}

#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub winner: PartitionId,
    /// Edges whose endpoints were placed, sorted.
    pub assigned_edges: Vec<EdgeKey>,
    /// How many of the leading matches were placed.
    pub prefix: usize,
    pub ration: f64,
    /// Set when no partition could bid and LDG placed the edge instead.
    pub fell_back: bool,
    /// Set when every rationed bid total was zero and LDG's score for the
    /// edge picked the winner.
    pub blind: bool,
}

/// Places an evicted edge and a support-ordered prefix of its matches in the
/// partition with the highest rationed bid total.
pub fn equal_opportunism(
    e: &Edge,
    matches: &[Match],
    partitioning: &mut Partitioning,
    neighbours: &NeighbourIndex,
    cfg: &AllocatorConfig,
) -> Result<Placement, AllocError> {
    if matches.is_empty() {
        return Err(AllocError::EmptyMatchSet);
    }
    let rations: Vec<f64> = (0..cfg.k).map(|i| ration(i, partitioning, cfg)).collect();
    if rations.iter().all(|&l| l == 0.0) {
        let winner = ldg_assign(e, partitioning, neighbours, cfg)?;
        return Ok(Placement {
            winner,
            assigned_edges: vec![e.key()],
            prefix: 0,
            ration: 0.0,
            fell_back: true,
            blind: false,
        });
    }
    let cluster: BTreeSet<VertexId> = matches.iter().flat_map(|m| m.vertices()).collect();
    let placing = cluster.iter().filter(|v| !partitioning.is_assigned(**v)).count();
    let eligible = cfg.eligible(partitioning, placing)?;
    let capacity = cfg.capacity_now(partitioning, placing);
    let totals: Vec<f64> = (0..cfg.k)
        .map(|i| {
            let n = ration_prefix(rations[i], matches.len());
            matches[..n]
                .iter()
                .map(|m| bid(i, m, partitioning, capacity))
                .sum()
        })
        .collect();
    let blind = totals.iter().all(|&t| t == 0.0);
    let winner = if blind {
        // every partition ties; break it the way LDG would for `e`
        argmax(&ldg_scores(e, partitioning, neighbours, capacity), &eligible, partitioning)
    } else {
        argmax(&totals, &eligible, partitioning)
    };
    let prefix = ration_prefix(rations[winner], matches.len()).max(1);
    let edges: BTreeSet<EdgeKey> = matches[..prefix]
        .iter()
        .flat_map(|m| m.edges.iter().copied())
        .chain([e.key()])
        .collect();
    for k in &edges {
        partitioning.assign_if_new(k.0, winner)?;
        partitioning.assign_if_new(k.1, winner)?;
    }
    Ok(Placement {
        winner,
        assigned_edges: edges.into_iter().collect(),
        prefix,
        ration: rations[winner],
        fell_back: false,
        blind,
    })
}
