//! The end-to-end partitioner: motif trie, windowed matching, allocation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alloc::{
    equal_opportunism, fennel_assign, hash_assign, ldg_assign, AllocError, AllocatorConfig,
    Capacity, NeighbourIndex, DEFAULT_ALPHA, DEFAULT_BALANCE_BOUND, DEFAULT_GAMMA,
};
use crate::eval::workload::Workload;
use crate::graph::{Edge, EdgeKey, GraphError, Label, Partitioning, StreamEdge, VertexId};
use crate::harness::seeds::{SeedStreams, HASH, RESIDUES};
use crate::matcher::{
    Eviction, IngestOutcome, MatchListStats, MatcherConfig, MatcherError, StreamMatcher,
    DEFAULT_MAX_MATCHES_PER_VERTEX, DEFAULT_WINDOW,
};
use crate::signature::{PrimeConfig, SignatureError, DEFAULT_PRIME};
use crate::trie::{SupportThreshold, Trie, TrieError, DEFAULT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hash,
    Ldg,
    Fennel,
    Loom,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Hash, Algorithm::Ldg, Algorithm::Fennel, Algorithm::Loom];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hash => "hash",
            Algorithm::Ldg => "ldg",
            Algorithm::Fennel => "fennel",
            Algorithm::Loom => "loom",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected hash, ldg, fennel or loom)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityMode {
    /// `C = b·|V|/k` with `|V|` counted from the stream up front.
    Static,
    Adaptive,
}

impl FromStr for CapacityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(CapacityMode::Static),
            "adaptive" => Ok(CapacityMode::Adaptive),
            _ => Err(format!("unknown capacity mode {s:?} (expected static or adaptive)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub k: usize,
    pub algorithm: Algorithm,
    pub window: usize,
    pub threshold: f64,
    pub prime: u32,
    pub alpha: f64,
    pub balance_bound: f64,
    pub gamma: f64,
    pub capacity: CapacityMode,
    pub seed: u64,
    pub max_matches_per_vertex: usize,
    /// Record matchList statistics every this many stream edges.
    pub stats_every: Option<usize>,
    /// Measure wall-clock time. Off, the timing metric is reported as absent
    /// so that outputs stay reproducible.
    pub timing: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            k: 8,
            algorithm: Algorithm::Loom,
            window: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
            prime: DEFAULT_PRIME,
            alpha: DEFAULT_ALPHA,
            balance_bound: DEFAULT_BALANCE_BOUND,
            gamma: DEFAULT_GAMMA,
            capacity: CapacityMode::Static,
            seed: 0,
            max_matches_per_vertex: DEFAULT_MAX_MATCHES_PER_VERTEX,
            stats_every: None,
            timing: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Trie(#[from] TrieError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Matcher(#[from] MatcherError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl PartitionConfig {
    pub fn allocator(&self, vertex_count: usize) -> AllocatorConfig {
        AllocatorConfig {
            k: self.k,
            alpha: self.alpha,
            balance_bound: self.balance_bound,
            gamma: self.gamma,
            capacity: match self.capacity {
                CapacityMode::Static => {
                    Capacity::for_vertex_count(vertex_count, self.k, self.balance_bound)
                }
                CapacityMode::Adaptive => Capacity::Adaptive,
            },
            seed: SeedStreams::new(self.seed).seed(HASH),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.allocator(1)
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.window == 0 {
            return Err(PipelineError::Config("window must be positive".into()));
        }
        if self.max_matches_per_vertex == 0 {
            return Err(PipelineError::Config("match cap must be positive".into()));
        }
        if self.stats_every == Some(0) {
            return Err(PipelineError::Config("stats interval must be positive".into()));
        }
        SupportThreshold::new(self.threshold)?;
        if !crate::signature::is_prime(self.prime) {
            return Err(SignatureError::NotPrime(self.prime).into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Distinct edges streamed.
    pub edges_processed: u64,
    pub duplicate_edges: u64,
    /// Edges placed on arrival, either by a baseline or because no motif
    /// could contain them.
    pub immediate: u64,
    /// Buffered edges that left the window while the stream was running.
    pub evicted: u64,
    /// Buffered edges drained from the window after the stream ended.
    pub flushed: u64,
    pub evictions: u64,
    /// Evictions placed by LDG because every partition was rationed out.
    pub fallbacks: u64,
    /// Evictions where no partition held a vertex of any rationed match.
    pub blind_evictions: u64,
    /// New matches found, keyed by edge count.
    pub matches_by_depth: BTreeMap<usize, u64>,
    pub match_overflows: u64,
    pub motif_count: usize,
    pub ms_per_10k_edges: Option<f64>,
    pub partition_sizes: Vec<usize>,
    pub imbalance: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub partitioning: Partitioning,
    pub metrics: RunMetrics,
    pub matchlist_stats: Vec<MatchListStats>,
}

/// The unfiltered pattern trie for `workload` under `cfg`'s prime and seed.
pub fn build_trie(workload: &Workload, cfg: &PartitionConfig) -> Result<Trie, PipelineError> {
    let labels: BTreeSet<Label> = workload
        .queries
        .iter()
        .flat_map(|q| q.pattern.graph.labels())
        .collect();
    let primes = PrimeConfig::new(&labels, cfg.prime, SeedStreams::new(cfg.seed).seed(RESIDUES))?;
    Ok(Trie::build(primes, workload.weighted_graphs())?)
}

/// The motif trie for `workload` under `cfg`'s prime, seed and threshold.
pub fn build_motifs(workload: &Workload, cfg: &PartitionConfig) -> Result<Trie, PipelineError> {
    Ok(build_trie(workload, cfg)?.motif_filter(SupportThreshold::new(cfg.threshold)?))
}

struct Loom {
    matcher: StreamMatcher,
    alloc: AllocatorConfig,
}

impl Loom {
    /// Places an evicted edge and returns how many buffered edges left the
    /// window, the evicted one included.
    fn place(
        &mut self,
        ev: Eviction,
        partitioning: &mut Partitioning,
        neighbours: &NeighbourIndex,
        metrics: &mut RunMetrics,
    ) -> Result<u64, PipelineError> {
        metrics.evictions += 1;
        if ev.matches.is_empty() {
            ldg_assign(&ev.edge, partitioning, neighbours, &self.alloc)?;
            return Ok(1);
        }
        let placed = equal_opportunism(&ev.edge, &ev.matches, partitioning, neighbours, &self.alloc)?;
        metrics.fallbacks += placed.fell_back as u64;
        metrics.blind_evictions += placed.blind as u64;
        let purged = self.matcher.purge_assigned(&placed.assigned_edges);
        Ok(1 + purged as u64)
    }
}

/// Partitions a stream of edges. Repeated edges are skipped.
pub fn run_partition(
    stream: &[Edge],
    workload: &Workload,
    cfg: &PartitionConfig,
) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let vertex_count = stream
        .iter()
        .flat_map(|e| [e.u(), e.v()])
        .collect::<HashSet<VertexId>>()
        .len();
    let alloc = cfg.allocator(vertex_count);
    let mut partitioning = Partitioning::new(cfg.k);
    let mut neighbours = NeighbourIndex::new();
    let mut metrics = RunMetrics::default();
    let mut stats = Vec::new();
    let mut seen: HashSet<EdgeKey> = HashSet::with_capacity(stream.len());

    let mut loom = if cfg.algorithm == Algorithm::Loom {
        let motifs = build_motifs(workload, cfg)?;
        metrics.motif_count = motifs.len() - 1;
        let matcher = StreamMatcher::new(
            motifs,
            MatcherConfig {
                window: cfg.window,
                max_matches_per_vertex: cfg.max_matches_per_vertex,
            },
        )?;
        Some(Loom {
            matcher,
            alloc: alloc.clone(),
        })
    } else {
        None
    };

    let started = Instant::now();
    for (i, e) in stream.iter().enumerate() {
        if !seen.insert(e.key()) {
            metrics.duplicate_edges += 1;
            continue;
        }
        metrics.edges_processed += 1;
        match cfg.algorithm {
            Algorithm::Hash => {
                for x in [e.u(), e.v()] {
                    partitioning.assign_if_new(x, hash_assign(x, &alloc))?;
                }
                metrics.immediate += 1;
            }
            Algorithm::Ldg => {
                neighbours.observe(e);
                ldg_assign(e, &mut partitioning, &neighbours, &alloc)?;
                metrics.immediate += 1;
            }
            Algorithm::Fennel => {
                neighbours.observe(e);
                fennel_assign(e, &mut partitioning, &neighbours, &alloc)?;
                metrics.immediate += 1;
            }
            Algorithm::Loom => {
                let loom = loom.as_mut().expect("loom state");
                neighbours.observe(e);
                let se = StreamEdge {
                    edge: e.clone(),
                    arrival_index: i as u64,
                };
                match loom.matcher.ingest(se)? {
                    IngestOutcome::ImmediateAssign(e) => {
                        ldg_assign(&e, &mut partitioning, &neighbours, &alloc)?;
                        metrics.immediate += 1;
                    }
                    IngestOutcome::Buffered { new_matches } => {
                        count_depths(&mut metrics, new_matches.iter().map(|m| m.edges.len()));
                    }
                    IngestOutcome::BufferedWithEviction {
                        new_matches,
                        eviction,
                    } => {
                        count_depths(&mut metrics, new_matches.iter().map(|m| m.edges.len()));
                        metrics.evicted += loom.place(eviction, &mut partitioning, &neighbours, &mut metrics)?;
                    }
                }
                if let Some(n) = cfg.stats_every {
                    if (metrics.edges_processed as usize).is_multiple_of(n) {
                        stats.push(loom.matcher.stats());
                    }
                }
            }
        }
    }
    if let Some(loom) = loom.as_mut() {
        while let Some(ev) = loom.matcher.flush_next() {
            metrics.flushed += loom.place(ev, &mut partitioning, &neighbours, &mut metrics)?;
        }
        metrics.match_overflows = loom.matcher.overflow_events();
    }
    if cfg.timing && metrics.edges_processed > 0 {
        let ms = started.elapsed().as_secs_f64() * 1e3;
        metrics.ms_per_10k_edges = Some(ms * 1e4 / metrics.edges_processed as f64);
    }
    metrics.partition_sizes = partitioning.sizes().to_vec();
    metrics.imbalance = partitioning.imbalance();
    Ok(RunOutput {
        partitioning,
        metrics,
        matchlist_stats: stats,
    })
}

fn count_depths(metrics: &mut RunMetrics, depths: impl Iterator<Item = usize>) {
    for d in depths {
        *metrics.matches_by_depth.entry(d).or_default() += 1;
    }
}
