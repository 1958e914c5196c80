mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::edge;
use motifpart::alloc::*;
use motifpart::graph::{Edge, EdgeKey, PartitionId, Partitioning, VertexId};
use motifpart::matcher::{Match, MatchId};
use motifpart::trie::NodeId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FILLER: VertexId = 1_000;

struct Setup {
    partitioning: Partitioning,
    neighbours: NeighbourIndex,
    adjacency: BTreeMap<VertexId, Vec<VertexId>>,
    e: Edge,
}

fn setup(rng: &mut ChaCha8Rng, k: usize) -> Setup {
    let mut partitioning = Partitioning::new(k);
    let mut next = FILLER;
    for p in 0..k {
        for _ in 0..rng.gen_range(1..8) {
            partitioning.assign(next, p).unwrap();
            next += 1;
        }
    }
    for v in 2..12 {
        if rng.gen_bool(0.4) {
            partitioning.assign(v, rng.gen_range(0..k)).unwrap();
        }
    }
    let mut neighbours = NeighbourIndex::new();
    let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for _ in 0..20 {
        let a = rng.gen_range(0..12);
        let b = if rng.gen_bool(0.5) { rng.gen_range(0..12) } else { rng.gen_range(FILLER..next) };
        if a == b || !seen.insert(EdgeKey::new(a, b)) {
            continue;
        }
        neighbours.observe(&edge(a, "x", b, "x"));
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    Setup {
        partitioning,
        neighbours,
        adjacency,
        e: edge(0, "x", 1, "x"),
    }
}

fn random_matches(rng: &mut ChaCha8Rng) -> Vec<Match> {
    let n = rng.gen_range(1..7);
    let mut supports: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=20) as f64 / 20.0).collect();
    supports.sort_by(|a, b| b.partial_cmp(a).unwrap());
    supports
        .into_iter()
        .enumerate()
        .map(|(i, support)| {
            let mut edges = vec![EdgeKey::new(0, 1)];
            let mut last = if rng.gen_bool(0.5) { 0 } else { 1 };
            for _ in 0..rng.gen_range(0..3) {
                let v = rng.gen_range(2..12);
                edges.push(EdgeKey::new(last, v));
                last = v;
            }
            edges.sort_unstable();
            edges.dedup();
            Match {
                id: MatchId(i as u64),
                edges,
                node: NodeId::default(),
                support,
            }
        })
        .collect()
}

fn neighbours_in(s: &Setup, p: PartitionId) -> usize {
    [s.e.u(), s.e.v()]
        .iter()
        .flat_map(|x| s.adjacency.get(x).into_iter().flatten())
        .filter(|y| s.partitioning.partition_of(**y) == Some(p))
        .count()
}

/// Best score; ties to the smaller partition, then the lower index.
fn pick(scores: &[f64], p: &Partitioning) -> PartitionId {
    (0..scores.len())
        .min_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap()
                .then(p.size(a).cmp(&p.size(b)))
                .then(a.cmp(&b))
        })
        .unwrap()
}

#[test]
fn equal_opportunism_matches_bid_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let capacity = 1e9;
    for round in 0..2000 {
        let k = rng.gen_range(2..6);
        let mut s = setup(&mut rng, k);
        let matches = random_matches(&mut rng);
        let (num, den) = [(1u64, 2u64), (2, 3), (1, 1)][rng.gen_range(0..3)];
        let b = [1.1, 1.5, 2.0][rng.gen_range(0..3)];
        let cfg = AllocatorConfig {
            alpha: num as f64 / den as f64,
            balance_bound: b,
            capacity: Capacity::Static(capacity),
            ..AllocatorConfig::new(k)
        };
        let p = &s.partitioning;
        let s_min = (0..k).map(|i| p.size(i)).min().unwrap() as u64;
        // prefix length ceil(l·|M|) in exact arithmetic
        let prefix: Vec<usize> = (0..k)
            .map(|i| {
                let size = p.size(i) as u64;
                if size == s_min {
                    matches.len()
                } else if size as f64 > s_min as f64 * b {
                    0
                } else {
                    let top = s_min * num * matches.len() as u64;
                    let bottom = size * den;
                    top.div_ceil(bottom) as usize
                }
            })
            .collect();
        let totals: Vec<f64> = (0..k)
            .map(|i| {
                let residual = 1.0 - p.size(i) as f64 / capacity;
                matches[..prefix[i]]
                    .iter()
                    .map(|m| {
                        let shared = m.vertices().iter().filter(|v| p.partition_of(**v) == Some(i)).count();
                        shared as f64 * residual * m.support
                    })
                    .sum()
            })
            .collect();
        let blind = totals.iter().all(|&t| t == 0.0);
        let winner = if blind {
            let ldg: Vec<f64> = (0..k)
                .map(|i| neighbours_in(&s, i) as f64 * (1.0 - p.size(i) as f64 / capacity))
                .collect();
            pick(&ldg, p)
        } else {
            pick(&totals, p)
        };
        let take = prefix[winner].max(1);
        let want_edges: BTreeSet<EdgeKey> = matches[..take].iter().flat_map(|m| m.edges.clone()).collect();
        let before = s.partitioning.clone();

        let placed = equal_opportunism(&s.e, &matches, &mut s.partitioning, &s.neighbours, &cfg).unwrap();
        assert_eq!(placed.winner, winner, "round {round}: totals {totals:?}");
        assert_eq!(placed.prefix, take, "round {round}");
        assert_eq!(placed.blind, blind);
        assert!(!placed.fell_back);
        assert_eq!(placed.assigned_edges, want_edges.iter().copied().collect::<Vec<_>>());
        for key in &want_edges {
            for v in [key.0, key.1] {
                let want = before.partition_of(v).unwrap_or(winner);
                assert_eq!(s.partitioning.partition_of(v), Some(want));
            }
        }
        let untouched: BTreeSet<VertexId> = matches[take..]
            .iter()
            .flat_map(|m| m.vertices())
            .filter(|v| !want_edges.iter().any(|k| k.touches(*v)))
            .collect();
        for v in untouched {
            assert_eq!(s.partitioning.partition_of(v), before.partition_of(v));
        }
    }
}

#[test]
fn ldg_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let k = rng.gen_range(1..6);
        let mut s = setup(&mut rng, k);
        let c = rng.gen_range(40..80) as f64;
        let cfg = AllocatorConfig {
            capacity: Capacity::Static(c),
            ..AllocatorConfig::new(k)
        };
        let scores: Vec<f64> = (0..k)
            .map(|i| neighbours_in(&s, i) as f64 * (1.0 - s.partitioning.size(i) as f64 / c))
            .collect();
        let want = pick(&scores, &s.partitioning);
        assert_eq!(ldg_scores(&s.e, &s.partitioning, &s.neighbours, c), scores);
        assert_eq!(ldg_assign(&s.e, &mut s.partitioning, &s.neighbours, &cfg).unwrap(), want);
        assert_eq!(s.partitioning.partition_of(0), Some(want));
    }
}

#[test]
fn fennel_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..2000 {
        let k = rng.gen_range(1..6);
        let s = setup(&mut rng, k);
        let gamma = [1.5, 2.0][rng.gen_range(0..2)];
        let cfg = AllocatorConfig {
            gamma,
            ..AllocatorConfig::new(k)
        };
        let m = s.adjacency.values().map(Vec::len).sum::<usize>() as f64 / 2.0;
        let n = s.adjacency.len() as f64;
        let a = m * (k as f64).powf(gamma - 1.0) / n.powf(gamma);
        let scores = fennel_scores(&s.e, &s.partitioning, &s.neighbours, &cfg);
        for (i, got) in scores.iter().enumerate() {
            let want = neighbours_in(&s, i) as f64 - a * gamma * (s.partitioning.size(i) as f64).powf(gamma - 1.0);
            assert!((got - want).abs() < 1e-9);
        }
    }
}

#[test]
fn hash_spreads_sequential_ids() {
    let cfg = AllocatorConfig {
        seed: 77,
        ..AllocatorConfig::new(8)
    };
    let mut p = Partitioning::new(8);
    for v in 0..10_000 {
        p.assign(v, hash_assign(v, &cfg)).unwrap();
    }
    assert!(p.imbalance() <= 1.01, "{}", p.imbalance());
    assert!((0..10_000).all(|v| hash_assign(v, &cfg) == p.partition_of(v).unwrap()));
}

proptest! {
    #[test]
    fn ration_bounds(sizes in prop::collection::vec(0usize..50, 1..8), alpha in 0.01f64..=1.0, b in 1.0f64..3.0) {
        let k = sizes.len();
        let mut p = Partitioning::new(k);
        let mut next = 0;
        for (i, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                p.assign(next, i).unwrap();
                next += 1;
            }
        }
        let cfg = AllocatorConfig { alpha, balance_bound: b, ..AllocatorConfig::new(k) };
        let s_min = *sizes.iter().min().unwrap();
        for (i, &size) in sizes.iter().enumerate() {
            let l = ration(i, &p, &cfg);
            prop_assert!((0.0..=1.0).contains(&l));
            if size == s_min {
                prop_assert_eq!(l, 1.0);
            }
            for len in 0..20 {
                let n = ration_prefix(l, len);
                prop_assert!(n <= len);
                prop_assert!(n as f64 >= l * len as f64 - 1e-6);
            }
        }
    }

    #[test]
    fn hash_is_in_range(v in any::<u64>(), k in 1usize..64, seed in any::<u64>()) {
        let cfg = AllocatorConfig { seed, ..AllocatorConfig::new(k) };
        prop_assert!(hash_assign(v, &cfg) < k);
    }
}
