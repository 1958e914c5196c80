use std::collections::{BTreeMap, BTreeSet};

use motifpart::graph::{Edge, EdgeKey, LabelledGraph, StreamEdge};
use motifpart::matcher::{IngestOutcome, MatcherConfig, StreamMatcher};
use motifpart::signature::{graph_signature, PrimeConfig};
use motifpart::trie::{SupportThreshold, Trie};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

/// Connected edge subsets of `es` with at most `k` edges, as sorted index lists.
fn connected_up_to(es: &[Edge], k: usize) -> BTreeSet<Vec<usize>> {
    let mut all: BTreeSet<Vec<usize>> = (0..es.len()).map(|i| vec![i]).collect();
    let mut frontier: Vec<Vec<usize>> = all.iter().cloned().collect();
    for _ in 1..k {
        let mut next = Vec::new();
        for set in &frontier {
            let vs = vertex_set(&set.iter().map(|&i| es[i].clone()).collect::<Vec<_>>());
            for (j, e) in es.iter().enumerate() {
                if set.contains(&j) || !(vs.contains(&e.u()) || vs.contains(&e.v())) {
                    continue;
                }
                let mut grown = set.clone();
                grown.push(j);
                grown.sort_unstable();
                if all.insert(grown.clone()) {
                    next.push(grown);
                }
            }
        }
        frontier = next;
    }
    all
}

pub struct Scenario {
    pub trie: Trie,
    motif_forms: BTreeMap<Form, usize>,
    max_edges: usize,
    pub stream: Vec<Edge>,
    pub window: usize,
}

/// Up to three random queries of at most four edges, a random threshold and
/// a random stream somewhat longer than a window of 3 to 50 edges.
pub fn scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let names = ["a", "b", "c"];
    let cfg = PrimeConfig::new(&labels(&names), 251, rng.gen()).unwrap();
    let queries: Vec<(LabelledGraph, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let m = rng.gen_range(1..=4);
            (random_connected(rng, m, 5, &names, 0), rng.gen_range(1..=5) as f64)
        })
        .collect();
    let threshold = [0.2, 0.4, 0.6][rng.gen_range(0..3)];
    let trie = Trie::build(cfg, queries.iter().map(|(g, f)| (g, *f)))
        .unwrap()
        .motif_filter(SupportThreshold::new(threshold).unwrap());
    let motif_forms: BTreeMap<Form, usize> = trie
        .node_ids()
        .filter(|id| trie.node(*id).depth() > 0)
        .map(|id| (canonical_form(trie.node(id).graph()), id.index()))
        .collect();
    let max_edges = trie.depth();
    let n = rng.gen_range(6..=14u64);
    let vlabel: Vec<&str> = (0..n).map(|_| names[rng.gen_range(0..3)]).collect();
    let window = rng.gen_range(3..=50);
    let mut seen = BTreeSet::new();
    let mut stream = Vec::new();
    for _ in 0..(window + 30) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u == v || !seen.insert(EdgeKey::new(u, v)) {
            continue;
        }
        stream.push(edge(u, vlabel[u as usize], v, vlabel[v as usize]));
    }
    Scenario {
        trie,
        motif_forms,
        max_edges,
        stream,
        window,
    }
}

#[derive(Default)]
pub struct Report {
    pub problems: Vec<String>,
    /// Distinct extras explained by equal factor multisets on non-isomorphic
    /// shapes.
    pub collisions: usize,
    pub checks: usize,
}

/// Replays the scenario, comparing the match list after every edge with a
/// brute-force enumeration of the window.
pub fn check_scenario(s: &Scenario, report: &mut Report) {
    let mut m = StreamMatcher::new(
        s.trie.clone(),
        MatcherConfig {
            window: s.window,
            max_matches_per_vertex: usize::MAX,
        },
    )
    .unwrap();
    let mut collisions = BTreeSet::new();
    let mut problems = Vec::new();
    let mut problem = |msg: String| problems.push(msg);
    for (i, e) in s.stream.iter().enumerate() {
        let out = m
            .ingest(StreamEdge {
                edge: e.clone(),
                arrival_index: i as u64,
            })
            .unwrap();
        if let IngestOutcome::BufferedWithEviction { eviction, .. } = &out {
            let key = eviction.edge.key();
            if !eviction.matches.iter().all(|mm| mm.contains(key)) {
                problem(format!("step {i}: eviction match without the evicted edge"));
            }
            if !eviction.matches.windows(2).all(|w| w[0].support >= w[1].support) {
                problem(format!("step {i}: eviction matches out of support order"));
            }
        }
        if let Err(err) = m.verify() {
            problem(format!("step {i}: {err}"));
        }
        let window = m.window_edges();
        if window.len() > s.window {
            problem(format!("step {i}: window overfull"));
        }
        let expected: BTreeSet<Vec<EdgeKey>> = if s.max_edges == 0 {
            BTreeSet::new()
        } else {
            connected_up_to(&window, s.max_edges)
                .into_iter()
                .map(|idx| idx.iter().map(|&j| window[j].clone()).collect::<Vec<Edge>>())
                .filter(|es| s.motif_forms.contains_key(&canonical_form(&LabelledGraph::from_edges(es).unwrap())))
                .map(|es| {
                    let mut keys: Vec<EdgeKey> = es.iter().map(|e| e.key()).collect();
                    keys.sort_unstable();
                    keys
                })
                .collect()
        };
        let found: BTreeMap<Vec<EdgeKey>, _> = m.all_matches().into_iter().map(|mm| (mm.edges.clone(), mm)).collect();
        for want in &expected {
            if !found.contains_key(want) {
                problem(format!("step {i}: missing {want:?}"));
            }
        }
        for (keys, mm) in &found {
            let es: Vec<Edge> = window.iter().filter(|e| keys.contains(&e.key())).cloned().collect();
            let g = LabelledGraph::from_edges(&es).unwrap();
            let node = s.trie.node(mm.node);
            if mm.support != s.trie.support(mm.node) {
                problem(format!("step {i}: support of {keys:?}"));
            }
            if expected.contains(keys) {
                if !brute_isomorphic(&g, node.graph()) {
                    problem(format!("step {i}: {keys:?} filed under the wrong motif"));
                }
                continue;
            }
            // extras must be genuine factor collisions: same multiset, different shape
            let sig = graph_signature(s.trie.config(), &g).unwrap();
            if &sig == node.signature() && !brute_isomorphic(&g, node.graph()) {
                collisions.insert(keys.clone());
            } else {
                problem(format!("step {i}: unexplained extra {keys:?}"));
            }
        }
        report.checks += 1;
    }
    if m.overflow_events() != 0 {
        problem("match list overflowed".to_string());
    }
    report.problems.extend(problems);
    report.collisions += collisions.len();
}
