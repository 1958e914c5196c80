#![allow(dead_code)]

pub mod matching;

use std::collections::{BTreeMap, BTreeSet};

use motifpart::eval::workload::{QueryPattern, WeightedQuery, Workload};
use motifpart::graph::{Edge, Label, LabelledGraph, VertexId};
use motifpart::signature::{graph_signature, FactorMultiset};
use motifpart::trie::Trie;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn edge(u: VertexId, lu: &str, v: VertexId, lv: &str) -> Edge {
    Edge::new(u, lu, v, lv).unwrap()
}

pub fn edges(list: &[(VertexId, &str, VertexId, &str)]) -> Vec<Edge> {
    list.iter().map(|&(u, lu, v, lv)| edge(u, lu, v, lv)).collect()
}

pub fn graph(list: &[(VertexId, &str, VertexId, &str)]) -> LabelledGraph {
    LabelledGraph::from_edges(&edges(list)).unwrap()
}

pub fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|n| Label::new(n)).collect()
}

/// 4-cycle a-b-a-b, path a-b-c and path a-b-a-b-c weighted 35/35/30.
pub fn sample_workload() -> Workload {
    let q = |name: &str, list: &[(VertexId, &str, VertexId, &str)], freq: f64| WeightedQuery {
        pattern: QueryPattern::new(name, &edges(list), 10).unwrap(),
        frequency: freq,
    };
    Workload::new(vec![
        q("q1", &[(1, "a", 2, "b"), (2, "b", 3, "a"), (3, "a", 4, "b"), (4, "b", 1, "a")], 35.0),
        q("q2", &[(1, "a", 2, "b"), (2, "b", 3, "c")], 35.0),
        q("q3", &[(1, "a", 2, "b"), (2, "b", 3, "a"), (3, "a", 4, "b"), (4, "b", 5, "c")], 30.0),
    ])
    .unwrap()
}

/// Brute-force labelled isomorphism: tries every label-preserving bijection.
pub fn brute_isomorphic(a: &LabelledGraph, b: &LabelledGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let va: Vec<(VertexId, Label)> = a.vertices().map(|(v, l)| (v, l.clone())).collect();
    let vb: Vec<(VertexId, Label)> = b.vertices().map(|(v, l)| (v, l.clone())).collect();
    let mut used = vec![false; vb.len()];
    let mut map = Vec::with_capacity(va.len());
    fn go(
        i: usize,
        a: &LabelledGraph,
        b: &LabelledGraph,
        va: &[(VertexId, Label)],
        vb: &[(VertexId, Label)],
        used: &mut [bool],
        map: &mut Vec<VertexId>,
    ) -> bool {
        if i == va.len() {
            return a.edges().all(|e| {
                let pos = |x| va.iter().position(|(v, _)| *v == x).unwrap();
                b.contains_edge(map[pos(e.u())], map[pos(e.v())])
            });
        }
        for j in 0..vb.len() {
            if used[j] || vb[j].1 != va[i].1 {
                continue;
            }
            used[j] = true;
            map.push(vb[j].0);
            if go(i + 1, a, b, va, vb, used, map) {
                return true;
            }
            map.pop();
            used[j] = false;
        }
        false
    }
    go(0, a, b, &va, &vb, &mut used, &mut map)
}

/// Lexicographically least (labels, edges) over every vertex renumbering.
pub fn canonical_form(g: &LabelledGraph) -> (Vec<String>, Vec<(usize, usize)>) {
    let vs: Vec<(VertexId, String)> = g.vertices().map(|(v, l)| (v, l.to_string())).collect();
    let n = vs.len();
    let pos = |x: VertexId| vs.iter().position(|(v, _)| *v == x).unwrap();
    let es: Vec<(usize, usize)> = g.edges().map(|e| (pos(e.u()), pos(e.v()))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Form> = None;
    loop {
        let mut labs = vec![String::new(); n];
        for (i, &p) in perm.iter().enumerate() {
            labs[p] = vs[i].1.clone();
        }
        let mut mapped: Vec<(usize, usize)> = es
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        mapped.sort_unstable();
        let cand = (labs, mapped);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A connected labelled graph with `m` edges on at most `max_vertices`
/// vertices numbered from `base`.
pub fn random_connected(
    rng: &mut impl Rng,
    m: usize,
    max_vertices: usize,
    label_set: &[&str],
    base: VertexId,
) -> LabelledGraph {
    assert!(max_vertices >= 2);
    loop {
        let mut g = LabelledGraph::new();
        let mut lab: Vec<&str> = Vec::new();
        let mut next = || label_set[rng.gen_range(0..label_set.len())];
        lab.push(next());
        lab.push(next());
        g.add_edge(&edge(base, lab[0], base + 1, lab[1])).unwrap();
        let mut stuck = 0;
        while g.edge_count() < m && stuck < 200 {
            let a = rng.gen_range(0..lab.len());
            let grow = lab.len() < max_vertices && rng.gen_bool(0.6);
            let b = if grow {
                lab.push(label_set[rng.gen_range(0..label_set.len())]);
                lab.len() - 1
            } else {
                rng.gen_range(0..lab.len())
            };
            if a == b || g.contains_edge(base + a as u64, base + b as u64) {
                if grow {
                    lab.pop();
                }
                stuck += 1;
                continue;
            }
            g.add_edge(&edge(base + a as u64, lab[a], base + b as u64, lab[b])).unwrap();
        }
        if g.edge_count() == m {
            return g;
        }
    }
}

/// `g` with its vertex ids shuffled and shifted by `offset`.
pub fn relabelled(rng: &mut impl Rng, g: &LabelledGraph, offset: VertexId) -> LabelledGraph {
    let vs: Vec<VertexId> = g.vertices().map(|(v, _)| v).collect();
    let mut image: Vec<VertexId> = (0..vs.len() as u64).map(|i| i + offset).collect();
    image.shuffle(rng);
    let to = |x: VertexId| image[vs.iter().position(|v| *v == x).unwrap()];
    let mut es: Vec<Edge> = g
        .edges()
        .map(|e| {
            let (a, b) = if rng.gen_bool(0.5) { (e.u(), e.v()) } else { (e.v(), e.u()) };
            edge(to(a), g.label(a).unwrap().as_str(), to(b), g.label(b).unwrap().as_str())
        })
        .collect();
    es.shuffle(rng);
    LabelledGraph::from_edges(&es).unwrap()
}

/// Every non-empty connected subset of `es`, as bitmasks.
pub fn connected_subsets(es: &[Edge]) -> Vec<u64> {
    assert!(es.len() < 64);
    (1u64..(1 << es.len()))
        .filter(|&mask| {
            let chosen: Vec<&Edge> = (0..es.len()).filter(|i| mask >> i & 1 == 1).map(|i| &es[i]).collect();
            LabelledGraph::from_edges(chosen).unwrap().is_connected()
        })
        .collect()
}

pub fn subset(es: &[Edge], mask: u64) -> Vec<Edge> {
    (0..es.len()).filter(|i| mask >> i & 1 == 1).map(|i| es[i].clone()).collect()
}

pub fn vertex_set(es: &[Edge]) -> BTreeSet<VertexId> {
    es.iter().flat_map(|e| [e.u(), e.v()]).collect()
}

/// Every connected graph on vertices 0..n with at most four edges, under
/// every labelling from {a, b}.
pub fn small_graphs() -> Vec<LabelledGraph> {
    let mut out = Vec::new();
    for n in 2..=5u64 {
        let pairs: Vec<(u64, u64)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 1u64..(1 << pairs.len()) {
            if mask.count_ones() > 4 {
                continue;
            }
            let chosen: Vec<(u64, u64)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            for labelling in 0u32..(1 << n) {
                let lab = |v: u64| if labelling >> v & 1 == 1 { "b" } else { "a" };
                let es: Vec<Edge> = chosen.iter().map(|&(u, v)| edge(u, lab(u), v, lab(v))).collect();
                let g = LabelledGraph::from_edges(&es).unwrap();
                if g.vertex_count() == n as usize && g.is_connected() {
                    out.push(g);
                }
            }
        }
    }
    out
}

/// `P[Binomial(n, 2/p) <= c]` as an exact rational, rounded at the end.
pub fn exact_binomial_cdf(n: usize, p: u32, c: usize) -> f64 {
    use num_bigint::BigUint;
    let big = |x: u64| BigUint::from(x);
    let mut num = big(0);
    let mut choose = big(1);
    for x in 0..=c.min(n) {
        if x > 0 {
            choose = choose * big((n - x + 1) as u64) / big(x as u64);
        }
        let q = if p >= 2 { p as u64 - 2 } else { 0 };
        num += &choose * big(2).pow(x as u32) * big(q).pow((n - x) as u32);
    }
    let den = big(p as u64).pow(n as u32);
    let scaled: BigUint = (num << 64u32) / den;
    let digits = scaled.to_u64_digits();
    let v = digits.iter().rev().fold(0f64, |acc, d| acc * 2f64.powi(64) + *d as f64);
    v / 2f64.powi(64)
}

pub type Form = (Vec<String>, Vec<(usize, usize)>);

/// Connected edge subsets of `q`, one graph per isomorphism class.
pub fn subgraph_classes(q: &LabelledGraph) -> BTreeMap<Form, LabelledGraph> {
    let es: Vec<Edge> = q.edges().collect();
    connected_subsets(&es)
        .into_iter()
        .map(|mask| {
            let g = LabelledGraph::from_edges(&subset(&es, mask)).unwrap();
            (canonical_form(&g), g)
        })
        .collect()
}

#[derive(Default)]
pub struct TrieCheck {
    pub problems: Vec<String>,
    /// Isomorphism classes sharing a node with another class.
    pub merged_classes: usize,
}

fn signature_values(sig: &FactorMultiset) -> Vec<u32> {
    sig.values().map(|f| f.value()).collect()
}

/// Compares `trie` with brute-force enumeration of the queries' connected
/// subgraphs. Classes whose signatures coincide must share one node.
pub fn check_trie(trie: &Trie, queries: &[(LabelledGraph, f64)]) -> TrieCheck {
    let total: f64 = queries.iter().map(|(_, f)| f).sum();
    let mut groups: BTreeMap<Vec<u32>, (BTreeSet<Form>, f64)> = BTreeMap::new();
    for (q, f) in queries {
        let mut hit = BTreeSet::new();
        for (form, g) in subgraph_classes(q) {
            let sig = signature_values(&graph_signature(trie.config(), &g).unwrap());
            groups.entry(sig.clone()).or_default().0.insert(form);
            hit.insert(sig);
        }
        for sig in hit {
            groups.get_mut(&sig).unwrap().1 += f;
        }
    }
    let mut check = TrieCheck::default();
    let mut seen = BTreeSet::new();
    for id in trie.node_ids().filter(|id| trie.node(*id).depth() > 0) {
        let node = trie.node(id);
        let sig = signature_values(node.signature());
        let form = canonical_form(node.graph());
        if !seen.insert(sig.clone()) {
            check.problems.push(format!("signature of {form:?} on two nodes"));
        }
        match groups.get(&sig) {
            None => check.problems.push(format!("node {form:?} is no query subgraph")),
            Some((forms, weight)) => {
                if !forms.contains(&form) {
                    check.problems.push(format!("node {form:?} holds a foreign exemplar"));
                }
                let want = weight / total;
                if (trie.support(id) - want).abs() > 1e-12 {
                    check.problems.push(format!("node {form:?} support {} vs {want}", trie.support(id)));
                }
            }
        }
    }
    for (sig, (forms, _)) in &groups {
        if !seen.contains(sig) {
            check.problems.push(format!("no node for {forms:?}"));
        }
        check.merged_classes += forms.len() - 1;
    }
    check
}
