//! Exact labelled sub-graph isomorphism by label-pruned backtracking.
//!
//! This is the authoritative matcher: it is used to evaluate query workloads
//! and as the oracle against which signature-based matching is checked.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::graph::{EdgeKey, Label, LabelledGraph, VertexId};

/// An injective, label- and edge-preserving map from query vertices to data
/// vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub mapping: BTreeMap<VertexId, VertexId>,
}

impl Embedding {
    /// The data edges hit by the query's edges, sorted.
    pub fn edge_image(&self, q: &LabelledGraph) -> Vec<EdgeKey> {
        let mut out: Vec<EdgeKey> = q
            .edges()
            .map(|e| EdgeKey::new(self.mapping[&e.u()], self.mapping[&e.v()]))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Search plan for one query graph: vertices in matching order, each with the
/// earlier positions it must be adjacent to.
struct Plan {
    order: Vec<VertexId>,
    labels: Vec<Label>,
    /// For position `i > 0`, an earlier adjacent position to draw candidates from.
    anchor: Vec<usize>,
    /// For position `i`, all earlier adjacent positions.
    back_edges: Vec<Vec<usize>>,
}

impl Plan {
    fn new(q: &LabelledGraph, label_freq: impl Fn(&Label) -> usize) -> Option<Plan> {
        let first = q
            .vertices()
            .min_by_key(|(v, l)| (label_freq(l), usize::MAX - q.degree(*v).unwrap_or(0), *v))?
            .0;
        let mut order = vec![first];
        let mut placed: HashMap<VertexId, usize> = HashMap::from([(first, 0)]);
        while order.len() < q.vertex_count() {
            // next: the unplaced vertex with most placed neighbours
            let next = q
                .vertices()
                .map(|(v, _)| v)
                .filter(|v| !placed.contains_key(v))
                .map(|v| {
                    let links = q.neighbors(v).filter(|n| placed.contains_key(n)).count();
                    (links, v)
                })
                .filter(|(links, _)| *links > 0)
                .max_by_key(|(links, v)| (*links, std::cmp::Reverse(*v)));
            let (_, v) = next?; // disconnected query
            placed.insert(v, order.len());
            order.push(v);
        }
        let labels = order.iter().map(|v| q.label(*v).unwrap().clone()).collect();
        let back_edges: Vec<Vec<usize>> = order
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut b: Vec<usize> = q
                    .neighbors(*v)
                    .map(|n| placed[&n])
                    .filter(|&j| j < i)
                    .collect();
                b.sort_unstable();
                b
            })
            .collect();
        let anchor = back_edges
            .iter()
            .map(|b| b.first().copied().unwrap_or(0))
            .collect();
        Some(Plan {
            order,
            labels,
            anchor,
            back_edges,
        })
    }
}

/// Finds embeddings of small query graphs in one data graph.
pub struct SubgraphFinder<'g> {
    g: &'g LabelledGraph,
    by_label: HashMap<Label, Vec<VertexId>>,
}

impl<'g> SubgraphFinder<'g> {
    pub fn new(g: &'g LabelledGraph) -> Self {
        let mut by_label: HashMap<Label, Vec<VertexId>> = HashMap::new();
        for (v, l) in g.vertices() {
            by_label.entry(l.clone()).or_default().push(v);
        }
        SubgraphFinder { g, by_label }
    }

    /// Calls `visit` with every raw embedding of `q`, automorphic copies
    /// included. The slice pairs each query vertex with its image.
    pub fn for_each(&self, q: &LabelledGraph, mut visit: impl FnMut(&[(VertexId, VertexId)])) {
        if q.edge_count() == 0 {
            return;
        }
        let Some(plan) =
            Plan::new(q, |l| self.by_label.get(l).map_or(0, Vec::len))
        else {
            return;
        };
        let Some(roots) = self.by_label.get(&plan.labels[0]) else {
            return;
        };
        let mut image: Vec<(VertexId, VertexId)> = Vec::with_capacity(plan.order.len());
        for &root in roots {
            image.push((plan.order[0], root));
            self.extend(&plan, &mut image, &mut visit);
            image.pop();
        }
    }

    fn extend(
        &self,
        plan: &Plan,
        image: &mut Vec<(VertexId, VertexId)>,
        visit: &mut impl FnMut(&[(VertexId, VertexId)]),
    ) {
        let i = image.len();
        if i == plan.order.len() {
            visit(image);
            return;
        }
        let anchor = image[plan.anchor[i]].1;
        for cand in self.g.neighbors(anchor) {
            if self.g.label(cand) != Some(&plan.labels[i]) {
                continue;
            }
            if image.iter().any(|&(_, d)| d == cand) {
                continue;
            }
            let adjacent = plan.back_edges[i]
                .iter()
                .all(|&j| self.g.contains_edge(image[j].1, cand));
            if !adjacent {
                continue;
            }
            image.push((plan.order[i], cand));
            self.extend(plan, image, visit);
            image.pop();
        }
    }

    pub fn count_raw(&self, q: &LabelledGraph) -> usize {
        let mut n = 0;
        self.for_each(q, |_| n += 1);
        n
    }

    pub fn exists(&self, q: &LabelledGraph) -> bool {
        // cheap enough for the small graphs this is used on
        self.count_raw(q) > 0
    }
}

/// All embeddings of `q` in `g`, keeping one representative per distinct
/// edge image so automorphisms of `q` are not counted repeatedly.
pub fn enumerate_embeddings(g: &LabelledGraph, q: &LabelledGraph) -> Vec<Embedding> {
    let finder = SubgraphFinder::new(g);
    let mut seen: HashSet<Vec<EdgeKey>> = HashSet::new();
    let mut out = Vec::new();
    finder.for_each(q, |pairs| {
        let emb = Embedding {
            mapping: pairs.iter().copied().collect(),
        };
        if seen.insert(emb.edge_image(q)) {
            out.push(emb);
        }
    });
    out.sort();
    out
}

/// Number of label-preserving automorphisms of `q`.
pub fn automorphism_count(q: &LabelledGraph) -> usize {
    SubgraphFinder::new(q).count_raw(q)
}

/// Exact labelled isomorphism test.
pub fn are_isomorphic(a: &LabelledGraph, b: &LabelledGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let la: Vec<&Label> = sorted_labels(a);
    let lb: Vec<&Label> = sorted_labels(b);
    if la != lb {
        return false;
    }
    if a.edge_count() == 0 {
        return true;
    }
    let mut found = false;
    let finder = SubgraphFinder::new(b);
    // an injective edge-preserving map between equal-sized graphs is an isomorphism
    finder.for_each(a, |_| found = true);
    found
}

fn sorted_labels(g: &LabelledGraph) -> Vec<&Label> {
    let mut v: Vec<&Label> = g.vertices().map(|(_, l)| l).collect();
    v.sort();
    v
}

/// Groups graphs into isomorphism classes; returns one representative index
/// per class.
pub fn isomorphism_classes(graphs: &[LabelledGraph]) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        if !reps.iter().any(|&r| are_isomorphic(&graphs[r], g)) {
            reps.push(i);
        }
    }
    reps
}

/// Vertex set of an edge image.
pub fn image_vertices(edges: &[EdgeKey]) -> BTreeSet<VertexId> {
    edges.iter().flat_map(|e| [e.0, e.1]).collect()
}
