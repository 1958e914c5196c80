//! Synthetic labelled graphs with planted workload patterns.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::workload::{QueryPattern, WeightedQuery, Workload, WorkloadError};
use crate::graph::{Edge, EdgeKey, Label, LabelledGraph, VertexId};
use crate::harness::seeds::{SeedStreams, GENERATOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeProfile {
    Uniform,
    /// Chung-Lu style weights falling off as `rank^-0.5`.
    PowerLaw,
}

impl FromStr for DegreeProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(DegreeProfile::Uniform),
            "power-law" => Ok(DegreeProfile::PowerLaw),
            _ => Err(format!("unknown degree profile {s:?} (expected uniform or power-law)")),
        }
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeProfile::Uniform => "uniform",
            DegreeProfile::PowerLaw => "power-law",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadStyle {
    /// Independent random shapes.
    Independent,
    /// Every query extends one shared core pattern by a few edges.
    SharedCore,
}

impl FromStr for WorkloadStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(WorkloadStyle::Independent),
            "shared-core" => Ok(WorkloadStyle::SharedCore),
            _ => Err(format!("unknown workload style {s:?} (expected independent or shared-core)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub labels: usize,
    pub vertices: usize,
    /// Mean degree contributed by background edges.
    pub avg_degree: f64,
    pub degree_profile: DegreeProfile,
    /// Probability that a background edge stays within `locality_radius`
    /// ids of its first endpoint.
    pub locality: f64,
    pub locality_radius: u64,
    /// Number of random query patterns when no workload is supplied.
    pub patterns: usize,
    pub max_pattern_edges: usize,
    pub workload_style: WorkloadStyle,
    /// Fraction of background edges restricted to label pairs that occur in
    /// the workload.
    pub schema_fraction: f64,
    /// Zipf exponent for pattern frequencies.
    pub skew: f64,
    /// Planted pattern instances, shared out in proportion to frequency.
    pub planted: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            labels: 4,
            vertices: 10_000,
            avg_degree: 4.0,
            degree_profile: DegreeProfile::Uniform,
            locality: 0.8,
            locality_radius: 64,
            patterns: 6,
            max_pattern_edges: 4,
            workload_style: WorkloadStyle::Independent,
            schema_fraction: 0.0,
            skew: 1.0,
            planted: 2_000,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlantedCount {
    pub pattern: String,
    pub frequency: f64,
    pub copies: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub spec: SyntheticSpec,
    pub vertices: usize,
    pub edges: usize,
    pub background_edges: usize,
    pub planted: Vec<PlantedCount>,
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    /// Edges in generation order, shuffled.
    pub edges: Vec<Edge>,
    pub workload: Workload,
    pub manifest: Manifest,
}

/// `a`..`z`, then `l26`, `l27`, ...
pub fn label_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("l{i}")
    }
}

struct Builder {
    labels: Vec<Label>,
    by_label: Vec<Vec<VertexId>>,
    edges: Vec<Edge>,
    keys: HashSet<EdgeKey>,
}

impl Builder {
    fn add(&mut self, u: VertexId, v: VertexId) -> bool {
        if u == v || !self.keys.insert(EdgeKey::new(u, v)) {
            return false;
        }
        let l = |x: VertexId| self.labels[x as usize].as_str();
        self.edges
            .push(Edge::new(u, l(u), v, l(v)).expect("distinct endpoints"));
        true
    }

    /// A vertex with `label` near `anchor` by id, falling back to anywhere.
    fn pick_near(&self, rng: &mut ChaCha8Rng, label: usize, anchor: VertexId, radius: u64, taken: &[VertexId]) -> Option<VertexId> {
        let pool = &self.by_label[label];
        if pool.is_empty() {
            return None;
        }
        let lo = pool.partition_point(|&x| x + radius < anchor);
        let hi = pool.partition_point(|&x| x <= anchor + radius);
        for _ in 0..16 {
            let cand = if hi > lo {
                pool[rng.gen_range(lo..hi)]
            } else {
                pool[rng.gen_range(0..pool.len())]
            };
            if !taken.contains(&cand) {
                return Some(cand);
            }
        }
        pool.iter().copied().find(|c| !taken.contains(c))
    }
}

fn random_pattern(rng: &mut ChaCha8Rng, name: String, labels: usize, max_edges: usize) -> Result<QueryPattern, GenerateError> {
    let n_edges = rng.gen_range(2..=max_edges.max(2));
    let shape = rng.gen_range(0..3);
    let pairs: Vec<(u64, u64)> = match shape {
        // path
        0 => (0..n_edges as u64).map(|i| (i, i + 1)).collect(),
        // star
        1 => (1..=n_edges as u64).map(|i| (0, i)).collect(),
        // cycle when long enough, else a path
        _ if n_edges >= 3 => (0..n_edges as u64)
            .map(|i| (i, (i + 1) % n_edges as u64))
            .collect(),
        _ => (0..n_edges as u64).map(|i| (i, i + 1)).collect(),
    };
    let vertex_count = pairs.iter().map(|p| p.0.max(p.1)).max().unwrap() + 1;
    let vlabels: Vec<String> = (0..vertex_count)
        .map(|_| label_name(rng.gen_range(0..labels)))
        .collect();
    let edges: Vec<Edge> = pairs
        .iter()
        .map(|&(a, b)| Edge::new(a, vlabels[a as usize].as_str(), b, vlabels[b as usize].as_str()).unwrap())
        .collect();
    Ok(QueryPattern::new(name, &edges, max_edges.max(2))?)
}

fn zipf(i: usize, skew: f64) -> f64 {
    100.0 / ((i + 1) as f64).powf(skew)
}

/// A core path plus `extra` edges, each hung off a random existing vertex.
fn core_variant(
    rng: &mut ChaCha8Rng,
    name: String,
    core: &[(u64, u64)],
    core_labels: &[usize],
    extra: usize,
    labels: usize,
    max_edges: usize,
) -> Result<QueryPattern, GenerateError> {
    let mut pairs = core.to_vec();
    let mut vlabels = core_labels.to_vec();
    for _ in 0..extra {
        let at = rng.gen_range(0..vlabels.len()) as u64;
        pairs.push((at, vlabels.len() as u64));
        vlabels.push(rng.gen_range(0..labels));
    }
    let edges: Vec<Edge> = pairs
        .iter()
        .map(|&(a, b)| {
            let la = label_name(vlabels[a as usize]);
            let lb = label_name(vlabels[b as usize]);
            Edge::new(a, la.as_str(), b, lb.as_str()).unwrap()
        })
        .collect();
    Ok(QueryPattern::new(name, &edges, max_edges)?)
}

/// Random workload of `spec.patterns` queries with Zipf-skewed frequencies.
pub fn random_workload(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<Workload, GenerateError> {
    let max_edges = spec.max_pattern_edges.max(2);
    let queries = match spec.workload_style {
        WorkloadStyle::Independent => (0..spec.patterns)
            .map(|i| {
                let pattern = random_pattern(rng, format!("q{}", i + 1), spec.labels, max_edges)?;
                Ok(WeightedQuery {
                    pattern,
                    frequency: zipf(i, spec.skew),
                })
            })
            .collect::<Result<Vec<_>, GenerateError>>()?,
        WorkloadStyle::SharedCore => {
            let core_len = (max_edges / 2).max(1);
            let core: Vec<(u64, u64)> = (0..core_len as u64).map(|i| (i, i + 1)).collect();
            let core_labels: Vec<usize> = (0..=core_len).map(|_| rng.gen_range(0..spec.labels)).collect();
            (0..spec.patterns)
                .map(|i| {
                    let extra = rng.gen_range(1..=max_edges - core_len);
                    let pattern = core_variant(
                        rng,
                        format!("q{}", i + 1),
                        &core,
                        &core_labels,
                        extra,
                        spec.labels,
                        max_edges,
                    )?;
                    Ok(WeightedQuery {
                        pattern,
                        frequency: zipf(i, spec.skew),
                    })
                })
                .collect::<Result<Vec<_>, GenerateError>>()?
        }
    };
    Ok(Workload::new(queries)?)
}

/// Generates a graph and, unless `workload` is given, a random workload.
pub fn generate_synthetic(spec: &SyntheticSpec, workload: Option<Workload>) -> Result<SyntheticData, GenerateError> {
    if spec.labels < 2 {
        return Err(GenerateError::Infeasible("at least two labels are required".into()));
    }
    if spec.vertices < spec.labels * 2 {
        return Err(GenerateError::Infeasible("too few vertices for the label count".into()));
    }
    if !(spec.avg_degree >= 0.0
        && (0.0..=1.0).contains(&spec.locality)
        && (0.0..=1.0).contains(&spec.schema_fraction))
    {
        return Err(GenerateError::Infeasible("degree and locality out of range".into()));
    }
    if workload.is_none() && spec.patterns == 0 {
        return Err(GenerateError::Infeasible("no patterns requested".into()));
    }
    let mut rng = SeedStreams::new(spec.seed).rng(GENERATOR);
    let workload = match workload {
        Some(w) => w,
        None => random_workload(spec, &mut rng)?,
    };

    let names: Vec<Label> = (0..spec.labels).map(|i| Label::new(&label_name(i))).collect();
    let labels: Vec<Label> = (0..spec.vertices)
        .map(|_| names[rng.gen_range(0..spec.labels)].clone())
        .collect();
    let mut by_label = vec![Vec::new(); spec.labels];
    for (v, l) in labels.iter().enumerate() {
        let i = names.iter().position(|n| n == l).unwrap();
        by_label[i].push(v as VertexId);
    }
    let mut b = Builder {
        labels,
        by_label,
        edges: Vec::new(),
        keys: HashSet::new(),
    };

    // planted copies, split by frequency with the remainder to the head
    let total_freq = workload.total_frequency();
    let mut copies: Vec<usize> = workload
        .queries
        .iter()
        .map(|q| (spec.planted as f64 * q.frequency / total_freq).floor() as usize)
        .collect();
    let short = spec.planted - copies.iter().sum::<usize>();
    copies[0] += short;
    let mut planted = Vec::new();
    for (q, &n) in workload.queries.iter().zip(&copies) {
        let g = &q.pattern.graph;
        let qv: Vec<(VertexId, usize)> = g
            .vertices()
            .map(|(v, l)| {
                names
                    .iter()
                    .position(|n| n == l)
                    .map(|i| (v, i))
                    .ok_or_else(|| GenerateError::Infeasible(format!("pattern label {l} is not generated")))
            })
            .collect::<Result<_, _>>()?;
        for _ in 0..n {
            let anchor = rng.gen_range(0..spec.vertices as VertexId);
            let mut image: BTreeMap<VertexId, VertexId> = BTreeMap::new();
            let mut taken = Vec::new();
            for &(v, li) in &qv {
                let x = b
                    .pick_near(&mut rng, li, anchor, spec.locality_radius, &taken)
                    .ok_or_else(|| GenerateError::Infeasible(format!("no vertex labelled {}", names[li])))?;
                taken.push(x);
                image.insert(v, x);
            }
            for e in g.edges() {
                b.add(image[&e.u()], image[&e.v()]);
            }
        }
        planted.push(PlantedCount {
            pattern: q.pattern.name.clone(),
            frequency: q.frequency,
            copies: n,
        });
    }

    let target = (spec.vertices as f64 * spec.avg_degree / 2.0).round() as usize;
    let weights: Option<WeightedIndex<f64>> = match spec.degree_profile {
        DegreeProfile::Uniform => None,
        DegreeProfile::PowerLaw => {
            let mut w: Vec<f64> = (1..=spec.vertices).map(|r| (r as f64).powf(-0.5)).collect();
            w.shuffle(&mut rng);
            Some(WeightedIndex::new(w).expect("positive weights"))
        }
    };
    let draw = |rng: &mut ChaCha8Rng| -> VertexId {
        match &weights {
            Some(w) => w.sample(rng) as VertexId,
            None => rng.gen_range(0..spec.vertices as VertexId),
        }
    };
    let mut schema: Vec<Vec<usize>> = vec![Vec::new(); spec.labels];
    for q in &workload.queries {
        for e in q.pattern.graph.edges() {
            let a = names.iter().position(|n| n == e.label_u()).unwrap();
            let c = names.iter().position(|n| n == e.label_v()).unwrap();
            schema[a].push(c);
            schema[c].push(a);
        }
    }
    for partners in &mut schema {
        partners.sort_unstable();
        partners.dedup();
    }
    let n = spec.vertices as VertexId;
    let mut background = 0;
    let mut attempts = 0usize;
    while background < target && attempts < target * 20 + 100 {
        attempts += 1;
        let u = draw(&mut rng);
        let partners = &schema[names.iter().position(|l| *l == b.labels[u as usize]).unwrap()];
        let v = if !partners.is_empty() && rng.gen_bool(spec.schema_fraction) {
            let label = partners[rng.gen_range(0..partners.len())];
            let radius = if rng.gen_bool(spec.locality) {
                spec.locality_radius
            } else {
                n
            };
            match b.pick_near(&mut rng, label, u, radius, &[u]) {
                Some(v) => v,
                None => continue,
            }
        } else if rng.gen_bool(spec.locality) {
            let r = spec.locality_radius.max(1) as i64;
            let off = rng.gen_range(-r..=r);
            (u as i64 + off).rem_euclid(n as i64) as VertexId
        } else {
            draw(&mut rng)
        };
        if b.add(u, v) {
            background += 1;
        }
    }
    b.edges.shuffle(&mut rng);
    let vertices = LabelledGraph::from_edges(&b.edges)
        .map(|g| g.vertex_count())
        .unwrap_or(0);
    let manifest = Manifest {
        spec: spec.clone(),
        vertices,
        edges: b.edges.len(),
        background_edges: background,
        planted,
    };
    Ok(SyntheticData {
        edges: b.edges,
        workload,
        manifest,
    })
}
