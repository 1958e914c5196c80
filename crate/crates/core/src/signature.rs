//! Number-theoretic sub-graph signatures.
//!
//! Every label gets a random residue `r(l)` in `[1, p)`. A graph's signature
//! is the multiset of its edge factors `|r(a) - r(b)| mod p` and, for every
//! vertex of degree `d`, the degree-increment factors `(r(l) + n) mod p` for
//! `n = 1..=d`. Residues of zero are replaced by `p`. Isomorphic graphs always
//! share a signature; distinct graphs collide with small probability.
//!
//! Signatures are kept as factor multisets rather than integer products, so
//! `{6, 2}`, `{4, 3}` and `{12}` stay distinct.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Label, LabelledGraph};

pub const DEFAULT_PRIME: u32 = 251;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("label set is empty")]
    NoLabels,
    #[error("label `{0}` has no residue")]
    UnknownLabel(Label),
    #[error("residue {value} for label `{label}` is outside [1, {p})")]
    ResidueOutOfRange { label: Label, value: u32, p: u32 },
    #[error("degree increments start at 1")]
    ZeroIncrement,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The prime modulus and the per-label residues for one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeConfig {
    p: u32,
    residues: BTreeMap<Label, u32>,
}

impl PrimeConfig {
    /// Draws a residue in `[1, p)` for every label from a seeded RNG.
    ///
    /// Labels are visited in sorted order, so the map only depends on the
    /// label set, `p` and `seed`.
    pub fn new<'a>(
        labels: impl IntoIterator<Item = &'a Label>,
        p: u32,
        seed: u64,
    ) -> Result<Self, SignatureError> {
        if !is_prime(p) {
            return Err(SignatureError::NotPrime(p));
        }
        let labels: BTreeSet<&Label> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(SignatureError::NoLabels);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let residues: BTreeMap<Label, u32> = labels
            .into_iter()
            .map(|l| (l.clone(), rng.gen_range(1..p)))
            .collect();
        let cfg = PrimeConfig { p, residues };
        for (a, b) in cfg.shared_residues() {
            log::warn!("labels `{a}` and `{b}` drew the same residue mod {p}");
        }
        Ok(cfg)
    }

    /// Builds a config from an explicit residue map.
    pub fn with_residues(
        p: u32,
        residues: impl IntoIterator<Item = (Label, u32)>,
    ) -> Result<Self, SignatureError> {
        if !is_prime(p) {
            return Err(SignatureError::NotPrime(p));
        }
        let residues: BTreeMap<Label, u32> = residues.into_iter().collect();
        if residues.is_empty() {
            return Err(SignatureError::NoLabels);
        }
        for (label, &value) in &residues {
            if value == 0 || value >= p {
                return Err(SignatureError::ResidueOutOfRange {
                    label: label.clone(),
                    value,
                    p,
                });
            }
        }
        Ok(PrimeConfig { p, residues })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn residue(&self, label: &Label) -> Result<u32, SignatureError> {
        self.residues
            .get(label)
            .copied()
            .ok_or_else(|| SignatureError::UnknownLabel(label.clone()))
    }

    pub fn residues(&self) -> &BTreeMap<Label, u32> {
        &self.residues
    }

    /// Pairs of distinct labels that drew the same residue.
    pub fn shared_residues(&self) -> Vec<(Label, Label)> {
        let entries: Vec<_> = self.residues.iter().collect();
        let mut out = Vec::new();
        for (i, (a, ra)) in entries.iter().enumerate() {
            for (b, rb) in &entries[i + 1..] {
                if ra == rb {
                    out.push(((*a).clone(), (*b).clone()));
                }
            }
        }
        out
    }

    fn reduce(&self, x: u64) -> Factor {
        let r = (x % self.p as u64) as u32;
        Factor(if r == 0 { self.p } else { r })
    }
}

/// A residue factor in `[1, p]`; never zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Factor(u32);

impl Factor {
    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn edge_factor(cfg: &PrimeConfig, la: &Label, lb: &Label) -> Result<Factor, SignatureError> {
    let (ra, rb) = (cfg.residue(la)?, cfg.residue(lb)?);
    Ok(cfg.reduce(ra.abs_diff(rb) as u64))
}

/// The factor contributed when a vertex labelled `l` reaches degree `n`.
pub fn degree_increment_factor(
    cfg: &PrimeConfig,
    l: &Label,
    n: usize,
) -> Result<Factor, SignatureError> {
    if n == 0 {
        return Err(SignatureError::ZeroIncrement);
    }
    Ok(cfg.reduce(cfg.residue(l)? as u64 + n as u64))
}

/// A signature: a multiset of factors, split by kind.
///
/// Equality, ordering and hashing only look at the merged sorted values; the
/// edge/degree split is kept for inspection.
#[derive(Clone, Default)]
pub struct FactorMultiset {
    edge: Vec<Factor>,
    degree: Vec<Factor>,
}

impl FactorMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_edge(&mut self, f: Factor) {
        let at = self.edge.partition_point(|x| *x <= f);
        self.edge.insert(at, f);
    }

    pub fn push_degree(&mut self, f: Factor) {
        let at = self.degree.partition_point(|x| *x <= f);
        self.degree.insert(at, f);
    }

    pub fn len(&self) -> usize {
        self.edge.len() + self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_factors(&self) -> &[Factor] {
        &self.edge
    }

    pub fn degree_factors(&self) -> &[Factor] {
        &self.degree
    }

    /// All factors in ascending order.
    pub fn values(&self) -> Merge<'_> {
        Merge {
            a: &self.edge,
            b: &self.degree,
        }
    }

    /// Multiset union.
    pub fn union(&self, other: &FactorMultiset) -> FactorMultiset {
        FactorMultiset {
            edge: merge_sorted(&self.edge, &other.edge),
            degree: merge_sorted(&self.degree, &other.degree),
        }
    }

    pub fn counts(&self) -> BTreeMap<Factor, usize> {
        let mut out = BTreeMap::new();
        for f in self.values() {
            *out.entry(f).or_insert(0) += 1;
        }
        out
    }

    /// Integer product of all factors, if it fits in a `u128`.
    pub fn product(&self) -> Option<u128> {
        self.values()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.0 as u128))
    }
}

fn merge_sorted(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    Merge { a, b }.collect()
}

/// Sorted merge of two sorted factor slices.
#[derive(Clone)]
pub struct Merge<'a> {
    a: &'a [Factor],
    b: &'a [Factor],
}

impl Iterator for Merge<'_> {
    type Item = Factor;

    fn next(&mut self) -> Option<Factor> {
        match (self.a.first(), self.b.first()) {
            (Some(x), Some(y)) if x <= y => {
                self.a = &self.a[1..];
                Some(*x)
            }
            (_, Some(y)) => {
                self.b = &self.b[1..];
                Some(*y)
            }
            (Some(x), None) => {
                self.a = &self.a[1..];
                Some(*x)
            }
            (None, None) => None,
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.a.len() + self.b.len();
        (n, Some(n))
    }
}

impl PartialEq for FactorMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.values().eq(other.values())
    }
}

impl Eq for FactorMultiset {}

impl Hash for FactorMultiset {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.len());
        for f in self.values() {
            state.write_u32(f.0);
        }
    }
}

impl PartialOrd for FactorMultiset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FactorMultiset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.values().cmp(other.values()))
    }
}

impl fmt::Debug for FactorMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.values().map(|x| x.0)).finish()
    }
}

/// Factors for adding an edge whose endpoints currently have degrees
/// `deg_a` and `deg_b` in the graph being extended.
pub fn edge_delta(
    cfg: &PrimeConfig,
    la: &Label,
    deg_a: usize,
    lb: &Label,
    deg_b: usize,
) -> Result<FactorMultiset, SignatureError> {
    let mut out = FactorMultiset::new();
    out.push_edge(edge_factor(cfg, la, lb)?);
    out.push_degree(degree_increment_factor(cfg, la, deg_a + 1)?);
    out.push_degree(degree_increment_factor(cfg, lb, deg_b + 1)?);
    Ok(out)
}

/// Factors that multiply `g`'s signature when `e` is added to it.
pub fn delta_factors(
    cfg: &PrimeConfig,
    e: &Edge,
    g: &LabelledGraph,
) -> Result<FactorMultiset, SignatureError> {
    let deg = |x| g.degree(x).unwrap_or(0);
    edge_delta(cfg, e.label_u(), deg(e.u()), e.label_v(), deg(e.v()))
}

pub fn graph_signature(
    cfg: &PrimeConfig,
    g: &LabelledGraph,
) -> Result<FactorMultiset, SignatureError> {
    let mut out = FactorMultiset::new();
    for e in g.edges() {
        out.push_edge(edge_factor(cfg, e.label_u(), e.label_v())?);
    }
    for (v, l) in g.vertices() {
        let d = g.degree(v).expect("vertex present");
        for n in 1..=d {
            out.push_degree(degree_increment_factor(cfg, l, n)?);
        }
    }
    Ok(out)
}

/// Probability that at most `c_max_fraction` of a signature's `3|E|` factors
/// collide, modelling collisions as `Binomial(3|E|, 2/p)`.
pub fn collision_probability(edge_count: usize, p: u32, c_max_fraction: f64) -> f64 {
    let n = 3 * edge_count;
    // Nudge past representation error so e.g. 0.05 * 60 floors to 3.
    let c_max = (c_max_fraction * n as f64 + 1e-9).floor() as usize;
    if c_max >= n {
        return 1.0;
    }
    let q = (2.0 / p as f64).min(1.0);
    if q >= 1.0 {
        return 0.0;
    }
    let odds = q / (1.0 - q);
    let mut pmf = (1.0 - q).powi(n as i32);
    let mut sum = pmf;
    for x in 0..c_max {
        pmf *= (n - x) as f64 / (x + 1) as f64 * odds;
        sum += pmf;
    }
    sum.min(1.0)
}
