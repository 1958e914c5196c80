mod common;

use std::collections::BTreeMap;

use common::*;
use motifpart::graph::{Edge, LabelledGraph};
use motifpart::signature::{
    collision_probability, delta_factors, edge_factor, graph_signature, FactorMultiset, PrimeConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg_ab() -> PrimeConfig {
    PrimeConfig::new(&labels(&["a", "b"]), 251, 5).unwrap()
}

#[test]
fn isomorphic_small_graphs_share_signatures() {
    let cfg = cfg_ab();
    let mut classes: BTreeMap<_, Vec<FactorMultiset>> = BTreeMap::new();
    for g in small_graphs() {
        classes
            .entry(canonical_form(&g))
            .or_default()
            .push(graph_signature(&cfg, &g).unwrap());
    }
    assert!(classes.len() > 100);
    for (form, sigs) in &classes {
        assert!(sigs.windows(2).all(|w| w[0] == w[1]), "class {form:?} split");
    }
}

#[test]
fn random_isomorphic_pairs_share_signatures() {
    let cfg = PrimeConfig::new(&labels(&["a", "b", "c"]), 251, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..1000 {
        let m = rand::Rng::gen_range(&mut rng, 5..=8);
        let g = random_connected(&mut rng, m, 9, &["a", "b", "c"], 0);
        let h = relabelled(&mut rng, &g, 100);
        assert!(brute_isomorphic(&g, &h));
        assert_eq!(graph_signature(&cfg, &g).unwrap(), graph_signature(&cfg, &h).unwrap());
    }
}

#[test]
fn golden_values() {
    let cfg = PrimeConfig::with_residues(11, [(labels(&["a"])[0].clone(), 3), (labels(&["b"])[0].clone(), 10)]).unwrap();
    let (a, b) = (&labels(&["a"])[0], &labels(&["b"])[0]);
    assert_eq!(edge_factor(&cfg, a, b).unwrap().value(), 7);
    let product = |g: &LabelledGraph| graph_signature(&cfg, g).unwrap().product().unwrap();
    let cycle = graph(&[(1, "a", 2, "b"), (2, "b", 3, "a"), (3, "a", 4, "b"), (4, "b", 1, "a")]);
    assert_eq!(product(&cycle), 116_208_400);
    assert_eq!(product(&graph(&[(1, "a", 2, "b")])), 308);
    assert_eq!(product(&graph(&[(1, "a", 2, "b"), (2, "b", 3, "a")])), 8624);
}

#[test]
fn collision_model_matches_exact_cdf() {
    for edges in [8usize, 12, 16] {
        for p in (2..=317u32).filter(|&p| motifpart::signature::is_prime(p)) {
            let n = 3 * edges;
            let c = (0.05 * n as f64 + 1e-9).floor() as usize;
            let ours = collision_probability(edges, p, 0.05);
            let exact = exact_binomial_cdf(n, p, c);
            assert!((ours - exact).abs() < 1e-12, "|E|={edges} p={p}: {ours} vs {exact}");
        }
        assert!(collision_probability(edges, 251, 0.05) > 0.95);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn signature_builds_incrementally(seed in any::<u64>(), m in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, m, 8, &["a", "b", "c"], 0);
        let cfg = PrimeConfig::new(&labels(&["a", "b", "c"]), 251, seed).unwrap();
        let mut es: Vec<Edge> = g.edges().collect();
        rand::seq::SliceRandom::shuffle(es.as_mut_slice(), &mut rng);
        let mut partial = LabelledGraph::new();
        let mut sig = FactorMultiset::new();
        for e in &es {
            sig = sig.union(&delta_factors(&cfg, e, &partial).unwrap());
            partial.add_edge(e).unwrap();
        }
        prop_assert_eq!(sig.len(), 3 * m);
        prop_assert_eq!(sig, graph_signature(&cfg, &g).unwrap());
    }

    #[test]
    fn relabelling_keeps_signature(seed in any::<u64>(), m in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, m, 8, &["a", "b"], 0);
        let h = relabelled(&mut rng, &g, 50);
        let cfg = cfg_ab();
        prop_assert_eq!(graph_signature(&cfg, &g).unwrap(), graph_signature(&cfg, &h).unwrap());
    }
}
