//! Property tests over randomly generated graphs and parameters.

use proptest::prelude::*;

use qra::algorithm::{enumerate_admissible, run_algorithm, DEFAULT_PATH_CAP};
use qra::graph::{BipartiteGraph, IsolatedUPolicy};
use qra::law::LawDescriptor;
use qra::rational::Rational;
use qra::rng::Rng;

/// Strategy: a bipartite graph with up to 5 nodes per side, edges drawn
/// from a bitmask so shrinking stays meaningful.
fn graph_strategy() -> impl Strategy<Value = BipartiteGraph> {
    (1usize..=5, 1usize..=5, any::<u32>()).prop_map(|(nu, nv, mask)| {
        let u_names: Vec<String> = (1..=nu).map(|i| format!("u{i}")).collect();
        let v_names: Vec<String> = (1..=nv).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for ui in 0..nu {
            for vi in 0..nv {
                if mask >> (ui * nv + vi) & 1 == 1 {
                    edges.push((u_names[ui].clone(), v_names[vi].clone()));
                }
            }
        }
        BipartiteGraph::new(u_names, v_names, &edges).unwrap()
    })
}

proptest! {
    #[test]
    fn serialize_parse_round_trips(g in graph_strategy()) {
        let text = g.serialize();
        let back = BipartiteGraph::parse_with(&text, IsolatedUPolicy::Allow).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn remove_fork_shrinks_and_never_raises_degrees(g in graph_strategy()) {
        for v in g.v_nodes() {
            let fork = g.neighbors_of_v(v).len();
            let next = g.remove_fork(v);
            prop_assert_eq!(next.v_count(), g.v_count() - 1);
            prop_assert_eq!(next.u_count(), g.u_count() - fork);
            for w in next.v_nodes() {
                let old = g.v_by_name(next.v_name(w)).unwrap();
                prop_assert!(next.degree(w) <= g.degree(old));
            }
        }
    }

    #[test]
    fn admissible_probabilities_sum_to_exactly_one(g in graph_strategy()) {
        let traces = enumerate_admissible(&g, DEFAULT_PATH_CAP).unwrap();
        let total = traces
            .iter()
            .try_fold(Rational::ZERO, |acc, t| acc.checked_add(t.probability()))
            .unwrap();
        prop_assert_eq!(total, Rational::ONE);
    }

    #[test]
    fn seeded_runs_are_admissible(g in graph_strategy(), seed in any::<u64>()) {
        let traces = enumerate_admissible(&g, DEFAULT_PATH_CAP).unwrap();
        let mut rng = Rng::seed_from_u64(seed);
        let run = run_algorithm(&g, &mut rng).unwrap();
        prop_assert!(traces.contains(&run));
    }

    #[test]
    fn admissible_traces_share_d_star(g in graph_strategy()) {
        let traces = enumerate_admissible(&g, DEFAULT_PATH_CAP).unwrap();
        prop_assert!(traces.windows(2).all(|w| w[0].d_star() == w[1].d_star()));
    }

    /// Rates S/f_k with S the sum of the f's always produce a unit-mean
    /// hypoexponential, however the tie-break prefactors fall out.
    #[test]
    fn normalized_hypoexponential_has_unit_mean(ns in prop::collection::vec(1usize..=6, 1..=5)) {
        let f: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let total: f64 = f.iter().sum();
        let rates: Vec<f64> = f.iter().map(|fk| total / fk).collect();
        let law = LawDescriptor::hypoexponential(rates).unwrap();
        prop_assert!((law.mean() - 1.0).abs() < 1e-12);
        let (_, survival) = law.eval(0.0).unwrap();
        prop_assert_eq!(survival, 1.0);
    }
}
