//! Property tests for model invariants: loss symmetry, prediction
//! scale-invariance, projection behavior, witness validity, and
//! permutation invariance of the interaction statistics.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use coinskill::correlation::CorrelationMatrix;
use coinskill::estimator::{
    pgd_estimate, project_to_shrunk_cube, projection_bound, resolve_sign, weighted_loss, Init,
    PgdConfig, Weighting,
};
use coinskill::graph::{check_identifiability, interaction_stats, Witness};
use coinskill::inference::{log_odds, predict_binary, WeightVector};
use coinskill::model::{LabelKind, ObservationSet};
use common::{random_connected_graph, stats_from_edges};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A small random graph plus a correlation value per edge.
fn graph_instance() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<f64>)> {
    (3usize..=9, any::<u64>()).prop_flat_map(|(w, seed)| {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let edges = random_connected_graph(w, w / 2, &mut rng);
        let m = edges.len();
        (
            Just(w),
            Just(edges),
            proptest::collection::vec(-0.99f64..0.99, m),
        )
    })
}

fn corr_from(edges: &[(usize, usize)], values: &[f64]) -> CorrelationMatrix {
    let mut map = BTreeMap::new();
    for (&(i, j), &v) in edges.iter().zip(values) {
        map.insert((i, j), v);
    }
    CorrelationMatrix::from_edge_values(map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // L(x) depends on x only through products x_i x_j, hence L(-x) = L(x).
    #[test]
    fn loss_is_antipodally_symmetric(
        (w, edges, values) in graph_instance(),
        xs in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let stats = stats_from_edges(&edges, w, 1);
        let corr = corr_from(&edges, &values);
        let x = &xs[..w];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for weighting in [Weighting::Binary, Weighting::Identity, Weighting::Square] {
            let a = weighted_loss(x, &stats, &corr, weighting).unwrap();
            let b = weighted_loss(&neg, &stats, &corr, weighting).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    // Binary predictions only compare weighted sums to zero, so any
    // positive rescaling of the weight vector leaves them unchanged.
    #[test]
    fn predictions_invariant_under_weight_scaling(
        entries in proptest::collection::vec((0usize..6, 0usize..10, prop_oneof![Just(-1), Just(1)]), 1..40),
        weights in proptest::collection::vec(0.01f64..5.0, 6),
        scale in 0.01f64..100.0,
    ) {
        let mut obs = ObservationSet::new(LabelKind::Binary, 6, 10);
        for (w, t, y) in entries {
            obs.insert(w, t, y).unwrap();
        }
        let scaled: Vec<f64> = weights.iter().map(|v| v * scale).collect();
        let a = predict_binary(&obs, &WeightVector(weights)).unwrap();
        let b = predict_binary(&obs, &WeightVector(scaled)).unwrap();
        prop_assert_eq!(a, b);
    }

    // Equal weights reduce the rule to a plain majority vote.
    #[test]
    fn uniform_weights_are_majority_vote(
        entries in proptest::collection::vec((0usize..7, 0usize..10, prop_oneof![Just(-1), Just(1)]), 1..50),
    ) {
        let mut obs = ObservationSet::new(LabelKind::Binary, 7, 10);
        for (w, t, y) in entries {
            obs.insert(w, t, y).unwrap();
        }
        let uniform = WeightVector(vec![0.7; 7]);
        let predicted = predict_binary(&obs, &uniform).unwrap();
        let majority = predict_binary(&obs, &WeightVector::majority(7)).unwrap();
        prop_assert_eq!(predicted, majority);
    }

    // v is odd and strictly increasing on (-1, 1).
    #[test]
    fn log_odds_is_odd_and_monotone(a in -0.99f64..0.99, b in -0.99f64..0.99) {
        let va = log_odds(a).unwrap();
        prop_assert!((log_odds(-a).unwrap() + va).abs() < 1e-12);
        if a < b {
            prop_assert!(va < log_odds(b).unwrap());
        }
    }

    // Projection output lies inside the per-worker box and is idempotent.
    #[test]
    fn projection_is_into_box_and_idempotent(
        xs in proptest::collection::vec(-3.0f64..3.0, 1..8),
        counts in proptest::collection::vec(1u64..500, 8),
        tau in 0.0f64..3.0,
    ) {
        let counts = &counts[..xs.len()];
        let projected = project_to_shrunk_cube(&xs, counts, tau);
        for (i, &p) in projected.iter().enumerate() {
            let b = projection_bound(counts[i], tau);
            prop_assert!(p.abs() <= b + 1e-15);
            // Points already inside stay put.
            if xs[i].abs() <= b {
                prop_assert_eq!(p, xs[i]);
            }
        }
        let again = project_to_shrunk_cube(&projected, counts, tau);
        prop_assert_eq!(again, projected);
    }

    // Sign resolution never flips to a negative-sum representative.
    #[test]
    fn resolved_sign_has_nonnegative_sum(xs in proptest::collection::vec(-1.0f64..1.0, 1..10)) {
        let resolved = resolve_sign(&xs);
        prop_assert!(resolved.iter().sum::<f64>() >= 0.0);
        let sum: f64 = xs.iter().sum();
        if sum >= 0.0 {
            prop_assert_eq!(resolved, xs);
        }
    }

    // The identifiability witness must be checkable against the graph:
    // an odd cycle really is an odd closed walk over edges; a
    // bipartition really separates every edge.
    #[test]
    fn witness_is_valid((w, edges, _) in graph_instance()) {
        let stats = stats_from_edges(&edges, w, 1);
        let edge_set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
        let verdict = check_identifiability(&stats);
        prop_assert!(verdict.connected);
        prop_assert_eq!(verdict.identifiable, verdict.connected && verdict.has_odd_cycle);
        match verdict.witness {
            Some(Witness::OddCycle(cycle)) => {
                prop_assert!(verdict.identifiable);
                prop_assert_eq!(cycle.len() % 2, 1);
                for k in 0..cycle.len() {
                    let a = cycle[k];
                    let b = cycle[(k + 1) % cycle.len()];
                    prop_assert!(edge_set.contains(&(a.min(b), a.max(b))));
                }
            }
            Some(Witness::Bipartition(left, right)) => {
                prop_assert!(!verdict.identifiable);
                prop_assert_eq!(left.len() + right.len(), w);
                let left_set: BTreeSet<usize> = left.iter().copied().collect();
                for &(i, j) in &edges {
                    prop_assert_ne!(left_set.contains(&i), left_set.contains(&j));
                }
            }
            None => prop_assert!(false, "connected graph must produce a witness"),
        }
    }

    // Interaction statistics depend only on which workers share tasks,
    // not on task numbering.
    #[test]
    fn stats_invariant_under_task_relabeling(
        entries in proptest::collection::vec((0usize..6, 0usize..12), 2..40),
        seed in any::<u64>(),
    ) {
        let assignment: BTreeSet<(usize, usize)> = entries.into_iter().collect();
        let tasks: BTreeSet<usize> = assignment.iter().map(|&(_, t)| t).collect();
        let tasks: Vec<usize> = tasks.into_iter().collect();
        let mut perm: Vec<usize> = (0..tasks.len()).collect();
        // Fisher-Yates with the seeded generator.
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            perm.swap(i, j);
        }
        let relabeled: BTreeSet<(usize, usize)> = assignment
            .iter()
            .map(|&(w, t)| {
                let pos = tasks.binary_search(&t).unwrap();
                (w, perm[pos])
            })
            .collect();
        let a = interaction_stats(&assignment, 6).unwrap();
        let b = interaction_stats(&relabeled, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                prop_assert_eq!(a.pair_count(i, j), b.pair_count(i, j));
            }
        }
        prop_assert_eq!(a.worker_counts(), b.worker_counts());
    }

    // Every PGD iterate stays inside the projection box, so the returned
    // estimate must as well; the reported loss matches the loss function.
    #[test]
    fn estimate_respects_box_and_reports_true_loss(
        (w, edges, values) in graph_instance(),
        seed in any::<u64>(),
        tau in 0.0f64..1.5,
    ) {
        let stats = stats_from_edges(&edges, w, 1);
        let corr = corr_from(&edges, &values);
        let config = PgdConfig {
            tau,
            max_iters: 500,
            init: Init::Seeded(seed),
            ..Default::default()
        };
        let est = pgd_estimate(&stats, &corr, &config).unwrap();
        for (i, &x) in est.skills.iter().enumerate() {
            prop_assert!(x.abs() <= projection_bound(stats.worker_count(i), tau) + 1e-12);
        }
        let loss = weighted_loss(&est.skills, &stats, &corr, Weighting::Identity).unwrap();
        prop_assert!((loss - est.final_loss).abs() <= 1e-12 * (1.0 + loss));
    }
}
