//! Shared helpers for integration tests: random graph generation and
//! conversion of edge lists into interaction statistics.
#![allow(dead_code)] // each test binary uses a subset

use std::collections::BTreeSet;

use coinskill::graph::{check_identifiability, interaction_stats, InteractionStats};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Build interaction statistics giving every edge the same pair count.
pub fn stats_from_edges(
    edges: &[(usize, usize)],
    num_workers: usize,
    count_per_edge: usize,
) -> InteractionStats {
    let mut assignment = BTreeSet::new();
    let mut task = 0;
    for &(i, j) in edges {
        for _ in 0..count_per_edge {
            assignment.insert((i, task));
            assignment.insert((j, task));
            task += 1;
        }
    }
    interaction_stats(&assignment, num_workers).unwrap()
}

/// Random connected graph: a random spanning tree plus `extra` random
/// non-tree edges (duplicates ignored).
pub fn random_connected_graph(
    num_workers: usize,
    extra: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<(usize, usize)> {
    assert!(num_workers >= 2);
    let mut edges = BTreeSet::new();
    for i in 1..num_workers {
        let parent = rng.random_range(0..i);
        edges.insert((parent, i));
    }
    for _ in 0..extra {
        let i = rng.random_range(0..num_workers);
        let j = rng.random_range(0..num_workers);
        if i != j {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges.into_iter().collect()
}

/// Random connected non-bipartite graph: if the connected draw comes out
/// bipartite, close an odd cycle by joining two same-side vertices.
pub fn random_connected_nonbipartite(
    num_workers: usize,
    extra: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<(usize, usize)> {
    assert!(num_workers >= 3);
    let mut edges = random_connected_graph(num_workers, extra, rng);
    let stats = stats_from_edges(&edges, num_workers, 1);
    let verdict = check_identifiability(&stats);
    if verdict.identifiable {
        return edges;
    }
    // The verdict of a connected bipartite graph carries the two sides.
    let sides = match verdict.witness {
        Some(coinskill::graph::Witness::Bipartition(a, b)) => (a, b),
        other => panic!("expected a bipartition witness, got {other:?}"),
    };
    let side = if sides.0.len() >= 2 { sides.0 } else { sides.1 };
    let pair: Vec<&usize> = side.choose_multiple(rng, 2).collect();
    let (i, j) = (*pair[0].min(pair[1]), *pair[0].max(pair[1]));
    edges.push((i, j));
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Skills with |s_i| >= `floor` and a positive sum.
pub fn random_skills_bounded_away(
    num_workers: usize,
    floor: f64,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let mut skills: Vec<f64> = (0..num_workers)
        .map(|_| {
            let mag = rng.random_range(floor..0.95);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    if skills.iter().sum::<f64>() <= 0.0 {
        for s in &mut skills {
            *s = -*s;
        }
    }
    if skills.iter().sum::<f64>() <= 0.0 {
        // All-magnitudes-cancel draws are measure zero; nudge one entry.
        skills[0] = skills[0].abs();
    }
    skills
}
