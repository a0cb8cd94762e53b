//! Interaction-graph construction and identifiability checks.
//!
//! Skills are identifiable exactly when the worker interaction graph is
//! connected and contains an odd cycle. Both halves of the verdict carry a
//! witness: the odd cycle itself, or the bipartition that rules one out.
//! The spectral route to the same fact goes through the signless Laplacian,
//! which is positive definite iff the graph is non-bipartite.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// Pairwise co-labeling counts and the induced interaction graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionStats {
    num_workers: usize,
    pair_counts: Vec<u64>,
    worker_counts: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl InteractionStats {
    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    /// N_ij: number of tasks labeled by both `i` and `j`.
    pub fn pair_count(&self, i: usize, j: usize) -> u64 {
        self.pair_counts[i * self.num_workers + j]
    }

    /// N_i: number of tasks labeled by worker `i`.
    pub fn worker_count(&self, i: usize) -> u64 {
        self.worker_counts[i]
    }

    pub fn worker_counts(&self) -> &[u64] {
        &self.worker_counts
    }

    /// Edges (i, j) with i < j and N_ij > 0, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_workers).filter(move |&j| j != i && self.pair_count(i, j) > 0)
    }

    /// Pair counts as a dense symmetric matrix with zero diagonal.
    pub fn pair_count_matrix(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.num_workers, |i, j| {
            if i == j {
                0.0
            } else {
                self.pair_count(i, j) as f64
            }
        })
    }
}

/// Build interaction stats from a worker-task assignment set.
pub fn interaction_stats(
    assignment: &BTreeSet<(usize, usize)>,
    num_workers: usize,
) -> Result<InteractionStats> {
    if assignment.is_empty() {
        return Err(Error::Parameter("assignment is empty".into()));
    }
    let num_tasks = assignment.iter().map(|&(_, t)| t).max().unwrap() + 1;
    let mut per_task: Vec<Vec<usize>> = vec![Vec::new(); num_tasks];
    let mut worker_counts = vec![0u64; num_workers];
    for &(w, t) in assignment {
        if w >= num_workers {
            return Err(Error::Parameter(format!("worker index {w} out of range")));
        }
        per_task[t].push(w);
        worker_counts[w] += 1;
    }
    let mut pair_counts = vec![0u64; num_workers * num_workers];
    for workers in &per_task {
        for (a, &i) in workers.iter().enumerate() {
            for &j in &workers[a + 1..] {
                pair_counts[i * num_workers + j] += 1;
                pair_counts[j * num_workers + i] += 1;
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..num_workers {
        for j in (i + 1)..num_workers {
            if pair_counts[i * num_workers + j] > 0 {
                edges.push((i, j));
            }
        }
    }
    Ok(InteractionStats {
        num_workers,
        pair_counts,
        worker_counts,
        edges,
    })
}

/// Witness backing an identifiability verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// Vertex list of an odd cycle; consecutive pairs and the closing pair
    /// are edges.
    OddCycle(Vec<usize>),
    /// Two-coloring certifying the graph bipartite.
    Bipartition(Vec<usize>, Vec<usize>),
}

/// Theorem-level verdict: identifiable iff connected and non-bipartite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifiabilityVerdict {
    pub connected: bool,
    pub has_odd_cycle: bool,
    pub identifiable: bool,
    pub witness: Option<Witness>,
}

/// Connectivity plus odd-cycle detection by BFS 2-coloring.
pub fn check_identifiability(stats: &InteractionStats) -> IdentifiabilityVerdict {
    let w = stats.num_workers();
    let mut color = vec![-1i8; w];
    let mut parent = vec![usize::MAX; w];
    let mut components = 0usize;
    let mut odd_cycle: Option<Vec<usize>> = None;

    for start in 0..w {
        if color[start] >= 0 {
            continue;
        }
        components += 1;
        color[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in stats.neighbors(u) {
                if color[v] < 0 {
                    color[v] = 1 - color[u];
                    parent[v] = u;
                    queue.push_back(v);
                } else if color[v] == color[u] && odd_cycle.is_none() {
                    odd_cycle = Some(recover_odd_cycle(u, v, &parent));
                }
            }
        }
    }

    let connected = components <= 1;
    let has_odd_cycle = odd_cycle.is_some();
    let witness = match &odd_cycle {
        Some(cycle) => Some(Witness::OddCycle(cycle.clone())),
        None => {
            let side0: Vec<usize> = (0..w).filter(|&i| color[i] == 0).collect();
            let side1: Vec<usize> = (0..w).filter(|&i| color[i] == 1).collect();
            Some(Witness::Bipartition(side0, side1))
        }
    };
    IdentifiabilityVerdict {
        connected,
        has_odd_cycle,
        identifiable: connected && has_odd_cycle,
        witness,
    }
}

/// Join the BFS-tree paths of `u` and `v` at their lowest common ancestor.
/// Since `u` and `v` share a color, the resulting cycle has odd length.
fn recover_odd_cycle(u: usize, v: usize, parent: &[usize]) -> Vec<usize> {
    let path_to_root = |mut x: usize| {
        let mut p = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            p.push(x);
        }
        p
    };
    let pu = path_to_root(u);
    let pv = path_to_root(v);
    // Trim the common suffix, keeping the shared ancestor once.
    let mut iu = pu.len();
    let mut iv = pv.len();
    while iu > 1 && iv > 1 && pu[iu - 2] == pv[iv - 2] {
        iu -= 1;
        iv -= 1;
    }
    let mut cycle: Vec<usize> = pu[..iu].to_vec();
    cycle.extend(pv[..iv - 1].iter().rev());
    cycle
}

/// Signless Laplacian `L = D + A` of a symmetric nonnegative weight matrix
/// with zero diagonal: off-diagonals copy the weights, diagonals are row
/// sums.
pub fn signless_laplacian(weights: &SquareMatrix) -> Result<SquareMatrix> {
    if !weights.is_symmetric() {
        return Err(Error::Parameter(
            "signless Laplacian needs a symmetric weight matrix".into(),
        ));
    }
    let n = weights.dim();
    for i in 0..n {
        if weights.get(i, i) != 0.0 {
            return Err(Error::Parameter("weight matrix must have zero diagonal".into()));
        }
        for j in 0..n {
            if weights.get(i, j) < 0.0 {
                return Err(Error::Parameter("weights must be nonnegative".into()));
            }
        }
    }
    Ok(SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            (0..n).map(|k| weights.get(i, k)).sum()
        } else {
            weights.get(i, j)
        }
    }))
}

pub use crate::linalg::min_eigenvalue_sym;
