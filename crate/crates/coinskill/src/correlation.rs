//! Pairwise skill-correlation matrices, empirical and exact.
//!
//! Correlations live only on interaction-graph edges. Pairs that never
//! shared a task are absent, not zero: "no data" and "zero correlation"
//! must stay distinguishable because the loss sums only over edges.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::InteractionStats;
use crate::model::{LabelKind, ObservationSet};

/// Symmetric edge-supported matrix of correlations in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: BTreeMap<(usize, usize), f64>,
}

impl CorrelationMatrix {
    pub fn from_edge_values(values: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        for (&(i, j), &v) in &values {
            if i >= j {
                return Err(Error::Parameter(format!(
                    "edge key ({i}, {j}) must satisfy i < j"
                )));
            }
            if v.abs() > 1.0 + 1e-12 {
                return Err(Error::Parameter(format!(
                    "correlation {v} on edge ({i}, {j}) outside [-1, 1]"
                )));
            }
        }
        Ok(CorrelationMatrix { values })
    }

    /// Correlation on edge (i, j), or `None` off the support.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.values.get(&key).copied()
    }

    /// Edges the matrix is defined on, lexicographic.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Empirical correlations `C~_ij = (1/N_ij) * sum_t Y_it * Y_jt` over each
/// edge's shared tasks, accumulated in task order.
pub fn empirical_correlations(
    obs: &ObservationSet,
    stats: &InteractionStats,
) -> Result<CorrelationMatrix> {
    if obs.kind() != LabelKind::Binary {
        return Err(Error::Parameter(
            "empirical correlations need binary labels; encode multiclass one-vs-rest first"
                .into(),
        ));
    }
    let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for workers in obs.by_task() {
        for (a, &(i, yi)) in workers.iter().enumerate() {
            for &(j, yj) in &workers[a + 1..] {
                let key = (i.min(j), i.max(j));
                *sums.entry(key).or_insert(0.0) += f64::from(yi) * f64::from(yj);
            }
        }
    }
    let mut values = BTreeMap::new();
    for &(i, j) in stats.edges() {
        let n = stats.pair_count(i, j);
        let sum = sums.get(&(i, j)).copied().ok_or_else(|| {
            Error::Precondition(format!(
                "observations do not cover edge ({i}, {j}) present in the stats"
            ))
        })?;
        values.insert((i, j), sum / n as f64);
    }
    CorrelationMatrix::from_edge_values(values)
}

/// Exact correlations `C_ij = s_i * s_j` on the given edges.
pub fn exact_correlations(skills: &[f64], edges: &[(usize, usize)]) -> Result<CorrelationMatrix> {
    if skills.iter().any(|s| s.abs() > 1.0) {
        return Err(Error::Parameter("skills must lie in [-1, 1]".into()));
    }
    let mut values = BTreeMap::new();
    for &(i, j) in edges {
        if i.max(j) >= skills.len() {
            return Err(Error::Parameter(format!(
                "edge ({i}, {j}) out of range for {} skills",
                skills.len()
            )));
        }
        values.insert((i.min(j), i.max(j)), skills[i] * skills[j]);
    }
    CorrelationMatrix::from_edge_values(values)
}
