//! Problem instances and synthetic generation of skills, assignments and
//! observations.
//!
//! The generative model is the symmetric single-coin one: worker `i` labels
//! task `t` with the true label with probability `(1 + s_i) / 2` and with the
//! flipped label otherwise, independently across entries.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fully specified generative world: skills, assignment and ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub skills: Vec<f64>,
    pub assignment: BTreeSet<(usize, usize)>,
    pub truth: Vec<i8>,
    pub num_workers: usize,
    pub num_tasks: usize,
}

impl Instance {
    pub fn new(
        skills: Vec<f64>,
        assignment: BTreeSet<(usize, usize)>,
        truth: Vec<i8>,
    ) -> Result<Self> {
        let num_workers = skills.len();
        let num_tasks = truth.len();
        if num_workers == 0 || num_tasks == 0 {
            return Err(Error::Parameter(
                "instance needs at least one worker and one task".into(),
            ));
        }
        if skills.iter().any(|s| !(-1.0..=1.0).contains(s)) {
            return Err(Error::Parameter("skills must lie in [-1, 1]".into()));
        }
        if truth.iter().any(|g| *g != 1 && *g != -1) {
            return Err(Error::Parameter("truth labels must be +1 or -1".into()));
        }
        for &(w, t) in &assignment {
            if w >= num_workers || t >= num_tasks {
                return Err(Error::Parameter(format!(
                    "assignment pair ({w}, {t}) out of range"
                )));
            }
        }
        Ok(Instance {
            skills,
            assignment,
            truth,
            num_workers,
            num_tasks,
        })
    }
}

/// Binary labels are +-1; multiclass labels are class ids `1..=classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelKind {
    Binary,
    Multiclass { classes: usize },
}

/// Sparse labels indexed by (worker, task).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSet {
    entries: BTreeMap<(usize, usize), i32>,
    kind: LabelKind,
    num_workers: usize,
    num_tasks: usize,
}

impl ObservationSet {
    pub fn new(kind: LabelKind, num_workers: usize, num_tasks: usize) -> Self {
        ObservationSet {
            entries: BTreeMap::new(),
            kind,
            num_workers,
            num_tasks,
        }
    }

    pub fn insert(&mut self, worker: usize, task: usize, label: i32) -> Result<()> {
        if worker >= self.num_workers || task >= self.num_tasks {
            return Err(Error::Parameter(format!(
                "observation ({worker}, {task}) out of range"
            )));
        }
        match self.kind {
            LabelKind::Binary if label != 1 && label != -1 => {
                return Err(Error::Parameter(format!(
                    "binary label must be +1 or -1, got {label}"
                )));
            }
            LabelKind::Multiclass { classes } if label < 1 || label as usize > classes => {
                return Err(Error::Parameter(format!(
                    "class label {label} outside 1..={classes}"
                )));
            }
            _ => {}
        }
        self.entries.insert((worker, task), label);
        Ok(())
    }

    pub fn get(&self, worker: usize, task: usize) -> Option<i32> {
        self.entries.get(&(worker, task)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i32)> + '_ {
        self.entries.iter().map(|(&(w, t), &y)| (w, t, y))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    /// The (worker, task) pairs carrying a label.
    pub fn assignment(&self) -> BTreeSet<(usize, usize)> {
        self.entries.keys().copied().collect()
    }

    /// Workers that labeled each task, grouped in task order.
    pub fn by_task(&self) -> Vec<Vec<(usize, i32)>> {
        let mut per_task = vec![Vec::new(); self.num_tasks];
        for (&(w, t), &y) in &self.entries {
            per_task[t].push((w, y));
        }
        per_task
    }

    /// One-vs-rest encoding of a multiclass observation set: +1 where the
    /// label equals `class`, -1 elsewhere.
    pub fn one_vs_rest(&self, class: usize) -> Result<ObservationSet> {
        match self.kind {
            LabelKind::Multiclass { classes } if class >= 1 && class <= classes => {}
            LabelKind::Multiclass { classes } => {
                return Err(Error::Parameter(format!(
                    "class {class} outside 1..={classes}"
                )));
            }
            LabelKind::Binary => {
                return Err(Error::Parameter(
                    "one_vs_rest requires a multiclass observation set".into(),
                ));
            }
        }
        let mut out = ObservationSet::new(LabelKind::Binary, self.num_workers, self.num_tasks);
        for (&(w, t), &y) in &self.entries {
            let enc = if y as usize == class { 1 } else { -1 };
            out.entries.insert((w, t), enc);
        }
        Ok(out)
    }
}

/// How to draw the skill vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SkillDistributionSpec {
    /// `W` equally spaced values from `hi` down to `lo`.
    UniformGrid { lo: f64, hi: f64 },
    /// `s = 2p - 1` with `p ~ Beta(alpha, beta)`.
    Beta { alpha: f64, beta: f64 },
    Explicit(Vec<f64>),
}

pub fn sample_skills(spec: &SkillDistributionSpec, num_workers: usize, seed: u64) -> Result<Vec<f64>> {
    if num_workers == 0 {
        return Err(Error::Parameter("need at least one worker".into()));
    }
    match spec {
        SkillDistributionSpec::UniformGrid { lo, hi } => {
            if !(-1.0..=1.0).contains(lo) || !(-1.0..=1.0).contains(hi) || lo >= hi {
                return Err(Error::Parameter(format!(
                    "uniform grid needs -1 <= lo < hi <= 1, got [{lo}, {hi}]"
                )));
            }
            // hi first so worker 0 is the most skilled.
            if num_workers == 1 {
                return Ok(vec![*hi]);
            }
            let step = (hi - lo) / (num_workers as f64 - 1.0);
            Ok((0..num_workers).map(|i| hi - step * i as f64).collect())
        }
        SkillDistributionSpec::Beta { alpha, beta } => {
            if *alpha <= 0.0 || *beta <= 0.0 {
                return Err(Error::Parameter(format!(
                    "beta parameters must be positive, got ({alpha}, {beta})"
                )));
            }
            let dist = Beta::new(*alpha, *beta)
                .map_err(|e| Error::Parameter(format!("beta distribution: {e}")))?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            Ok((0..num_workers)
                .map(|_| 2.0 * dist.sample(&mut rng) - 1.0)
                .collect())
        }
        SkillDistributionSpec::Explicit(v) => {
            if v.len() != num_workers {
                return Err(Error::Parameter(format!(
                    "explicit skills length {} != {num_workers}",
                    v.len()
                )));
            }
            if v.iter().any(|s| !(-1.0..=1.0).contains(s)) {
                return Err(Error::Parameter("skills must lie in [-1, 1]".into()));
            }
            Ok(v.clone())
        }
    }
}

/// Interaction-graph shapes used by the synthetic studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GraphSpec {
    Clique(usize),
    /// Star with center 0 plus the edge (1, 2), closing a 3-cycle.
    StarWithTriangle(usize),
    EvenCycle(usize),
    Explicit(Vec<(usize, usize)>),
}

impl GraphSpec {
    /// Edge list in a fixed order, canonicalized as (min, max).
    pub fn edges(&self) -> Result<Vec<(usize, usize)>> {
        let edges = match self {
            GraphSpec::Clique(w) => {
                if *w < 2 {
                    return Err(Error::Parameter("clique needs at least 2 workers".into()));
                }
                let mut e = Vec::new();
                for i in 0..*w {
                    for j in (i + 1)..*w {
                        e.push((i, j));
                    }
                }
                e
            }
            GraphSpec::StarWithTriangle(w) => {
                if *w < 3 {
                    return Err(Error::Parameter(
                        "star with triangle needs at least 3 workers".into(),
                    ));
                }
                let mut e: Vec<(usize, usize)> = (1..*w).map(|i| (0, i)).collect();
                e.push((1, 2));
                e
            }
            GraphSpec::EvenCycle(w) => {
                if *w < 4 || w % 2 != 0 {
                    return Err(Error::Parameter(
                        "even cycle needs an even worker count >= 4".into(),
                    ));
                }
                (0..*w)
                    .map(|i| {
                        let j = (i + 1) % w;
                        (i.min(j), i.max(j))
                    })
                    .collect()
            }
            GraphSpec::Explicit(e) => {
                let mut out = Vec::new();
                for &(i, j) in e {
                    if i == j {
                        return Err(Error::Parameter(format!("self-loop at worker {i}")));
                    }
                    out.push((i.min(j), i.max(j)));
                }
                out
            }
        };
        if edges.is_empty() {
            return Err(Error::Parameter("graph has no edges".into()));
        }
        Ok(edges)
    }

    pub fn num_workers(&self) -> Result<usize> {
        match self {
            GraphSpec::Clique(w) | GraphSpec::StarWithTriangle(w) | GraphSpec::EvenCycle(w) => {
                Ok(*w)
            }
            GraphSpec::Explicit(e) => e
                .iter()
                .map(|&(i, j)| i.max(j) + 1)
                .max()
                .ok_or_else(|| Error::Parameter("graph has no edges".into())),
        }
    }
}

/// How workers are assigned to tasks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AssignmentSpec {
    /// Every worker labels every task.
    Full { num_workers: usize, num_tasks: usize },
    /// Task `t` is labeled by both endpoints of edge `t mod |E|`.
    EdgeCycling { graph: GraphSpec, num_tasks: usize },
    Custom(BTreeSet<(usize, usize)>),
}

pub fn generate_assignment(spec: &AssignmentSpec) -> Result<BTreeSet<(usize, usize)>> {
    match spec {
        AssignmentSpec::Full {
            num_workers,
            num_tasks,
        } => {
            if *num_workers == 0 || *num_tasks == 0 {
                return Err(Error::Parameter("full assignment needs W, T >= 1".into()));
            }
            let mut a = BTreeSet::new();
            for w in 0..*num_workers {
                for t in 0..*num_tasks {
                    a.insert((w, t));
                }
            }
            Ok(a)
        }
        AssignmentSpec::EdgeCycling { graph, num_tasks } => {
            let edges = graph.edges()?;
            if *num_tasks == 0 {
                return Err(Error::Parameter("edge cycling needs T >= 1".into()));
            }
            let mut a = BTreeSet::new();
            for t in 0..*num_tasks {
                let (i, j) = edges[t % edges.len()];
                a.insert((i, t));
                a.insert((j, t));
            }
            Ok(a)
        }
        AssignmentSpec::Custom(set) => {
            if set.is_empty() {
                return Err(Error::Parameter("custom assignment is empty".into()));
            }
            Ok(set.clone())
        }
    }
}

/// Draw observations `Y_{i,t} = g_t` with probability `(1 + s_i) / 2`,
/// else `-g_t`, independently per assignment entry.
pub fn sample_observations(instance: &Instance, seed: u64) -> ObservationSet {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut obs = ObservationSet::new(
        LabelKind::Binary,
        instance.num_workers,
        instance.num_tasks,
    );
    for &(w, t) in &instance.assignment {
        let p_correct = (1.0 + instance.skills[w]) / 2.0;
        let y = if rng.random::<f64>() < p_correct {
            instance.truth[t]
        } else {
            -instance.truth[t]
        };
        obs.entries.insert((w, t), y as i32);
    }
    obs
}

/// Random +-1 ground-truth labels.
pub fn sample_truth(num_tasks: usize, seed: u64) -> Vec<i8> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..num_tasks)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_paper_range() {
        let s = sample_skills(&SkillDistributionSpec::UniformGrid { lo: -0.3, hi: 0.8 }, 11, 0)
            .unwrap();
        assert_eq!(s.len(), 11);
        assert!((s[0] - 0.8).abs() < 1e-15);
        assert!((s[10] - (-0.3)).abs() < 1e-15);
        let step = 1.1 / 10.0;
        for w in s.windows(2) {
            assert!((w[0] - w[1] - step).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_skills_identity() {
        let v = vec![0.8, 0.6, 0.5];
        let s = sample_skills(&SkillDistributionSpec::Explicit(v.clone()), 3, 0).unwrap();
        assert_eq!(s, v);
    }

    #[test]
    fn beta_skill_mean_matches_moment() {
        // E[2p - 1] with p ~ Beta(5, 1) is 2*(5/6) - 1 = 2/3; the sample
        // mean over 10^4 draws must land within 3 standard errors.
        let n = 10_000;
        let s = sample_skills(&SkillDistributionSpec::Beta { alpha: 5.0, beta: 1.0 }, n, 7)
            .unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        // Var(2p-1) = 4 Var(p) = 4 * (5*1)/((6^2)*7).
        let var = 4.0 * 5.0 / (36.0 * 7.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 2.0 / 3.0).abs() < 3.0 * se,
            "mean {mean} too far from 2/3 (se {se})"
        );
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(sample_skills(&SkillDistributionSpec::UniformGrid { lo: 0.5, hi: 0.2 }, 3, 0)
            .is_err());
        assert!(
            sample_skills(&SkillDistributionSpec::Beta { alpha: 0.0, beta: 1.0 }, 3, 0).is_err()
        );
    }

    #[test]
    fn noiseless_and_adversarial_workers() {
        let assignment = generate_assignment(&AssignmentSpec::Full {
            num_workers: 2,
            num_tasks: 5,
        })
        .unwrap();
        let truth = vec![1, -1, 1, 1, -1];
        let perfect = Instance::new(vec![1.0, 1.0], assignment.clone(), truth.clone()).unwrap();
        let obs = sample_observations(&perfect, 3);
        for (_, t, y) in obs.iter() {
            assert_eq!(y, truth[t] as i32);
        }
        let adversarial = Instance::new(vec![-1.0, -1.0], assignment, truth.clone()).unwrap();
        let obs = sample_observations(&adversarial, 3);
        for (_, t, y) in obs.iter() {
            assert_eq!(y, -(truth[t] as i32));
        }
    }

    #[test]
    fn observation_agreement_concentrates() {
        // One worker with s = 0.5 on T = 1e5 tasks: the empirical mean of
        // Y * g must be within 3 * sqrt((1 - 0.25) / T) of 0.5.
        let t = 100_000;
        let assignment = generate_assignment(&AssignmentSpec::Full {
            num_workers: 1,
            num_tasks: t,
        })
        .unwrap();
        let truth = sample_truth(t, 11);
        let inst = Instance::new(vec![0.5], assignment, truth.clone()).unwrap();
        let obs = sample_observations(&inst, 12);
        let mean = obs
            .iter()
            .map(|(_, task, y)| f64::from(y) * f64::from(truth[task]))
            .sum::<f64>()
            / t as f64;
        let tol = 3.0 * ((1.0 - 0.25) / t as f64).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean}");
    }

    #[test]
    fn same_seed_identical_observations() {
        let assignment = generate_assignment(&AssignmentSpec::EdgeCycling {
            graph: GraphSpec::Clique(5),
            num_tasks: 50,
        })
        .unwrap();
        let truth = sample_truth(50, 1);
        let skills =
            sample_skills(&SkillDistributionSpec::UniformGrid { lo: -0.3, hi: 0.8 }, 5, 2).unwrap();
        let inst = Instance::new(skills, assignment, truth).unwrap();
        assert_eq!(sample_observations(&inst, 9), sample_observations(&inst, 9));
    }

    #[test]
    fn full_assignment_enumeration() {
        let a = generate_assignment(&AssignmentSpec::Full {
            num_workers: 2,
            num_tasks: 2,
        })
        .unwrap();
        let want: BTreeSet<_> = [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().collect();
        assert_eq!(a, want);
    }

    #[test]
    fn edge_cycling_round_robin() {
        let triangle = GraphSpec::Explicit(vec![(0, 1), (1, 2), (0, 2)]);
        let a = generate_assignment(&AssignmentSpec::EdgeCycling {
            graph: triangle.clone(),
            num_tasks: 3,
        })
        .unwrap();
        // Each task is labeled by exactly one edge's two workers.
        assert_eq!(a.len(), 6);
        let stats = crate::graph::interaction_stats(&a, 3).unwrap();
        assert_eq!(stats.pair_count(0, 1), 1);
        assert_eq!(stats.pair_count(1, 2), 1);
        assert_eq!(stats.pair_count(0, 2), 1);

        let a = generate_assignment(&AssignmentSpec::EdgeCycling {
            graph: triangle,
            num_tasks: 300,
        })
        .unwrap();
        let stats = crate::graph::interaction_stats(&a, 3).unwrap();
        assert_eq!(stats.pair_count(0, 1), 100);
        assert_eq!(stats.pair_count(1, 2), 100);
        assert_eq!(stats.pair_count(0, 2), 100);
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(generate_assignment(&AssignmentSpec::EdgeCycling {
            graph: GraphSpec::Explicit(vec![]),
            num_tasks: 10,
        })
        .is_err());
    }

    #[test]
    fn pair_agreement_converges_to_skill_product() {
        // Agreement rate Y_i * Y_j over shared tasks estimates s_i * s_j;
        // at N_ij = 1e5 it must be within 4 standard errors.
        let t = 100_000;
        let assignment = generate_assignment(&AssignmentSpec::Full {
            num_workers: 2,
            num_tasks: t,
        })
        .unwrap();
        let truth = sample_truth(t, 21);
        let inst = Instance::new(vec![0.8, 0.6], assignment, truth).unwrap();
        let obs = sample_observations(&inst, 22);
        let mut acc = 0.0;
        for task in 0..t {
            acc += f64::from(obs.get(0, task).unwrap()) * f64::from(obs.get(1, task).unwrap());
        }
        let mean = acc / t as f64;
        let c = 0.8 * 0.6;
        let se = ((1.0 - c * c) / t as f64).sqrt();
        assert!((mean - c).abs() < 4.0 * se, "mean {mean}, want {c}");
    }

    #[test]
    fn one_vs_rest_encoding() {
        let mut obs = ObservationSet::new(LabelKind::Multiclass { classes: 3 }, 2, 2);
        obs.insert(0, 0, 3).unwrap();
        obs.insert(1, 0, 1).unwrap();
        obs.insert(0, 1, 2).unwrap();
        let enc = obs.one_vs_rest(3).unwrap();
        assert_eq!(enc.get(0, 0), Some(1));
        assert_eq!(enc.get(1, 0), Some(-1));
        assert_eq!(enc.get(0, 1), Some(-1));
    }
}
