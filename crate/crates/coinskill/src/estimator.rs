//! Skill estimation: the weighted rank-one loss, its gradient, projected
//! gradient descent, and the closed-form odd-cycle recovery used as an
//! oracle.
//!
//! The loss is `L(x) = sum_{(i,j) in E} B(N_ij) (C~_ij - x_i x_j)^2`. On a
//! connected non-bipartite interaction graph its only nonzero noiseless
//! minimizers are +-s; the global sign is resolved by the convention
//! `sum_i s_i > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::graph::{check_identifiability, InteractionStats, Witness};

/// Edge weighting function B applied to pair counts. B(0) = 0 and B >= 0
/// for all three choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// B(n) = [n > 0]
    Binary,
    /// B(n) = n
    Identity,
    /// B(n) = n^2
    Square,
}

impl Weighting {
    #[inline]
    pub fn apply(self, n: u64) -> f64 {
        match self {
            Weighting::Binary => {
                if n > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Weighting::Identity => n as f64,
            Weighting::Square => (n as f64) * (n as f64),
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Weighting::Binary),
            "identity" => Ok(Weighting::Identity),
            "square" => Ok(Weighting::Square),
            other => Err(Error::Parameter(format!("unknown weighting '{other}'"))),
        }
    }
}

/// Initial iterate for PGD.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Init {
    /// Each coordinate uniform on (-1, 1), seeded.
    Seeded(u64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PgdConfig {
    /// Step size; `None` selects `1 / (4 max_i sum_j B(N_ij))`.
    pub step_size: Option<f64>,
    /// Projection margin parameter tau >= 0.
    pub tau: f64,
    pub weighting: Weighting,
    pub max_iters: usize,
    /// Stop when the infinity norm of the parameter change drops below this.
    pub tol: f64,
    pub init: Init,
    /// Apply the `sgn(sum x_i)` sign resolution to the final iterate.
    pub fix_sign: bool,
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig {
            step_size: None,
            tau: 1.0,
            weighting: Weighting::Identity,
            max_iters: 50_000,
            tol: 1e-9,
            init: Init::Seeded(0),
            fix_sign: true,
        }
    }
}

impl PgdConfig {
    fn validate(&self) -> Result<()> {
        if let Some(eta) = self.step_size {
            if !(eta > 0.0) {
                return Err(Error::Parameter("step size must be positive".into()));
            }
        }
        if self.tau < 0.0 {
            return Err(Error::Parameter("tau must be nonnegative".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Estimation result with convergence metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkillEstimate {
    pub skills: Vec<f64>,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
    pub sign_flipped: bool,
    pub warnings: Vec<String>,
}

fn check_dims(x: &[f64], stats: &InteractionStats, corr: &CorrelationMatrix) -> Result<()> {
    if x.len() != stats.num_workers() {
        return Err(Error::Parameter(format!(
            "x has length {}, expected {}",
            x.len(),
            stats.num_workers()
        )));
    }
    for &(i, j) in stats.edges() {
        if corr.get(i, j).is_none() {
            return Err(Error::Parameter(format!(
                "correlation missing on edge ({i}, {j})"
            )));
        }
    }
    Ok(())
}

/// `L(x) = sum over edges of B(N_ij) (C~_ij - x_i x_j)^2`.
pub fn weighted_loss(
    x: &[f64],
    stats: &InteractionStats,
    corr: &CorrelationMatrix,
    weighting: Weighting,
) -> Result<f64> {
    check_dims(x, stats, corr)?;
    let mut loss = 0.0;
    for &(i, j) in stats.edges() {
        let b = weighting.apply(stats.pair_count(i, j));
        let r = corr.get(i, j).unwrap() - x[i] * x[j];
        loss += b * r * r;
    }
    Ok(loss)
}

/// Gradient component `2 sum_j B(N_ij) (x_i x_j - C~_ij) x_j`.
pub fn loss_gradient(
    x: &[f64],
    stats: &InteractionStats,
    corr: &CorrelationMatrix,
    weighting: Weighting,
) -> Result<Vec<f64>> {
    check_dims(x, stats, corr)?;
    let mut grad = vec![0.0; x.len()];
    for &(i, j) in stats.edges() {
        let b = weighting.apply(stats.pair_count(i, j));
        let r = x[i] * x[j] - corr.get(i, j).unwrap();
        grad[i] += 2.0 * b * r * x[j];
        grad[j] += 2.0 * b * r * x[i];
    }
    Ok(grad)
}

/// Projection half-width for worker `i`: `max(1 - tau / sqrt(N_i), 0.1)`.
/// The floor keeps the box full-dimensional for workers with very few
/// tasks, where the paper's interval would collapse.
pub fn projection_bound(worker_count: u64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 1.0;
    }
    let width = 1.0 - tau / (worker_count.max(1) as f64).sqrt();
    width.max(0.1)
}

/// Clamp each coordinate into `[-b_i, b_i]`.
pub fn project_to_shrunk_cube(x: &[f64], worker_counts: &[u64], tau: f64) -> Vec<f64> {
    x.iter()
        .zip(worker_counts)
        .map(|(&xi, &n)| {
            let b = projection_bound(n, tau);
            xi.clamp(-b, b)
        })
        .collect()
}

/// Flip the vector so its coordinate sum is nonnegative (`sgn(0) = +1`).
pub fn resolve_sign(x: &[f64]) -> Vec<f64> {
    if x.iter().sum::<f64>() < 0.0 {
        x.iter().map(|v| -v).collect()
    } else {
        x.to_vec()
    }
}

/// Default step size `1 / (4 max_i sum_j B(N_ij))`, a conservative bound
/// on the local curvature of the loss over the unit box.
pub fn default_step_size(stats: &InteractionStats, weighting: Weighting) -> f64 {
    let w = stats.num_workers();
    let mut max_row = 0.0f64;
    for i in 0..w {
        let row: f64 = (0..w)
            .filter(|&j| j != i)
            .map(|j| weighting.apply(stats.pair_count(i, j)))
            .sum();
        max_row = max_row.max(row);
    }
    if max_row > 0.0 {
        1.0 / (4.0 * max_row)
    } else {
        0.25
    }
}

/// Projected gradient descent on the weighted rank-one loss, with
/// synchronous coordinate updates and optional final sign resolution.
pub fn pgd_estimate(
    stats: &InteractionStats,
    corr: &CorrelationMatrix,
    config: &PgdConfig,
) -> Result<SkillEstimate> {
    config.validate()?;
    let w = stats.num_workers();
    let mut x = match &config.init {
        Init::Seeded(seed) => {
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            (0..w).map(|_| rng.random_range(-1.0..1.0)).collect()
        }
        Init::Explicit(v) => {
            if v.len() != w {
                return Err(Error::Parameter(format!(
                    "init has length {}, expected {w}",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    check_dims(&x, stats, corr)?;

    let eta = config
        .step_size
        .unwrap_or_else(|| default_step_size(stats, config.weighting));
    let bounds: Vec<f64> = stats
        .worker_counts()
        .iter()
        .map(|&n| projection_bound(n, config.tau))
        .collect();
    x = x
        .iter()
        .zip(&bounds)
        .map(|(&xi, &b)| xi.clamp(-b, b))
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..config.max_iters {
        iterations = iter + 1;
        let grad = loss_gradient(&x, stats, corr, config.weighting)?;
        let mut max_change = 0.0f64;
        let mut next = vec![0.0; w];
        for i in 0..w {
            let xi = (x[i] - eta * grad[i]).clamp(-bounds[i], bounds[i]);
            if !xi.is_finite() {
                return Err(Error::Divergence { iteration: iter });
            }
            max_change = max_change.max((xi - x[i]).abs());
            next[i] = xi;
        }
        x = next;
        if max_change < config.tol {
            converged = true;
            break;
        }
    }

    let mut sign_flipped = false;
    if config.fix_sign {
        let flipped = resolve_sign(&x);
        sign_flipped = flipped != x;
        x = flipped;
    }
    let final_loss = weighted_loss(&x, stats, corr, config.weighting)?;

    let mut warnings = Vec::new();
    let verdict = check_identifiability(stats);
    if !verdict.identifiable {
        warnings.push(
            "interaction graph is not identifiable (needs connectivity and an odd cycle); \
             the estimate may not be unique"
                .into(),
        );
    }
    let near_zero: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < 0.1)
        .map(|(i, _)| i)
        .collect();
    if !near_zero.is_empty() {
        warnings.push(format!(
            "estimated skills near zero for workers {near_zero:?}; their labels are \
             close to uninformative"
        ));
    }

    Ok(SkillEstimate {
        skills: x,
        iterations,
        final_loss,
        converged,
        sign_flipped,
        warnings,
    })
}

/// Closed-form recovery along an odd cycle plus a spanning tree, following
/// the constructive identifiability argument: the alternating product of
/// correlations around an odd cycle pins `s_i^2` at one vertex, magnitudes
/// propagate along tree edges via `|s_child| = |C_{child,parent}| /
/// |s_parent|`, and signs follow edge sign products. The global sign is
/// chosen so the skill sum is positive.
pub fn closed_form_estimate(
    corr: &CorrelationMatrix,
    verdict: &crate::graph::IdentifiabilityVerdict,
) -> Result<Vec<f64>> {
    if !verdict.identifiable {
        return Err(Error::Precondition(
            "closed-form recovery requires an identifiable interaction graph".into(),
        ));
    }
    let cycle = match &verdict.witness {
        Some(Witness::OddCycle(c)) => c.clone(),
        _ => {
            return Err(Error::Precondition(
                "identifiable verdict must carry an odd-cycle witness".into(),
            ))
        }
    };
    let num_workers = corr
        .support()
        .map(|(_, j)| j + 1)
        .max()
        .ok_or_else(|| Error::Precondition("empty correlation matrix".into()))?;

    let require = |i: usize, j: usize| -> Result<f64> {
        let c = corr
            .get(i, j)
            .ok_or_else(|| Error::Precondition(format!("missing correlation on edge ({i}, {j})")))?;
        if c.abs() < 1e-12 {
            return Err(Error::Precondition(format!(
                "correlation on edge ({i}, {j}) is degenerate (|C| < 1e-12); \
                 some skill is approximately zero"
            )));
        }
        Ok(c)
    };

    // Alternating product around the odd cycle yields s^2 at cycle[0].
    let len = cycle.len();
    let mut log_sq = 0.0;
    for m in 0..len {
        let c = require(cycle[m], cycle[(m + 1) % len])?;
        if m % 2 == 0 {
            log_sq += c.abs().ln();
        } else {
            log_sq -= c.abs().ln();
        }
    }
    let root = cycle[0];
    let root_mag = (log_sq / 2.0).exp();

    // BFS spanning tree over the full support propagates magnitudes and
    // signs from the root.
    let mut mag = vec![f64::NAN; num_workers];
    let mut sign = vec![0.0f64; num_workers];
    mag[root] = root_mag;
    sign[root] = 1.0;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); num_workers];
    for (i, j) in corr.support() {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if sign[v] != 0.0 {
                continue;
            }
            let c = require(u, v)?;
            mag[v] = c.abs() / mag[u];
            sign[v] = sign[u] * c.signum();
            queue.push_back(v);
        }
    }
    if sign.iter().any(|&s| s == 0.0) {
        return Err(Error::Precondition(
            "correlation support is not connected; cannot propagate magnitudes".into(),
        ));
    }
    let skills: Vec<f64> = mag.iter().zip(&sign).map(|(m, s)| m * s).collect();
    Ok(resolve_sign(&skills))
}
