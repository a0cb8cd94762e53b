//! Second-order and robustness diagnostics: the loss Hessian, the
//! signless-Laplacian curvature constant, and the noise-propagation bound
//! relating correlation perturbations to skill-estimate error.

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::estimator::Weighting;
use crate::graph::{signless_laplacian, InteractionStats};
use crate::linalg::{min_eigenvalue_sym, SquareMatrix};

/// Hessian of the weighted rank-one loss at `x`:
/// `H_ii = sum_j 2 B(N_ij) x_j^2`,
/// `H_ij = 4 B(N_ij) x_i x_j - 2 B(N_ij) C~_ij` for i != j on edges.
pub fn hessian(
    x: &[f64],
    stats: &InteractionStats,
    corr: &CorrelationMatrix,
    weighting: Weighting,
) -> Result<SquareMatrix> {
    let w = stats.num_workers();
    if x.len() != w {
        return Err(Error::Parameter(format!(
            "x has length {}, expected {w}",
            x.len()
        )));
    }
    let mut h = SquareMatrix::zeros(w);
    for &(i, j) in stats.edges() {
        let b = weighting.apply(stats.pair_count(i, j));
        let c = corr
            .get(i, j)
            .ok_or_else(|| Error::Parameter(format!("correlation missing on edge ({i}, {j})")))?;
        h.set(i, i, h.get(i, i) + 2.0 * b * x[j] * x[j]);
        h.set(j, j, h.get(j, j) + 2.0 * b * x[i] * x[i]);
        let off = 4.0 * b * x[i] * x[j] - 2.0 * b * c;
        h.set(i, j, off);
        h.set(j, i, off);
    }
    Ok(h)
}

/// Curvature constant `mu = lambda_min(D + A)` where `A_ij = N_ij` and
/// `D = diag(row sums)`. Positive exactly when the interaction graph is
/// connected and non-bipartite.
pub fn curvature_constant(stats: &InteractionStats) -> Result<f64> {
    let m = signless_laplacian(&stats.pair_count_matrix())?;
    min_eigenvalue_sym(&m)
}

/// Frobenius norm of the pair-count matrix N (both triangles counted).
pub fn pair_count_frobenius(stats: &InteractionStats) -> f64 {
    let w = stats.num_workers();
    let mut sum = 0.0;
    for i in 0..w {
        for j in 0..w {
            if i != j {
                let n = stats.pair_count(i, j) as f64;
                sum += n * n;
            }
        }
    }
    sum.sqrt()
}

/// Noise-propagation analysis for a perturbed correlation matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// ||N||_F over the full symmetric pair-count matrix.
    pub pair_count_norm: f64,
    /// mu = lambda_min(D + A).
    pub curvature: f64,
    /// min_i |s_i| of the reference skills.
    pub min_abs_skill: f64,
    /// max_i |s_i| of the reference skills.
    pub max_abs_skill: f64,
    /// l2 norm of the correlation perturbation over the edge set.
    pub perturbation_norm: f64,
    /// Primary bound: ||N||_F ||Delta||_2 / (s_min^2 * 2 mu).
    pub bound: f64,
    /// Alternative constant: 2 ||N||_F max|s_i| ||Delta||_2 / (mu s_min^2).
    pub bound_alt: f64,
}

/// Bound on the skill-estimate error induced by perturbing the exact
/// correlations `C(s)` to `C + Delta` on the edge set. Requires a
/// connected non-bipartite graph (mu > 0) and skills bounded away from
/// zero.
pub fn noise_bound(
    stats: &InteractionStats,
    skills: &[f64],
    perturbed: &CorrelationMatrix,
) -> Result<RobustnessReport> {
    if skills.len() != stats.num_workers() {
        return Err(Error::Parameter(format!(
            "skills has length {}, expected {}",
            skills.len(),
            stats.num_workers()
        )));
    }
    let curvature = curvature_constant(stats)?;
    if curvature <= 1e-12 {
        return Err(Error::Precondition(
            "noise bound requires a connected non-bipartite interaction graph \
             (signless Laplacian must be positive definite)"
                .into(),
        ));
    }
    let min_abs_skill = skills.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min);
    let max_abs_skill = skills.iter().map(|s| s.abs()).fold(0.0, f64::max);
    if min_abs_skill < 1e-12 {
        return Err(Error::Precondition(
            "noise bound requires all skills bounded away from zero".into(),
        ));
    }
    let mut delta_sq = 0.0;
    for &(i, j) in stats.edges() {
        let c = perturbed
            .get(i, j)
            .ok_or_else(|| Error::Parameter(format!("correlation missing on edge ({i}, {j})")))?;
        let d = c - skills[i] * skills[j];
        delta_sq += d * d;
    }
    let perturbation_norm = delta_sq.sqrt();
    let pair_count_norm = pair_count_frobenius(stats);
    let s2 = min_abs_skill * min_abs_skill;
    let bound = pair_count_norm * perturbation_norm / (s2 * 2.0 * curvature);
    let bound_alt = 2.0 * pair_count_norm * max_abs_skill * perturbation_norm / (curvature * s2);
    Ok(RobustnessReport {
        pair_count_norm,
        curvature,
        min_abs_skill,
        max_abs_skill,
        perturbation_norm,
        bound,
        bound_alt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::exact_correlations;
    use crate::estimator::{loss_gradient, weighted_loss};
    use crate::graph::interaction_stats;
    use std::collections::BTreeSet;

    fn triangle_stats() -> InteractionStats {
        let mut assignment = BTreeSet::new();
        for (t, (i, j)) in [(0usize, 1usize), (1, 2), (0, 2)].iter().enumerate() {
            assignment.insert((*i, t));
            assignment.insert((*j, t));
        }
        interaction_stats(&assignment, 3).unwrap()
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let stats = triangle_stats();
        let skills = vec![0.8, 0.6, 0.5];
        let corr = exact_correlations(&skills, stats.edges()).unwrap();
        let x = vec![0.37, -0.52, 0.81];
        let h = hessian(&x, &stats, &corr, Weighting::Identity).unwrap();
        let step = 1e-5;
        for i in 0..3 {
            for j in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let gp = loss_gradient(&xp, &stats, &corr, Weighting::Identity).unwrap();
                let gm = loss_gradient(&xm, &stats, &corr, Weighting::Identity).unwrap();
                let fd = (gp[j] - gm[j]) / (2.0 * step);
                let rel = (h.get(i, j) - fd).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-5, "H[{i}][{j}] = {} vs fd {fd}", h.get(i, j));
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let stats = triangle_stats();
        let corr = exact_correlations(&[0.8, 0.6, 0.5], stats.edges()).unwrap();
        let h = hessian(&[0.3, -0.1, 0.9], &stats, &corr, Weighting::Square).unwrap();
        assert!(h.is_symmetric());
    }

    #[test]
    fn triangle_curvature_is_one() {
        // Unit-weight 3-cycle: signless Laplacian eigenvalues {1, 1, 4}.
        let stats = triangle_stats();
        let mu = curvature_constant(&stats).unwrap();
        assert!((mu - 1.0).abs() < 1e-9, "mu = {mu}");
    }

    #[test]
    fn pair_count_norm_triangle() {
        // Three unit edges, both triangles: sqrt(6).
        let stats = triangle_stats();
        assert!((pair_count_frobenius(&stats) - 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn noise_bound_zero_perturbation() {
        let stats = triangle_stats();
        let skills = vec![0.8, 0.6, 0.5];
        let corr = exact_correlations(&skills, stats.edges()).unwrap();
        let r = noise_bound(&stats, &skills, &corr).unwrap();
        assert_eq!(r.perturbation_norm, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!((r.min_abs_skill - 0.5).abs() < 1e-15);
        assert!((r.max_abs_skill - 0.8).abs() < 1e-15);
    }

    #[test]
    fn noise_bound_scales_linearly() {
        let stats = triangle_stats();
        let skills = vec![0.8, 0.6, 0.5];
        let mut vals = Vec::new();
        for eps in [1e-3, 2e-3] {
            let values: std::collections::BTreeMap<(usize, usize), f64> = stats
                .edges()
                .iter()
                .map(|&(i, j)| ((i, j), skills[i] * skills[j] + eps))
                .collect();
            let corr = CorrelationMatrix::from_edge_values(values).unwrap();
            vals.push(noise_bound(&stats, &skills, &corr).unwrap().bound);
        }
        assert!((vals[1] / vals[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn noise_bound_rejects_bipartite_and_zero_skill() {
        let mut assignment = BTreeSet::new();
        for (t, (i, j)) in [(0usize, 1usize), (1, 2), (2, 3), (0, 3)].iter().enumerate() {
            assignment.insert((*i, t));
            assignment.insert((*j, t));
        }
        let cycle = interaction_stats(&assignment, 4).unwrap();
        let skills = vec![0.5, 0.5, 0.5, 0.5];
        let corr = exact_correlations(&skills, cycle.edges()).unwrap();
        assert!(noise_bound(&cycle, &skills, &corr).is_err());

        let stats = triangle_stats();
        let skills = vec![0.8, 0.0, 0.5];
        let corr = exact_correlations(&skills, stats.edges()).unwrap();
        assert!(noise_bound(&stats, &skills, &corr).is_err());
    }

    #[test]
    fn hessian_second_order_taylor() {
        // L(x + d) ~ L(x) + g.d + d'Hd/2 up to the (constant) third and
        // fourth order terms; check the quadratic model error shrinks
        // like ||d||^3.
        let stats = triangle_stats();
        let corr = exact_correlations(&[0.8, 0.6, 0.5], stats.edges()).unwrap();
        let x = vec![0.2, 0.4, -0.3];
        let d = vec![0.3, -0.2, 0.5];
        let l0 = weighted_loss(&x, &stats, &corr, Weighting::Identity).unwrap();
        let g = loss_gradient(&x, &stats, &corr, Weighting::Identity).unwrap();
        let h = hessian(&x, &stats, &corr, Weighting::Identity).unwrap();
        let mut errs = Vec::new();
        for scale in [1e-2, 5e-3] {
            let xd: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
            let l1 = weighted_loss(&xd, &stats, &corr, Weighting::Identity).unwrap();
            let mut model = l0;
            for i in 0..3 {
                model += g[i] * scale * d[i];
                for j in 0..3 {
                    model += 0.5 * h.get(i, j) * scale * scale * d[i] * d[j];
                }
            }
            errs.push((l1 - model).abs());
        }
        // Halving the step shrinks the cubic remainder by about 8x.
        assert!(errs[1] < errs[0] / 6.0, "{errs:?}");
    }
}
