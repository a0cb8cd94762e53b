//! Label prediction from estimated skills.
//!
//! Binary labels are aggregated by a weighted majority vote with log-odds
//! weights `v(a) = ln((1 + a) / (1 - a))`, the plug-in form of the optimal
//! rule for the single-coin model. Multiclass labels reduce to one-vs-rest
//! skill vectors and a per-class score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelKind, ObservationSet};

/// Clamp applied before the log-odds transform so that |a| = 1 stays
/// finite: |a| is capped at 1 - 1e-9.
pub const LOG_ODDS_CAP: f64 = 1.0 - 1e-9;

/// `v(a) = ln((1 + a) / (1 - a))`, with |a| clamped to `LOG_ODDS_CAP`.
pub fn log_odds(a: f64) -> Result<f64> {
    if !a.is_finite() || a.abs() > 1.0 {
        return Err(Error::Parameter(format!(
            "log-odds argument must lie in [-1, 1], got {a}"
        )));
    }
    let a = a.clamp(-LOG_ODDS_CAP, LOG_ODDS_CAP);
    Ok(((1.0 + a) / (1.0 - a)).ln())
}

/// Per-worker vote weights derived from a skill vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn from_skills(skills: &[f64]) -> Result<Self> {
        Ok(WeightVector(
            skills.iter().map(|&s| log_odds(s)).collect::<Result<_>>()?,
        ))
    }

    /// Uniform weights: plain majority vote.
    pub fn majority(num_workers: usize) -> Self {
        WeightVector(vec![1.0; num_workers])
    }
}

/// Predicted binary labels in {-1, +1}, one per task; tasks with no
/// observations score 0 and take +1 via the tie convention.
pub fn predict_binary(obs: &ObservationSet, weights: &WeightVector) -> Result<Vec<i8>> {
    if !matches!(obs.kind(), LabelKind::Binary) {
        return Err(Error::Parameter(
            "binary prediction requires binary observations".into(),
        ));
    }
    if weights.0.len() != obs.num_workers() {
        return Err(Error::Parameter(format!(
            "weight vector has length {}, expected {}",
            weights.0.len(),
            obs.num_workers()
        )));
    }
    let mut scores = vec![0.0f64; obs.num_tasks()];
    for (i, t, y) in obs.iter() {
        scores[t] += weights.0[i] * (y as f64);
    }
    // Ties (score exactly 0) resolve to +1.
    Ok(scores.iter().map(|&g| if g < 0.0 { -1 } else { 1 }).collect())
}

/// Indicator convention for multiclass scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MulticlassIndicator {
    /// score(k) = sum_i v(s_i^(k)) 1{Y_it = k}, indicator in {0, 1}.
    ZeroOne,
    /// Indicator in {-1, +1}: non-matching labels subtract the weight.
    PlusMinus,
}

/// Predicted multiclass labels in `1..=K`. `skills_per_class[k - 1]` is
/// the one-vs-rest skill vector for class `k`. Ties resolve to the
/// smallest class index.
pub fn predict_multiclass(
    obs: &ObservationSet,
    skills_per_class: &[Vec<f64>],
    indicator: MulticlassIndicator,
) -> Result<Vec<i32>> {
    let num_classes = match obs.kind() {
        LabelKind::Multiclass { classes } => classes,
        LabelKind::Binary => {
            return Err(Error::Parameter(
                "multiclass prediction requires multiclass observations".into(),
            ))
        }
    };
    if skills_per_class.len() != num_classes {
        return Err(Error::Parameter(format!(
            "got {} one-vs-rest skill vectors, expected {num_classes}",
            skills_per_class.len()
        )));
    }
    let mut weights = Vec::with_capacity(num_classes);
    for skills in skills_per_class {
        if skills.len() != obs.num_workers() {
            return Err(Error::Parameter(format!(
                "one-vs-rest skill vector has length {}, expected {}",
                skills.len(),
                obs.num_workers()
            )));
        }
        weights.push(WeightVector::from_skills(skills)?.0);
    }

    let mut scores = vec![vec![0.0f64; num_classes]; obs.num_tasks()];
    for (i, t, y) in obs.iter() {
        for k in 0..num_classes {
            let hit = if y as usize == k + 1 { 1.0 } else { 0.0 };
            let m = match indicator {
                MulticlassIndicator::ZeroOne => hit,
                MulticlassIndicator::PlusMinus => 2.0 * hit - 1.0,
            };
            scores[t][k] += weights[k][i] * m;
        }
    }
    // Strict `>` over ascending k keeps the smallest index among ties.
    Ok(scores
        .iter()
        .map(|per_class| {
            let mut best_k = 0usize;
            let mut best = f64::NEG_INFINITY;
            for (k, &v) in per_class.iter().enumerate() {
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            (best_k + 1) as i32
        })
        .collect())
}

/// Fraction of mismatched labels.
pub fn prediction_error<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Parameter(format!(
            "prediction length {} differs from truth length {}",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Parameter("no tasks to score".into()));
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / predicted.len() as f64)
}

/// Log-odds weights computed from the true skills (the oracle rule).
pub fn oracle_weights(skills: &[f64]) -> Result<WeightVector> {
    WeightVector::from_skills(skills)
}

/// Prediction summary for a single observation set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionReport {
    pub predictions: Vec<i8>,
    pub error: Option<f64>,
}

/// Predict with plug-in weights and, if truth is supplied, score the result.
pub fn predict_and_score(
    obs: &ObservationSet,
    skills: &[f64],
    truth: Option<&[i8]>,
) -> Result<PredictionReport> {
    let weights = WeightVector::from_skills(skills)?;
    let predictions = predict_binary(obs, &weights)?;
    let error = match truth {
        Some(t) => Some(prediction_error(&predictions, t)?),
        None => None,
    };
    Ok(PredictionReport { predictions, error })
}
