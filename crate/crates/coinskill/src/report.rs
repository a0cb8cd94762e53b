//! Report emission: one machine-readable JSON document per run plus flat
//! tab-separated tables for downstream plotting. Output is byte-identical
//! for a fixed configuration and seed: all maps are ordered and floats are
//! printed via the standard shortest-roundtrip formatting.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::diagnostics::RobustnessReport;
use crate::error::Result;
use crate::graph::IdentifiabilityVerdict;

/// Full output of an `estimate` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    /// The resolved configuration, defaults materialized, echoed verbatim.
    pub config: serde_json::Value,
    pub identifiability: IdentifiabilityVerdict,
    /// Per-worker estimated skills; multiclass runs carry one vector per
    /// class in `skills_per_class` instead.
    pub skills: Option<Vec<f64>>,
    pub skills_per_class: Option<Vec<Vec<f64>>>,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
    /// Predicted label per task, in task order.
    pub predictions: Vec<i32>,
    /// Prediction error against supplied truth, if any.
    pub prediction_error: Option<f64>,
    pub robustness: Option<RobustnessReport>,
    pub warnings: Vec<String>,
}

/// One row of an experiment summary table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionRow {
    pub study: String,
    pub condition: String,
    pub trials: usize,
    pub mean_pe: f64,
    pub std_pe: f64,
    pub mean_pe_majority: f64,
    pub std_pe_majority: f64,
    /// Oracle-weight (true-skill) error when computable, else NaN.
    pub mean_pe_oracle: f64,
}

/// Full output of an `experiment` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: serde_json::Value,
    pub rows: Vec<ConditionRow>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Flat `worker<TAB>skill` table; multiclass emits one skill column per
/// class.
pub fn skills_table(worker_ids: &[String], per_class: &[Vec<f64>]) -> String {
    let mut out = String::from("worker");
    if per_class.len() == 1 {
        out.push_str("\tskill");
    } else {
        for k in 1..=per_class.len() {
            out.push_str(&format!("\tskill_class_{k}"));
        }
    }
    out.push('\n');
    for (i, id) in worker_ids.iter().enumerate() {
        out.push_str(id);
        for col in per_class {
            out.push_str(&format!("\t{}", col[i]));
        }
        out.push('\n');
    }
    out
}

/// Flat `task<TAB>prediction` table, optionally with a truth column.
pub fn predictions_table(
    task_ids: &[String],
    predictions: &[i32],
    labels: Option<&[String]>,
    truth: Option<&[i32]>,
) -> String {
    let decode = |y: i32| -> String {
        match labels {
            Some(names) => names[(y - 1) as usize].clone(),
            None => y.to_string(),
        }
    };
    let mut out = String::from("task\tprediction");
    if truth.is_some() {
        out.push_str("\ttruth");
    }
    out.push('\n');
    for (t, id) in task_ids.iter().enumerate() {
        out.push_str(&format!("{id}\t{}", decode(predictions[t])));
        if let Some(tr) = truth {
            out.push_str(&format!("\t{}", decode(tr[t])));
        }
        out.push('\n');
    }
    out
}

/// Flat per-condition summary table.
pub fn conditions_table(rows: &[ConditionRow]) -> String {
    let mut out = String::from(
        "study\tcondition\ttrials\tmean_pe\tstd_pe\tmean_pe_majority\tstd_pe_majority\tmean_pe_oracle\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.study,
            r.condition,
            r.trials,
            r.mean_pe,
            r.std_pe,
            r.mean_pe_majority,
            r.std_pe_majority,
            r.mean_pe_oracle
        ));
    }
    out
}
