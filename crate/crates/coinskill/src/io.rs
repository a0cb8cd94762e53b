//! File ingestion: delimited `worker,task,label` triples and ground-truth
//! label files. String ids are mapped to dense indices in first-appearance
//! order so benchmark files can be consumed without preprocessing.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{LabelKind, ObservationSet};

/// Parsed observation file plus the id maps needed to interpret output
/// rows and to join a truth file.
#[derive(Debug, Clone)]
pub struct LoadedObservations {
    pub observations: ObservationSet,
    /// Original worker ids in dense-index order.
    pub worker_ids: Vec<String>,
    /// Original task ids in dense-index order.
    pub task_ids: Vec<String>,
    /// Original class labels in class-index order (multiclass only;
    /// class k corresponds to `class_labels[k - 1]`).
    pub class_labels: Vec<String>,
    /// Human-readable notices (label remapping, duplicate entries).
    pub notices: Vec<String>,
}

fn split_line(line: &str) -> Vec<&str> {
    let sep = if line.contains('\t') { '\t' } else { ',' };
    line.split(sep).map(str::trim).collect()
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() >= 2
        && fields[0].to_ascii_lowercase().starts_with("worker")
        && fields[1].to_ascii_lowercase().starts_with("task")
}

/// Load `worker_id,task_id,label` triples (comma or tab delimited; an
/// optional `worker...,task...,...` header line is skipped).
///
/// Binary mode accepts labels in {-1, 1}, or {0, 1} auto-mapped to
/// {-1, +1} with a notice. A file may not mix the two encodings.
/// Multiclass mode treats labels as opaque strings mapped to class ids
/// `1..=K` in first-appearance order. Duplicate (worker, task) pairs keep
/// the last value and record a notice.
pub fn load_observations(path: &Path, multiclass: bool) -> Result<LoadedObservations> {
    let text = fs::read_to_string(path)?;
    let mut worker_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut task_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut class_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut worker_ids = Vec::new();
    let mut task_ids = Vec::new();
    let mut class_labels = Vec::new();
    // (worker, task, label, line number); labels resolved after we know
    // whether a binary file uses the {0,1} encoding.
    let mut rows: Vec<(usize, usize, i32, usize)> = Vec::new();
    let mut saw_zero = false;
    let mut saw_minus_one = false;
    let mut notices = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields = split_line(line);
        if idx == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let w = *worker_index.entry(fields[0].to_string()).or_insert_with(|| {
            worker_ids.push(fields[0].to_string());
            worker_ids.len() - 1
        });
        let t = *task_index.entry(fields[1].to_string()).or_insert_with(|| {
            task_ids.push(fields[1].to_string());
            task_ids.len() - 1
        });
        let label = if multiclass {
            let k = *class_index.entry(fields[2].to_string()).or_insert_with(|| {
                class_labels.push(fields[2].to_string());
                class_labels.len()
            });
            k as i32
        } else {
            let y: i32 = fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("binary label must be an integer, got '{}'", fields[2]),
            })?;
            match y {
                -1 => saw_minus_one = true,
                0 => saw_zero = true,
                1 => {}
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("binary label must be in {{-1, 0, 1}}, got {other}"),
                    })
                }
            }
            y
        };
        rows.push((w, t, label, line_no));
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "file contains no observations".into(),
        });
    }
    if saw_zero && saw_minus_one {
        return Err(Error::Parse {
            line: 1,
            msg: "file mixes {-1,1} and {0,1} label encodings".into(),
        });
    }

    let kind = if multiclass {
        LabelKind::Multiclass {
            classes: class_labels.len(),
        }
    } else {
        LabelKind::Binary
    };
    if saw_zero {
        let msg = "labels use the {0,1} encoding; 0 mapped to -1".to_string();
        log::info!("{msg}");
        notices.push(msg);
    }

    let mut observations = ObservationSet::new(kind, worker_ids.len(), task_ids.len());
    for (w, t, mut y, line_no) in rows {
        if !multiclass && saw_zero && y == 0 {
            y = -1;
        }
        if observations.get(w, t).is_some() {
            let msg = format!(
                "duplicate observation for worker '{}' task '{}' at line {line_no}; keeping the last value",
                worker_ids[w], task_ids[t]
            );
            log::warn!("{msg}");
            notices.push(msg);
        }
        observations.insert(w, t, y)?;
    }

    Ok(LoadedObservations {
        observations,
        worker_ids,
        task_ids,
        class_labels,
        notices,
    })
}

/// Load `task_id,label` ground-truth pairs and align them with the task
/// (and, for multiclass, class) numbering of `loaded`. Every task in the
/// observation file must be covered.
pub fn load_truth(path: &Path, loaded: &LoadedObservations) -> Result<Vec<i32>> {
    let multiclass = !loaded.class_labels.is_empty();
    let task_index: BTreeMap<&str, usize> = loaded
        .task_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let class_index: BTreeMap<&str, usize> = loaded
        .class_labels
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i + 1))
        .collect();

    let text = fs::read_to_string(path)?;
    let mut truth: Vec<Option<i32>> = vec![None; loaded.task_ids.len()];
    let mut saw_zero = false;
    let mut saw_minus_one = false;
    let mut entries: Vec<(usize, i32)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields = split_line(line);
        if idx == 0 && fields.len() >= 2 && fields[0].to_ascii_lowercase().starts_with("task") {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let Some(&t) = task_index.get(fields[0]) else {
            // Truth rows for tasks absent from the observations are
            // ignored; benchmark truth files often cover a superset.
            continue;
        };
        let label = if multiclass {
            *class_index.get(fields[1]).ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("truth label '{}' never appears in the observations", fields[1]),
            })? as i32
        } else {
            let y: i32 = fields[1].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("binary label must be an integer, got '{}'", fields[1]),
            })?;
            match y {
                -1 => saw_minus_one = true,
                0 => saw_zero = true,
                1 => {}
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("binary label must be in {{-1, 0, 1}}, got {other}"),
                    })
                }
            }
            y
        };
        entries.push((t, label));
    }
    if saw_zero && saw_minus_one {
        return Err(Error::Parse {
            line: 1,
            msg: "truth file mixes {-1,1} and {0,1} label encodings".into(),
        });
    }
    for (t, mut y) in entries {
        if !multiclass && saw_zero && y == 0 {
            y = -1;
        }
        truth[t] = Some(y);
    }
    truth
        .iter()
        .enumerate()
        .map(|(t, v)| {
            v.ok_or_else(|| Error::Precondition(format!(
                "truth file is missing task '{}'",
                loaded.task_ids[t]
            )))
        })
        .collect()
}
