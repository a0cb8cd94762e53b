//! Skill estimation and label aggregation for crowdsourced binary (and
//! one-vs-rest multiclass) annotation under the symmetric single-coin
//! worker model.
//!
//! The pipeline: per-pair agreement statistics over the worker interaction
//! graph, a graph-theoretic identifiability check (connected plus an odd
//! cycle, equivalently a positive definite signless Laplacian), projected
//! gradient descent on a weighted rank-one loss to recover worker skills
//! up to a resolved global sign, and a log-odds weighted majority vote for
//! the task labels.

pub mod correlation;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod model;
pub mod report;

pub use error::{Error, Result};
