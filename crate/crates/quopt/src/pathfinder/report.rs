//! Per-path outcome records and scoring.

use super::SolutionPath;
use crate::instances::CvrpSolution;
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Outcome of running (or refusing to run) one solution path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "kebab-case")]
pub enum PathStatus {
    Ok,
    Pruned(String),
    Failed(String),
}

impl PathStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, PathStatus::Ok)
    }

    pub fn label(&self) -> &'static str {
        match self {
            PathStatus::Ok => "ok",
            PathStatus::Pruned(_) => "pruned",
            PathStatus::Failed(_) => "failed",
        }
    }
}

/// Condensed optimizer outcome embedded in reports (no wall-clock data, so
/// identical runs serialize identically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub method: String,
    pub iterations: usize,
    pub evaluations: u64,
    pub best_energy: f64,
    pub termination: String,
}

/// One encoded-and-optimized subproblem inside a path run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemRecord {
    /// Parent-instance node indices, depot first.
    pub nodes: Vec<usize>,
    pub qubits: usize,
    pub penalty: f64,
    pub scale: f64,
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSummary>,
}

/// Full outcome of one path on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub schema_version: u32,
    pub path_id: String,
    pub path: SolutionPath,
    pub status: PathStatus,
    pub qubit_estimate: usize,
    pub subproblems: Vec<SubproblemRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<CvrpSolution>,
    /// Achieved length over the exact cluster-route oracle, when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation_ratio: Option<f64>,
    /// Joint probability that every subproblem's final state decodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasible_probability: Option<f64>,
    /// Joint probability mass on optimal-tour states, when the oracle exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_probability: Option<f64>,
    pub total_evaluations: u64,
}

impl PathReport {
    pub(crate) fn shell(path: &SolutionPath, status: PathStatus, qubit_estimate: usize) -> Self {
        PathReport {
            schema_version: REPORT_SCHEMA_VERSION,
            path_id: path.id(),
            path: path.clone(),
            status,
            qubit_estimate,
            subproblems: Vec::new(),
            solution: None,
            approximation_ratio: None,
            feasible_probability: None,
            optimal_probability: None,
            total_evaluations: 0,
        }
    }
}

/// Relative importance of solution quality, feasibility and evaluation cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub quality: f64,
    pub feasibility: f64,
    pub cost: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            quality: 0.6,
            feasibility: 0.3,
            cost: 0.1,
        }
    }
}

/// Aggregates a report into one comparable number; higher is better.
///
/// `score = w_r / r + w_f * feasible - w_c * log10(1 + evals) / 10`, with
/// the weights renormalized over the terms that are active (positive weight
/// and available metric). Pruned and failed paths score negative infinity.
pub fn score(report: &PathReport, weights: &ScoreWeights) -> f64 {
    if !report.status.is_ok() {
        return f64::NEG_INFINITY;
    }
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(3);
    if weights.quality > 0.0 {
        if let Some(r) = report.approximation_ratio {
            terms.push((weights.quality, 1.0 / r));
        }
    }
    if weights.feasibility > 0.0 {
        if let Some(f) = report.feasible_probability {
            terms.push((weights.feasibility, f));
        }
    }
    if weights.cost > 0.0 {
        let evals = report.total_evaluations as f64;
        terms.push((weights.cost, -((1.0 + evals).log10()) / 10.0));
    }
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return 0.0;
    }
    terms.iter().map(|(w, value)| w / total * value).sum()
}
