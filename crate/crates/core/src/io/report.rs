use std::collections::BTreeMap;

use serde::Serialize;

use super::config::RunConfig;
use super::suite::Check;
use crate::barriers::ConeHeights;
use crate::solver::{GradientReport, MaximumPrincipleReport, SolveResult, StepRecord, UniquenessReport};

/// Bumped whenever a field of [`RunReport`] changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub spacing: f64,
    pub nodes: usize,
    pub irregular_nodes: usize,
    pub boundary_points: usize,
    pub bandwidth: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub last_good_t: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub steps: Vec<StepRecord>,
}

impl SolveSummary {
    pub fn new(r: &SolveResult, tolerance: f64) -> Self {
        SolveSummary {
            converged: r.converged,
            residual: r.residual,
            tolerance,
            last_good_t: r.last_good_t,
            min_u: r.u.min(),
            max_u: r.u.max(),
            steps: r.steps.clone(),
        }
    }
}

/// Machine-readable summary of one command run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub exit_code: i32,
    pub message: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustion: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cones: Option<ConeHeights>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximum_principle: Option<MaximumPrincipleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient: Option<GradientReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessReport>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            exit_code: 0,
            message: String::new(),
            config: config.clone(),
            grid: None,
            solve: None,
            exhaustion: None,
            cones: None,
            maximum_principle: None,
            gradient: None,
            uniqueness: None,
            checks: Vec::new(),
            artifacts: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}
