use std::sync::Arc;

use nalgebra::Vector2;
use serde::Serialize;

use super::{continuity_solve, SolveResult, SolveSpec};
use crate::barriers::{search_log_barrier, KSearch, LogBarrier};
use crate::domain::{shrunk_domain, FermiCollar, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExhaustionLevel {
    pub n: u32,
    /// Offset `1/n` of the shrunk boundary.
    pub delta: f64,
    pub result: SolveResult,
    /// `sup |u_n|` over the nodes at distance `[1/n, 2/n]` from the original boundary.
    pub ring_sup: f64,
    pub ring_nodes: usize,
    /// Log-barrier height at depth `2/n` (capped at `M`), when a barrier was found.
    pub ring_barrier: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub n: u32,
    pub nodes: usize,
    pub max_u: f64,
    pub ring_sup: f64,
    pub ring_barrier: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExhaustionResult {
    pub levels: Vec<ExhaustionLevel>,
    /// Largest `u_n − u_{n'}` over shared nodes for consecutive levels `n < n'`.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub monotone: bool,
    pub decay_decreasing: bool,
    /// Last iterate plus the geometric tail of the successive differences.
    pub limit: ScalarField,
    /// Ratio of the last two successive-difference sup-norms.
    pub ratio: f64,
    /// `sup |u_last − u_prev| · q/(1 − q)`, infinite when the differences do not contract.
    pub tail_bound: f64,
    pub barrier: Option<LogBarrier>,
}

impl ExhaustionResult {
    pub fn summaries(&self) -> Vec<LevelSummary> {
        self.levels
            .iter()
            .map(|l| LevelSummary {
                n: l.n,
                nodes: l.result.u.values.len(),
                max_u: l.result.u.max(),
                ring_sup: l.ring_sup,
                ring_barrier: l.ring_barrier,
                residual: l.result.residual,
            })
            .collect()
    }
}

/// Solves on the shrunk domains `Ω(n)` bounded by `γ + ν/n` for the given
/// increasing schedule, with the grid spacing of `spec`, and checks that the
/// solutions increase with `n`.
pub fn exhaustion_solve(spec: &SolveSpec, schedule: &[u32]) -> Result<ExhaustionResult> {
    spec.check_exhaustion_hypothesis()?;
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] == 0 {
        return Err(Error::validation(
            "exhaustion schedule must have at least two increasing positive entries",
        ));
    }
    let (_, kmax) = spec.curve.curvature_range();
    let tol = spec.spacing().powi(2);

    let mut levels = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let delta = 1.0 / n as f64;
        let curve = Arc::new(shrunk_domain(&spec.curve, delta)?);
        let level_spec = spec.with_curve(curve)?;
        let result = continuity_solve(&level_spec)?;
        if !result.converged {
            return Err(Error::Numerical(format!(
                "solve on the shrunk domain n = {n} stopped at t = {} with residual {:e}",
                result.last_good_t, result.residual
            )));
        }
        let width = (2.0 * delta).min(0.99 / kmax);
        let collar = FermiCollar::new(spec.curve.clone(), width)?;
        let mut ring_sup: f64 = 0.0;
        let mut ring_nodes = 0;
        for (k, node) in result.u.grid.nodes().iter().enumerate() {
            if let Some((_, t)) = collar.fermi_coordinates(Vector2::new(node.x, node.y))? {
                if t >= delta && t <= 2.0 * delta {
                    ring_sup = ring_sup.max(result.u.values[k].abs());
                    ring_nodes += 1;
                }
            }
        }
        levels.push(ExhaustionLevel {
            n,
            delta,
            result,
            ring_sup,
            ring_nodes,
            ring_barrier: None,
        });
    }

    // Monotonicity and successive differences on shared lattice nodes.
    let mut worst = f64::NEG_INFINITY;
    let mut diffs = Vec::new();
    for pair in levels.windows(2) {
        let (a, b) = (&pair[0].result.u, &pair[1].result.u);
        let mut d: f64 = 0.0;
        for (k, node) in a.grid.nodes().iter().enumerate() {
            if let Some(m) = b.grid.node_at(node.i, node.j) {
                worst = worst.max(a.values[k] - b.values[m]);
                d = d.max((b.values[m] - a.values[k]).abs());
            }
        }
        diffs.push(d);
    }
    let decay_decreasing = levels.windows(2).all(|w| w[1].ring_sup < w[0].ring_sup);

    let last = &levels[levels.len() - 1].result.u;
    let prev = &levels[levels.len() - 2].result.u;
    let ratio = if diffs.len() >= 2 {
        diffs[diffs.len() - 1] / diffs[diffs.len() - 2]
    } else {
        f64::NAN
    };
    let factor = if ratio.is_finite() && ratio < 1.0 {
        ratio / (1.0 - ratio)
    } else {
        0.0
    };
    let tail_bound = if ratio < 1.0 {
        diffs[diffs.len() - 1] * factor
    } else {
        f64::INFINITY
    };
    let mut limit = last.clone();
    limit.label = "exhaustion limit".into();
    for (k, node) in prev.grid.nodes().iter().enumerate() {
        if let Some(m) = last.grid.node_at(node.i, node.j) {
            limit.values[m] += (last.values[m] - prev.values[k]) * factor;
        }
    }

    let barrier = {
        let m = last.max();
        let collar = FermiCollar::new(spec.curve.clone(), 0.99 / kmax)?;
        let cfg = KSearch {
            m: if m > 0.0 { m } else { 1.0 },
            ..KSearch::default()
        };
        search_log_barrier(&collar, &spec.params, spec.mean_curvature, &cfg)
            .ok()
            .map(|r| r.barrier)
    };
    if let Some(b) = &barrier {
        for l in &mut levels {
            l.ring_barrier = Some(b.value((2.0 * l.delta).min(b.width())));
        }
    }

    Ok(ExhaustionResult {
        levels,
        worst_violation: worst,
        tolerance: tol,
        monotone: worst <= tol,
        decay_decreasing,
        limit,
        ratio,
        tail_bound,
        barrier,
    })
}
