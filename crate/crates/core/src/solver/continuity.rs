use super::newton::{march, System};
use super::{SolveResult, SolveSpec};
use crate::domain::ScalarField;
use crate::error::Result;

/// Marches `t` from 0 to 1 solving `Q_{tH}(u) = 0` with trace `tφ`, starting
/// from the zero field.
pub fn continuity_solve(spec: &SolveSpec) -> Result<SolveResult> {
    spec.check_existence_hypothesis()?;
    let grid = &spec.grid;
    let full_trace = grid.trace_of(&spec.data, 1.0);

    if spec.mean_curvature == 0.0 && spec.data.is_identically_zero() {
        return Ok(SolveResult {
            u: ScalarField::zeros(grid.clone()),
            residual: 0.0,
            converged: true,
            steps: Vec::new(),
            last_good_t: 1.0,
        });
    }

    let m = march(spec, vec![0.0; grid.nodes().len()], |t| System {
        grid,
        params: spec.params,
        h: t * spec.mean_curvature,
        trace: full_trace.iter().map(|v| t * v).collect(),
        linearization: spec.linearization,
        offset: Vec::new(),
    })?;
    Ok(SolveResult {
        u: ScalarField {
            grid: spec.grid.clone(),
            values: m.values,
            trace: full_trace.iter().map(|v| m.last_good_t * v).collect(),
            label: "solution".into(),
        },
        residual: m.residual,
        converged: m.converged,
        steps: m.steps,
        last_good_t: m.last_good_t,
    })
}
