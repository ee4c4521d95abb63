use rayon::prelude::*;

use super::{opposite_arm, BandedMatrix, Linearization, SolveResult, SolveSpec, StepRecord};
use crate::domain::{ArmEnd, Grid, ScalarField, UX, UY};
use crate::error::{Error, Result};
use crate::geometry::AmbientParams;
use crate::operators::{q_partials, q_residual};

/// The discrete equations at mean curvature `h` with a fixed boundary trace.
///
/// Rows of collapsed nodes (an arm shorter than the collapse fraction) are the
/// linear interpolation along that arm instead of the PDE.
pub(crate) struct System<'a> {
    pub grid: &'a Grid,
    pub params: AmbientParams,
    pub h: f64,
    pub trace: Vec<f64>,
    pub linearization: Linearization,
    /// Subtracted from every residual (empty for none).
    pub offset: Vec<f64>,
}

impl System<'_> {
    fn end_value(&self, end: ArmEnd, values: &[f64]) -> f64 {
        match end {
            ArmEnd::Node(m) => values[m],
            ArmEnd::Boundary(b) => self.trace[b],
        }
    }

    fn residual_at(&self, k: usize, values: &[f64]) -> f64 {
        let node = &self.grid.nodes()[k];
        if let Some(a) = node.collapse_arm() {
            let short = node.arms[a];
            let opp = node.arms[opposite_arm(a)];
            let g = self.end_value(short.end, values);
            let v = self.end_value(opp.end, values);
            let sum = short.fraction + opp.fraction;
            return values[k] - (opp.fraction * g + short.fraction * v) / sum;
        }
        let d = self.grid.derivatives(k, values, &self.trace);
        q_residual(&self.params, self.h, node.x, node.y, &d)
    }

    pub fn residual(&self, values: &[f64]) -> Vec<f64> {
        (0..values.len())
            .into_par_iter()
            .map(|k| self.residual_at(k, values) - self.offset.get(k).copied().unwrap_or(0.0))
            .collect()
    }

    fn jacobian_row(&self, k: usize, values: &[f64]) -> Vec<(usize, f64)> {
        let node = &self.grid.nodes()[k];
        if let Some(a) = node.collapse_arm() {
            let short = node.arms[a];
            let opp = node.arms[opposite_arm(a)];
            let mut row = vec![(k, 1.0)];
            if let ArmEnd::Node(m) = opp.end {
                row.push((m, -short.fraction / (short.fraction + opp.fraction)));
            }
            return row;
        }
        let d = self.grid.derivatives(k, values, &self.trace);
        let mut p = q_partials(&self.params, node.x, node.y, &d);
        if self.linearization == Linearization::Picard {
            p[UX] = 0.0;
            p[UY] = 0.0;
        }
        let st = &node.stencil;
        let dot = |w: &[f64; 5]| w.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        let mut row = Vec::with_capacity(9);
        row.push((k, dot(&st.center)));
        for (a, arm) in node.arms.iter().enumerate() {
            if let ArmEnd::Node(m) = arm.end {
                row.push((m, dot(&st.arms[a])));
            }
        }
        row
    }

    pub fn jacobian(&self, values: &[f64]) -> BandedMatrix {
        let rows: Vec<Vec<(usize, f64)>> = (0..values.len())
            .into_par_iter()
            .map(|k| self.jacobian_row(k, values))
            .collect();
        let mut m = BandedMatrix::zeros(values.len(), self.grid.bandwidth());
        for (k, row) in rows.iter().enumerate() {
            m.set_row(k, row);
        }
        m
    }
}

pub(crate) struct NewtonOutcome {
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sup(v: &[f64]) -> f64 {
    v.iter()
        .fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton from `start`; the line search halves the step until the
/// residual 2-norm decreases.
pub(crate) fn newton_core(spec: &SolveSpec, sys: &System, start: Vec<f64>) -> Result<NewtonOutcome> {
    let mut u = start;
    let mut f = sys.residual(&u);
    let mut r = sup(&f);
    let mut norm = l2(&f);
    let mut it = 0;
    while !(r <= spec.tolerance) && it < spec.max_iterations {
        let lu = sys.jacobian(&u).factor()?;
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        lu.solve(&mut delta);
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lam * d).collect();
            let ft = sys.residual(&trial);
            let nt = l2(&ft);
            let rt = sup(&ft);
            if nt < norm || rt <= spec.tolerance {
                u = trial;
                f = ft;
                norm = nt;
                r = rt;
                break;
            }
            lam *= 0.5;
            if lam < spec.min_damping {
                return Ok(NewtonOutcome {
                    values: u,
                    residual: r,
                    iterations: it + 1,
                    converged: false,
                });
            }
        }
        it += 1;
    }
    Ok(NewtonOutcome {
        converged: r <= spec.tolerance,
        values: u,
        residual: r,
        iterations: it,
    })
}

fn check_grid(spec: &SolveSpec, u: &ScalarField) -> Result<()> {
    if !std::sync::Arc::ptr_eq(&spec.grid, &u.grid) && u.values.len() != spec.grid.nodes().len() {
        return Err(Error::Usage("field does not live on the spec's grid".into()));
    }
    Ok(())
}

/// `Q_H(u)` at every node, using the field's own boundary trace.
pub fn discretize_residual(spec: &SolveSpec, u: &ScalarField) -> Result<ScalarField> {
    check_grid(spec, u)?;
    let sys = System {
        grid: &spec.grid,
        params: spec.params,
        h: spec.mean_curvature,
        trace: u.trace.clone(),
        linearization: spec.linearization,
        offset: Vec::new(),
    };
    let values = sys.residual(&u.values);
    Ok(ScalarField {
        grid: spec.grid.clone(),
        values,
        trace: vec![0.0; u.trace.len()],
        label: "residual".into(),
    })
}

/// Damped Newton for the full problem (trace `φ`, curvature `H`) from `initial`.
/// Only the interior values of `initial` are used.
///
/// If the damped iteration stalls, the solve falls back to a homotopy from a
/// problem `u₀ = initial` solves exactly: the trace moves from `φ₀` (node values
/// carried to the boundary points their arms reach) to `φ`, and the residual
/// offset `(1 − s) F_{φ₀}(u₀)` goes to zero. From the zero field this is the
/// continuity path.
pub fn newton_solve(spec: &SolveSpec, initial: &ScalarField) -> Result<SolveResult> {
    check_grid(spec, initial)?;
    let trace = spec.grid.trace_of(&spec.data, 1.0);
    let sys = System {
        grid: &spec.grid,
        params: spec.params,
        h: spec.mean_curvature,
        trace: trace.clone(),
        linearization: spec.linearization,
        offset: Vec::new(),
    };
    let out = newton_core(spec, &sys, initial.values.clone())?;
    let first = StepRecord {
        t: 1.0,
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
    };
    let u = |values| ScalarField {
        grid: spec.grid.clone(),
        values,
        trace: trace.clone(),
        label: "solution".into(),
    };
    if out.converged {
        return Ok(SolveResult {
            u: u(out.values),
            residual: out.residual,
            converged: true,
            steps: vec![first],
            last_good_t: 1.0,
        });
    }
    let implied = implied_trace(&spec.grid, &initial.values);
    let f0 = System {
        trace: implied.clone(),
        offset: Vec::new(),
        ..sys
    }
    .residual(&initial.values);
    let m = march(spec, initial.values.clone(), |s| System {
        trace: implied.iter().zip(&trace).map(|(a, b)| (1.0 - s) * a + s * b).collect(),
        offset: f0.iter().map(|v| (1.0 - s) * v).collect(),
        ..sys
    })?;
    let mut steps = vec![first];
    steps.extend(m.steps);
    // Without convergence, return whichever iterate fits the full problem better.
    let (values, residual) = if m.converged {
        (m.values, m.residual)
    } else {
        let r = sup(&sys.residual(&m.values));
        if r < out.residual {
            (m.values, r)
        } else {
            (out.values, out.residual)
        }
    };
    Ok(SolveResult {
        u: u(values),
        residual,
        converged: m.converged,
        steps,
        last_good_t: m.last_good_t,
    })
}

/// Mean of the node values whose arms end at each boundary point.
fn implied_trace(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let mut sum = vec![0.0; grid.boundary_points().len()];
    let mut count = vec![0usize; sum.len()];
    for (k, node) in grid.nodes().iter().enumerate() {
        for arm in &node.arms {
            if let ArmEnd::Boundary(b) = arm.end {
                sum[b] += values[k];
                count[b] += 1;
            }
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

pub(crate) struct March {
    pub values: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub steps: Vec<StepRecord>,
    pub last_good_t: f64,
}

/// Follows the solutions of `system(t)` from `t = 0` (where `start` solves it)
/// to `t = 1`. Each step starts from the tangent predictor `u + Δt u′` with
/// `J u′ = −∂F/∂t`; a failed step is retried with half the increment.
pub(crate) fn march<'a, S>(spec: &SolveSpec, start: Vec<f64>, system: S) -> Result<March>
where
    S: Fn(f64) -> System<'a>,
{
    let mut values = start;
    let mut steps = Vec::new();
    let mut t = 0.0;
    let mut dt = 1.0 / spec.continuation_steps.max(1) as f64;
    let mut bisections = 0;
    let mut residual = 0.0;
    let mut tangent: Option<Vec<f64>> = None;
    while t < 1.0 {
        let next = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        if tangent.is_none() {
            tangent = Some(tangent_at(&system, t, &values)?);
        }
        let guess = values
            .iter()
            .zip(tangent.as_deref().unwrap_or_default())
            .map(|(u, d)| u + (next - t) * d)
            .collect();
        let out = newton_core(spec, &system(next), guess)?;
        steps.push(StepRecord {
            t: next,
            iterations: out.iterations,
            residual: out.residual,
            converged: out.converged,
        });
        if out.converged {
            t = next;
            values = out.values;
            tangent = None;
            residual = out.residual;
        } else {
            bisections += 1;
            if bisections > spec.max_bisections {
                return Ok(March {
                    values,
                    residual,
                    converged: false,
                    steps,
                    last_good_t: t,
                });
            }
            dt *= 0.5;
        }
    }
    Ok(March {
        values,
        residual,
        converged: true,
        steps,
        last_good_t: 1.0,
    })
}

/// `u′ = −J⁻¹ ∂F/∂t` at a converged point, with `∂F/∂t` by central differences.
fn tangent_at<'a, S>(system: &S, t: f64, values: &[f64]) -> Result<Vec<f64>>
where
    S: Fn(f64) -> System<'a>,
{
    let e = 1e-6;
    let (fp, fm) = (system(t + e).residual(values), system(t - e).residual(values));
    let mut d: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| -(a - b) / (2.0 * e)).collect();
    system(t).jacobian(values).factor()?.solve(&mut d);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryCurve, BoundaryData};
    use std::sync::Arc;

    fn spec(tau: f64, h: f64, grid_h: f64) -> SolveSpec {
        SolveSpec::new(
            AmbientParams::new(tau).unwrap(),
            h,
            Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap()),
            BoundaryData::zero(),
            grid_h,
        )
        .unwrap()
    }

    #[test]
    fn zero_field_residuals() {
        let s = spec(0.7, 0.0, 0.1);
        let z = ScalarField::zeros(s.grid.clone());
        assert!(discretize_residual(&s, &z).unwrap().sup_norm() == 0.0);
        let s3 = spec(0.7, 0.3, 0.1);
        let r = discretize_residual(&s3, &z).unwrap();
        for (k, n) in s3.grid.nodes().iter().enumerate() {
            if n.collapse_arm().is_none() {
                assert_eq!(r.values[k], 0.6);
            }
        }
    }

    #[test]
    fn minimal_zero_solution_needs_no_iteration() {
        let s = spec(0.0, 0.0, 0.1);
        let r = newton_solve(&s, &ScalarField::zeros(s.grid.clone())).unwrap();
        assert!(r.converged);
        assert_eq!(r.steps[0].iterations, 0);
        assert_eq!(r.u.sup_norm(), 0.0);
    }

    #[test]
    fn jacobian_matches_differences() {
        let s = spec(0.4, 0.3, 0.125);
        let sys = System {
            grid: &s.grid,
            params: s.params,
            h: 0.3,
            trace: s.grid.trace_of(&BoundaryData::Constant { value: 0.05 }, 1.0),
            linearization: Linearization::Newton,
            offset: Vec::new(),
        };
        let u: Vec<f64> = s
            .grid
            .nodes()
            .iter()
            .map(|n| 0.2 * (1.0 - n.x * n.x - n.y * n.y) + 0.05 * n.x)
            .collect();
        let j = sys.jacobian(&u);
        let e = 1e-6;
        for col in [0, u.len() / 3, u.len() / 2] {
            let mut up = u.clone();
            let mut um = u.clone();
            up[col] += e;
            um[col] -= e;
            let (fp, fm) = (sys.residual(&up), sys.residual(&um));
            for row in 0..u.len() {
                let fd = (fp[row] - fm[row]) / (2.0 * e);
                assert!((fd - j.get(row, col)).abs() < 1e-5 * (1.0 + fd.abs()), "({row},{col})");
            }
        }
    }
}
