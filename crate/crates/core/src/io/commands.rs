use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::{Command, GraphSurface, Method, RunConfig, Surface};
use super::export::{csv_string, field_csv, field_vtk, fmt_f64, trace_csv, write_atomic, write_json};
use super::report::{GridSummary, RunReport, SolveSummary};
use super::suite::{barrier_checks, cone_checks, cylinder_checks, geometry_checks, Check};
use crate::domain::{BoundaryCurve, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{mean_curvature_immersion, AmbientParams, Point3};
use crate::operators::{
    cone_mean_curvature, cylinder_mean_curvature, graph_mean_curvature, ConeChart, ConeSpec, CylinderChart, GraphChart,
};
use crate::solver::{
    continuity_solve, exhaustion_solve, gradient_diagnostic, uniqueness_check, verify_maximum_principle, SolveSpec,
};

pub const EXIT_OK: i32 = 0;
/// A check or verification failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad configuration, failed hypothesis gate, or unusable input.
pub const EXIT_INVALID: i32 = 2;
/// The numerical method did not converge.
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Exit code and report of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
    pub report: RunReport,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Usage(_) | Error::Parse(_) | Error::Io { .. } => EXIT_INVALID,
        Error::Numerical(_) | Error::SingularJacobian { .. } | Error::Singular { .. } => EXIT_NOT_CONVERGED,
    }
}

/// Caps the rayon pool from `NILCMC_THREADS` (unset or empty means the default).
pub fn init_threads_from_env() -> Result<Option<usize>> {
    let Ok(v) = std::env::var("NILCMC_THREADS") else {
        return Ok(None);
    };
    if v.trim().is_empty() {
        return Ok(None);
    }
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::validation(format!("NILCMC_THREADS must be a positive integer, got {v:?}")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

struct Run<'a> {
    report: RunReport,
    out: &'a Path,
    clock: Instant,
}

impl<'a> Run<'a> {
    fn start(cmd: Command, cfg: &RunConfig, out: &'a Path) -> Result<Self> {
        let report = RunReport::new(&cmd.to_string(), cfg);
        if let Some(c) = cfg.command {
            if c != cmd {
                return Err(Error::Usage(format!("config is for `{c}` but `{cmd}` was requested")));
            }
        }
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Run {
            report,
            out,
            clock: Instant::now(),
        })
    }

    fn lap(&mut self, phase: &str) {
        let t = self.clock.elapsed().as_secs_f64();
        self.report.timings.insert(phase.into(), t);
        self.clock = Instant::now();
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.out.join(name), bytes)?;
        self.report.artifacts.push(name.into());
        Ok(())
    }

    fn finish(mut self, code: i32, message: String, write_report: bool) -> Outcome {
        self.report.exit_code = code;
        self.report.message = message.clone();
        if write_report {
            self.report.artifacts.push("report.json".into());
            if let Err(e) = write_json(&self.out.join("report.json"), &self.report) {
                return Outcome {
                    code: EXIT_INVALID,
                    message: e.to_string(),
                    report: self.report,
                };
            }
        }
        Outcome {
            code,
            message,
            report: self.report,
        }
    }
}

fn failed(cmd: Command, cfg: &RunConfig, e: Error) -> Outcome {
    Outcome {
        code: exit_code_for(&e),
        message: e.to_string(),
        report: RunReport::new(&cmd.to_string(), cfg),
    }
}

fn grid_summary(spec: &SolveSpec) -> GridSummary {
    let g = &spec.grid;
    GridSummary {
        spacing: g.spacing(),
        nodes: g.nodes().len(),
        irregular_nodes: g.nodes().iter().filter(|n| n.is_irregular()).count(),
        boundary_points: g.boundary_points().len(),
        bandwidth: g.bandwidth(),
    }
}

fn write_field(run: &mut Run, cfg: &RunConfig, stem: &str, u: &ScalarField) -> Result<()> {
    if cfg.output.csv {
        run.emit(&format!("{stem}.csv"), field_csv(u)?.as_bytes())?;
        run.emit(&format!("{stem}_trace.csv"), trace_csv(u)?.as_bytes())?;
    }
    if cfg.output.vtk {
        run.emit(
            &format!("{stem}.vtk"),
            field_vtk(u, &format!("nilcmc {stem}")).as_bytes(),
        )?;
    }
    Ok(())
}

/// Runs the configured solve, writes the solution files and the report.
///
/// Exit codes: 0 success, 1 a requested check failed, 2 invalid input or a
/// failed hypothesis gate, 3 no convergence (a partial report is still written).
pub fn cmd_solve(cfg: &RunConfig, base_dir: &Path, out: &Path) -> Outcome {
    let mut run = match Run::start(Command::Solve, cfg, out) {
        Ok(r) => r,
        Err(e) => return failed(Command::Solve, cfg, e),
    };
    match solve_inner(&mut run, cfg, base_dir) {
        Ok((code, msg)) => run.finish(code, msg, cfg.output.report),
        Err(e) => {
            let code = exit_code_for(&e);
            run.finish(code, e.to_string(), cfg.output.report && code == EXIT_NOT_CONVERGED)
        }
    }
}

fn solve_inner(run: &mut Run, cfg: &RunConfig, base_dir: &Path) -> Result<(i32, String)> {
    let spec = cfg.solve_spec(base_dir)?;
    run.report.grid = Some(grid_summary(&spec));
    run.lap("setup");

    let result = match cfg.solver.method {
        Method::Continuity => continuity_solve(&spec)?,
        Method::Exhaustion => {
            let ex = exhaustion_solve(&spec, &cfg.solver.schedule)?;
            run.lap("solve");
            let tol = ex.tolerance;
            run.report.checks.push(Check::at_most(
                "exhaustion_monotone",
                ex.worst_violation,
                tol,
                ex.levels.len(),
            ));
            let decay: Vec<f64> = ex.levels.iter().map(|l| l.ring_sup).collect();
            run.report.checks.push(Check {
                name: "exhaustion_ring_decay".into(),
                passed: ex.decay_decreasing,
                value: decay.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max),
                tolerance: 0.0,
                samples: decay.len(),
            });
            #[derive(Serialize)]
            struct Ex<'a> {
                levels: Vec<crate::solver::LevelSummary>,
                worst_violation: f64,
                tolerance: f64,
                ratio: f64,
                tail_bound: f64,
                barrier: &'a Option<crate::barriers::LogBarrier>,
            }
            run.report.exhaustion = serde_json::to_value(Ex {
                levels: ex.summaries(),
                worst_violation: ex.worst_violation,
                tolerance: tol,
                ratio: ex.ratio,
                tail_bound: ex.tail_bound,
                barrier: &ex.barrier,
            })
            .ok();
            for l in &ex.levels {
                write_field(run, cfg, &format!("level_{:03}", l.n), &l.result.u)?;
            }
            write_field(run, cfg, "solution", &ex.limit)?;
            run.lap("write");
            return Ok(verdict(run));
        }
    };
    run.report.solve = Some(SolveSummary::new(&result, spec.tolerance));
    run.lap("solve");
    if !result.converged {
        write_field(run, cfg, "partial", &result.u)?;
        return Ok((
            EXIT_NOT_CONVERGED,
            format!(
                "continuation stopped at t = {} with residual {:e}",
                result.last_good_t, result.residual
            ),
        ));
    }
    write_field(run, cfg, "solution", &result.u)?;
    run.lap("write");

    let v = &cfg.verify;
    if v.maximum_principle {
        let mp = verify_maximum_principle(&result, &spec, None)?;
        let tol = mp.tolerance;
        run.report.checks.push(Check::at_most(
            "plane_lower_bound",
            mp.min_trace - mp.min_u,
            tol,
            mp_samples(&result),
        ));
        if mp.cones.is_some() {
            run.report.checks.push(Check::at_most(
                "cone_upper_sandwich",
                -mp.upper_gap,
                tol,
                mp_samples(&result),
            ));
            run.report.checks.push(Check::at_most(
                "cone_lower_sandwich",
                -mp.lower_gap,
                tol,
                mp_samples(&result),
            ));
        }
        run.report.checks.push(Check::at_most(
            "height_bound",
            result.u.sup_norm() - mp.height_bound,
            0.0,
            mp_samples(&result),
        ));
        run.report.cones = mp.cones;
        run.report.maximum_principle = Some(mp);
    }
    if v.gradient {
        run.report.gradient = Some(gradient_diagnostic(&result, &spec, v.gradient_a)?);
    }
    if v.uniqueness {
        let u = uniqueness_check(&spec, v.uniqueness_scale, cfg.seed)?;
        run.report
            .checks
            .push(Check::at_most("uniqueness_agreement", u.agreement, u.threshold, 2));
        run.report.uniqueness = Some(u);
    }
    run.lap("verify");
    Ok(verdict(run))
}

fn mp_samples(r: &crate::solver::SolveResult) -> usize {
    r.u.values.len()
}

fn verdict(run: &Run) -> (i32, String) {
    match run.report.first_failure() {
        Some(c) => (
            EXIT_CHECK_FAILED,
            format!("check {} failed: {:e} against {:e}", c.name, c.value, c.tolerance),
        ),
        None => (EXIT_OK, "ok".into()),
    }
}

/// One row of the curvature table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureRow {
    pub s: f64,
    pub t: f64,
    pub closed_form: Option<f64>,
    pub oracle: Option<f64>,
    pub status: String,
}

impl CurvatureRow {
    pub fn difference(&self) -> Option<f64> {
        Some(self.closed_form? - self.oracle?)
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

/// Closed form and oracle for every configured sample; singular samples are
/// reported in the row status.
pub fn curvature_table(cfg: &RunConfig, curve: &Arc<BoundaryCurve>) -> Result<Vec<CurvatureRow>> {
    let c = cfg
        .curvature
        .as_ref()
        .ok_or_else(|| Error::validation("the curvature command needs a [curvature] section"))?;
    let params: AmbientParams = cfg.params()?;
    let ss = if !c.s.is_empty() {
        c.s.clone()
    } else if c.surface == Surface::Graph {
        let (lo, hi) = curve.bounding_box();
        uniform(lo[0], hi[0], c.s_samples)
    } else {
        uniform(0.0, curve.length(), c.s_samples)
    };
    let ts = if !c.t.is_empty() {
        c.t.clone()
    } else {
        match c.surface {
            Surface::Cylinder | Surface::Graph => vec![0.0],
            Surface::Cone => vec![0.25, 0.5, 0.75, 1.0],
        }
    };
    let cone = match (c.surface, c.vertex_height) {
        (Surface::Cone, Some(z)) => Some(ConeSpec::new(Point3::new(0.0, 0.0, z), curve.clone())?),
        _ => None,
    };
    let graph: Option<GraphSurface> = c.graph.clone();
    let mut rows = Vec::with_capacity(ss.len() * ts.len());
    for &s in &ss {
        for &t in &ts {
            let (closed, oracle): (Result<f64>, Result<f64>) = match c.surface {
                Surface::Cylinder => (
                    Ok(cylinder_mean_curvature(curve, s)),
                    mean_curvature_immersion(&CylinderChart { base: curve }, s, t, &params),
                ),
                Surface::Cone => {
                    let cone = cone.as_ref().expect("validated");
                    (
                        cone_mean_curvature(cone, &params, s, t),
                        mean_curvature_immersion(&ConeChart { cone }, s, t, &params),
                    )
                }
                Surface::Graph => {
                    let g = graph.as_ref().expect("validated");
                    let j = g.jet(s, t);
                    if j.iter().all(|v| v.is_finite()) {
                        let chart = GraphChart {
                            jet: |x, y| g.jet(x, y),
                        };
                        (
                            Ok(graph_mean_curvature(&params, s, t, &[j[1], j[2], j[3], j[4], j[5]])),
                            mean_curvature_immersion(&chart, s, t, &params),
                        )
                    } else {
                        let e = || Error::Singular {
                            s,
                            t,
                            reason: "point outside the graph's domain".into(),
                        };
                        (Err(e()), Err(e()))
                    }
                }
            };
            let mut row = CurvatureRow {
                s,
                t,
                closed_form: closed.as_ref().ok().copied(),
                oracle: oracle.as_ref().ok().copied(),
                status: String::new(),
            };
            row.status = match (&closed, &oracle) {
                (Err(e), _) | (_, Err(e)) => format!("singular: {e}"),
                _ => {
                    let d = row.difference().unwrap_or(f64::NAN).abs();
                    if d <= c.tolerance * (1.0 + row.oracle.unwrap_or(0.0).abs()) {
                        "ok".into()
                    } else {
                        "mismatch".into()
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn curvature_csv(rows: &[CurvatureRow]) -> Result<String> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    csv_string(
        &["s", "t", "closed_form", "oracle", "difference", "status"],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.s),
                fmt_f64(r.t),
                opt(r.closed_form),
                opt(r.oracle),
                opt(r.difference()),
                r.status.clone(),
            ]
        }),
    )
}

/// Tabulates closed-form and oracle mean curvature of a cylinder, cone or graph.
/// Singular samples are flagged per row; a mismatch exits with 1.
pub fn cmd_curvature(cfg: &RunConfig, base_dir: &Path, out: &Path) -> Outcome {
    let mut run = match Run::start(Command::Curvature, cfg, out) {
        Ok(r) => r,
        Err(e) => return failed(Command::Curvature, cfg, e),
    };
    let res = (|| -> Result<(i32, String)> {
        let curve = Arc::new(cfg.domain.build(base_dir)?);
        let rows = curvature_table(cfg, &curve)?;
        run.lap("evaluate");
        if cfg.output.csv {
            run.emit("curvature.csv", curvature_csv(&rows)?.as_bytes())?;
        }
        let tol = cfg.curvature.as_ref().map(|c| c.tolerance).unwrap_or(0.0);
        let worst = rows
            .iter()
            .filter(|r| r.status != "singular" && !r.status.starts_with("singular"))
            .map(|r| r.difference().unwrap_or(f64::INFINITY).abs() / (1.0 + r.oracle.unwrap_or(0.0).abs()))
            .fold(0.0f64, f64::max);
        let singular = rows.iter().filter(|r| r.status.starts_with("singular")).count();
        run.report.checks.push(Check::at_most(
            "curvature_oracle_relative",
            worst,
            tol,
            rows.len() - singular,
        ));
        run.lap("write");
        let (code, msg) = verdict(&run);
        Ok((
            code,
            if singular > 0 {
                format!("{msg} ({singular} singular samples)")
            } else {
                msg
            },
        ))
    })();
    match res {
        Ok((code, msg)) => run.finish(code, msg, cfg.output.report),
        Err(e) => run.finish(exit_code_for(&e), e.to_string(), false),
    }
}

/// The invariant suite for every configured `τ`.
pub fn verify_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let v = &cfg.verify;
    let mut checks = Vec::new();
    for &tau in &v.taus {
        checks.extend(geometry_checks(tau, v.points, cfg.seed)?);
    }
    checks.extend(cylinder_checks(&v.taus)?);
    checks.extend(cone_checks(&v.taus)?);
    checks.extend(barrier_checks(&v.barrier_cases)?);
    Ok(checks)
}

pub fn checks_csv(checks: &[Check]) -> Result<String> {
    csv_string(
        &["name", "passed", "value", "tolerance", "samples"],
        checks.iter().map(|c| {
            vec![
                c.name.clone(),
                c.passed.to_string(),
                fmt_f64(c.value),
                fmt_f64(c.tolerance),
                c.samples.to_string(),
            ]
        }),
    )
}

/// Runs the invariant suite; any failed check exits with 1 and is named.
pub fn cmd_verify(cfg: &RunConfig, _base_dir: &Path, out: &Path) -> Outcome {
    let mut run = match Run::start(Command::Verify, cfg, out) {
        Ok(r) => r,
        Err(e) => return failed(Command::Verify, cfg, e),
    };
    let res = (|| -> Result<(i32, String)> {
        let checks = verify_suite(cfg)?;
        run.lap("suite");
        if cfg.output.csv {
            run.emit("checks.csv", checks_csv(&checks)?.as_bytes())?;
        }
        run.report.checks = checks;
        Ok(verdict(&run))
    })();
    match res {
        Ok((code, msg)) => run.finish(code, msg, cfg.output.report),
        Err(e) => run.finish(exit_code_for(&e), e.to_string(), false),
    }
}
