//! Run configuration, reports, file output and the three commands.

mod commands;
mod config;
mod export;
mod report;
mod suite;

pub use commands::{
    checks_csv, cmd_curvature, cmd_solve, cmd_verify, curvature_csv, curvature_table, exit_code_for,
    init_threads_from_env, verify_suite, CurvatureRow, Outcome, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NOT_CONVERGED,
    EXIT_OK,
};
pub use config::{
    AmbientConfig, Command, CurvatureConfig, DomainConfig, GraphSurface, Method, OutputConfig, RunConfig, SolverConfig,
    Surface, VerifyConfig,
};
pub use export::{csv_string, field_csv, field_vtk, fmt_f64, trace_csv, write_atomic, write_json};
pub use report::{GridSummary, RunReport, SolveSummary, SCHEMA_VERSION};
pub use suite::{
    barrier_checks, cone_checks, cylinder_checks, geometry_checks, test_curves, Check, DIFFERENCED_TOL, EXACT_TOL,
    ORACLE_TOL,
};
