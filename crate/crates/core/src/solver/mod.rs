//! Finite-difference solution of the Dirichlet problem `Q_H(u) = 0`, `u = φ` on `Γ`.

mod banded;
mod continuity;
mod diagnostics;
mod exhaustion;
mod newton;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use banded::{BandedLu, BandedMatrix};
pub use continuity::continuity_solve;
pub use diagnostics::{
    gradient_diagnostic, uniqueness_check, verify_maximum_principle, GradientReport, MaximumPrincipleReport,
    UniquenessReport,
};
pub use exhaustion::{exhaustion_solve, ExhaustionLevel, ExhaustionResult, LevelSummary};
pub use newton::{discretize_residual, newton_solve};

use crate::domain::{build_grid, BoundaryCurve, BoundaryData, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::AmbientParams;

/// How the Newton matrix treats the gradient dependence of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearization {
    /// Exact derivative of the discrete residual.
    #[default]
    Newton,
    /// Coefficients frozen at the current iterate (drops the `u_x`, `u_y` terms).
    Picard,
}

#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub params: AmbientParams,
    /// Target mean curvature `H`.
    pub mean_curvature: f64,
    pub curve: Arc<BoundaryCurve>,
    pub data: BoundaryData,
    pub grid: Arc<Grid>,
    /// Stop when the residual sup-norm is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub continuation_steps: usize,
    /// How many times a failed continuation step may be halved.
    pub max_bisections: usize,
    pub linearization: Linearization,
    /// Smallest line-search factor before a Newton solve gives up.
    pub min_damping: f64,
}

impl SolveSpec {
    /// Builds the grid of spacing `h` and fills solver defaults.
    pub fn new(
        params: AmbientParams,
        mean_curvature: f64,
        curve: Arc<BoundaryCurve>,
        data: BoundaryData,
        h: f64,
    ) -> Result<Self> {
        if !mean_curvature.is_finite() {
            return Err(Error::validation("mean curvature must be finite"));
        }
        data.validate()?;
        let grid = Arc::new(build_grid(curve.clone(), h)?);
        Ok(SolveSpec {
            params,
            mean_curvature,
            curve,
            data,
            grid,
            tolerance: 1e-8,
            max_iterations: 50,
            continuation_steps: 10,
            max_bisections: 8,
            linearization: Linearization::Newton,
            min_damping: 1.0 / 1024.0,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// `0 ≤ 2H < kmin`. The borderline `2H = kmin` is left to [`exhaustion_solve`].
    pub fn check_existence_hypothesis(&self) -> Result<()> {
        let (kmin, _) = self.curve.convex_curvature_range()?;
        let h = self.mean_curvature;
        if h < 0.0 {
            return Err(Error::validation(format!("H must be nonnegative, got {h}")));
        }
        if (2.0 * h - kmin).abs() <= 1e-9 * kmin {
            return Err(Error::validation(format!(
                "2H = {} equals kmin; use the exhaustion path for the borderline case",
                2.0 * h
            )));
        }
        if 2.0 * h > kmin {
            return Err(Error::validation(format!(
                "need 2H < kmin, got 2H = {} and kmin = {kmin}",
                2.0 * h
            )));
        }
        Ok(())
    }

    /// `|τ|/√3 < H ≤ kmin/2` with zero boundary data.
    pub fn check_exhaustion_hypothesis(&self) -> Result<()> {
        let (kmin, _) = self.curve.convex_curvature_range()?;
        let h = self.mean_curvature;
        let lower = self.params.tau.abs() / 3f64.sqrt();
        if !(h > lower) {
            return Err(Error::validation(format!(
                "need |tau|/sqrt(3) = {lower:.6} < H, got H = {h}"
            )));
        }
        if h > 0.5 * kmin * (1.0 + 1e-9) {
            return Err(Error::validation(format!(
                "need H <= kmin/2 = {}, got H = {h}",
                0.5 * kmin
            )));
        }
        if !self.data.is_identically_zero() {
            return Err(Error::validation("the exhaustion path requires zero boundary data"));
        }
        Ok(())
    }

    /// Copy of the spec on another boundary with the same spacing and solver settings.
    pub fn with_curve(&self, curve: Arc<BoundaryCurve>) -> Result<Self> {
        let grid = Arc::new(build_grid(curve.clone(), self.spacing())?);
        Ok(SolveSpec {
            curve,
            grid,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    /// Residual sup-norm of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// One record per attempted continuation step (a single entry for a plain Newton solve).
    pub steps: Vec<StepRecord>,
    /// Largest continuation parameter reached with a converged solve.
    pub last_good_t: f64,
}

impl SolveResult {
    pub fn newton_iterations(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| s.converged)
            .map(|s| s.iterations)
            .collect()
    }
}

/// Opposite arm index: E↔W, N↔S, NE↔SW, SE↔NW.
pub(crate) fn opposite_arm(a: usize) -> usize {
    a ^ 1
}
