use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{build_boundary, BoundaryCurve, BoundaryData, CurveKind};
use crate::error::{Error, Result};
use crate::geometry::AmbientParams;
use crate::solver::{Linearization, SolveSpec};

/// Subcommand named inside a config file; when present it must match the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Curvature,
    Verify,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Curvature => "curvature",
            Command::Verify => "verify",
        })
    }
}

/// Everything a run needs. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub ambient: AmbientConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub data: BoundaryData,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureConfig>,
}

fn default_seed() -> u64 {
    20240607
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: default_seed(),
            ambient: AmbientConfig::default(),
            domain: DomainConfig::default(),
            data: BoundaryData::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
            verify: VerifyConfig::default(),
            curvature: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientConfig {
    #[serde(default)]
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    /// Ordered samples of a closed convex curve.
    Points { points: Vec<[f64; 2]> },
    /// `s,x,y` samples; a relative path is taken from the config file's directory.
    Csv { path: PathBuf },
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

impl DomainConfig {
    pub fn build(&self, base_dir: &Path) -> Result<BoundaryCurve> {
        match self {
            DomainConfig::Circle { center, radius } => BoundaryCurve::circle(*center, *radius),
            DomainConfig::Ellipse { center, semi_axes } => BoundaryCurve::ellipse(*center, semi_axes[0], semi_axes[1]),
            DomainConfig::Points { points } => {
                build_boundary(&CurveKind::Parametric { points: points.clone() }, points.len())
            }
            DomainConfig::Csv { path } => BoundaryCurve::from_csv_path(&base_dir.join(path)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Continuity path `t ∈ [0, 1]` from the zero field.
    #[default]
    Continuity,
    /// Shrunk domains `Ω(n)` for the borderline case `2H = kmin`.
    Exhaustion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub mean_curvature: f64,
    /// Lattice spacing.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<u32>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_continuation_steps")]
    pub continuation_steps: usize,
    #[serde(default = "default_max_bisections")]
    pub max_bisections: usize,
    #[serde(default)]
    pub linearization: Linearization,
    #[serde(default = "default_min_damping")]
    pub min_damping: f64,
}

fn default_h() -> f64 {
    1.0 / 32.0
}
fn default_schedule() -> Vec<u32> {
    vec![4, 8, 16]
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_max_iterations() -> usize {
    50
}
fn default_continuation_steps() -> usize {
    10
}
fn default_max_bisections() -> usize {
    8
}
fn default_min_damping() -> f64 {
    1.0 / 1024.0
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mean_curvature: 0.0,
            h: default_h(),
            method: Method::default(),
            schedule: default_schedule(),
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            continuation_steps: default_continuation_steps(),
            max_bisections: default_max_bisections(),
            linearization: Linearization::default(),
            min_damping: default_min_damping(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub vtk: bool,
    #[serde(default = "yes")]
    pub report: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv: true,
            vtk: false,
            report: true,
        }
    }
}

/// Post-solve checks for `solve`, and the invariant suite for `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "yes")]
    pub maximum_principle: bool,
    #[serde(default = "yes")]
    pub gradient: bool,
    /// Exponent `A` of the gradient diagnostic.
    #[serde(default = "default_gradient_a")]
    pub gradient_a: f64,
    #[serde(default)]
    pub uniqueness: bool,
    #[serde(default = "default_uniqueness_scale")]
    pub uniqueness_scale: f64,
    /// `τ` values swept by `verify`.
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    /// Random points per `τ` for the geometry checks.
    #[serde(default = "default_points")]
    pub points: usize,
    /// `(τ, H)` pairs for the log-barrier search on the unit circle.
    #[serde(default = "default_barrier_cases")]
    pub barrier_cases: Vec<[f64; 2]>,
}

fn default_gradient_a() -> f64 {
    1.0
}
fn default_uniqueness_scale() -> f64 {
    0.1
}
fn default_taus() -> Vec<f64> {
    vec![0.0, 0.5, -0.5, 2.0, -2.0]
}
fn default_points() -> usize {
    1000
}
fn default_barrier_cases() -> Vec<[f64; 2]> {
    vec![[0.2, 0.5]]
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            maximum_principle: true,
            gradient: true,
            gradient_a: default_gradient_a(),
            uniqueness: false,
            uniqueness_scale: default_uniqueness_scale(),
            taus: default_taus(),
            points: default_points(),
            barrier_cases: default_barrier_cases(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    /// Vertical cylinder over the `[domain]` curve; rows are `(s, height)`.
    Cylinder,
    /// Cone from `(0, 0, vertex_height)` over the `[domain]` curve; rows are `(s, t)`.
    Cone,
    /// Graph of `[curvature.graph]`; rows are `(x, y)`.
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSurface {
    /// `a₀ + a₁x + a₂y + a₃x² + a₄xy + a₅y²`.
    Quadratic { coefficients: [f64; 6] },
    /// Upper spherical cap `√(R² − r²) − √(R² − 1)`.
    Cap { radius: f64 },
}

impl GraphSurface {
    /// `[u, ux, uy, uxx, uyy, uxy]` at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> [f64; 6] {
        match self {
            GraphSurface::Quadratic { coefficients: a } => [
                a[0] + a[1] * x + a[2] * y + a[3] * x * x + a[4] * x * y + a[5] * y * y,
                a[1] + 2.0 * a[3] * x + a[4] * y,
                a[2] + a[4] * x + 2.0 * a[5] * y,
                2.0 * a[3],
                2.0 * a[5],
                a[4],
            ],
            GraphSurface::Cap { radius } => {
                let r2 = radius * radius;
                let q = (r2 - x * x - y * y).sqrt();
                let q3 = q * q * q;
                [
                    q - (r2 - 1.0).max(0.0).sqrt(),
                    -x / q,
                    -y / q,
                    -(r2 - y * y) / q3,
                    -(r2 - x * x) / q3,
                    -x * y / q3,
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    pub surface: Surface,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSurface>,
    /// Explicit first coordinates; when empty, `s_samples` uniform arclengths are used.
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default = "default_s_samples")]
    pub s_samples: usize,
    /// Second coordinates (height, cone parameter, or `y`).
    #[serde(default)]
    pub t: Vec<f64>,
    /// A row is `ok` when `|closed form − oracle| ≤ tolerance`.
    #[serde(default = "default_curvature_tolerance")]
    pub tolerance: f64,
}

fn default_s_samples() -> usize {
    16
}
fn default_curvature_tolerance() -> f64 {
    1e-8
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn params(&self) -> Result<AmbientParams> {
        AmbientParams::new(self.ambient.tau)
    }

    /// Range and shape checks that need no geometry.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.data.validate()?;
        let s = &self.solver;
        if !(s.h > 0.0 && s.h.is_finite()) {
            return Err(Error::validation(format!("solver.h must be positive, got {}", s.h)));
        }
        if !s.mean_curvature.is_finite() {
            return Err(Error::validation("solver.mean_curvature must be finite"));
        }
        if !(s.tolerance > 0.0) {
            return Err(Error::validation("solver.tolerance must be positive"));
        }
        if !(s.min_damping > 0.0 && s.min_damping <= 1.0) {
            return Err(Error::validation("solver.min_damping must lie in (0, 1]"));
        }
        if s.max_iterations == 0 || s.continuation_steps == 0 {
            return Err(Error::validation("solver iteration and step counts must be positive"));
        }
        if s.method == Method::Exhaustion
            && (s.schedule.len() < 2 || s.schedule[0] == 0 || s.schedule.windows(2).any(|w| w[1] <= w[0]))
        {
            return Err(Error::validation(
                "solver.schedule must have at least two increasing positive entries",
            ));
        }
        let v = &self.verify;
        if !(v.gradient_a > 0.0) || !(v.uniqueness_scale.is_finite()) {
            return Err(Error::validation(
                "verify.gradient_a must be positive and uniqueness_scale finite",
            ));
        }
        if v.taus.iter().any(|t| !t.is_finite()) || v.barrier_cases.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::validation("verify.taus and verify.barrier_cases must be finite"));
        }
        if let Some(c) = &self.curvature {
            match c.surface {
                Surface::Cone => match c.vertex_height {
                    Some(z) if z != 0.0 && z.is_finite() => {}
                    _ => {
                        return Err(Error::validation(
                            "curvature.vertex_height must be finite and nonzero for a cone",
                        ))
                    }
                },
                Surface::Graph if c.graph.is_none() => {
                    return Err(Error::validation("curvature.graph is required for surface = \"graph\""))
                }
                _ => {}
            }
            if c.s.is_empty() && c.s_samples == 0 {
                return Err(Error::validation("curvature needs s values or s_samples > 0"));
            }
            if c.s.iter().chain(&c.t).any(|v| !v.is_finite()) {
                return Err(Error::validation("curvature samples must be finite"));
            }
        }
        Ok(())
    }

    /// The solver spec on the configured boundary (builds the grid).
    pub fn solve_spec(&self, base_dir: &Path) -> Result<SolveSpec> {
        let curve = Arc::new(self.domain.build(base_dir)?);
        let s = &self.solver;
        let mut spec = SolveSpec::new(self.params()?, s.mean_curvature, curve, self.data.clone(), s.h)?;
        spec.tolerance = s.tolerance;
        spec.max_iterations = s.max_iterations;
        spec.continuation_steps = s.continuation_steps;
        spec.max_bisections = s.max_bisections;
        spec.linearization = s.linearization;
        spec.min_damping = s.min_damping;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
command = "solve"
seed = 11

[ambient]
tau = 0.2

[domain]
kind = "ellipse"
semi_axes = [2.0, 1.0]

[data]
kind = "harmonic"
amplitude = 0.1
mode = 2

[solver]
mean_curvature = 0.3
h = 0.0625
linearization = "picard"

[output]
vtk = true
"#;

    #[test]
    fn parse_and_round_trip() {
        let cfg = RunConfig::from_toml_str(FULL).unwrap();
        assert_eq!(cfg.command, Some(Command::Solve));
        assert_eq!(cfg.solver.linearization, Linearization::Picard);
        assert!(cfg.output.vtk && cfg.output.csv);
        let text = cfg.to_toml_string().unwrap();
        let again = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_toml_string().unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            "colour = 1",
            "[solver]\nmean_curvatur = 0.3",
            "[domain]\nkind = \"circle\"\nradius = 1.0\nwobble = 2",
            "[data]\nkind = \"constant\"\nvalue = 0.0\nextra = 1",
        ] {
            assert!(matches!(RunConfig::from_toml_str(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn range_errors_are_validation() {
        assert!(matches!(
            RunConfig::from_toml_str("[solver]\nh = -0.1"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[curvature]\nsurface = \"cone\""),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn cap_jet_matches_differences() {
        let g = GraphSurface::Cap { radius: 3.0 };
        let (x, y, e) = (0.3, -0.2, 1e-5);
        let j = g.jet(x, y);
        let fx = (g.jet(x + e, y)[0] - g.jet(x - e, y)[0]) / (2.0 * e);
        let fxy = (g.jet(x + e, y)[2] - g.jet(x - e, y)[2]) / (2.0 * e);
        assert!((j[1] - fx).abs() < 1e-9 && (j[5] - fxy).abs() < 1e-9);
    }
}
