//! Closed-form curvature of graphs, vertical cylinders and cones in `Nil(τ)`.
//!
//! Graph derivative arrays use the grid ordering `[ux, uy, uxx, uyy, uxy]`.

use std::sync::Arc;

use nalgebra::{Vector2, Vector3};

use crate::domain::{BoundaryCurve, CurveJet, UX, UXX, UXY, UY, UYY};
use crate::error::{Error, Result};
use crate::geometry::{AmbientParams, ChartJet, ImmersionChart, Orientation, Point3};

/// `α = τy + u_x`, `β = −τx + u_y`, `W = √(1 + α² + β²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphAux {
    pub alpha: f64,
    pub beta: f64,
    pub w: f64,
}

pub fn graph_aux(params: &AmbientParams, x: f64, y: f64, ux: f64, uy: f64) -> GraphAux {
    let alpha = params.tau * y + ux;
    let beta = -params.tau * x + uy;
    GraphAux {
        alpha,
        beta,
        w: (1.0 + alpha * alpha + beta * beta).sqrt(),
    }
}

/// `Q_H(u) = W⁻³[(1+β²)u_xx + (1+α²)u_yy − 2αβ u_xy] + 2H`.
///
/// Zero exactly when the graph has mean curvature `H` for the downward normal.
pub fn q_residual(params: &AmbientParams, h: f64, x: f64, y: f64, d: &[f64; 5]) -> f64 {
    let a = graph_aux(params, x, y, d[UX], d[UY]);
    principal_part(&a, d) / a.w.powi(3) + 2.0 * h
}

fn principal_part(a: &GraphAux, d: &[f64; 5]) -> f64 {
    (1.0 + a.beta * a.beta) * d[UXX] + (1.0 + a.alpha * a.alpha) * d[UYY] - 2.0 * a.alpha * a.beta * d[UXY]
}

/// Partial derivatives of `Q_H` with respect to each entry of `d`.
pub fn q_partials(params: &AmbientParams, x: f64, y: f64, d: &[f64; 5]) -> [f64; 5] {
    let a = graph_aux(params, x, y, d[UX], d[UY]);
    let w3 = a.w.powi(3);
    let w5 = w3 * a.w * a.w;
    let n = principal_part(&a, d);
    let mut p = [0.0; 5];
    p[UX] = (2.0 * a.alpha * d[UYY] - 2.0 * a.beta * d[UXY]) / w3 - 3.0 * n * a.alpha / w5;
    p[UY] = (2.0 * a.beta * d[UXX] - 2.0 * a.alpha * d[UXY]) / w3 - 3.0 * n * a.beta / w5;
    p[UXX] = (1.0 + a.beta * a.beta) / w3;
    p[UYY] = (1.0 + a.alpha * a.alpha) / w3;
    p[UXY] = -2.0 * a.alpha * a.beta / w3;
    p
}

/// Mean curvature of the graph for the downward normal, `−Q₀(u)/2`.
pub fn graph_mean_curvature(params: &AmbientParams, x: f64, y: f64, d: &[f64; 5]) -> f64 {
    -0.5 * q_residual(params, 0.0, x, y, d)
}

/// `(α/W, β/W)`. Its planar divergence plus `2H` equals `Q_H(u)`.
pub fn divergence_form_flux(params: &AmbientParams, x: f64, y: f64, ux: f64, uy: f64) -> Vector2<f64> {
    let a = graph_aux(params, x, y, ux, uy);
    Vector2::new(a.alpha / a.w, a.beta / a.w)
}

/// `k(s)/2`, for every `τ` and every height.
pub fn cylinder_mean_curvature(base: &BoundaryCurve, s: f64) -> f64 {
    cylinder_mean_curvature_jet(&base.jet(s))
}

pub fn cylinder_mean_curvature_jet(jet: &CurveJet) -> f64 {
    0.5 * jet.curvature()
}

/// Cone over a horizontal base curve with vertex `(0, 0, c)`.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub vertex: Point3,
    pub base: Arc<BoundaryCurve>,
}

impl ConeSpec {
    /// The closed form assumes the vertex lies on the `z`-axis; move it there
    /// with the `F₁`/`F₂` translations first.
    pub fn new(vertex: Point3, base: Arc<BoundaryCurve>) -> Result<Self> {
        if vertex.x != 0.0 || vertex.y != 0.0 {
            return Err(Error::validation(format!(
                "cone vertex must lie on the z-axis, got ({}, {}, {})",
                vertex.x, vertex.y, vertex.z
            )));
        }
        if !(vertex.z != 0.0 && vertex.z.is_finite()) {
            return Err(Error::validation("cone vertex height must be finite and nonzero"));
        }
        Ok(ConeSpec { vertex, base })
    }

    pub fn height(&self) -> f64 {
        self.vertex.z
    }

    /// `ψ(s, t) = (1 − t)P + tγ(s)`.
    pub fn point(&self, s: f64, t: f64) -> Point3 {
        let g = self.base.point(s);
        Point3::new(t * g[0], t * g[1], (1.0 - t) * self.vertex.z)
    }
}

/// Mean curvature of the cone at `ψ(s, t)` for the downward normal:
///
/// `H = c t² (|γ|² + c²) k / (2 (τ² t⁴ |γ|² m² + 2cτ t³ (γ·γ′) m + t² (c² + m²))^{3/2})`
///
/// with `m = x′y − y′x` and `k = y″x′ − x″y′`.
pub fn cone_mean_curvature(cone: &ConeSpec, params: &AmbientParams, s: f64, t: f64) -> Result<f64> {
    cone_mean_curvature_jet(&cone.base.jet(s), cone.height(), params.tau, s, t)
}

/// [`cone_mean_curvature`] from an explicit base jet; `s` is only used in error reports.
pub fn cone_mean_curvature_jet(jet: &CurveJet, c: f64, tau: f64, s: f64, t: f64) -> Result<f64> {
    let (num, sum) = cone_terms(jet, c, tau, t);
    let den = 2.0 * sum.powf(1.5);
    checked_ratio(num, den, s, t)
}

/// The same expression with the `3/2` power applied to the last denominator
/// term only. It does not agree with the immersion oracle; kept so the
/// discrepancy stays testable.
pub fn cone_mean_curvature_partial_power(jet: &CurveJet, c: f64, tau: f64, s: f64, t: f64) -> Result<f64> {
    let (x, y) = (jet.pos[0], jet.pos[1]);
    let (xp, yp) = (jet.d1[0], jet.d1[1]);
    let m = xp * y - yp * x;
    let r2 = x * x + y * y;
    let num = c * t * t * (r2 + c * c) * jet.curvature();
    let den = 2.0
        * (tau * tau * t.powi(4) * r2 * m * m
            + 2.0 * c * tau * t.powi(3) * (x * xp + y * yp) * m
            + t * t * (c * c + m * m).powf(1.5));
    checked_ratio(num, den, s, t)
}

fn cone_terms(jet: &CurveJet, c: f64, tau: f64, t: f64) -> (f64, f64) {
    let (x, y) = (jet.pos[0], jet.pos[1]);
    let (xp, yp) = (jet.d1[0], jet.d1[1]);
    let m = xp * y - yp * x;
    let r2 = x * x + y * y;
    let num = c * t * t * (r2 + c * c) * jet.curvature();
    let sum = tau * tau * t.powi(4) * r2 * m * m
        + 2.0 * c * tau * t.powi(3) * (x * xp + y * yp) * m
        + t * t * (c * c + m * m);
    (num, sum)
}

fn checked_ratio(num: f64, den: f64, s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Singular {
            s,
            t,
            reason: "cone parameter t must be positive".into(),
        });
    }
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Singular {
            s,
            t,
            reason: format!("cone denominator vanishes ({den:e})"),
        });
    }
    Ok(num / den)
}

/// `k(s) / (2 t₀)`: the `c → ∞` limit of [`cone_mean_curvature`] at fixed `t₀`.
///
/// Near height `(1 − t₀)c` the cone approaches the vertical cylinder over the
/// scaled curve `t₀γ`, whose curvature is `k/t₀`. At `t₀ = 1` this is the
/// cylinder over the base itself.
pub fn cone_large_vertex_limit(base: &BoundaryCurve, s: f64, t0: f64) -> f64 {
    0.5 * base.curvature(s) / t0
}

/// The graph of a function given by its 2-jet `(u, ux, uy, uxx, uyy, uxy)`,
/// oriented downward.
pub struct GraphChart<F> {
    pub jet: F,
}

impl<F> ImmersionChart for GraphChart<F>
where
    F: Fn(f64, f64) -> [f64; 6],
{
    fn jet(&self, x: f64, y: f64) -> ChartJet {
        let [u, ux, uy, uxx, uyy, uxy] = (self.jet)(x, y);
        ChartJet {
            point: Point3::new(x, y, u),
            ds: Vector3::new(1.0, 0.0, ux),
            dt: Vector3::new(0.0, 1.0, uy),
            dss: Vector3::new(0.0, 0.0, uxx),
            dst: Vector3::new(0.0, 0.0, uxy),
            dtt: Vector3::new(0.0, 0.0, uyy),
        }
    }

    fn orientation(&self) -> Orientation {
        Orientation::Downward
    }
}

/// `(s, t) ↦ (x(s), y(s), t)` with the inner normal.
pub struct CylinderChart<'a> {
    pub base: &'a BoundaryCurve,
}

impl ImmersionChart for CylinderChart<'_> {
    fn jet(&self, s: f64, t: f64) -> ChartJet {
        let j = self.base.jet(s);
        ChartJet {
            point: Point3::new(j.pos[0], j.pos[1], t),
            ds: Vector3::new(j.d1[0], j.d1[1], 0.0),
            dt: Vector3::new(0.0, 0.0, 1.0),
            dss: Vector3::new(j.d2[0], j.d2[1], 0.0),
            dst: Vector3::zeros(),
            dtt: Vector3::zeros(),
        }
    }

    /// `∂s × ∂t` is the outer normal for a counter-clockwise base.
    fn orientation(&self) -> Orientation {
        Orientation::Negative
    }
}

/// `ψ(s, t) = (t x(s), t y(s), (1 − t)c)`, oriented downward.
pub struct ConeChart<'a> {
    pub cone: &'a ConeSpec,
}

impl ImmersionChart for ConeChart<'_> {
    fn jet(&self, s: f64, t: f64) -> ChartJet {
        let j = self.cone.base.jet(s);
        let c = self.cone.height();
        ChartJet {
            point: Point3::new(t * j.pos[0], t * j.pos[1], (1.0 - t) * c),
            ds: Vector3::new(t * j.d1[0], t * j.d1[1], 0.0),
            dt: Vector3::new(j.pos[0], j.pos[1], -c),
            dss: Vector3::new(t * j.d2[0], t * j.d2[1], 0.0),
            dst: Vector3::new(j.d1[0], j.d1[1], 0.0),
            dtt: Vector3::zeros(),
        }
    }

    fn orientation(&self) -> Orientation {
        Orientation::Downward
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mean_curvature_immersion;

    fn nil(tau: f64) -> AmbientParams {
        AmbientParams::new(tau).unwrap()
    }

    fn unit_circle() -> Arc<BoundaryCurve> {
        Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap())
    }

    #[test]
    fn aux_examples() {
        let a = graph_aux(&nil(2.0), 1.0, 1.0, 1.0, 1.0);
        assert_eq!((a.alpha, a.beta), (3.0, -1.0));
        assert!((a.w - 11f64.sqrt()).abs() < 1e-15);
        let b = graph_aux(&nil(0.0), 0.3, 0.4, 1.0, 0.0);
        assert!((b.w - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn residual_examples() {
        let p = nil(0.7);
        assert_eq!(q_residual(&p, 0.3, 0.2, -0.1, &[0.0; 5]), 0.6);
        assert_eq!(q_residual(&p, 0.0, 0.2, -0.1, &[0.4, -1.2, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(q_residual(&nil(0.0), 0.0, 0.0, 0.0, &[0.0, 0.0, 2.0, 2.0, 0.0]), 4.0);
    }

    #[test]
    fn flux_examples() {
        assert_eq!(divergence_form_flux(&nil(1.0), 0.0, 0.0, 0.0, 0.0), Vector2::zeros());
        let f = divergence_form_flux(&nil(0.0), 0.5, 0.5, 1.0, 0.0);
        assert!((f[0] - 0.5f64.sqrt()).abs() < 1e-15 && f[1] == 0.0);
    }

    #[test]
    fn cylinder_examples() {
        assert!((cylinder_mean_curvature(&unit_circle(), 1.3) - 0.5).abs() < 1e-12);
        let e = BoundaryCurve::ellipse([0.0, 0.0], 2.0, 1.0).unwrap();
        assert!((cylinder_mean_curvature(&e, 0.0) - 1.0).abs() < 1e-10);
        let segment = CurveJet {
            pos: Vector2::new(0.3, 0.0),
            d1: Vector2::new(1.0, 0.0),
            d2: Vector2::zeros(),
            d3: Vector2::zeros(),
        };
        assert_eq!(cylinder_mean_curvature_jet(&segment), 0.0);
    }

    #[test]
    fn cylinder_chart_orientation_gives_nonnegative_curvature() {
        let c = unit_circle();
        let h = mean_curvature_immersion(&CylinderChart { base: &c }, 0.4, 2.0, &nil(0.5)).unwrap();
        assert!((h - 0.5).abs() < 1e-10, "{h}");
    }

    #[test]
    fn cone_unit_circle_value() {
        let cone = ConeSpec::new(Point3::new(0.0, 0.0, 1.0), unit_circle()).unwrap();
        let h = cone_mean_curvature(&cone, &nil(1.0), 0.0, 1.0).unwrap();
        assert!((h - 3f64.powf(-1.5)).abs() < 1e-12, "{h}");
        let oracle = mean_curvature_immersion(&ConeChart { cone: &cone }, 0.0, 1.0, &nil(1.0)).unwrap();
        assert!((h - oracle).abs() < 1e-10);
        let partial = cone_mean_curvature_partial_power(&cone.base.jet(0.0), 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((partial - 1.0 / (1.0 + 2f64.powf(1.5))).abs() < 1e-12);
        assert!((partial - oracle).abs() > 0.05);
    }

    #[test]
    fn cone_rejects_bad_input() {
        assert!(ConeSpec::new(Point3::new(0.1, 0.0, 1.0), unit_circle()).is_err());
        assert!(ConeSpec::new(Point3::new(0.0, 0.0, 0.0), unit_circle()).is_err());
        let cone = ConeSpec::new(Point3::new(0.0, 0.0, 1.0), unit_circle()).unwrap();
        assert!(matches!(
            cone_mean_curvature(&cone, &nil(1.0), 0.0, 0.0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn large_vertex_limit() {
        let c = unit_circle();
        assert!((cone_large_vertex_limit(&c, 0.7, 1.0) - 0.5).abs() < 1e-12);
        let cone = ConeSpec::new(Point3::new(0.0, 0.0, 1e6), c.clone()).unwrap();
        for t0 in [0.5, 1.0, 2.0] {
            let h = cone_mean_curvature(&cone, &nil(1.0), 0.7, t0).unwrap();
            assert!(
                (h - cone_large_vertex_limit(&c, 0.7, t0)).abs() < 1e-5,
                "t0 = {t0}: {h}"
            );
        }
    }
}
