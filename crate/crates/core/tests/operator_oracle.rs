//! The graph operator against its divergence form, evaluated by differencing
//! an explicit function, and against the geometric invariances of the ambient space.

use nilcmc::domain::{BoundaryCurve, UX, UXX, UXY, UY, UYY};
use nilcmc::geometry::{mean_curvature_immersion, AmbientParams, Point3};
use nilcmc::operators::{
    cone_large_vertex_limit, cone_mean_curvature, cylinder_mean_curvature, graph_mean_curvature, q_residual, ConeSpec,
    GraphChart,
};
use proptest::prelude::*;
use std::sync::Arc;

fn sample(x: f64, y: f64) -> f64 {
    0.3 * (1.3 * x).sin() * (0.7 * y).cos() + 0.1 * x * y * y - 0.2 * y
}

/// `[u, ux, uy, uxx, uyy, uxy]` of `sample`, by hand.
fn sample_jet(x: f64, y: f64) -> [f64; 6] {
    let (sx, cx) = (1.3 * x).sin_cos();
    let (sy, cy) = (0.7 * y).sin_cos();
    [
        sample(x, y),
        0.39 * cx * cy + 0.1 * y * y,
        -0.21 * sx * sy + 0.2 * x * y - 0.2,
        -0.507 * sx * cy,
        -0.147 * sx * cy + 0.2 * x,
        -0.273 * cx * sy + 0.2 * y,
    ]
}

fn derivs(j: [f64; 6]) -> [f64; 5] {
    let mut d = [0.0; 5];
    d[UX] = j[1];
    d[UY] = j[2];
    d[UXX] = j[3];
    d[UYY] = j[4];
    d[UXY] = j[5];
    d
}

/// `−½ div(α/W, β/W)` with every derivative of `sample` differenced.
fn divergence_oracle(tau: f64, x: f64, y: f64) -> f64 {
    let e = 1e-4;
    let flux = |x: f64, y: f64| {
        let ux = (sample(x + e, y) - sample(x - e, y)) / (2.0 * e);
        let uy = (sample(x, y + e) - sample(x, y - e)) / (2.0 * e);
        let a = tau * y + ux;
        let b = -tau * x + uy;
        let w = (1.0 + a * a + b * b).sqrt();
        (a / w, b / w)
    };
    let d = 1e-3;
    let dx = (flux(x + d, y).0 - flux(x - d, y).0) / (2.0 * d);
    let dy = (flux(x, y + d).1 - flux(x, y - d).1) / (2.0 * d);
    -0.5 * (dx + dy)
}

proptest! {
    #[test]
    fn graph_curvature_is_half_the_flux_divergence(tau in -2.0..2.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let h = graph_mean_curvature(&AmbientParams::new(tau).unwrap(), x, y, &derivs(sample_jet(x, y)));
        let oracle = divergence_oracle(tau, x, y);
        prop_assert!((h - oracle).abs() < 1e-5, "{} vs {}", h, oracle);
    }

    #[test]
    fn graph_curvature_matches_the_immersion(tau in -2.0..2.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let params = AmbientParams::new(tau).unwrap();
        let h = graph_mean_curvature(&params, x, y, &derivs(sample_jet(x, y)));
        let oracle = mean_curvature_immersion(&GraphChart { jet: sample_jet }, x, y, &params).unwrap();
        prop_assert!((h - oracle).abs() < 1e-9, "{} vs {}", h, oracle);
    }

    /// The graph of `u(x − a, y) + τay` is the image of the graph of `u` under the
    /// `F₁` translation by `a`, so its mean curvature at the moved point agrees.
    #[test]
    fn translation_along_f1_preserves_curvature(tau in -2.0..2.0f64, a in -2.0..2.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let params = AmbientParams::new(tau).unwrap();
        let d = derivs(sample_jet(x, y));
        let mut moved = d;
        moved[UY] += tau * a;
        let h0 = graph_mean_curvature(&params, x, y, &d);
        let h1 = graph_mean_curvature(&params, x + a, y, &moved);
        prop_assert!((h0 - h1).abs() < 1e-12 * (1.0 + h0.abs()));
    }

    /// Rotation about the z-axis: gradients rotate and Hessians conjugate.
    #[test]
    fn rotation_preserves_curvature(tau in -2.0..2.0f64, th in 0.0..6.3f64, x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let params = AmbientParams::new(tau).unwrap();
        let d = derivs(sample_jet(x, y));
        let (s, c) = th.sin_cos();
        let mut r = [0.0; 5];
        r[UX] = c * d[UX] - s * d[UY];
        r[UY] = s * d[UX] + c * d[UY];
        r[UXX] = c * c * d[UXX] - 2.0 * c * s * d[UXY] + s * s * d[UYY];
        r[UYY] = s * s * d[UXX] + 2.0 * c * s * d[UXY] + c * c * d[UYY];
        r[UXY] = c * s * (d[UXX] - d[UYY]) + (c * c - s * s) * d[UXY];
        let h0 = graph_mean_curvature(&params, x, y, &d);
        let h1 = graph_mean_curvature(&params, c * x - s * y, s * x + c * y, &r);
        prop_assert!((h0 - h1).abs() < 1e-12 * (1.0 + h0.abs()));
    }
}

/// With `τ = 0` the sphere of radius `1/H` has mean curvature `H` for the downward normal.
#[test]
fn spherical_cap_solves_the_euclidean_equation() {
    let h = 0.3;
    let r: f64 = 1.0 / h;
    for (x, y) in [(0.0, 0.0), (0.5, -0.2), (-0.6, 0.7)] {
        let q = r * r - x * x - y * y;
        let s = q.sqrt();
        let mut d = [0.0; 5];
        d[UX] = -x / s;
        d[UY] = -y / s;
        d[UXX] = -(r * r - y * y) / (q * s);
        d[UYY] = -(r * r - x * x) / (q * s);
        d[UXY] = -x * y / (q * s);
        assert!(q_residual(&AmbientParams::euclidean(), h, x, y, &d).abs() < 1e-14);
    }
}

#[test]
fn cylinder_over_circle_has_half_the_curvature() {
    for r in [0.5, 1.0, 2.0] {
        let curve = BoundaryCurve::circle([0.3, -0.1], r).unwrap();
        for s in [0.0, 1.0, 2.5] {
            assert!((cylinder_mean_curvature(&curve, s) - 0.5 / r).abs() < 1e-12);
        }
    }
}

/// Far from the vertex the cone looks like the cylinder scaled by `t₀`.
#[test]
fn tall_cone_tends_to_the_scaled_cylinder() {
    let curve = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap());
    let params = AmbientParams::new(1.0).unwrap();
    let cone = ConeSpec::new(Point3::new(0.0, 0.0, 1e6), curve.clone()).unwrap();
    for t0 in [0.5, 1.0] {
        let h = cone_mean_curvature(&cone, &params, 0.7, t0).unwrap();
        assert!((h - cone_large_vertex_limit(&curve, 0.7, t0)).abs() < 1e-5);
        assert!((h - 0.5 / t0).abs() < 1e-5);
    }
}
