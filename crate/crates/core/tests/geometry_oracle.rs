//! Ambient geometry against a metric written out by hand here and differenced.

use nalgebra::{Matrix3, Vector3};
use nilcmc::geometry::{apply_isometry, AmbientParams, IsometryKind, IsometrySpec, Point3, TangentVector};
use proptest::prelude::*;

/// `dx² + dy² + (τ(y dx − x dy) + dz)²` as a matrix.
fn metric(tau: f64, p: [f64; 3]) -> Matrix3<f64> {
    let th = Vector3::new(tau * p[1], -tau * p[0], 1.0);
    let mut g = th * th.transpose();
    g[(0, 0)] += 1.0;
    g[(1, 1)] += 1.0;
    g
}

/// `Γˡᵢⱼ` from central differences of `metric`; `out[l][(i, j)]`.
fn christoffel_fd(tau: f64, p: [f64; 3]) -> [Matrix3<f64>; 3] {
    let e = 1e-5;
    let dg: Vec<Matrix3<f64>> = (0..3)
        .map(|m| {
            let (mut a, mut b) = (p, p);
            a[m] += e;
            b[m] -= e;
            (metric(tau, a) - metric(tau, b)) / (2.0 * e)
        })
        .collect();
    let inv = metric(tau, p).try_inverse().unwrap();
    let mut out = [Matrix3::zeros(); 3];
    for (l, gl) in out.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                gl[(i, j)] = (0..3)
                    .map(|m| 0.5 * inv[(l, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]))
                    .sum();
            }
        }
    }
    out
}

fn frame(tau: f64, p: [f64; 3]) -> [Vector3<f64>; 3] {
    [
        Vector3::new(1.0, 0.0, -tau * p[1]),
        Vector3::new(0.0, 1.0, tau * p[0]),
        Vector3::new(0.0, 0.0, 1.0),
    ]
}

/// Coordinates of `∇_{Eᵢ} Eⱼ`, with the derivative of `Eⱼ` along `Eᵢ` differenced.
fn covariant_fd(tau: f64, p: [f64; 3], i: usize, j: usize) -> Vector3<f64> {
    let e = 1e-5;
    let x = frame(tau, p)[i];
    let shift = |s: f64| [p[0] + s * x[0], p[1] + s * x[1], p[2] + s * x[2]];
    let dy = (frame(tau, shift(e))[j] - frame(tau, shift(-e))[j]) / (2.0 * e);
    let y = frame(tau, p)[j];
    let gam = christoffel_fd(tau, p);
    Vector3::from_fn(|l, _| dy[l] + x.dot(&(gam[l] * y)))
}

/// Frame coefficients of a coordinate vector at `p`.
fn in_frame(tau: f64, p: [f64; 3], v: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2] + tau * p[1] * v[0] - tau * p[0] * v[1])
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #[test]
    fn christoffel_symbols_match_differenced_metric(tau in -2.0..2.0f64, p in point()) {
        let lib = AmbientParams::new(tau).unwrap().christoffel(&Point3::new(p[0], p[1], p[2]));
        let fd = christoffel_fd(tau, p);
        for l in 0..3 {
            prop_assert!((lib[l] - fd[l]).amax() < 1e-7, "l = {}: {} vs {}", l, lib[l], fd[l]);
        }
    }

    #[test]
    fn connection_table_matches_koszul(tau in -2.0..2.0f64, p in point()) {
        let params = AmbientParams::new(tau).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                let oracle = in_frame(tau, p, covariant_fd(tau, p, i - 1, j - 1));
                let table = params.connection_frame(i, j).unwrap();
                prop_assert!((oracle - table).amax() < 1e-7, "({},{}): {} vs {}", i, j, oracle, table);
            }
        }
    }

    #[test]
    fn frame_is_orthonormal(tau in -2.0..2.0f64, p in point()) {
        let g = metric(tau, p);
        let f = frame(tau, p);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((f[i].dot(&(g * f[j])) - want).abs() < 1e-12);
            }
        }
    }

    /// Pulling the metric back by each isometry returns it unchanged.
    #[test]
    fn isometries_preserve_the_metric(
        tau in -2.0..2.0f64,
        p in point(),
        amount in -3.0..3.0f64,
        kind in prop::sample::select(vec![
            IsometryKind::TranslateF1,
            IsometryKind::TranslateF2,
            IsometryKind::TranslateF3,
            IsometryKind::RotateF4,
        ]),
    ) {
        let params = AmbientParams::new(tau).unwrap();
        let iso = IsometrySpec::new(kind, amount);
        let map = |q: [f64; 3]| apply_isometry(&params, &iso, &Point3::new(q[0], q[1], q[2])).coords();
        let e = 1e-5;
        let mut jac = Matrix3::zeros();
        for m in 0..3 {
            let (mut a, mut b) = (p, p);
            a[m] += e;
            b[m] -= e;
            jac.set_column(m, &((map(a) - map(b)) / (2.0 * e)));
        }
        let q = map(p);
        let pulled = jac.transpose() * metric(tau, [q[0], q[1], q[2]]) * jac;
        prop_assert!((pulled - metric(tau, p)).amax() < 1e-6);
    }
}

/// Sectional curvatures of the frame planes: `−3τ²` for `E₁∧E₂`, `τ²` for the vertical ones.
#[test]
fn frame_plane_curvatures() {
    for tau in [0.0, 0.3, -1.0, 2.0] {
        let params = AmbientParams::new(tau).unwrap();
        let p = Point3::new(0.7, -1.1, 0.4);
        let f = params.frame_at(&p);
        let k = |a: &TangentVector, b: &TangentVector| params.sectional_curvature(a, b).unwrap();
        assert!((k(&f[0], &f[1]) + 3.0 * tau * tau).abs() < 1e-10);
        assert!((k(&f[0], &f[2]) - tau * tau).abs() < 1e-10);
        assert!((k(&f[1], &f[2]) - tau * tau).abs() < 1e-10);
    }
}

/// A plane containing the vertical direction always has curvature `τ²`.
#[test]
fn vertical_planes_have_curvature_tau_squared() {
    let tau = 0.8;
    let params = AmbientParams::new(tau).unwrap();
    let p = Point3::new(-0.3, 1.4, 2.0);
    let f = params.frame_at(&p);
    for angle in [0.1, 0.9, 2.3] {
        let (s, c) = f64::sin_cos(angle);
        let h = TangentVector::from_components(p, f[0].components * c + f[1].components * s);
        let k = params.sectional_curvature(&h, &f[2]).unwrap();
        assert!((k - tau * tau).abs() < 1e-10, "{k}");
    }
}
