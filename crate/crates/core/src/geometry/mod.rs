//! Ambient geometry of the Heisenberg space `Nil(τ)`.
//!
//! Points are written in global exponential coordinates `(x, y, z)` and the
//! metric is
//!
//! ```text
//! ds² = dx² + dy² + (τ (y dx − x dy) + dz)²
//! ```
//!
//! Everything here is a pure function of `τ` and its inputs. The frame
//! `E₁ = ∂x − τy ∂z`, `E₂ = ∂y + τx ∂z`, `E₃ = ∂z` is orthonormal and the
//! Levi-Civita connection has constant coefficients in it, which is what
//! [`AmbientParams::connection_frame`] and [`AmbientParams::covariant_derivative`]
//! use. The coordinate Christoffel symbols ([`AmbientParams::christoffel`]) are
//! computed independently from the metric tensor and back the immersion
//! mean-curvature oracle.

mod immersion;
mod isometry;

pub use immersion::{mean_curvature_immersion, ChartJet, FiniteDifferenceChart, ImmersionChart, Orientation};
pub use isometry::{apply_isometries, apply_isometry, IsometryKind, IsometrySpec};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative step for the central differences used by the numeric oracles.
pub const FD_STEP: f64 = 1e-5;

/// The bundle-curvature parameter selecting `Nil(τ)`. `τ = 0` is Euclidean `ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientParams {
    pub tau: f64,
}

/// A point in exponential coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_coords(v: &Vector3<f64>) -> Self {
        Point3::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Shift along coordinate components (not an isometry in general).
    pub fn offset(&self, v: &Vector3<f64>) -> Self {
        Point3::from_coords(&(self.coords() + v))
    }
}

/// A tangent vector `a ∂x + b ∂y + c ∂z` attached to a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: Point3,
    pub components: Vector3<f64>,
}

impl TangentVector {
    pub fn new(base: Point3, a: f64, b: f64, c: f64) -> Self {
        TangentVector {
            base,
            components: Vector3::new(a, b, c),
        }
    }

    pub fn from_components(base: Point3, components: Vector3<f64>) -> Self {
        TangentVector { base, components }
    }

    pub fn scale(&self, k: f64) -> Self {
        TangentVector::from_components(self.base, self.components * k)
    }

    fn check_base(&self, p: &Point3) -> Result<()> {
        if self.base != *p {
            return Err(Error::Usage(format!("vector based at {:?} used at {:?}", self.base, p)));
        }
        Ok(())
    }
}

/// A vector field given by its coordinate components.
pub trait VectorField {
    fn components(&self, p: &Point3) -> Vector3<f64>;

    fn at(&self, p: &Point3) -> TangentVector {
        TangentVector::from_components(*p, self.components(p))
    }
}

impl<F> VectorField for F
where
    F: Fn(&Point3) -> Vector3<f64>,
{
    fn components(&self, p: &Point3) -> Vector3<f64> {
        self(p)
    }
}

/// A field with constant coefficients in the orthonormal frame, e.g. `E₁` itself.
#[derive(Debug, Clone, Copy)]
pub struct FrameField {
    pub params: AmbientParams,
    pub coefficients: Vector3<f64>,
}

impl FrameField {
    pub fn basis(params: AmbientParams, index: usize) -> Self {
        let mut coefficients = Vector3::zeros();
        coefficients[index] = 1.0;
        FrameField { params, coefficients }
    }
}

impl VectorField for FrameField {
    fn components(&self, p: &Point3) -> Vector3<f64> {
        self.params.from_frame(p, &self.coefficients).components
    }
}

/// Scalar curvature numbers at a point (the space is homogeneous, so any point).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarCurvature {
    /// Trace of the Ricci tensor over the orthonormal frame.
    pub ricci_trace: f64,
    /// Sum of the sectional curvatures of the three coordinate planes of the frame.
    pub sectional_sum: f64,
    /// The closed-form value `−τ²` usually quoted for this space.
    pub reference: f64,
}

impl AmbientParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::validation(format!("tau must be finite, got {tau}")));
        }
        Ok(AmbientParams { tau })
    }

    pub fn euclidean() -> Self {
        AmbientParams { tau: 0.0 }
    }

    /// The one-form `θ = τy dx − τx dy + dz` as a coordinate covector.
    fn vertical_form(&self, p: &Point3) -> Vector3<f64> {
        Vector3::new(self.tau * p.y, -self.tau * p.x, 1.0)
    }

    /// Metric tensor `g_ij` in coordinates: `diag(1, 1, 0) + θ θᵀ`.
    pub fn metric_matrix(&self, p: &Point3) -> Matrix3<f64> {
        let th = self.vertical_form(p);
        let mut g = th * th.transpose();
        g[(0, 0)] += 1.0;
        g[(1, 1)] += 1.0;
        g
    }

    /// Coordinate partial derivatives `∂_k g` for `k = x, y, z`.
    pub fn metric_partials(&self, p: &Point3) -> [Matrix3<f64>; 3] {
        let th = self.vertical_form(p);
        let dth = [
            Vector3::new(0.0, -self.tau, 0.0),
            Vector3::new(self.tau, 0.0, 0.0),
            Vector3::zeros(),
        ];
        dth.map(|d| d * th.transpose() + th * d.transpose())
    }

    /// Christoffel symbols of the coordinate Levi-Civita connection.
    ///
    /// `gamma[l][(i, j)] = Γ^l_ij`, computed from the metric tensor alone.
    pub fn christoffel(&self, p: &Point3) -> [Matrix3<f64>; 3] {
        let g = self.metric_matrix(p);
        // det g = 1 everywhere, so the inverse always exists.
        let ginv = g.try_inverse().expect("metric is nondegenerate");
        let dg = self.metric_partials(p);
        let mut lowered = [Matrix3::<f64>::zeros(); 3];
        for (m, low) in lowered.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    low[(i, j)] = 0.5 * (dg[i][(j, m)] + dg[j][(i, m)] - dg[m][(i, j)]);
                }
            }
        }
        let mut gamma = [Matrix3::<f64>::zeros(); 3];
        for (l, gl) in gamma.iter_mut().enumerate() {
            for m in 0..3 {
                *gl += lowered[m] * ginv[(l, m)];
            }
        }
        gamma
    }

    /// `⟨v, w⟩_p`. Both vectors must be based at `p`.
    pub fn metric_at(&self, p: &Point3, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        v.check_base(p)?;
        w.check_base(p)?;
        Ok(self.inner(p, &v.components, &w.components))
    }

    pub(crate) fn inner(&self, p: &Point3, v: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
        let th = self.vertical_form(p);
        v[0] * w[0] + v[1] * w[1] + th.dot(v) * th.dot(w)
    }

    pub fn norm(&self, v: &TangentVector) -> f64 {
        self.inner(&v.base, &v.components, &v.components).sqrt()
    }

    /// The orthonormal frame `(E₁, E₂, E₃)` at `p` in coordinate components.
    pub fn frame_at(&self, p: &Point3) -> [TangentVector; 3] {
        let t = self.tau;
        [
            TangentVector::new(*p, 1.0, 0.0, -t * p.y),
            TangentVector::new(*p, 0.0, 1.0, t * p.x),
            TangentVector::new(*p, 0.0, 0.0, 1.0),
        ]
    }

    /// Coefficients of a vector in the frame `{E₁, E₂, E₃}`.
    pub fn frame_components(&self, v: &TangentVector) -> Vector3<f64> {
        let c = v.components;
        let p = v.base;
        Vector3::new(c[0], c[1], c[2] + self.tau * (p.y * c[0] - p.x * c[1]))
    }

    /// Inverse of [`Self::frame_components`].
    pub fn from_frame(&self, p: &Point3, coeffs: &Vector3<f64>) -> TangentVector {
        let t = self.tau;
        TangentVector::new(
            *p,
            coeffs[0],
            coeffs[1],
            coeffs[2] - t * p.y * coeffs[0] + t * p.x * coeffs[1],
        )
    }

    /// `∇_{E_i} E_j` as frame coefficients; indices are 1-based.
    pub fn connection_frame(&self, i: usize, j: usize) -> Result<Vector3<f64>> {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
            return Err(Error::Usage(format!("frame indices must be in 1..=3, got ({i}, {j})")));
        }
        let t = self.tau;
        let v = match (i, j) {
            (1, 2) => Vector3::new(0.0, 0.0, t),
            (2, 1) => Vector3::new(0.0, 0.0, -t),
            (1, 3) | (3, 1) => Vector3::new(0.0, -t, 0.0),
            (2, 3) | (3, 2) => Vector3::new(t, 0.0, 0.0),
            _ => Vector3::zeros(),
        };
        Ok(v)
    }

    fn connection_bilinear(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out += self.connection_frame(i + 1, j + 1).expect("valid indices") * c;
                }
            }
        }
        out
    }

    /// `∇_X Y` at `p`: Leibniz rule on frame coefficients plus the constant frame table.
    ///
    /// Directional derivatives of `Y`'s frame coefficients are central differences.
    pub fn covariant_derivative(&self, x: &dyn VectorField, y: &dyn VectorField, p: &Point3) -> TangentVector {
        let xv = x.at(p);
        let xc = xv.components;
        let xf = self.frame_components(&xv);
        let yf = self.frame_components(&y.at(p));

        let mut dy = Vector3::zeros();
        let len = xc.norm();
        if len > 0.0 {
            let step = FD_STEP * scale_of(p) / len;
            let pp = p.offset(&(xc * step));
            let pm = p.offset(&(xc * -step));
            let yp = self.frame_components(&y.at(&pp));
            let ym = self.frame_components(&y.at(&pm));
            dy = (yp - ym) / (2.0 * step);
        }
        let coeffs = dy + self.connection_bilinear(&xf, &yf);
        self.from_frame(p, &coeffs)
    }

    /// `∇_X Y` for constant frame-coefficient fields, exact.
    pub fn covariant_derivative_frame(&self, p: &Point3, x: &Vector3<f64>, y: &Vector3<f64>) -> TangentVector {
        self.from_frame(p, &self.connection_bilinear(x, y))
    }

    /// Riemann tensor `R(X,Y)Z = −3τ² (X∧Y)Z + 4τ² R₁(∂z; X, Y)Z`, with
    /// `(X∧Y)Z = ⟨Y,Z⟩X − ⟨X,Z⟩Y` and the sign convention
    /// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
    pub fn curvature_tensor(&self, x: &TangentVector, y: &TangentVector, z: &TangentVector) -> Result<TangentVector> {
        let p = x.base;
        y.check_base(&p)?;
        z.check_base(&p)?;
        let (xv, yv, zv) = (&x.components, &y.components, &z.components);
        let e3 = Vector3::new(0.0, 0.0, 1.0);
        let ip = |a: &Vector3<f64>, b: &Vector3<f64>| self.inner(&p, a, b);

        let wedge = xv * ip(yv, zv) - yv * ip(xv, zv);
        let (xz, yz, zz) = (ip(xv, &e3), ip(yv, &e3), ip(zv, &e3));
        let r1 = e3 * (ip(yv, zv) * xz) + xv * (yz * zz) - e3 * (ip(xv, zv) * yz) - yv * (xz * zz);
        let t2 = self.tau * self.tau;
        Ok(TangentVector::from_components(p, wedge * (-3.0 * t2) + r1 * (4.0 * t2)))
    }

    /// Sectional curvature of the plane spanned by `x`, `y`.
    pub fn sectional_curvature(&self, x: &TangentVector, y: &TangentVector) -> Result<f64> {
        let p = x.base;
        let r = self.curvature_tensor(x, y, y)?;
        let num = self.inner(&p, &r.components, &x.components);
        let xx = self.inner(&p, &x.components, &x.components);
        let yy = self.inner(&p, &y.components, &y.components);
        let xy = self.inner(&p, &x.components, &y.components);
        let den = xx * yy - xy * xy;
        if den <= 0.0 {
            return Err(Error::Usage("sectional curvature of a degenerate plane".into()));
        }
        Ok(num / den)
    }

    pub fn scalar_curvature(&self) -> ScalarCurvature {
        let p = Point3::ORIGIN;
        let e = self.frame_at(&p);
        let k = |i: usize, j: usize| self.sectional_curvature(&e[i], &e[j]).expect("frame vectors");
        let (k12, k13, k23) = (k(0, 1), k(0, 2), k(1, 2));
        ScalarCurvature {
            ricci_trace: 2.0 * (k12 + k13 + k23),
            sectional_sum: k12 + k13 + k23,
            reference: -self.tau * self.tau,
        }
    }

    /// Coordinate Lie bracket `[X, Y]` at `p` by central differences.
    pub fn lie_bracket(&self, x: &dyn VectorField, y: &dyn VectorField, p: &Point3) -> TangentVector {
        let xv = x.components(p);
        let yv = y.components(p);
        let deriv = |f: &dyn VectorField, dir: &Vector3<f64>| -> Vector3<f64> {
            let len = dir.norm();
            if len == 0.0 {
                return Vector3::zeros();
            }
            let step = FD_STEP * scale_of(p) / len;
            (f.components(&p.offset(&(dir * step))) - f.components(&p.offset(&(dir * -step)))) / (2.0 * step)
        };
        TangentVector::from_components(*p, deriv(y, &xv) - deriv(x, &yv))
    }
}

pub(crate) fn scale_of(p: &Point3) -> f64 {
    1.0_f64.max(p.coords().amax())
}
