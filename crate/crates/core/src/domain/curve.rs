//! Closed planar boundary curves, reparametrized by arclength.

use std::f64::consts::TAU;
use std::io::Read;
use std::path::Path;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;

/// Shapes accepted by [`build_boundary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    /// Ordered samples of a closed curve; interpolated trigonometrically.
    Parametric {
        points: Vec<[f64; 2]>,
    },
}

/// Position and the first three derivatives with respect to arclength.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub pos: Vector2<f64>,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
    pub d3: Vector2<f64>,
}

impl CurveJet {
    /// Signed curvature `x′y″ − y′x″`, positive for counter-clockwise convex arcs.
    pub fn curvature(&self) -> f64 {
        cross(&self.d1, &self.d2)
    }

    /// Inner unit normal `J γ′`.
    pub fn normal(&self) -> Vector2<f64> {
        perp(&self.d1)
    }
}

pub(crate) fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Rotation by +90°.
pub(crate) fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v[1], v[0])
}

/// Trigonometric interpolant of equispaced samples on `[0, 2π)`.
#[derive(Debug, Clone)]
struct FourierCurve {
    /// Coefficients for modes `-k..=k` stored as `(mode, c)`.
    coeffs: Vec<(i64, Complex64)>,
}

impl FourierCurve {
    fn from_points(points: &[Vector2<f64>]) -> Self {
        let n = points.len();
        let twiddle: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / n as f64))
            .collect();
        let half = (n / 2) as i64;
        let mut coeffs = Vec::with_capacity(n + 1);
        for m in -half..=half {
            let mut acc = Complex64::new(0.0, 0.0);
            let mm = m.rem_euclid(n as i64) as usize;
            for (j, p) in points.iter().enumerate() {
                acc += Complex64::new(p[0], p[1]) * twiddle[(j * mm) % n];
            }
            let mut c = acc / n as f64;
            if n.is_multiple_of(2) && m.abs() == half {
                c *= 0.5;
            }
            coeffs.push((m, c));
        }
        FourierCurve { coeffs }
    }

    fn jet(&self, theta: f64) -> [Vector2<f64>; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        let step = Complex64::from_polar(1.0, theta);
        let first = self.coeffs.first().map_or(0, |c| c.0);
        // Re-anchor the power recurrence periodically to bound drift.
        let mut rot = Complex64::from_polar(1.0, first as f64 * theta);
        for (k, &(m, c)) in self.coeffs.iter().enumerate() {
            if k % 64 == 0 {
                rot = Complex64::from_polar(1.0, m as f64 * theta);
            }
            let e = c * rot;
            let mf = m as f64;
            out[0] += e;
            out[1] += e * Complex64::new(0.0, mf);
            out[2] += e * (-mf * mf);
            out[3] += e * Complex64::new(0.0, -mf * mf * mf);
            rot *= step;
        }
        out.map(|z| Vector2::new(z.re, z.im))
    }
}

#[derive(Debug, Clone)]
enum Native {
    Circle { center: Vector2<f64>, radius: f64 },
    Ellipse { center: Vector2<f64>, a: f64, b: f64 },
    Fourier(FourierCurve),
}

impl Native {
    fn jet(&self, th: f64) -> [Vector2<f64>; 4] {
        match self {
            Native::Circle { center, radius } => {
                let (s, c) = th.sin_cos();
                let r = *radius;
                [
                    center + Vector2::new(r * c, r * s),
                    Vector2::new(-r * s, r * c),
                    Vector2::new(-r * c, -r * s),
                    Vector2::new(r * s, -r * c),
                ]
            }
            Native::Ellipse { center, a, b } => {
                let (s, c) = th.sin_cos();
                [
                    center + Vector2::new(a * c, b * s),
                    Vector2::new(-a * s, b * c),
                    Vector2::new(-a * c, -b * s),
                    Vector2::new(a * s, -b * c),
                ]
            }
            Native::Fourier(f) => f.jet(th),
        }
    }
}

/// A closed, simple, counter-clockwise `C³` curve parametrized by arclength on `[0, ℓ)`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    kind: CurveKind,
    native: Native,
    reversed: bool,
    length: f64,
    /// Cumulative arclength at the native-parameter panel edges.
    cumulative: Vec<f64>,
}

/// Number of quadrature panels for the arclength table.
const PANELS: usize = 512;

impl BoundaryCurve {
    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        build_boundary(&CurveKind::Circle { center, radius }, 1024)
    }

    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Result<Self> {
        build_boundary(
            &CurveKind::Ellipse {
                center,
                semi_axes: [a, b],
            },
            1024,
        )
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn native_jet(&self, th: f64) -> [Vector2<f64>; 4] {
        if self.reversed {
            let [p, d1, d2, d3] = self.native.jet(-th);
            [p, -d1, d2, -d3]
        } else {
            self.native.jet(th)
        }
    }

    fn speed(&self, th: f64) -> f64 {
        self.native_jet(th)[1].norm()
    }

    fn panel_width(&self) -> f64 {
        TAU / (self.cumulative.len() - 1) as f64
    }

    /// Native parameter at arclength `s` (taken modulo the length).
    pub fn theta_of(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length);
        let panels = self.cumulative.len() - 1;
        let p = match self.cumulative.partition_point(|&c| c <= s) {
            0 => 0,
            k => (k - 1).min(panels - 1),
        };
        let w = self.panel_width();
        let (t0, t1) = (p as f64 * w, (p + 1) as f64 * w);
        let (c0, c1) = (self.cumulative[p], self.cumulative[p + 1]);
        let mut th = t0 + (s - c0) / (c1 - c0) * w;
        for _ in 0..12 {
            let f = c0 + gauss_legendre(|x| self.speed(x), t0, th) - s;
            let step = f / self.speed(th);
            th = (th - step).clamp(t0, t1);
            if step.abs() < 1e-15 * TAU {
                break;
            }
        }
        th
    }

    /// Arclength at native parameter `th ∈ [0, 2π)`.
    pub fn arclength_of(&self, th: f64) -> f64 {
        let th = th.rem_euclid(TAU);
        let w = self.panel_width();
        let p = ((th / w) as usize).min(self.cumulative.len() - 2);
        self.cumulative[p] + gauss_legendre(|x| self.speed(x), p as f64 * w, th)
    }

    pub fn jet(&self, s: f64) -> CurveJet {
        let th = self.theta_of(s);
        let [p, g1, g2, g3] = self.native_jet(th);
        let sigma = g1.norm();
        let sig1 = g1.dot(&g2) / sigma;
        let sig2 = (g2.dot(&g2) + g1.dot(&g3)) / sigma - g1.dot(&g2).powi(2) / sigma.powi(3);
        let th1 = 1.0 / sigma;
        let th2 = -sig1 / sigma.powi(3);
        let th3 = -sig2 / sigma.powi(4) + 3.0 * sig1 * sig1 / sigma.powi(5);
        CurveJet {
            pos: p,
            d1: g1 * th1,
            d2: g2 * (th1 * th1) + g1 * th2,
            d3: g3 * th1.powi(3) + g2 * (3.0 * th1 * th2) + g1 * th3,
        }
    }

    pub fn point(&self, s: f64) -> Vector2<f64> {
        self.native_jet(self.theta_of(s))[0]
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.jet(s).curvature()
    }

    /// `dk/ds`.
    pub fn curvature_derivative(&self, s: f64) -> f64 {
        let j = self.jet(s);
        cross(&j.d1, &j.d3)
    }

    pub fn normal(&self, s: f64) -> Vector2<f64> {
        self.jet(s).normal()
    }

    /// `n` arclength values evenly spaced over `[0, ℓ)`.
    pub fn sample_params(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.length * i as f64 / n as f64).collect()
    }

    /// Points at `n` native-parameter values; cheaper than arclength samples.
    pub(crate) fn polygon(&self, n: usize) -> Vec<(f64, Vector2<f64>)> {
        (0..n)
            .map(|i| {
                let th = TAU * i as f64 / n as f64;
                (th, self.native_jet(th)[0])
            })
            .collect()
    }

    /// Position at a native parameter.
    pub(crate) fn native_point(&self, th: f64) -> Vector2<f64> {
        self.native_jet(th)[0]
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (_, p) in self.polygon(4096) {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// `(kmin, kmax)` over dense samples.
    pub fn curvature_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.sample_params(2048) {
            let k = self.curvature(s);
            lo = lo.min(k);
            hi = hi.max(k);
        }
        (lo, hi)
    }

    /// Like [`Self::curvature_range`] but fails unless `kmin > 0`.
    pub fn convex_curvature_range(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.curvature_range();
        if lo <= 0.0 {
            return Err(Error::validation(format!(
                "boundary curvature must be positive, kmin = {lo}"
            )));
        }
        Ok((lo, hi))
    }

    pub fn is_circle(&self) -> Option<(Vector2<f64>, f64)> {
        match &self.native {
            Native::Circle { center, radius } => Some((*center, *radius)),
            _ => None,
        }
    }

    /// Curve through `n` points of `f(s)` evenly spaced in arclength of `self`.
    pub(crate) fn resampled<F>(&self, n: usize, f: F) -> Result<BoundaryCurve>
    where
        F: Fn(&CurveJet) -> Vector2<f64>,
    {
        let pts: Vec<[f64; 2]> = self
            .sample_params(n)
            .into_iter()
            .map(|s| {
                let p = f(&self.jet(s));
                [p[0], p[1]]
            })
            .collect();
        build_boundary(&CurveKind::Parametric { points: pts }, n)
    }

    /// Read `s,x,y` rows (with header) describing a closed curve.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<BoundaryCurve> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["s", "x", "y"] {
            return Err(Error::Parse(format!("expected header s,x,y, got {}", names.join(","))));
        }
        let mut rows: Vec<[f64; 3]> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let mut row = [0.0; 3];
            for (k, v) in row.iter_mut().enumerate() {
                let field = rec
                    .get(k)
                    .ok_or_else(|| Error::Parse(format!("row {}: missing column", line + 2)))?;
                *v = field
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", line + 2)))?;
            }
            rows.push(row);
        }
        if rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::validation("curve samples must have strictly increasing s"));
        }
        if rows.len() >= 2 {
            let (a, b) = (rows[0], rows[rows.len() - 1]);
            if (a[1] - b[1]).hypot(a[2] - b[2]) < 1e-10 {
                rows.pop();
            }
        }
        let points = rows.iter().map(|r| [r[1], r[2]]).collect::<Vec<_>>();
        let n = points.len();
        build_boundary(&CurveKind::Parametric { points }, n)
    }

    pub fn from_csv_path(path: &Path) -> Result<BoundaryCurve> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f)
    }
}

/// Builds and validates a boundary curve. `samples` sets the resolution of the
/// simplicity check (and is the interpolation size for parametric input).
pub fn build_boundary(kind: &CurveKind, samples: usize) -> Result<BoundaryCurve> {
    let native = match kind {
        CurveKind::Circle { center, radius } => {
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(Error::validation(format!(
                    "circle radius must be positive, got {radius}"
                )));
            }
            Native::Circle {
                center: Vector2::new(center[0], center[1]),
                radius: *radius,
            }
        }
        CurveKind::Ellipse { center, semi_axes } => {
            let [a, b] = *semi_axes;
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(Error::validation(format!(
                    "ellipse semi-axes must be positive, got ({a}, {b})"
                )));
            }
            Native::Ellipse {
                center: Vector2::new(center[0], center[1]),
                a,
                b,
            }
        }
        CurveKind::Parametric { points } => {
            if points.len() < 8 {
                return Err(Error::validation("parametric curve needs at least 8 samples"));
            }
            if points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::validation("parametric curve has non-finite samples"));
            }
            let pts: Vec<Vector2<f64>> = points.iter().map(|p| Vector2::new(p[0], p[1])).collect();
            Native::Fourier(FourierCurve::from_points(&pts))
        }
    };

    let mut curve = BoundaryCurve {
        kind: kind.clone(),
        native,
        reversed: false,
        length: 0.0,
        cumulative: Vec::new(),
    };

    let check_n = samples.clamp(256, 2048);
    let poly = curve.polygon(check_n);
    let area: f64 = (0..check_n)
        .map(|i| cross(&poly[i].1, &poly[(i + 1) % check_n].1))
        .sum::<f64>()
        * 0.5;
    if area.abs() < 1e-14 {
        return Err(Error::validation("curve encloses no area"));
    }
    curve.reversed = area < 0.0;
    check_simple(&poly)?;

    let panels = match kind {
        CurveKind::Parametric { points } => PANELS.max(points.len()),
        _ => PANELS,
    };
    let w = TAU / panels as f64;
    let mut cumulative = Vec::with_capacity(panels + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for p in 0..panels {
        acc += gauss_legendre(|x| curve.speed(x), p as f64 * w, (p + 1) as f64 * w);
        cumulative.push(acc);
    }
    curve.length = acc;
    curve.cumulative = cumulative;
    for s in curve.sample_params(64) {
        let sp = curve.jet(s).d1.norm();
        if !(sp.is_finite() && (sp - 1.0).abs() < 1e-8) {
            return Err(Error::validation("curve is not regular (vanishing speed)"));
        }
    }
    Ok(curve)
}

fn check_simple(poly: &[(f64, Vector2<f64>)]) -> Result<()> {
    let n = poly.len();
    let seg = |i: usize| (poly[i].1, poly[(i + 1) % n].1);
    for i in 0..n {
        let (a, b) = seg(i);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = seg(j);
            let d1 = cross(&(b - a), &(c - a));
            let d2 = cross(&(b - a), &(d - a));
            let d3 = cross(&(d - c), &(a - c));
            let d4 = cross(&(d - c), &(b - c));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Err(Error::validation(format!(
                    "curve self-intersects near samples {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Inward offset `γ + δν`, the boundary of the shrunk domain. Requires `0 < δ < 1/kmax`.
pub fn shrunk_domain(curve: &BoundaryCurve, delta: f64) -> Result<BoundaryCurve> {
    let (_, kmax) = curve.curvature_range();
    if !(delta > 0.0) || (kmax > 0.0 && delta * kmax >= 1.0) {
        return Err(Error::validation(format!(
            "offset {delta} must satisfy 0 < delta < 1/kmax = {}",
            1.0 / kmax
        )));
    }
    if let Some((c, r)) = curve.is_circle() {
        return BoundaryCurve::circle([c[0], c[1]], r - delta);
    }
    let n = match curve.kind() {
        CurveKind::Parametric { points } => points.len().max(1024),
        _ => 1024,
    };
    curve.resampled(n, |j| j.pos + j.normal() * delta)
}

/// Curvature of the offset curve at the point over base arclength `s`: `k / (1 − δk)`.
pub fn offset_curvature(curve: &BoundaryCurve, delta: f64, s: f64) -> f64 {
    let k = curve.curvature(s);
    k / (1.0 - delta * k)
}
