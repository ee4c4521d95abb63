//! Comparison surfaces for the Dirichlet problem: horizontal planes, cones
//! through the boundary graph, and the logarithmic collar profile.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::Vector2;
use serde::Serialize;

use crate::domain::{
    ArmEnd, BoundaryCurve, BoundaryData, CurveJet, FermiCollar, Grid, ScalarField, UX, UXX, UXY, UY, UYY,
};
use crate::error::{Error, Result};
use crate::geometry::AmbientParams;
use crate::numeric::bracketed_root;
use crate::operators::{cone_mean_curvature_jet, q_residual};

/// `w(t) = L ln(1 + K² t)` with `L = M / ln(1 + K)`, so that `w(0) = 0` and `w(1/K) = M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBarrier {
    pub m: f64,
    pub k: f64,
    pub l: f64,
}

impl LogBarrier {
    pub fn new(m: f64, k: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && k > 0.0 && k.is_finite()) {
            return Err(Error::validation(format!(
                "log barrier needs M > 0 and K > 0, got M = {m}, K = {k}"
            )));
        }
        Ok(LogBarrier { m, k, l: m / k.ln_1p() })
    }

    /// Collar depth `1/K` on which the profile rises from 0 to `M`.
    pub fn width(&self) -> f64 {
        1.0 / self.k
    }

    pub fn value(&self, t: f64) -> f64 {
        self.l * (self.k * self.k * t).ln_1p()
    }

    pub fn dt(&self, t: f64) -> f64 {
        self.l * self.k * self.k / (1.0 + self.k * self.k * t)
    }

    pub fn dtt(&self, t: f64) -> f64 {
        let q = 1.0 + self.k * self.k * t;
        -self.l * self.k.powi(4) / (q * q)
    }

    /// `w_tt + w_t²/L`, identically zero.
    pub fn identity_residual(&self, t: f64) -> f64 {
        self.dtt(t) + self.dt(t).powi(2) / self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierKind {
    Plane,
    Cone,
    LogCollar,
}

/// A comparison surface sampled on a grid.
#[derive(Debug, Clone)]
pub struct BarrierField {
    pub kind: BarrierKind,
    pub field: ScalarField,
    /// Nodes on which the barrier is defined.
    pub region: Vec<bool>,
    /// Nodes where the surface is not smooth (cone apex).
    pub flagged: Vec<usize>,
}

impl BarrierField {
    /// The horizontal plane `z = height`.
    pub fn plane(grid: Arc<Grid>, height: f64) -> Self {
        let n = grid.nodes().len();
        BarrierField {
            kind: BarrierKind::Plane,
            field: ScalarField::from_fn(grid, "plane", |_, _| height),
            region: vec![true; n],
            flagged: Vec::new(),
        }
    }

    /// Nodes where the stencil only touches region nodes, boundary points, and no flagged node.
    fn checkable(&self) -> Vec<usize> {
        let grid = &self.field.grid;
        let mut bad = vec![false; self.region.len()];
        for &f in &self.flagged {
            bad[f] = true;
        }
        grid.nodes()
            .iter()
            .enumerate()
            .filter(|(k, node)| {
                self.region[*k]
                    && !bad[*k]
                    && node.collapse_arm().is_none()
                    && node.arms.iter().all(|a| match a.end {
                        ArmEnd::Node(m) => self.region[m] && !bad[m],
                        ArmEnd::Boundary(_) => true,
                    })
            })
            .map(|(k, _)| k)
            .collect()
    }
}

/// Heights of the cone with vertex `(x₀, y₀, z₀)` through the graph of the
/// boundary data: linear along each ray from `(x₀, y₀)` to `Γ`.
///
/// The vertex must see all of `Γ` (star-shaped domain). A node at the vertex
/// position takes the apex height and is flagged.
pub fn cone_height_field(vertex: [f64; 3], data: &BoundaryData, grid: &Arc<Grid>) -> Result<BarrierField> {
    let curve = grid.curve();
    let caster = RayCaster::new(curve, Vector2::new(vertex[0], vertex[1]))?;
    let ell = curve.length();
    let z0 = vertex[2];
    let mut flagged = Vec::new();
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let d = Vector2::new(n.x, n.y) - caster.v;
            let r = d.norm();
            if r < 1e-14 {
                flagged.push(k);
                return z0;
            }
            let th = caster.hit(d[1].atan2(d[0]));
            let b = curve.native_point(th);
            let rho = (b - caster.v).norm();
            let phi = data.eval(curve.arclength_of(th), ell);
            z0 + (phi - z0) * r / rho
        })
        .collect();
    let field = ScalarField {
        grid: grid.clone(),
        values,
        trace: grid.trace_of(data, 1.0),
        label: format!("cone({}, {}, {})", vertex[0], vertex[1], z0),
    };
    Ok(BarrierField {
        kind: BarrierKind::Cone,
        region: vec![true; grid.nodes().len()],
        field,
        flagged,
    })
}

/// Ray–boundary intersection from an interior point, by a table of boundary
/// angles around it.
struct RayCaster<'a> {
    curve: &'a BoundaryCurve,
    v: Vector2<f64>,
    /// `(native parameter, unwrapped angle)`, increasing, closed by the first entry plus 2π.
    table: Vec<(f64, f64)>,
}

impl<'a> RayCaster<'a> {
    fn new(curve: &'a BoundaryCurve, v: Vector2<f64>) -> Result<Self> {
        let poly = curve.polygon(2048);
        let mut table = Vec::with_capacity(poly.len() + 1);
        let mut prev = f64::NAN;
        for (th, p) in &poly {
            let d = p - v;
            let mut a = d[1].atan2(d[0]);
            if prev.is_finite() {
                while a < prev - std::f64::consts::PI {
                    a += TAU;
                }
                while a > prev + std::f64::consts::PI {
                    a -= TAU;
                }
                if a <= prev {
                    return Err(Error::validation(format!(
                        "domain is not star-shaped about the vertex ({}, {})",
                        v[0], v[1]
                    )));
                }
            }
            table.push((*th, a));
            prev = a;
        }
        let a0 = table[0].1;
        if !(prev < a0 + TAU && prev > a0 + TAU - 1.0) {
            return Err(Error::validation(format!(
                "vertex ({}, {}) is not inside the domain",
                v[0], v[1]
            )));
        }
        table.push((TAU, a0 + TAU));
        Ok(RayCaster { curve, v, table })
    }

    /// Native parameter of the boundary point in direction `angle`.
    fn hit(&self, angle: f64) -> f64 {
        let a0 = self.table[0].1;
        let a = a0 + (angle - a0).rem_euclid(TAU);
        let i = self.table.partition_point(|e| e.1 <= a).clamp(1, self.table.len() - 1) - 1;
        let (t0, t1) = (self.table[i].0, self.table[i + 1].0);
        let d = Vector2::new(angle.cos(), angle.sin());
        let f = |th: f64| {
            let p = self.curve.native_point(th) - self.v;
            p[0] * d[1] - p[1] * d[0]
        };
        bracketed_root(f, t0, t1, 1e-15, 100)
    }
}

/// `w(t(p))` on grid nodes within Fermi depth `1/K`; nodes deeper than that
/// carry `M` and are outside the region.
pub fn log_barrier_field(collar: &FermiCollar, barrier: &LogBarrier, grid: &Arc<Grid>) -> Result<BarrierField> {
    if barrier.width() > collar.width() {
        return Err(Error::validation(format!(
            "barrier depth 1/K = {} exceeds the collar width {}",
            barrier.width(),
            collar.width()
        )));
    }
    let n = grid.nodes().len();
    let mut values = vec![barrier.m; n];
    let mut region = vec![false; n];
    for (k, node) in grid.nodes().iter().enumerate() {
        if let Some((_, t)) = collar.fermi_coordinates(Vector2::new(node.x, node.y))? {
            if t <= barrier.width() {
                values[k] = barrier.value(t);
                region[k] = true;
            }
        }
    }
    let field = ScalarField {
        grid: grid.clone(),
        values,
        trace: vec![0.0; grid.boundary_points().len()],
        label: format!("log-collar(M={}, K={})", barrier.m, barrier.k),
    };
    Ok(BarrierField {
        kind: BarrierKind::LogCollar,
        field,
        region,
        flagged: Vec::new(),
    })
}

/// Position, value, and exact derivatives `[ux, uy, uxx, uyy, uxy]` of
/// `w ∘ t` at the collar point `P(s, t)`.
///
/// `Dt = ν` and `D²t = −k/(1 − tk) T⊗T`, with `T = γ′`.
pub fn log_barrier_jet(collar: &FermiCollar, barrier: &LogBarrier, s: f64, t: f64) -> (Vector2<f64>, f64, [f64; 5]) {
    let j: CurveJet = collar.base().jet(s);
    let tan = j.d1;
    let nu = j.normal();
    let p = j.pos + nu * t;
    let curv = j.curvature() / collar.jacobian_factor(s, t);
    let (wt, wtt) = (barrier.dt(t), barrier.dtt(t));
    let mut d = [0.0; 5];
    d[UX] = wt * nu[0];
    d[UY] = wt * nu[1];
    d[UXX] = wtt * nu[0] * nu[0] - wt * curv * tan[0] * tan[0];
    d[UYY] = wtt * nu[1] * nu[1] - wt * curv * tan[1] * tan[1];
    d[UXY] = wtt * nu[0] * nu[1] - wt * curv * tan[0] * tan[1];
    (p, barrier.value(t), d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    /// `max Q < 0`
    Supersolution,
    /// `min Q > 0`
    Subsolution,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    pub max_q: f64,
    pub min_q: f64,
    pub argmax: [f64; 2],
    pub argmin: [f64; 2],
    pub samples: usize,
    pub class: SignClass,
}

impl SignReport {
    fn from_samples(samples: impl IntoIterator<Item = ([f64; 2], f64)>) -> Result<Self> {
        let mut r = SignReport {
            max_q: f64::NEG_INFINITY,
            min_q: f64::INFINITY,
            argmax: [f64::NAN; 2],
            argmin: [f64::NAN; 2],
            samples: 0,
            class: SignClass::Neither,
        };
        for (p, q) in samples {
            r.samples += 1;
            if q > r.max_q || q.is_nan() {
                r.max_q = q;
                r.argmax = p;
            }
            if q < r.min_q {
                r.min_q = q;
                r.argmin = p;
            }
        }
        if r.samples == 0 {
            return Err(Error::validation("sign check region is empty"));
        }
        r.class = if r.max_q < 0.0 {
            SignClass::Supersolution
        } else if r.min_q > 0.0 {
            SignClass::Subsolution
        } else {
            SignClass::Neither
        };
        Ok(r)
    }
}

/// `Q_H` of the barrier from the grid stencils, over region nodes whose whole
/// stencil stays in the region (collapsed and apex-adjacent nodes are skipped).
pub fn check_sign(field: &BarrierField, params: &AmbientParams, h: f64) -> Result<SignReport> {
    let grid = &field.field.grid;
    let nodes = grid.nodes();
    SignReport::from_samples(field.checkable().into_iter().map(|k| {
        let n = &nodes[k];
        let d = field.field.derivatives(k);
        ([n.x, n.y], q_residual(params, h, n.x, n.y, &d))
    }))
}

/// `Q_H(w ∘ t)` from the exact jet on an `ns × nt` sample of `[0, ℓ) × [0, 1/K]`.
pub fn check_sign_log_collar(
    collar: &FermiCollar,
    barrier: &LogBarrier,
    params: &AmbientParams,
    h: f64,
    ns: usize,
    nt: usize,
) -> Result<SignReport> {
    if barrier.width() > collar.width() {
        return Err(Error::validation("barrier depth 1/K exceeds the collar width"));
    }
    let ss = collar.base().sample_params(ns);
    let nt = nt.max(2);
    SignReport::from_samples(ss.into_iter().flat_map(|s| {
        (0..nt).map(move |j| {
            let t = barrier.width() * j as f64 / (nt - 1) as f64;
            let (p, _, d) = log_barrier_jet(collar, barrier, s, t);
            ([p[0], p[1]], q_residual(params, h, p[0], p[1], &d))
        })
    }))
}

/// Settings for the steepness search `K = 2ⁱ/ε`.
#[derive(Debug, Clone, Serialize)]
pub struct KSearch {
    pub m: f64,
    /// Required `max Q < −margin`.
    pub margin: f64,
    pub max_doublings: u32,
    pub samples_s: usize,
    pub samples_t: usize,
}

impl Default for KSearch {
    fn default() -> Self {
        KSearch {
            m: 1.0,
            margin: 1e-3,
            max_doublings: 30,
            samples_s: 256,
            samples_t: 65,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KSearchResult {
    pub barrier: LogBarrier,
    pub report: SignReport,
    /// `(K, max Q)` for every tried steepness.
    pub history: Vec<(f64, f64)>,
}

/// Doubles `K` from `1/ε` until the log profile is a strict supersolution on its collar.
pub fn search_log_barrier(
    collar: &FermiCollar,
    params: &AmbientParams,
    h: f64,
    cfg: &KSearch,
) -> Result<KSearchResult> {
    let mut history = Vec::new();
    for i in 0..=cfg.max_doublings {
        let k = 2f64.powi(i as i32) / collar.width();
        let barrier = LogBarrier::new(cfg.m, k)?;
        let report = check_sign_log_collar(collar, &barrier, params, h, cfg.samples_s, cfg.samples_t)?;
        history.push((k, report.max_q));
        if report.max_q < -cfg.margin {
            return Ok(KSearchResult {
                barrier,
                report,
                history,
            });
        }
    }
    let best = history.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    Err(Error::Numerical(format!(
        "no K in the doubling schedule gives max Q < -{}; best max Q = {best:e}",
        cfg.margin
    )))
}

/// Area centroid of the region bounded by `curve`, a default cone vertex position.
pub fn domain_centroid(curve: &BoundaryCurve) -> [f64; 2] {
    let poly = curve.polygon(2048);
    let n = poly.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i].1, poly[(i + 1) % n].1);
        let w = p[0] * q[1] - q[0] * p[1];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Settings for the cone height search.
#[derive(Debug, Clone, Serialize)]
pub struct ConeSearch {
    /// Required gap between the cone's mean curvature and `H`.
    pub min_margin: f64,
    pub max_doublings: u32,
    pub bisections: u32,
    pub samples_s: usize,
    pub samples_t: usize,
}

impl Default for ConeSearch {
    fn default() -> Self {
        ConeSearch {
            min_margin: 1e-2,
            max_doublings: 60,
            bisections: 40,
            samples_s: 256,
            samples_t: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeHeights {
    pub vertex_xy: [f64; 2],
    /// Upper barrier vertex height (`> 0`).
    pub z1: f64,
    /// Lower barrier vertex height (`< 0`).
    pub z2: f64,
    /// `min (H_cone − H)` over the upper truncated cone.
    pub margin_upper: f64,
    /// `min (H − H_cone)` over the lower truncated cone.
    pub margin_lower: f64,
}

/// The cone through the boundary graph, moved by horizontal translations so
/// its vertex sits on the `z`-axis and cut by `z = 0`.
struct ShiftedCone<'a> {
    curve: &'a BoundaryCurve,
    data: &'a BoundaryData,
    tau: f64,
    v: Vector2<f64>,
}

impl ShiftedCone<'_> {
    /// Height of the translated boundary graph over base arclength `s`, with two derivatives.
    fn lifted_height(&self, s: f64, j: &CurveJet) -> [f64; 3] {
        let [f, f1, f2] = self.data.jet(s, self.curve.length());
        // F₂(−y₀) ∘ F₁(−x₀) adds −τx₀y + τy₀(x − x₀) to the height.
        let (x0, y0, tau) = (self.v[0], self.v[1], self.tau);
        [
            f - tau * x0 * j.pos[1] + tau * y0 * (j.pos[0] - x0),
            f1 - tau * x0 * j.d1[1] + tau * y0 * j.d1[0],
            f2 - tau * x0 * j.d2[1] + tau * y0 * j.d2[0],
        ]
    }

    /// Arclength jet of the cut curve `Γ̂(s) = λ(s)(γ(s) − v)` with `λ = c/(c − b)`,
    /// and the cone parameter `1/λ` at which the cone meets the boundary graph.
    fn base_jet(&self, s: f64, c: f64) -> (CurveJet, f64) {
        let j = self.curve.jet(s);
        let [b, b1, b2] = self.lifted_height(s, &j);
        let q = c - b;
        let lam = c / q;
        let lam1 = c * b1 / (q * q);
        let lam2 = c * b2 / (q * q) + 2.0 * c * b1 * b1 / (q * q * q);
        let p = j.pos - self.v;
        let g = p * lam;
        let g1 = p * lam1 + j.d1 * lam;
        let g2 = p * lam2 + j.d1 * (2.0 * lam1) + j.d2 * lam;
        let speed = g1.norm();
        let tan = g1 / speed;
        let k = (g1[0] * g2[1] - g1[1] * g2[0]) / speed.powi(3);
        let jet = CurveJet {
            pos: g,
            d1: tan,
            d2: Vector2::new(-tan[1], tan[0]) * k,
            d3: Vector2::zeros(),
        };
        (jet, 1.0 / lam)
    }

    /// `min sign·(H_cone − H)` over the truncated cone with shifted vertex height `c`.
    fn margin(&self, c: f64, h: f64, sign: f64, cfg: &ConeSearch) -> f64 {
        let mut worst = f64::INFINITY;
        for s in self.curve.sample_params(cfg.samples_s) {
            let (jet, t_end) = self.base_jet(s, c);
            for i in 1..=cfg.samples_t {
                let t = t_end * i as f64 / cfg.samples_t as f64;
                let hc = cone_mean_curvature_jet(&jet, c, self.tau, s, t).unwrap_or(f64::NAN);
                let m = sign * (hc - h);
                if !(m >= worst) {
                    worst = m;
                }
            }
        }
        worst
    }
}

/// Vertex heights of an upper cone barrier (mean curvature above `H`) and a
/// lower one (mean curvature below `H`) over the point `vertex_xy`.
///
/// Doubling finds a working height, then bisection pulls it toward the boundary graph.
pub fn select_cone_heights(
    curve: &BoundaryCurve,
    params: &AmbientParams,
    h: f64,
    data: &BoundaryData,
    vertex_xy: [f64; 2],
    cfg: &ConeSearch,
) -> Result<ConeHeights> {
    let (kmin, _) = curve.convex_curvature_range()?;
    if !(h >= 0.0 && 2.0 * h < kmin) {
        return Err(Error::validation(format!(
            "cone barriers need 0 <= 2H < kmin, got H = {h}, kmin = {kmin}"
        )));
    }
    data.validate()?;
    RayCaster::new(curve, Vector2::new(vertex_xy[0], vertex_xy[1]))?;
    let cone = ShiftedCone {
        curve,
        data,
        tau: params.tau,
        v: Vector2::new(vertex_xy[0], vertex_xy[1]),
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in curve.sample_params(cfg.samples_s.max(512)) {
        let [b, _, _] = cone.lifted_height(s, &curve.jet(s));
        lo = lo.min(b);
        hi = hi.max(b);
    }
    let scale = 1.0 + hi.abs().max(lo.abs());

    // Shifted vertex height at distance d beyond the graph, on the requested side.
    let upper = |d: f64| hi.max(0.0) + d;
    let lower = |d: f64| lo.min(0.0) - d;
    let search = |place: &dyn Fn(f64) -> f64, sign: f64| -> Result<(f64, f64)> {
        let mut d = 1e-3 * scale;
        let mut best = f64::NEG_INFINITY;
        let mut prev = 0.0;
        for _ in 0..=cfg.max_doublings {
            let m = cone.margin(place(d), h, sign, cfg);
            best = best.max(m);
            if m >= cfg.min_margin {
                let (mut a, mut b, mut mb) = (prev, d, m);
                for _ in 0..cfg.bisections {
                    let mid = 0.5 * (a + b);
                    if mid <= 0.0 {
                        break;
                    }
                    let mm = cone.margin(place(mid), h, sign, cfg);
                    if mm >= cfg.min_margin {
                        b = mid;
                        mb = mm;
                    } else {
                        a = mid;
                    }
                }
                return Ok((place(b), mb));
            }
            prev = d;
            d *= 2.0;
        }
        Err(Error::Numerical(format!(
            "cone height search exhausted; best margin {best:e} < {}",
            cfg.min_margin
        )))
    };
    let (c1, m1) = search(&upper, 1.0)?;
    let (c2, m2) = search(&lower, -1.0)?;
    let unshift = params.tau * vertex_xy[0] * vertex_xy[1];
    Ok(ConeHeights {
        vertex_xy,
        z1: c1 + unshift,
        z2: c2 + unshift,
        margin_upper: m1,
        margin_lower: m2,
    })
}
