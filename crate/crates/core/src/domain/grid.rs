//! Lattice discretization of a curved planar domain.
//!
//! Interior nodes are the points of `hℤ²` strictly inside the boundary curve.
//! Every node carries eight arms (the four axis and four diagonal
//! neighbours). An arm that leaves the domain before reaching its neighbour is
//! cut at the boundary and remembers the intersection fraction, which gives
//! Shortley–Weller stencils for first and second derivatives along each line.
//! The mixed derivative comes from the two diagonal second derivatives,
//! `u_xy = (u_ηη − u_ξξ) / 2`.

use std::collections::HashMap;
use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

use nalgebra::Vector2;
use serde::Serialize;

use super::curve::{cross, BoundaryCurve};
use super::field::BoundaryData;
use crate::error::{Error, Result};
use crate::numeric::bracketed_root;

/// Lattice steps of the arms: E, W, N, S, NE, SW, SE, NW.
pub const ARM_DIRECTIONS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];

/// Nodes closer than this fraction of an arm to the boundary are not given the
/// PDE row; their value is interpolated along the short arm instead.
pub const COLLAPSE_FRACTION: f64 = 1e-3;

/// Indices into derivative arrays.
pub const UX: usize = 0;
pub const UY: usize = 1;
pub const UXX: usize = 2;
pub const UYY: usize = 3;
pub const UXY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmEnd {
    Node(usize),
    Boundary(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Arm {
    /// Arm length relative to the full lattice step in its direction.
    pub fraction: f64,
    pub end: ArmEnd,
}

/// Linear weights producing `[ux, uy, uxx, uyy, uxy]` from the centre value and arm-end values.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub center: [f64; 5],
    pub arms: [[f64; 5]; 8],
}

#[derive(Debug, Clone)]
pub struct GridNode {
    pub i: i64,
    pub j: i64,
    pub x: f64,
    pub y: f64,
    pub arms: [Arm; 8],
    pub stencil: Stencil,
}

impl GridNode {
    /// True when some arm ends on the boundary.
    pub fn is_irregular(&self) -> bool {
        self.arms.iter().any(|a| matches!(a.end, ArmEnd::Boundary(_)))
    }

    /// The shortest boundary arm, if it is below [`COLLAPSE_FRACTION`].
    pub fn collapse_arm(&self) -> Option<usize> {
        let (k, a) = self
            .arms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.fraction.total_cmp(&b.1.fraction))
            .expect("eight arms");
        (a.fraction < COLLAPSE_FRACTION).then_some(k)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    /// Arclength parameter on the boundary curve.
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct Grid {
    h: f64,
    curve: Arc<BoundaryCurve>,
    nodes: Vec<GridNode>,
    boundary: Vec<BoundaryPoint>,
    index: HashMap<(i64, i64), usize>,
    bandwidth: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn boundary_points(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    pub fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    /// Largest index distance between coupled unknowns (row-major ordering).
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn trace_of(&self, data: &BoundaryData, scale: f64) -> Vec<f64> {
        let ell = self.curve.length();
        self.boundary.iter().map(|b| scale * data.eval(b.s, ell)).collect()
    }

    pub fn derivatives(&self, k: usize, values: &[f64], trace: &[f64]) -> [f64; 5] {
        let node = &self.nodes[k];
        let st = &node.stencil;
        let u0 = values[k];
        let mut d = st.center.map(|w| w * u0);
        for (a, arm) in node.arms.iter().enumerate() {
            let v = match arm.end {
                ArmEnd::Node(n) => values[n],
                ArmEnd::Boundary(b) => trace[b],
            };
            for (q, dq) in d.iter_mut().enumerate() {
                *dq += st.arms[a][q] * v;
            }
        }
        d
    }
}

/// Three-point weights for a line with forward arm `a` and backward arm `b`
/// (absolute lengths): `(first derivative, second derivative)`, each as
/// `[forward, backward, centre]`.
fn line_weights(a: f64, b: f64) -> ([f64; 3], [f64; 3]) {
    let s = a + b;
    let d1 = [b / (a * s), -a / (b * s), (a - b) / (a * b)];
    let d2 = [2.0 / (a * s), 2.0 / (b * s), -2.0 / (a * b)];
    (d1, d2)
}

fn stencil_for(arms: &[Arm; 8], h: f64) -> Stencil {
    let mut st = Stencil {
        center: [0.0; 5],
        arms: [[0.0; 5]; 8],
    };
    let len = |k: usize, step: f64| arms[k].fraction * step;

    for (fwd, bwd, d1_slot, d2_slot) in [(0usize, 1usize, UX, UXX), (2, 3, UY, UYY)] {
        let (d1, d2) = line_weights(len(fwd, h), len(bwd, h));
        st.arms[fwd][d1_slot] = d1[0];
        st.arms[bwd][d1_slot] = d1[1];
        st.center[d1_slot] = d1[2];
        st.arms[fwd][d2_slot] = d2[0];
        st.arms[bwd][d2_slot] = d2[1];
        st.center[d2_slot] = d2[2];
    }
    let diag = SQRT_2 * h;
    for (fwd, bwd, sign) in [(4usize, 5usize, 0.5), (6, 7, -0.5)] {
        let (_, d2) = line_weights(len(fwd, diag), len(bwd, diag));
        st.arms[fwd][UXY] = sign * d2[0];
        st.arms[bwd][UXY] = sign * d2[1];
        st.center[UXY] += sign * d2[2];
    }
    st
}

/// Lattice nodes of spacing `h` inside `curve`, with irregular-stencil data.
pub fn build_grid(curve: Arc<BoundaryCurve>, h: f64) -> Result<Grid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation(format!("grid spacing must be positive, got {h}")));
    }
    let (kmin, kmax) = curve.curvature_range();
    let kabs = kmax.abs().max(kmin.abs());
    if h * kabs > 0.5 * (1.0 + 1e-9) {
        return Err(Error::validation(format!(
            "grid spacing {h} too coarse for boundary curvature {kabs} (need h·kmax ≤ 0.5)"
        )));
    }

    let ell = curve.length();
    let m = 4096usize.max((16.0 * ell / h).ceil() as usize);
    let poly = curve.polygon(m);
    let seg = |k: usize| -> (f64, f64, Vector2<f64>, Vector2<f64>) {
        let (t0, p0) = poly[k];
        let (t1, p1) = if k + 1 == m { (TAU, poly[0].1) } else { poly[k + 1] };
        (t0, t1, p0, p1)
    };

    let (lo, hi) = curve.bounding_box();
    let jmin = (lo[1] / h).floor() as i64 - 1;
    let jmax = (hi[1] / h).ceil() as i64 + 1;

    // Segments by lattice row crossing and by cell.
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); (jmax - jmin + 1) as usize];
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..m {
        let (_, _, p0, p1) = seg(k);
        let ylo = p0[1].min(p1[1]);
        let yhi = p0[1].max(p1[1]);
        let r0 = (ylo / h).ceil() as i64;
        let r1 = (yhi / h).floor() as i64;
        for r in r0..=r1 {
            if (jmin..=jmax).contains(&r) {
                rows[(r - jmin) as usize].push(k);
            }
        }
        let (cx0, cx1) = (
            (p0[0].min(p1[0]) / h).floor() as i64,
            (p0[0].max(p1[0]) / h).floor() as i64,
        );
        let (cy0, cy1) = ((ylo / h).floor() as i64, (yhi / h).floor() as i64);
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                cells.entry((cx, cy)).or_default().push(k);
            }
        }
    }

    // Even–odd classification along each lattice row (half-open crossing rule).
    let mut lattice: Vec<(i64, i64)> = Vec::new();
    for j in jmin..=jmax {
        let y = j as f64 * h;
        let mut xs: Vec<f64> = Vec::new();
        for &k in &rows[(j - jmin) as usize] {
            let (t0, t1, p0, p1) = seg(k);
            let (a, b) = (p0[1], p1[1]);
            if (a <= y && y < b) || (b <= y && y < a) {
                let th = bracketed_root(|t| curve.native_point(t)[1] - y, t0, t1, 1e-15, 100);
                xs.push(curve.native_point(th)[0]);
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let (x0, x1) = (pair[0], pair[1]);
            let i0 = (x0 / h).ceil() as i64;
            let i1 = (x1 / h).floor() as i64;
            for i in i0..=i1 {
                let x = i as f64 * h;
                if x > x0 && x < x1 {
                    lattice.push((i, j));
                }
            }
        }
    }
    if lattice.is_empty() {
        return Err(Error::validation(format!(
            "no lattice nodes of spacing {h} inside the domain"
        )));
    }
    let index: HashMap<(i64, i64), usize> = lattice.iter().enumerate().map(|(k, ij)| (*ij, k)).collect();

    let mut boundary = Vec::new();
    let mut nodes = Vec::with_capacity(lattice.len());
    for &(i, j) in &lattice {
        let q = Vector2::new(i as f64 * h, j as f64 * h);
        let mut near: Vec<usize> = Vec::new();
        for cx in (i - 2)..=(i + 1) {
            for cy in (j - 2)..=(j + 1) {
                if let Some(v) = cells.get(&(cx, cy)) {
                    near.extend_from_slice(v);
                }
            }
        }
        near.sort_unstable();
        near.dedup();

        let mut arms = [Arm {
            fraction: 1.0,
            end: ArmEnd::Node(usize::MAX),
        }; 8];
        for (a, &(di, dj)) in ARM_DIRECTIONS.iter().enumerate() {
            let dvec = Vector2::new(di as f64 * h, dj as f64 * h);
            let dd = dvec.norm_squared();
            let mut best: Option<(f64, f64)> = None;
            for &k in &near {
                let (t0, t1, p0, p1) = seg(k);
                let fa = cross(&(p0 - q), &dvec);
                let fb = cross(&(p1 - q), &dvec);
                if fa * fb > 0.0 || (fa == 0.0 && fb == 0.0) {
                    continue;
                }
                let th = bracketed_root(|t| cross(&(curve.native_point(t) - q), &dvec), t0, t1, 1e-15, 100);
                let lambda = (curve.native_point(th) - q).dot(&dvec) / dd;
                // Nodes lying on the curve to roundoff see crossings at λ ≈ 0 of either sign.
                if lambda > -1e-9 && best.is_none_or(|(l, _)| lambda < l) {
                    best = Some((lambda, th));
                }
            }
            let neighbour = index.get(&(i + di, j + dj)).copied();
            let cut = best.filter(|(lambda, _)| *lambda <= 1.0 || neighbour.is_none());
            arms[a] = match (cut, neighbour) {
                (Some((lambda, th)), _) => {
                    let p = curve.native_point(th);
                    boundary.push(BoundaryPoint {
                        x: p[0],
                        y: p[1],
                        s: curve.arclength_of(th),
                    });
                    Arm {
                        fraction: lambda.clamp(1e-15, 1.0),
                        end: ArmEnd::Boundary(boundary.len() - 1),
                    }
                }
                (_, Some(n)) => Arm {
                    fraction: 1.0,
                    end: ArmEnd::Node(n),
                },
                (None, None) => {
                    return Err(Error::Numerical(format!(
                        "lattice node ({i}, {j}) has an outside neighbour but no boundary crossing"
                    )))
                }
            };
        }
        nodes.push(GridNode {
            i,
            j,
            x: q[0],
            y: q[1],
            stencil: stencil_for(&arms, h),
            arms,
        });
    }

    let bandwidth = nodes
        .iter()
        .enumerate()
        .flat_map(|(k, n)| {
            n.arms.iter().filter_map(move |a| match a.end {
                ArmEnd::Node(m) => Some(k.abs_diff(m)),
                ArmEnd::Boundary(_) => None,
            })
        })
        .max()
        .unwrap_or(0);

    Ok(Grid {
        h,
        curve,
        nodes,
        boundary,
        index,
        bandwidth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64) -> Grid {
        build_grid(Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap()), h).unwrap()
    }

    #[test]
    fn unit_disk_half_spacing_has_nine_nodes() {
        assert_eq!(disk(0.5).nodes().len(), 9);
    }

    #[test]
    fn unit_disk_coarse_node_count() {
        // i² + j² < 6.25 on the integer lattice
        let g = disk(0.4);
        assert_eq!(g.nodes().len(), 21);
    }

    #[test]
    fn refinement_roughly_quadruples() {
        let a = disk(1.0 / 16.0).nodes().len() as f64;
        let b = disk(1.0 / 32.0).nodes().len() as f64;
        assert!((b / a - 4.0).abs() < 0.15, "{a} -> {b}");
    }

    #[test]
    fn fractions_and_boundary_points() {
        let g = disk(0.1);
        for n in g.nodes() {
            // lattice points on the circle to roundoff may be kept as collapsed nodes
            assert!(n.x * n.x + n.y * n.y < 1.0 + 1e-12);
            for a in &n.arms {
                assert!(a.fraction > 0.0 && a.fraction <= 1.0);
                if let ArmEnd::Boundary(b) = a.end {
                    let p = g.boundary_points()[b];
                    assert!((p.x.hypot(p.y) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn boundary_points_lie_on_their_arms() {
        let g = disk(0.07);
        for n in g.nodes() {
            for (a, arm) in n.arms.iter().enumerate() {
                if let ArmEnd::Boundary(b) = arm.end {
                    let p = g.boundary_points()[b];
                    let (di, dj) = ARM_DIRECTIONS[a];
                    let ex = n.x + arm.fraction * di as f64 * 0.07;
                    let ey = n.y + arm.fraction * dj as f64 * 0.07;
                    assert!((p.x - ex).abs() < 1e-12 && (p.y - ey).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nested_under_refinement() {
        let coarse = disk(0.125);
        let fine = disk(0.0625);
        for n in coarse.nodes() {
            assert!(fine.node_at(2 * n.i, 2 * n.j).is_some());
        }
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let g = build_grid(Arc::new(BoundaryCurve::ellipse([0.1, -0.05], 1.5, 1.0).unwrap()), 0.09).unwrap();
        let f = |x: f64, y: f64| 0.3 * x * x - 1.1 * x * y + 0.7 * y * y + 0.2 * x - 0.4 * y + 1.0;
        let values: Vec<f64> = g.nodes().iter().map(|n| f(n.x, n.y)).collect();
        let trace: Vec<f64> = g.boundary_points().iter().map(|b| f(b.x, b.y)).collect();
        for (k, n) in g.nodes().iter().enumerate() {
            if n.collapse_arm().is_some() {
                continue;
            }
            let d = g.derivatives(k, &values, &trace);
            let exact = [
                0.6 * n.x - 1.1 * n.y + 0.2,
                -1.1 * n.x + 1.4 * n.y - 0.4,
                0.6,
                1.4,
                -1.1,
            ];
            for q in 0..5 {
                assert!(
                    (d[q] - exact[q]).abs() < 1e-7,
                    "node {k} slot {q}: {} vs {}",
                    d[q],
                    exact[q]
                );
            }
        }
    }

    #[test]
    fn too_coarse_rejected() {
        let c = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap());
        assert!(build_grid(c.clone(), 0.51).is_err());
        assert!(build_grid(c, -0.1).is_err());
    }
}
