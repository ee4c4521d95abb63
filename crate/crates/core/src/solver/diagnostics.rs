use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{continuity_solve, newton_solve, SolveResult, SolveSpec};
use crate::barriers::{cone_height_field, domain_centroid, select_cone_heights, ConeHeights, ConeSearch};
use crate::domain::{ScalarField, UX, UY};
use crate::error::{Error, Result};
use crate::operators::graph_aux;

#[derive(Debug, Clone, Serialize)]
pub struct MaximumPrincipleReport {
    pub min_u: f64,
    pub max_u: f64,
    pub min_trace: f64,
    /// `h²`
    pub tolerance: f64,
    /// `min u ≥ min φ − h²`
    pub plane_ok: bool,
    pub argmin: [f64; 2],
    pub cones: Option<ConeHeights>,
    pub cone_error: Option<String>,
    /// `min (upper cone − u)` over the nodes.
    pub upper_gap: f64,
    /// `min (u − lower cone)` over the nodes.
    pub lower_gap: f64,
    pub sandwich_ok: bool,
    /// `max(|z₁|, |z₂|, max |φ|)`
    pub height_bound: f64,
    pub height_ok: bool,
    pub passed: bool,
}

fn require_converged(result: &SolveResult) -> Result<()> {
    if !result.converged {
        return Err(Error::Usage("diagnostics need a converged solve".into()));
    }
    Ok(())
}

/// Plane comparison `u ≥ min φ` and the cone sandwich, both within `h²`.
/// Cone heights are searched over the domain centroid when not supplied.
pub fn verify_maximum_principle(
    result: &SolveResult,
    spec: &SolveSpec,
    cones: Option<ConeHeights>,
) -> Result<MaximumPrincipleReport> {
    require_converged(result)?;
    let u = &result.u;
    let tol = spec.spacing().powi(2);
    let (dmin, dmax) = spec.data.range(&spec.curve);
    let (mut min_u, mut k_min) = (f64::INFINITY, 0);
    for (k, v) in u.values.iter().enumerate() {
        if *v < min_u {
            min_u = *v;
            k_min = k;
        }
    }
    let node = &u.grid.nodes()[k_min];

    let (cones, cone_error) = match cones {
        Some(c) => (Some(c), None),
        None => match select_cone_heights(
            &spec.curve,
            &spec.params,
            spec.mean_curvature,
            &spec.data,
            domain_centroid(&spec.curve),
            &ConeSearch::default(),
        ) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let (mut upper_gap, mut lower_gap) = (f64::NAN, f64::NAN);
    let mut height_bound = dmax.abs().max(dmin.abs());
    if let Some(c) = &cones {
        let [x0, y0] = c.vertex_xy;
        let up = cone_height_field([x0, y0, c.z1], &spec.data, &u.grid)?;
        let lo = cone_height_field([x0, y0, c.z2], &spec.data, &u.grid)?;
        upper_gap = up
            .field
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min);
        lower_gap = u
            .values
            .iter()
            .zip(&lo.field.values)
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min);
        height_bound = height_bound.max(c.z1.abs()).max(c.z2.abs());
    }
    let plane_ok = min_u >= dmin - tol;
    let sandwich_ok = upper_gap >= -tol && lower_gap >= -tol;
    let height_ok = u.sup_norm() <= height_bound;
    Ok(MaximumPrincipleReport {
        min_u,
        max_u: u.max(),
        min_trace: dmin,
        tolerance: tol,
        plane_ok,
        argmin: [node.x, node.y],
        cones,
        cone_error,
        upper_gap,
        lower_gap,
        sandwich_ok,
        height_bound,
        height_ok,
        passed: plane_ok && sandwich_ok && height_ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub a: f64,
    /// `ω` per node; collapsed nodes carry NaN.
    #[serde(skip)]
    pub omega: Vec<f64>,
    pub max_value: f64,
    pub max_location: [f64; 2],
    pub max_node: usize,
    /// The maximum sits at a node with an arm reaching the boundary.
    pub boundary_attained: bool,
}

/// `ω = √(α² + β²) e^{A u}` from the discrete gradient.
pub fn gradient_diagnostic(result: &SolveResult, spec: &SolveSpec, a: f64) -> Result<GradientReport> {
    require_converged(result)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::validation(format!("gradient diagnostic needs A > 0, got {a}")));
    }
    let u: &ScalarField = &result.u;
    let nodes = u.grid.nodes();
    let omega: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            if n.collapse_arm().is_some() {
                return f64::NAN;
            }
            let d = u.derivatives(k);
            let g = graph_aux(&spec.params, n.x, n.y, d[UX], d[UY]);
            g.alpha.hypot(g.beta) * (a * u.values[k]).exp()
        })
        .collect();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (k, w) in omega.iter().enumerate() {
        if *w > best {
            best = *w;
            arg = k;
        }
    }
    Ok(GradientReport {
        a,
        max_value: best,
        max_location: [nodes[arg].x, nodes[arg].y],
        max_node: arg,
        boundary_attained: nodes[arg].is_irregular(),
        omega,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub agreement: f64,
    /// `10 ×` the Newton tolerance.
    pub threshold: f64,
    pub reference_converged: bool,
    /// The reference came from the continuity path because Newton from zero failed.
    pub reference_from_continuation: bool,
    pub perturbed_converged: bool,
    pub bump_center: [f64; 2],
    pub bump_radius: f64,
    pub bump_amplitude: f64,
    pub clipped_nodes: usize,
    pub inconclusive: bool,
    pub passed: bool,
}

/// Solves from the zero field and from the zero field plus a seeded random
/// bump, both clipped into the cone sandwich, and compares the two solutions.
///
/// The clip puts the start's boundary layer on the data; without it a zero
/// start under nonzero data leans on the homotopy fallback of [`newton_solve`].
pub fn uniqueness_check(spec: &SolveSpec, scale: f64, seed: u64) -> Result<UniquenessReport> {
    let grid = &spec.grid;
    let nodes = grid.nodes();
    let bounds = match select_cone_heights(
        &spec.curve,
        &spec.params,
        spec.mean_curvature,
        &spec.data,
        domain_centroid(&spec.curve),
        &ConeSearch::default(),
    ) {
        Ok(c) => {
            let [x0, y0] = c.vertex_xy;
            let up = cone_height_field([x0, y0, c.z1], &spec.data, grid)?;
            let down = cone_height_field([x0, y0, c.z2], &spec.data, grid)?;
            Some((down.field.values, up.field.values))
        }
        Err(_) => None,
    };
    let start = |values: Vec<f64>| -> (ScalarField, usize) {
        let mut clipped = 0;
        let mut values = values;
        if let Some((down, up)) = &bounds {
            for (k, v) in values.iter_mut().enumerate() {
                let w = v.clamp(down[k], up[k]);
                if w != *v {
                    clipped += 1;
                    *v = w;
                }
            }
        }
        let f = ScalarField {
            grid: grid.clone(),
            values,
            trace: grid.trace_of(&spec.data, 1.0),
            label: "start".into(),
        };
        (f, clipped)
    };

    let (zero, _) = start(vec![0.0; nodes.len()]);
    let mut reference = newton_solve(spec, &zero)?;
    let mut from_continuation = false;
    if !reference.converged {
        reference = continuity_solve(spec)?;
        from_continuation = true;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior: Vec<usize> = (0..nodes.len()).filter(|&k| !nodes[k].is_irregular()).collect();
    let pool = if interior.is_empty() {
        (0..nodes.len()).collect()
    } else {
        interior
    };
    let c = &nodes[pool[rng.random_range(0..pool.len())]];
    let (lo, hi) = spec.curve.bounding_box();
    let half = 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
    let radius = rng.random_range(0.25..0.5) * half;
    let amplitude = if rng.random_bool(0.5) { scale } else { -scale };
    let bump = nodes
        .iter()
        .map(|n| {
            let r2 = ((n.x - c.x).powi(2) + (n.y - c.y).powi(2)) / (radius * radius);
            if r2 < 1.0 {
                amplitude * (1.0 - r2).powi(3)
            } else {
                0.0
            }
        })
        .collect();
    let (initial, clipped) = start(bump);
    let perturbed = newton_solve(spec, &initial)?;

    let threshold = 10.0 * spec.tolerance;
    let inconclusive = !(reference.converged && perturbed.converged);
    let agreement = reference.u.sup_distance(&perturbed.u);
    Ok(UniquenessReport {
        agreement,
        threshold,
        reference_converged: reference.converged,
        reference_from_continuation: from_continuation,
        perturbed_converged: perturbed.converged,
        bump_center: [c.x, c.y],
        bump_radius: radius,
        bump_amplitude: amplitude,
        clipped_nodes: clipped,
        inconclusive,
        passed: !inconclusive && agreement <= threshold,
    })
}
