//! Lattice nodes inside an ellipse and the Shortley–Weller stencils at
//! nodes next to the boundary.

use std::sync::Arc;

use nilcmc::domain::{build_grid, BoundaryCurve, ScalarField, ARM_DIRECTIONS};

fn main() -> nilcmc::Result<()> {
    let curve = Arc::new(BoundaryCurve::ellipse([0.0, 0.0], 2.0, 1.0)?);
    for h in [0.25, 0.125, 1.0 / 32.0] {
        let g = build_grid(curve.clone(), h)?;
        let irregular = g.nodes().iter().filter(|n| n.is_irregular()).count();
        let collapsed = g.nodes().iter().filter(|n| n.collapse_arm().is_some()).count();
        println!(
            "h={h:<8} nodes={:<6} irregular={irregular:<5} collapsed={collapsed:<3} boundary points={:<5} bandwidth={}",
            g.nodes().len(),
            g.boundary_points().len(),
            g.bandwidth()
        );
    }

    // The stencils differentiate quadratics exactly, including across short arms.
    let g = Arc::new(build_grid(curve, 0.125)?);
    let u = ScalarField::from_fn(g.clone(), "quadratic", |x, y| {
        1.0 + x - 2.0 * y + 0.5 * x * x + x * y - y * y
    });
    let k = g
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.collapse_arm().is_none())
        .min_by(|a, b| {
            let fa = a.1.arms.iter().map(|x| x.fraction).fold(1.0, f64::min);
            let fb = b.1.arms.iter().map(|x| x.fraction).fold(1.0, f64::min);
            fa.total_cmp(&fb)
        })
        .map(|(k, _)| k)
        .expect("grid has nodes");
    let n = &g.nodes()[k];
    println!("\nnode ({}, {}) at ({:.4}, {:.4})", n.i, n.j, n.x, n.y);
    for (a, arm) in n.arms.iter().enumerate() {
        println!(
            "  {:?} fraction {:.6} -> {:?}",
            ARM_DIRECTIONS[a], arm.fraction, arm.end
        );
    }
    let d = u.derivatives(k);
    let exact = [1.0 + n.x + n.y, -2.0 + n.x - 2.0 * n.y, 1.0, -2.0, 1.0];
    println!("  [ux uy uxx uyy uxy] discrete {d:.12?}");
    println!("                      exact    {exact:.12?}");
    Ok(())
}
