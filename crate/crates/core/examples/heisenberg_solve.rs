//! τ = 0.2, H = 0.3 on the unit disk with data 0.1 sin(2s): continuity solve,
//! then the comparison diagnostics (plane, cone sandwich, gradient, uniqueness).

use std::f64::consts::TAU;
use std::sync::Arc;

use nilcmc::domain::{BoundaryCurve, BoundaryData};
use nilcmc::geometry::AmbientParams;
use nilcmc::solver::{continuity_solve, gradient_diagnostic, uniqueness_check, verify_maximum_principle, SolveSpec};

fn main() -> nilcmc::Result<()> {
    let curve = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0)?);
    // mode 2 over arclength 2π is sin(2s)
    let data = BoundaryData::Harmonic {
        offset: 0.0,
        amplitude: 0.1,
        mode: 2,
        phase: 0.0,
    };
    assert!((curve.length() - TAU).abs() < 1e-12);
    let spec = SolveSpec::new(AmbientParams::new(0.2)?, 0.3, curve, data, 1.0 / 32.0)?;

    let res = continuity_solve(&spec)?;
    println!("converged {} residual {:.2e}", res.converged, res.residual);
    for s in &res.steps {
        println!(
            "  t = {:.3}  newton its {}  residual {:.1e}",
            s.t, s.iterations, s.residual
        );
    }

    let mp = verify_maximum_principle(&res, &spec, None)?;
    println!(
        "min u = {:.6} against min φ = {:.6} (tol {:.1e})",
        mp.min_u, mp.min_trace, mp.tolerance
    );
    if let Some(c) = &mp.cones {
        println!(
            "cones z1 = {:.6}, z2 = {:.6}; gaps upper {:.2e} lower {:.2e}",
            c.z1, c.z2, mp.upper_gap, mp.lower_gap
        );
    }
    println!(
        "height bound C0 = {:.6}, sup|u| = {:.6}",
        mp.height_bound,
        res.u.sup_norm()
    );

    let g = gradient_diagnostic(&res, &spec, 1.0)?;
    println!(
        "max ω = {:.6} at ({:.4}, {:.4}), next to the boundary: {}",
        g.max_value, g.max_location[0], g.max_location[1], g.boundary_attained
    );

    let u = uniqueness_check(&spec, 0.1, 7)?;
    println!(
        "uniqueness: agreement {:.2e} (threshold {:.0e}) passed {}",
        u.agreement, u.threshold, u.passed
    );
    Ok(())
}
