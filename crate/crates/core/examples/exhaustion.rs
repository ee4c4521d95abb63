//! Borderline case 2H = k on the unit circle: solutions on the shrunk domains
//! Ω(n) increase with n and flatten out towards the boundary.

use std::sync::Arc;

use nilcmc::domain::{BoundaryCurve, BoundaryData};
use nilcmc::geometry::AmbientParams;
use nilcmc::solver::{exhaustion_solve, SolveSpec};

fn main() -> nilcmc::Result<()> {
    let curve = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0)?);
    let spec = SolveSpec::new(
        AmbientParams::new(0.4)?,
        0.5,
        curve.clone(),
        BoundaryData::zero(),
        1.0 / 32.0,
    )?;
    let ex = exhaustion_solve(&spec, &[4, 8, 16, 32])?;
    for l in &ex.levels {
        println!(
            "n = {:<3} nodes {:<5} max u {:.6}  sup|u| on ring [1/n, 2/n] {:.6}  barrier {:?}",
            l.n,
            l.result.u.values.len(),
            l.result.u.max(),
            l.ring_sup,
            l.ring_barrier
        );
    }
    println!(
        "monotone {} (worst u_n - u_n' = {:.3e}, tol {:.1e}); ring decay decreasing {}",
        ex.monotone, ex.worst_violation, ex.tolerance, ex.decay_decreasing
    );
    println!("difference ratio {:.4}, tail bound {:.3e}", ex.ratio, ex.tail_bound);

    let gate = SolveSpec::new(AmbientParams::new(1.0)?, 0.5, curve, BoundaryData::zero(), 1.0 / 16.0)?;
    println!("tau = 1: {}", exhaustion_solve(&gate, &[4, 8]).unwrap_err());
    Ok(())
}
