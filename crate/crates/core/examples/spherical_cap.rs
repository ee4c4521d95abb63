//! Euclidean check: with τ = 0 and zero data on the unit disk the solution is
//! a spherical cap of radius 1/H. Prints the error and the observed order.

use std::sync::Arc;
use std::time::Instant;

use nilcmc::domain::{BoundaryCurve, BoundaryData};
use nilcmc::geometry::AmbientParams;
use nilcmc::solver::{continuity_solve, SolveSpec};

fn main() -> nilcmc::Result<()> {
    let h_mc = 0.3;
    let r = 1.0 / h_mc;
    let cap = |x: f64, y: f64| (r * r - x * x - y * y).sqrt() - (r * r - 1.0).sqrt();
    let curve = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0)?);

    let mut prev: Option<(f64, f64)> = None;
    for n in [8, 16, 32, 64] {
        let h = 1.0 / n as f64;
        let clock = Instant::now();
        let spec = SolveSpec::new(AmbientParams::euclidean(), h_mc, curve.clone(), BoundaryData::zero(), h)?;
        let res = continuity_solve(&spec)?;
        let err = spec
            .grid
            .nodes()
            .iter()
            .zip(&res.u.values)
            .map(|(p, v)| (v - cap(p.x, p.y)).abs())
            .fold(0.0, f64::max);
        let order = prev.map(|(e, hp)| (e / err).ln() / (hp / h).ln());
        println!(
            "h = 1/{n:<3} nodes {:<6} residual {:.1e}  max|u - cap| {err:.3e}  (= {:.4} h²)  order {}  {:.2}s",
            spec.grid.nodes().len(),
            res.residual,
            err / (h * h),
            order.map_or("-".into(), |o| format!("{o:.3}")),
            clock.elapsed().as_secs_f64()
        );
        prev = Some((err, h));
    }
    println!("cap height at the centre: {:.5}", cap(0.0, 0.0));
    Ok(())
}
