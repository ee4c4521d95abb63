//! The log-profile supersolution w(t) = L ln(1 + K² t) on a collar of the
//! unit circle at the borderline H = k/2.

use std::sync::Arc;

use nilcmc::barriers::{search_log_barrier, KSearch};
use nilcmc::domain::{BoundaryCurve, FermiCollar};
use nilcmc::geometry::AmbientParams;

fn main() -> nilcmc::Result<()> {
    let circle = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0)?);
    let collar = FermiCollar::new(circle, 0.5)?;
    for (tau, h) in [(0.2, 0.5), (0.2, 0.45), (0.5, 0.5)] {
        let params = AmbientParams::new(tau)?;
        match search_log_barrier(&collar, &params, h, &KSearch::default()) {
            Ok(r) => {
                let b = r.barrier;
                println!(
                    "tau={tau} H={h}: K = {} L = {:.6} max Q = {:.4e} over {} samples",
                    b.k, b.l, r.report.max_q, r.report.samples
                );
                println!(
                    "  w(0) = {:e}  w(1/K) - M = {:e}  w_tt + w_t²/L at 1/(2K) = {:e}",
                    b.value(0.0),
                    b.value(b.width()) - b.m,
                    b.identity_residual(0.5 * b.width())
                );
            }
            Err(e) => println!("tau={tau} H={h}: {e}"),
        }
    }
    Ok(())
}
