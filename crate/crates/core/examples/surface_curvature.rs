//! Mean curvature of vertical cylinders and cones: closed forms, the
//! immersion oracle, and the large-vertex limit.

use std::sync::Arc;

use nilcmc::domain::BoundaryCurve;
use nilcmc::geometry::{mean_curvature_immersion, AmbientParams, Point3};
use nilcmc::operators::{
    cone_large_vertex_limit, cone_mean_curvature, cone_mean_curvature_partial_power, cylinder_mean_curvature,
    ConeChart, ConeSpec, CylinderChart,
};

fn main() -> nilcmc::Result<()> {
    let ellipse = Arc::new(BoundaryCurve::ellipse([0.0, 0.0], 2.0, 1.0)?);
    println!("cylinder over the (2,1) ellipse, k/2 against the oracle");
    for tau in [0.0, 0.5, 2.0] {
        let params = AmbientParams::new(tau)?;
        for s in [0.0, 1.0, 2.5] {
            let closed = cylinder_mean_curvature(&ellipse, s);
            let oracle = mean_curvature_immersion(&CylinderChart { base: &ellipse }, s, 0.3, &params)?;
            println!("  tau={tau:<4} s={s:<4} closed={closed:.12} oracle={oracle:.12}");
        }
    }

    let circle = Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0)?);
    let params = AmbientParams::new(1.0)?;
    let cone = ConeSpec::new(Point3::new(0.0, 0.0, 1.0), circle.clone())?;
    let h = cone_mean_curvature(&cone, &params, 0.0, 1.0)?;
    let oracle = mean_curvature_immersion(&ConeChart { cone: &cone }, 0.0, 1.0, &params)?;
    let printed = cone_mean_curvature_partial_power(&circle.jet(0.0), 1.0, 1.0, 0.0, 1.0)?;
    println!("\ncone c=1, tau=1, unit circle, t=1");
    println!("  full 3/2 power  {h:.12}");
    println!("  oracle          {oracle:.12}");
    println!("  partial power   {printed:.12}");

    println!("\nlarge vertex: H(s, t0; c) against k/(2 t0)");
    for c in [1e1, 1e3, 1e6] {
        let cone = ConeSpec::new(Point3::new(0.0, 0.0, c), ellipse.clone())?;
        for t0 in [0.5, 1.0] {
            let h = cone_mean_curvature(&cone, &params, 0.0, t0)?;
            println!(
                "  c={c:<9.0e} t0={t0}  H={h:.9}  limit={:.9}",
                cone_large_vertex_limit(&ellipse, 0.0, t0)
            );
        }
    }

    println!("\nnear the vertex (c=1): H grows like 1/t");
    for t in [1e-1, 1e-2, 1e-3] {
        println!(
            "  t={t:<6} H={:.3}",
            cone_mean_curvature(
                &ConeSpec::new(Point3::new(0.0, 0.0, 1.0), circle.clone())?,
                &params,
                0.0,
                t
            )?
        );
    }
    Ok(())
}
