//! Frame, connection, curvature and isometries of Nil(τ) at a sample point.

use nalgebra::Vector3;
use nilcmc::geometry::{apply_isometry, AmbientParams, IsometryKind, IsometrySpec, Point3, TangentVector};

fn main() -> nilcmc::Result<()> {
    let params = AmbientParams::new(0.5)?;
    let p = Point3::new(1.0, -0.5, 2.0);

    println!("metric at {p:?}:\n{}", params.metric_matrix(&p));
    for (i, e) in params.frame_at(&p).iter().enumerate() {
        println!(
            "E{} = {:?}  |E| = {:.15}",
            i + 1,
            e.components.as_slice(),
            params.norm(e)
        );
    }

    println!("connection table (frame coefficients of ∇_Ei Ej):");
    for i in 1..=3 {
        for j in 1..=3 {
            let v = params.connection_frame(i, j)?;
            print!("  ({i},{j}) = [{:+.2} {:+.2} {:+.2}]", v[0], v[1], v[2]);
        }
        println!();
    }

    let e = params.frame_at(&p);
    println!(
        "K(E1,E2) = {:+.6}  K(E1,E3) = {:+.6}  K(E2,E3) = {:+.6}",
        params.sectional_curvature(&e[0], &e[1])?,
        params.sectional_curvature(&e[0], &e[2])?,
        params.sectional_curvature(&e[1], &e[2])?
    );
    let sc = params.scalar_curvature();
    println!(
        "Ricci trace = {:+.6}, sectional sum = {:+.6}, quoted -τ² = {:+.6}",
        sc.ricci_trace, sc.sectional_sum, sc.reference
    );

    // An isometry moves the point but preserves lengths of pushed-forward vectors.
    let iso = IsometrySpec::new(IsometryKind::TranslateF1, 0.75);
    let q = apply_isometry(&params, &iso, &p);
    let v = Vector3::new(0.3, -0.2, 0.9);
    let h = 1e-6;
    let dv = (apply_isometry(&params, &iso, &p.offset(&(v * h))).coords()
        - apply_isometry(&params, &iso, &p.offset(&(v * -h))).coords())
        / (2.0 * h);
    let before = params.norm(&TangentVector::from_components(p, v)).powi(2);
    let after = params.norm(&TangentVector::from_components(q, dv)).powi(2);
    println!("F1 flow by 0.75: {p:?} -> {q:?}, |v|² {before:.12} -> {after:.12}");
    Ok(())
}
