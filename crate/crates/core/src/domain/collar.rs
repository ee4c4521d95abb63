use std::sync::Arc;

use nalgebra::Vector2;

use super::curve::BoundaryCurve;
use crate::error::{Error, Result};

/// Tubular coordinates `P(s, t) = γ(s) + t ν(s)` on `[0, ℓ) × [0, ε]`.
#[derive(Debug, Clone)]
pub struct FermiCollar {
    base: Arc<BoundaryCurve>,
    width: f64,
    seeds: Vec<(f64, Vector2<f64>)>,
    seed_spacing: f64,
}

const SEEDS: usize = 1024;

impl FermiCollar {
    /// Requires a convex base and `0 < width < 1/kmax`.
    pub fn new(base: Arc<BoundaryCurve>, width: f64) -> Result<Self> {
        let (_, kmax) = base.convex_curvature_range()?;
        if !(width > 0.0 && width * kmax < 1.0) {
            return Err(Error::validation(format!(
                "collar width {width} must satisfy 0 < width < 1/kmax = {}",
                1.0 / kmax
            )));
        }
        let seeds = base
            .sample_params(SEEDS)
            .into_iter()
            .map(|s| (s, base.point(s)))
            .collect();
        let seed_spacing = base.length() / SEEDS as f64;
        Ok(FermiCollar {
            base,
            width,
            seeds,
            seed_spacing,
        })
    }

    pub fn base(&self) -> &BoundaryCurve {
        &self.base
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn map(&self, s: f64, t: f64) -> Vector2<f64> {
        let j = self.base.jet(s);
        j.pos + j.normal() * t
    }

    /// Area factor `φ(s, t) = 1 − t k(s)` of the collar map.
    pub fn jacobian_factor(&self, s: f64, t: f64) -> f64 {
        1.0 - t * self.base.curvature(s)
    }

    /// `(s, t)` with `P(s, t) = p`, or `None` when `p` is outside the collar.
    pub fn fermi_coordinates(&self, p: Vector2<f64>) -> Result<Option<(f64, f64)>> {
        let (s0, d0) = self
            .seeds
            .iter()
            .map(|(s, q)| (*s, (p - q).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("seeds are nonempty");
        if d0 - self.seed_spacing > self.width {
            return Ok(None);
        }
        let (s, t) = self.foot_point(p, s0)?;
        if t < -1e-12 || t > self.width {
            return Ok(None);
        }
        Ok(Some((s, t.max(0.0))))
    }

    fn foot_point(&self, p: Vector2<f64>, seed: f64) -> Result<(f64, f64)> {
        let ell = self.base.length();
        let mut s = seed;
        for _ in 0..60 {
            let j = self.base.jet(s);
            let r = p - j.pos;
            let g = r.dot(&j.d1);
            let dg = -1.0 + r.dot(&j.d2);
            if g == 0.0 {
                return Ok((s.rem_euclid(ell), r.dot(&j.normal())));
            }
            if dg >= 0.0 {
                return Err(Error::Numerical(format!(
                    "foot-point iteration left the collar at s = {s} for point ({}, {})",
                    p[0], p[1]
                )));
            }
            let step = g / dg;
            s -= step;
            if step.abs() < 1e-14 * ell.max(1.0) {
                let j = self.base.jet(s);
                return Ok((s.rem_euclid(ell), (p - j.pos).dot(&j.normal())));
            }
        }
        Err(Error::Numerical(format!(
            "foot-point iteration did not converge for point ({}, {})",
            p[0], p[1]
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> Arc<BoundaryCurve> {
        Arc::new(BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap())
    }

    #[test]
    fn point_on_normal_line() {
        let c = FermiCollar::new(unit_circle(), 0.6).unwrap();
        let (s, t) = c.fermi_coordinates(Vector2::new(0.5, 0.0)).unwrap().unwrap();
        assert!(s.min(std::f64::consts::TAU - s) < 1e-12, "s = {s}");
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_point_has_zero_depth() {
        let c = FermiCollar::new(unit_circle(), 0.3).unwrap();
        let (_, t) = c.fermi_coordinates(Vector2::new(0.6, 0.8)).unwrap().unwrap();
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn center_is_outside_collar() {
        let c = FermiCollar::new(unit_circle(), 0.3).unwrap();
        assert!(c.fermi_coordinates(Vector2::new(0.0, 0.0)).unwrap().is_none());
        assert!(c.fermi_coordinates(Vector2::new(1.5, 0.0)).unwrap().is_none());
    }

    #[test]
    fn width_must_respect_focal_distance() {
        assert!(FermiCollar::new(unit_circle(), 1.0).is_err());
        assert!(FermiCollar::new(unit_circle(), 0.0).is_err());
    }

    #[test]
    fn round_trip_on_ellipse() {
        let e = Arc::new(BoundaryCurve::ellipse([0.0, 0.0], 2.0, 1.0).unwrap());
        let c = FermiCollar::new(e, 0.4).unwrap();
        for k in 0..40 {
            let s = c.base().length() * k as f64 / 40.0;
            let t = 0.39 * ((k * 7) % 11) as f64 / 10.0;
            let p = c.map(s, t);
            let (s2, t2) = c.fermi_coordinates(p).unwrap().unwrap();
            assert!((c.map(s2, t2) - p).norm() < 1e-10);
            assert!((t2 - t).abs() < 1e-10);
            assert!(c.jacobian_factor(s2, t2) > 0.0);
        }
    }
}
