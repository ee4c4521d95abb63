use serde::{Deserialize, Serialize};

use super::{AmbientParams, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsometryKind {
    /// Flow of `F₁ = ∂x + τy ∂z`.
    TranslateF1,
    /// Flow of `F₂ = ∂y − τx ∂z`.
    TranslateF2,
    /// Flow of `F₃ = ∂z`.
    TranslateF3,
    /// Flow of `F₄ = −y ∂x + x ∂y`, a rotation about the z-axis.
    RotateF4,
}

/// One-parameter isometry: a translation by `amount` or a rotation by `amount` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometrySpec {
    pub kind: IsometryKind,
    pub amount: f64,
}

impl IsometrySpec {
    pub fn new(kind: IsometryKind, amount: f64) -> Self {
        IsometrySpec { kind, amount }
    }

    /// Rotation angle reduced to `[0, 2π)`; translations are returned unchanged.
    pub fn normalized_amount(&self) -> f64 {
        match self.kind {
            IsometryKind::RotateF4 => self.amount.rem_euclid(std::f64::consts::TAU),
            _ => self.amount,
        }
    }
}

pub fn apply_isometry(params: &AmbientParams, iso: &IsometrySpec, p: &Point3) -> Point3 {
    let (t, tau) = (iso.amount, params.tau);
    match iso.kind {
        IsometryKind::TranslateF1 => Point3::new(p.x + t, p.y, p.z + tau * t * p.y),
        IsometryKind::TranslateF2 => Point3::new(p.x, p.y + t, p.z - tau * t * p.x),
        IsometryKind::TranslateF3 => Point3::new(p.x, p.y, p.z + t),
        IsometryKind::RotateF4 => {
            let (s, c) = t.sin_cos();
            Point3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
        }
    }
}

/// Applies `isos` left to right.
pub fn apply_isometries(params: &AmbientParams, isos: &[IsometrySpec], p: &Point3) -> Point3 {
    isos.iter().fold(*p, |q, iso| apply_isometry(params, iso, &q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_translation_example() {
        let params = AmbientParams::new(1.0).unwrap();
        let q = apply_isometry(
            &params,
            &IsometrySpec::new(IsometryKind::TranslateF1, 2.0),
            &Point3::new(0.0, 1.0, 0.0),
        );
        assert_eq!(q, Point3::new(2.0, 1.0, 2.0));
    }

    #[test]
    fn zero_amount_is_identity() {
        let params = AmbientParams::new(0.4).unwrap();
        let p = Point3::new(0.3, -2.0, 5.0);
        for kind in [
            IsometryKind::TranslateF1,
            IsometryKind::TranslateF2,
            IsometryKind::TranslateF3,
            IsometryKind::RotateF4,
        ] {
            assert_eq!(apply_isometry(&params, &IsometrySpec::new(kind, 0.0), &p), p);
        }
    }

    #[test]
    fn inverse_translation_composes_to_identity() {
        let params = AmbientParams::new(-1.7).unwrap();
        let p = Point3::new(0.3, -2.0, 5.0);
        let q = apply_isometries(
            &params,
            &[
                IsometrySpec::new(IsometryKind::TranslateF1, 1.25),
                IsometrySpec::new(IsometryKind::TranslateF1, -1.25),
            ],
            &p,
        );
        assert!((q.coords() - p.coords()).norm() < 1e-12);
    }

    #[test]
    fn rotation_angle_reduction() {
        let iso = IsometrySpec::new(IsometryKind::RotateF4, -std::f64::consts::FRAC_PI_2);
        assert!((iso.normalized_amount() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }
}
