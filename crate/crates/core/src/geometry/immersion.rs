use nalgebra::Vector3;

use super::{AmbientParams, Point3};
use crate::error::{Error, Result};

/// Position and first/second parameter derivatives of a chart at `(s, t)`,
/// all in coordinate components.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub point: Point3,
    pub ds: Vector3<f64>,
    pub dt: Vector3<f64>,
    pub dss: Vector3<f64>,
    pub dst: Vector3<f64>,
    pub dtt: Vector3<f64>,
}

/// Which unit normal the mean curvature is measured against.
///
/// `Positive` is the normal dual to the coordinate cross product `∂s × ∂t`
/// (raised with the metric); `Negative` its opposite; `Downward` picks whichever
/// of the two has negative `E₃` component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
    Downward,
}

pub trait ImmersionChart {
    fn jet(&self, s: f64, t: f64) -> ChartJet;
    fn orientation(&self) -> Orientation;
}

/// Chart known only through its position map; derivatives by central differences.
pub struct FiniteDifferenceChart<F> {
    pub map: F,
    pub orientation: Orientation,
    pub step: f64,
}

impl<F> FiniteDifferenceChart<F>
where
    F: Fn(f64, f64) -> Point3,
{
    pub fn new(map: F, orientation: Orientation) -> Self {
        FiniteDifferenceChart {
            map,
            orientation,
            step: 1e-4,
        }
    }
}

impl<F> ImmersionChart for FiniteDifferenceChart<F>
where
    F: Fn(f64, f64) -> Point3,
{
    fn jet(&self, s: f64, t: f64) -> ChartJet {
        let h = self.step;
        let f = |a: f64, b: f64| (self.map)(a, b).coords();
        let c = f(s, t);
        let (sp, sm, tp, tm) = (f(s + h, t), f(s - h, t), f(s, t + h), f(s, t - h));
        let cross = f(s + h, t + h) - f(s + h, t - h) - f(s - h, t + h) + f(s - h, t - h);
        ChartJet {
            point: Point3::from_coords(&c),
            ds: (sp - sm) / (2.0 * h),
            dt: (tp - tm) / (2.0 * h),
            dss: (sp - c * 2.0 + sm) / (h * h),
            dst: cross / (4.0 * h * h),
            dtt: (tp - c * 2.0 + tm) / (h * h),
        }
    }

    fn orientation(&self) -> Orientation {
        self.orientation
    }
}

/// Mean curvature (half the trace of the shape operator) of an immersed chart at
/// `(s, t)`, computed from the metric tensor and its coordinate Christoffel
/// symbols. Sign follows the chart's orientation.
pub fn mean_curvature_immersion(chart: &dyn ImmersionChart, s: f64, t: f64, params: &AmbientParams) -> Result<f64> {
    let jet = chart.jet(s, t);
    let p = jet.point;
    let g = params.metric_matrix(&p);
    let e = jet.ds.dot(&(g * jet.ds));
    let f = jet.ds.dot(&(g * jet.dt));
    let gg = jet.dt.dot(&(g * jet.dt));
    let det = e * gg - f * f;
    if !(det > 1e-14 * e * gg) || !det.is_finite() {
        return Err(Error::Singular {
            s,
            t,
            reason: format!("degenerate first fundamental form (det = {det:e})"),
        });
    }

    // The covector annihilating both tangents; raising it gives the normal direction.
    let omega = jet.ds.cross(&jet.dt);
    let ginv = g.try_inverse().expect("metric is nondegenerate");
    let raised = ginv * omega;
    let len = omega.dot(&raised).sqrt();
    let mut sign = 1.0;
    match chart.orientation() {
        Orientation::Positive => {}
        Orientation::Negative => sign = -1.0,
        Orientation::Downward => {
            // ⟨N, E₃⟩ = ω(∂z) / |ω|
            if omega[2] > 0.0 {
                sign = -1.0;
            }
        }
    }
    let normal_covector = omega * (sign / len);

    let gamma = params.christoffel(&p);
    let accel = |a: &Vector3<f64>, b: &Vector3<f64>, second: &Vector3<f64>| -> f64 {
        let mut v = *second;
        for l in 0..3 {
            v[l] += a.dot(&(gamma[l] * b));
        }
        v.dot(&normal_covector)
    };
    let l = accel(&jet.ds, &jet.ds, &jet.dss);
    let m = accel(&jet.ds, &jet.dt, &jet.dst);
    let n = accel(&jet.dt, &jet.dt, &jet.dtt);
    Ok(0.5 * (gg * l - 2.0 * f * m + e * n) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_plane_is_minimal() {
        for tau in [0.0, 0.5, -2.0] {
            let params = AmbientParams::new(tau).unwrap();
            let chart = FiniteDifferenceChart::new(|s, t| Point3::new(s, t, 0.0), Orientation::Downward);
            let h = mean_curvature_immersion(&chart, 0.4, -1.3, &params).unwrap();
            assert!(h.abs() < 1e-9, "tau={tau} H={h}");
        }
    }

    #[test]
    fn euclidean_sphere_patch() {
        // Lower hemisphere of radius 2 seen from below: curvature vector points up,
        // so with the downward normal H = -1/2.
        let params = AmbientParams::euclidean();
        let r = 2.0_f64;
        let chart = FiniteDifferenceChart::new(
            move |s: f64, t: f64| Point3::new(s, t, -(r * r - s * s - t * t).sqrt()),
            Orientation::Downward,
        );
        let h = mean_curvature_immersion(&chart, 0.3, 0.2, &params).unwrap();
        assert!((h + 0.5).abs() < 1e-6, "H={h}");
    }

    #[test]
    fn degenerate_chart_is_singular() {
        let params = AmbientParams::euclidean();
        let chart = FiniteDifferenceChart::new(|s, _t| Point3::new(s, 0.0, 0.0), Orientation::Positive);
        assert!(matches!(
            mean_curvature_immersion(&chart, 0.0, 0.0, &params),
            Err(Error::Singular { .. })
        ));
    }
}
