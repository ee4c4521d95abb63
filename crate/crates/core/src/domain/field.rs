use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::curve::BoundaryCurve;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Dirichlet data on the boundary, as a function of arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryData {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · sin(mode · 2πs/ℓ + phase)`.
    Harmonic {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        mode: u32,
        #[serde(default)]
        phase: f64,
    },
    /// Periodic piecewise-linear interpolation of `(s, value)` pairs.
    Table {
        s: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData::Constant { value: 0.0 }
    }
}

impl BoundaryData {
    pub fn zero() -> Self {
        BoundaryData::Constant { value: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundaryData::Constant { value } if !value.is_finite() => {
                Err(Error::validation("boundary value must be finite"))
            }
            BoundaryData::Harmonic {
                offset,
                amplitude,
                phase,
                ..
            } if !(offset.is_finite() && amplitude.is_finite() && phase.is_finite()) => {
                Err(Error::validation("harmonic boundary data must be finite"))
            }
            BoundaryData::Table { s, values } => {
                if s.is_empty() || s.len() != values.len() {
                    return Err(Error::validation("boundary table needs equal, nonempty s and values"));
                }
                if s.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::validation("boundary table s must be strictly increasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64, length: f64) -> f64 {
        match self {
            BoundaryData::Constant { value } => *value,
            BoundaryData::Harmonic {
                offset,
                amplitude,
                mode,
                phase,
            } => offset + amplitude * (*mode as f64 * TAU * s / length + phase).sin(),
            BoundaryData::Table { s: knots, values } => {
                let s = s.rem_euclid(length);
                let n = knots.len();
                if n == 1 {
                    return values[0];
                }
                let k = knots.partition_point(|&x| x <= s);
                if k == 0 || k == n {
                    // wrap segment between the last knot and the first
                    let a = knots[n - 1];
                    let b = knots[0] + length;
                    let ss = if s < knots[0] { s + length } else { s };
                    return values[n - 1] + (values[0] - values[n - 1]) * (ss - a) / (b - a);
                }
                let (a, b) = (knots[k - 1], knots[k]);
                values[k - 1] + (values[k] - values[k - 1]) * (s - a) / (b - a)
            }
        }
    }

    /// Value and first two arclength derivatives. Tables are piecewise linear,
    /// so their second derivative is reported as zero away from the knots.
    pub fn jet(&self, s: f64, length: f64) -> [f64; 3] {
        match self {
            BoundaryData::Constant { value } => [*value, 0.0, 0.0],
            BoundaryData::Harmonic {
                offset,
                amplitude,
                mode,
                phase,
            } => {
                let w = *mode as f64 * TAU / length;
                let (sn, cs) = (w * s + phase).sin_cos();
                [offset + amplitude * sn, amplitude * w * cs, -amplitude * w * w * sn]
            }
            BoundaryData::Table { .. } => {
                let e = 1e-6 * length;
                let v = self.eval(s, length);
                let slope = (self.eval(s + e, length) - self.eval(s - e, length)) / (2.0 * e);
                [v, slope, 0.0]
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            BoundaryData::Constant { value } => *value == 0.0,
            BoundaryData::Harmonic { offset, amplitude, .. } => *offset == 0.0 && *amplitude == 0.0,
            BoundaryData::Table { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// `(min, max)` over dense samples of the curve.
    pub fn range(&self, curve: &BoundaryCurve) -> (f64, f64) {
        let ell = curve.length();
        curve
            .sample_params(4096)
            .into_iter()
            .map(|s| self.eval(s, ell))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Same data shifted by a constant.
    pub fn shifted(&self, c: f64) -> BoundaryData {
        match self.clone() {
            BoundaryData::Constant { value } => BoundaryData::Constant { value: value + c },
            BoundaryData::Harmonic {
                offset,
                amplitude,
                mode,
                phase,
            } => BoundaryData::Harmonic {
                offset: offset + c,
                amplitude,
                mode,
                phase,
            },
            BoundaryData::Table { s, values } => BoundaryData::Table {
                s,
                values: values.into_iter().map(|v| v + c).collect(),
            },
        }
    }
}

/// A function sampled at the interior nodes of a [`Grid`], together with its
/// values at the grid's boundary intersection points.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub trace: Vec<f64>,
    pub label: String,
}

impl ScalarField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.nodes().len();
        let m = grid.boundary_points().len();
        ScalarField {
            grid,
            values: vec![0.0; n],
            trace: vec![0.0; m],
            label: "zero".into(),
        }
    }

    /// Samples `f` at nodes and boundary points.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<Grid>, label: &str, f: F) -> Self {
        let values = grid.nodes().iter().map(|n| f(n.x, n.y)).collect();
        let trace = grid.boundary_points().iter().map(|b| f(b.x, b.y)).collect();
        ScalarField {
            grid,
            values,
            trace,
            label: label.into(),
        }
    }

    /// Replaces the trace with `scale · data(s)` at each boundary point.
    pub fn with_trace(mut self, data: &BoundaryData, scale: f64) -> Self {
        self.trace = self.grid.trace_of(data, scale);
        self
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm of the nodewise difference; the grids must match.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "fields live on different grids");
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().chain(self.trace.iter()).all(|v| v.is_finite())
    }

    /// Discrete derivatives `[ux, uy, uxx, uyy, uxy]` at node `k`.
    pub fn derivatives(&self, k: usize) -> [f64; 5] {
        self.grid.derivatives(k, &self.values, &self.trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_on_unit_circle() {
        let d = BoundaryData::Harmonic {
            offset: 0.0,
            amplitude: 0.1,
            mode: 2,
            phase: 0.0,
        };
        let ell = TAU;
        assert!((d.eval(0.3, ell) - 0.1 * (0.6f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates_periodically() {
        let d = BoundaryData::Table {
            s: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 0.5],
        };
        d.validate().unwrap();
        assert!((d.eval(0.5, 4.0) - 0.5).abs() < 1e-15);
        assert!((d.eval(3.0, 4.0) - 0.25).abs() < 1e-15);
        assert!((d.eval(4.5, 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_table_rejected() {
        let d = BoundaryData::Table {
            s: vec![0.0, 0.0],
            values: vec![1.0, 2.0],
        };
        assert!(d.validate().is_err());
    }
}
