//! Tabulated densities: the unit of CLI output.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};

/// One named, strictly increasing grid axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub points: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::config("axis needs at least 2 points"));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("axis points must be strictly increasing"));
        }
        Ok(Axis {
            name: name.into(),
            points,
        })
    }

    /// `count` equally spaced points on `[min, max]`.
    pub fn linspace(name: impl Into<String>, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::config("grid count must be >= 2"));
        }
        if !(min < max) {
            return Err(Error::config(format!("grid needs min < max, got [{min}, {max}]")));
        }
        let step = (max - min) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| {
                if i + 1 == count {
                    max
                } else {
                    min + i as f64 * step
                }
            })
            .collect();
        Axis::new(name, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A density (and optionally CDF) tabulated over a 1-D or 2-D grid,
/// with the parameters and a normalization estimate carried alongside.
/// For 2-D grids, values are stored row-major with the first axis
/// outermost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    /// Extra per-point columns (e.g. a CDF next to a density).
    pub extra_columns: Vec<(String, Vec<f64>)>,
    pub params: ModelParams,
    pub normalization_estimate: f64,
    /// Free-form provenance notes (flag choices, untested-regime flags).
    pub notes: Vec<String>,
}

impl DensityGrid {
    pub fn new(
        axes: Vec<Axis>,
        values: Vec<f64>,
        params: ModelParams,
        normalization_estimate: f64,
    ) -> Result<Self> {
        let expected: usize = axes.iter().map(Axis::len).product();
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::config("DensityGrid supports 1 or 2 axes"));
        }
        if values.len() != expected {
            return Err(Error::config(format!(
                "value count {} does not match grid shape {}",
                values.len(),
                expected
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("density values must be nonnegative"));
        }
        Ok(DensityGrid {
            axes,
            values,
            extra_columns: Vec::new(),
            params,
            normalization_estimate,
            notes: Vec::new(),
        })
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::config("extra column length mismatch"));
        }
        self.extra_columns.push((name.into(), values));
        Ok(self)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::dry_friction(0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn linspace_hits_endpoints() {
        let a = Axis::linspace("x", -4.0, 4.0, 101).unwrap();
        assert_eq!(a.len(), 101);
        assert_eq!(a.points[0], -4.0);
        assert_eq!(*a.points.last().unwrap(), 4.0);
        assert!(a.points.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn shape_and_sign_invariants() {
        let a = Axis::linspace("x", 0.0, 1.0, 3).unwrap();
        let b = Axis::linspace("l", 0.0, 1.0, 2).unwrap();
        assert!(DensityGrid::new(vec![a.clone(), b.clone()], vec![0.0; 6], params(), 1.0).is_ok());
        assert!(DensityGrid::new(vec![a.clone(), b.clone()], vec![0.0; 5], params(), 1.0).is_err());
        assert!(DensityGrid::new(vec![a], vec![0.0, -1.0, 0.0], params(), 1.0).is_err());
        assert!(Axis::new("x", vec![0.0, 0.0]).is_err());
        assert!(Axis::linspace("x", 1.0, 0.0, 5).is_err());
    }
}
