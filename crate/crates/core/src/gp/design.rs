//! Point sets and designs of experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major set of points in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "points need a positive dimension");
        Self { dim, data: Vec::new() }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates cannot be split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidArgument("empty point list".into()))?;
        let mut points = Self::new(dim.max(1));
        for r in rows {
            points.push(r.as_ref())?;
        }
        Ok(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        self.data.extend_from_slice(x);
        Ok(())
    }

    pub fn select(&self, indices: &[usize]) -> Points {
        let mut out = Points::new(self.dim);
        for &i in indices {
            out.data.extend_from_slice(self.row(i));
        }
        out
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Per-axis (min, max) over the points.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|k| {
                self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[k]), hi.max(r[k]))
                })
            })
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        self.bounding_box()
            .iter()
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Evaluated design: points `x_1…x_n` with observations `z_i = f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: Points,
    values: Vec<f64>,
}

/// Relative separation below which two design points are considered equal.
pub const SEPARATION_TOLERANCE: f64 = 1e-9;

impl Design {
    /// Builds a design, rejecting duplicated points. The separation tolerance
    /// is `SEPARATION_TOLERANCE` times the diameter of the points' bounding box.
    pub fn new(points: Points, values: Vec<f64>) -> Result<Self> {
        let tolerance = SEPARATION_TOLERANCE * points.diameter().max(f64::MIN_POSITIVE);
        Self::with_tolerance(points, values, tolerance)
    }

    pub fn with_tolerance(points: Points, values: Vec<f64>, tolerance: f64) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: values.len(),
            });
        }
        if points.as_flat().iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design"));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if euclidean(points.row(i), points.row(j)) <= tolerance {
                    return Err(Error::CoincidentPoints {
                        first: j,
                        second: i,
                        tolerance,
                    });
                }
            }
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Index of a design point within `tolerance` of `x`, if any.
    pub fn find_near(&self, x: &[f64], tolerance: f64) -> Option<usize> {
        self.points.rows().position(|r| euclidean(r, x) <= tolerance)
    }

    pub(crate) fn push_unchecked(&mut self, x: &[f64], z: f64) {
        self.points.data.extend_from_slice(x);
        self.values.push(z);
    }

    pub fn truncated(&self, n: usize) -> Design {
        let n = n.min(self.len());
        Design {
            points: Points {
                dim: self.points.dim,
                data: self.points.data[..n * self.points.dim].to_vec(),
            },
            values: self.values[..n].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_mismatch() {
        let pts = Points::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            Design::new(pts.clone(), vec![1.0, 2.0, 3.0]),
            Err(Error::CoincidentPoints { first: 0, second: 2, .. })
        ));
        assert!(matches!(
            Design::new(pts, vec![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn points_accessors() {
        let pts = Points::from_rows(&[[0.0, 2.0], [1.0, -1.0]]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts.row(1), &[1.0, -1.0]);
        assert_eq!(pts.bounding_box(), vec![(0.0, 1.0), (-1.0, 2.0)]);
        assert!((pts.diameter() - 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(pts.select(&[1]).row(0), &[1.0, -1.0]);
        assert!(Points::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
    }
}
