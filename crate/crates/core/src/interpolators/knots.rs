use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};

/// Distinct points in `[0, 1]^d`, one per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct KnotSet {
    points: DMatrix<f64>,
}

impl KnotSet {
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(invalid("a knot set needs at least one point and one coordinate"));
        }
        if points.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("knot coordinates must lie in [0, 1]"));
        }
        if has_duplicate_rows(&points) {
            return Err(Error::DuplicateKnots);
        }
        Ok(Self { points })
    }

    pub fn from_1d(knots: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(knots.len(), 1, knots))
    }

    /// Rows `indices` of `x`.
    pub fn subset(x: &DMatrix<f64>, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= x.nrows()) {
            return Err(dims(format!("index {bad} out of range for {} rows", x.nrows())));
        }
        Self::new(x.select_rows(indices))
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    /// Coordinates of a 1-D knot set.
    pub fn as_1d(&self) -> Option<Vec<f64>> {
        (self.dim() == 1).then(|| self.points.column(0).iter().copied().collect())
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let m = self.len();
        let mut best = f64::INFINITY;
        for i in 0..m {
            for j in i + 1..m {
                let d = (self.points.row(i) - self.points.row(j)).norm();
                best = best.min(d);
            }
        }
        best
    }
}

fn has_duplicate_rows(p: &DMatrix<f64>) -> bool {
    let d = p.ncols();
    let rm: Vec<f64> = p.transpose().as_slice().to_vec();
    let mut idx: Vec<usize> = (0..p.nrows()).collect();
    let row = |i: usize| &rm[i * d..(i + 1) * d];
    idx.sort_by(|&a, &b| {
        row(a)
            .iter()
            .zip(row(b))
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    idx.windows(2).any(|w| row(w[0]) == row(w[1]))
}

impl TryFrom<Vec<Vec<f64>>> for KnotSet {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(dims("knot rows have unequal lengths"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::new(DMatrix::from_row_slice(m, d, &flat))
    }
}

impl From<KnotSet> for Vec<Vec<f64>> {
    fn from(k: KnotSet) -> Self {
        k.points
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(KnotSet::from_1d(&[0.0, 0.5, 1.0]).is_ok());
        assert!(matches!(
            KnotSet::from_1d(&[0.2, 0.7, 0.2]),
            Err(Error::DuplicateKnots)
        ));
        assert!(KnotSet::from_1d(&[0.2, 1.5]).is_err());
        assert!(KnotSet::from_1d(&[]).is_err());
        let two_d = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, 0.1, 0.3, 0.1, 0.2]);
        assert!(matches!(KnotSet::new(two_d), Err(Error::DuplicateKnots)));
    }

    #[test]
    fn json_is_row_major() {
        let k = KnotSet::new(DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4])).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, "[[0.1,0.2],[0.3,0.4]]");
        let back: KnotSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<KnotSet>("[[0.1],[0.1]]").is_err());
    }

    #[test]
    fn subset_and_distance() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 0.25, 0.5, 1.0]);
        let k = KnotSet::subset(&x, &[3, 1]).unwrap();
        assert_eq!(k.as_1d().unwrap(), vec![1.0, 0.25]);
        assert!((k.min_pairwise_distance() - 0.75).abs() < 1e-15);
        assert!(KnotSet::subset(&x, &[4]).is_err());
    }
}
