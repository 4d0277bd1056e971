use alloc::vec;
use alloc::vec::Vec;

use crate::attributes::AttributeMatrix;
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    GeneralizedEuclidean,
    Euclidean,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::GeneralizedEuclidean => "ge",
            Metric::Euclidean => "euclidean",
        }
    }
}

/// Symmetric, non-negative, zero-diagonal `n × n` matrix of pairwise
/// distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Fills the upper triangle row by row through `exec` and mirrors it.
    /// `entry(i, j)` is only called with `i < j`.
    pub fn from_upper<E, F>(n: usize, metric: Metric, exec: &E, entry: F) -> Result<Self>
    where
        E: Executor + ?Sized,
        F: Fn(usize, usize) -> Result<f64> + Sync + Send,
    {
        let rows: Vec<Result<Vec<f64>>> =
            exec.map(n, &|i| ((i + 1)..n).map(|j| entry(i, j)).collect());
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (k, d) in row?.into_iter().enumerate() {
                let j = i + 1 + k;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { n, values, metric })
    }

    /// Validates shape, symmetry, zero diagonal and non-negativity.
    pub fn from_vec(n: usize, values: Vec<f64>, metric: Metric) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Degenerate(alloc::format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = values[i * n + j];
                if !d.is_finite() {
                    return Err(Error::NonFinite { context: "distance matrix" });
                }
                if d < 0.0 || d != values[j * n + i] {
                    return Err(Error::Degenerate(alloc::format!(
                        "distance matrix is not symmetric non-negative at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, values, metric })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&d| d == 0.0)
    }

    /// Same matrix with rows and columns reordered: entry `(a, b)` of the
    /// result is entry `(order[a], order[b])` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                values[a * n + b] = self.get(order[a], order[b]);
            }
        }
        DistanceMatrix { n, values, metric: self.metric }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pairwise L2 distances between observations.
pub fn euclidean_distances(attrs: &AttributeMatrix) -> Result<DistanceMatrix> {
    euclidean_distances_with(attrs, &Sequential)
}

pub fn euclidean_distances_with<E: Executor + ?Sized>(
    attrs: &AttributeMatrix,
    exec: &E,
) -> Result<DistanceMatrix> {
    if attrs.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "attribute matrix" });
    }
    DistanceMatrix::from_upper(attrs.len(), Metric::Euclidean, exec, |i, j| {
        Ok(euclidean(attrs.row(i), attrs.row(j)))
    })
}

/// Pairwise L2 distances between points given as rows of `coords`
/// (`dims` values per point).
pub fn point_distances(coords: &[f64], dims: usize) -> DistanceMatrix {
    let n = coords.len() / dims;
    let row = |i: usize| &coords[i * dims..(i + 1) * dims];
    DistanceMatrix::from_upper(n, Metric::Euclidean, &Sequential, |i, j| Ok(euclidean(row(i), row(j))))
        .expect("infallible entry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn three_four_five() {
        let a = AttributeMatrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = euclidean_distances(&a).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn identical_rows_and_single_row() {
        let a = AttributeMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(euclidean_distances(&a).unwrap().is_all_zero());
        let a = AttributeMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let d = euclidean_distances(&a).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn non_finite_attributes_rejected() {
        assert!(AttributeMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(AttributeMatrix::from_rows(&[vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn from_vec_validates() {
        assert!(DistanceMatrix::from_vec(2, vec![0.0, 1.0, 1.0, 0.0], Metric::Euclidean).is_ok());
        assert!(DistanceMatrix::from_vec(2, vec![0.0, 1.0, 2.0, 0.0], Metric::Euclidean).is_err());
        assert!(DistanceMatrix::from_vec(2, vec![1.0, 1.0, 1.0, 0.0], Metric::Euclidean).is_err());
        assert!(DistanceMatrix::from_vec(2, vec![0.0; 3], Metric::Euclidean).is_err());
    }
}
