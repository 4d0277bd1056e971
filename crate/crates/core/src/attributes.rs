use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Observations to cluster: one row per observation, one column per graph
/// node (in graph node order).
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    ids: Vec<String>,
    dim: usize,
    values: Vec<f64>,
}

impl AttributeMatrix {
    /// Builds from row-major values. Every value must be finite.
    pub fn new(ids: Vec<String>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch { expected: ids.len() * dim, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "attribute matrix" });
        }
        Ok(AttributeMatrix { ids, dim, values })
    }

    /// Rows with generated ids `o0, o1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Observation {
                    index: i,
                    source: alloc::boxed::Box::new(Error::DimensionMismatch {
                        expected: dim,
                        found: r.len(),
                    }),
                });
            }
            values.extend_from_slice(r);
        }
        let ids = (0..rows.len()).map(|i| format!("o{i}")).collect();
        Self::new(ids, dim, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of columns (graph nodes).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Errors unless the column count matches `nodes`.
    pub fn check_columns(&self, nodes: usize) -> Result<()> {
        if self.dim == nodes {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: nodes, found: self.dim })
        }
    }
}
