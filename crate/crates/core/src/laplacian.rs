//! Sparse symmetric Laplacians: `D - A` for a single layer, `B W Bᵀ` for the
//! supra-graph of a multilayer network.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, MultilayerGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `D - A` of a single-layer graph.
    SingleLayer,
    /// `B W Bᵀ` of a flattened multilayer graph.
    Supra,
}

/// Laplacian in CSR form. Every row holds its diagonal entry; columns are
/// sorted within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianView {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    kind: LaplacianKind,
}

impl LaplacianView {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = L x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                out[i * n + j] = v;
            }
        }
        out
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    fn from_rows(rows: Vec<BTreeMap<usize, f64>>, kind: LaplacianKind) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        LaplacianView { dim, row_ptr, col_idx, values, kind }
    }
}

/// `L = D - A` for a connected graph.
pub fn build_laplacian(g: &Graph) -> Result<LaplacianView> {
    g.require_connected()?;
    let n = g.node_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n + 2 * g.edge_count());
    let mut values = Vec::with_capacity(n + 2 * g.edge_count());
    row_ptr.push(0);
    for i in 0..n {
        let nb = g.neighbors(i);
        let degree: f64 = nb.iter().map(|&(_, w)| w).sum();
        let mut placed = false;
        for &(j, w) in nb {
            if !placed && j > i {
                col_idx.push(i);
                values.push(degree);
                placed = true;
            }
            col_idx.push(j);
            values.push(-w);
        }
        if !placed {
            col_idx.push(i);
            values.push(degree);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(LaplacianView { dim: n, row_ptr, col_idx, values, kind: LaplacianKind::SingleLayer })
}

/// Signed incidence matrix stored by rows: node -> [(edge, ±1)].
struct Incidence {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<[(usize, f64); 2]>,
}

impl Incidence {
    fn new(dim: usize, edges: &[Edge]) -> Self {
        let mut rows = vec![Vec::new(); dim];
        let mut cols = Vec::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            rows[edge.u].push((e, 1.0));
            rows[edge.v].push((e, -1.0));
            cols.push([(edge.u, 1.0), (edge.v, -1.0)]);
        }
        Incidence { rows, cols }
    }
}

/// Laplacian of a weighted edge set computed as `B W Bᵀ`.
pub fn incidence_laplacian(dim: usize, edges: &[Edge]) -> LaplacianView {
    let b = Incidence::new(dim, edges);
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim];
    for (i, row) in rows.iter_mut().enumerate() {
        row.insert(i, 0.0);
        for &(e, bie) in &b.rows[i] {
            let w = edges[e].weight;
            for &(j, bje) in &b.cols[e] {
                *row.entry(j).or_insert(0.0) += bie * w * bje;
            }
        }
    }
    LaplacianView::from_rows(rows, LaplacianKind::Supra)
}

/// Supra-Laplacian `B W Bᵀ` of the flattened multilayer graph, with
/// `coupling_weight` on every inter-layer coupling.
pub fn build_supra_laplacian(mg: &MultilayerGraph, coupling_weight: f64) -> Result<LaplacianView> {
    let flat = mg.flatten(coupling_weight)?;
    let report = flat.validate();
    if !report.connected {
        return Err(Error::Disconnected { sizes: report.component_sizes });
    }
    Ok(incidence_laplacian(flat.node_count(), flat.edges()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultilayerGraph;

    fn graph(edges: &[(&str, &str, f64)]) -> Graph {
        let mut b = Graph::builder();
        for &(u, v, w) in edges {
            b.edge(u, v, w).unwrap();
        }
        b.build()
    }

    #[test]
    fn single_edge() {
        let l = build_laplacian(&graph(&[("a", "b", 1.0)])).unwrap();
        assert_eq!(l.to_dense(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn weighted_edge() {
        let l = build_laplacian(&graph(&[("a", "b", 2.5)])).unwrap();
        assert_eq!(l.to_dense(), vec![2.5, -2.5, -2.5, 2.5]);
    }

    #[test]
    fn triangle() {
        let l = build_laplacian(&graph(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]))
            .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), if i == j { 2.0 } else { -1.0 });
            }
        }
        assert_eq!(l.max_abs_row_sum(), 0.0);
    }

    #[test]
    fn disconnected_is_refused() {
        let g = graph(&[("a", "b", 1.0), ("c", "d", 1.0)]);
        assert!(matches!(build_laplacian(&g), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn single_node_laplacian_is_zero() {
        let mut b = Graph::builder();
        b.node("x");
        let l = build_laplacian(&b.build()).unwrap();
        assert_eq!(l.to_dense(), vec![0.0]);
    }

    #[test]
    fn lone_base_node_in_two_layers() {
        let mut b = MultilayerGraph::builder();
        b.node("a", "t1");
        b.node("a", "t2");
        let l = build_supra_laplacian(&b.build(), 1.0).unwrap();
        assert_eq!(l.to_dense(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn coupled_copies_of_an_edge() {
        let mut b = MultilayerGraph::builder();
        b.edge("a", "b", 1.0, "t1").unwrap();
        b.edge("a", "b", 1.0, "t2").unwrap();
        let l = build_supra_laplacian(&b.build(), 1.0).unwrap();
        assert_eq!(l.dim(), 4);
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(0, 2), -1.0);
        assert_eq!(l.max_abs_row_sum(), 0.0);
    }

    #[test]
    fn supra_disconnected_is_refused() {
        let mut b = MultilayerGraph::builder();
        b.edge("a", "b", 1.0, "t1").unwrap();
        b.edge("c", "d", 1.0, "t2").unwrap();
        assert!(matches!(build_supra_laplacian(&b.build(), 1.0), Err(Error::Disconnected { .. })));
    }
}
