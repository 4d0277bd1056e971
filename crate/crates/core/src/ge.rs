//! Generalized Euclidean distance between node attribute vectors:
//! `δ(a, b) = sqrt((a - b)ᵀ L⁺ (a - b))`.
//!
//! Two routes compute it. [`PseudoinverseCache`] holds a dense `L⁺` and is
//! the right choice for small graphs queried many times. [`SolverHandle`]
//! never forms `L⁺` and instead solves `L x = d` with preconditioned
//! conjugate gradients, which keeps memory and time near linear in the edge
//! count.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::attributes::AttributeMatrix;
use crate::distance::{DistanceMatrix, Metric};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::graph::Graph;
use crate::laplacian::{build_laplacian, LaplacianView};

/// Graphs with at most this many nodes use the dense backend under
/// [`Backend::Auto`].
pub const AUTO_DENSE_MAX_NODES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Dense,
    Solver,
    Auto,
}

impl Backend {
    pub fn resolve(self, nodes: usize) -> Backend {
        match self {
            Backend::Auto if nodes <= AUTO_DENSE_MAX_NODES => Backend::Dense,
            Backend::Auto => Backend::Solver,
            b => b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Solver => "solver",
            Backend::Auto => "auto",
        }
    }

    pub fn parse(s: &str) -> Option<Backend> {
        match s {
            "dense" => Some(Backend::Dense),
            "solver" => Some(Backend::Solver),
            "auto" => Some(Backend::Auto),
            _ => None,
        }
    }
}

fn check_vector(v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { context: "attribute vector" });
    }
    Ok(())
}

fn difference(o1: &[f64], o2: &[f64]) -> Vec<f64> {
    o1.iter().zip(o2).map(|(a, b)| a - b).collect()
}

/// Removes the component along the all-ones vector.
pub fn center(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense Moore–Penrose pseudoinverse of a connected graph's Laplacian.
///
/// Computed as `(L + J/n)⁻¹ - J/n` through a Cholesky factorization, then
/// double-centered so that `L⁺ 1 = 0` holds to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoinverseCache {
    dim: usize,
    values: Vec<f64>,
    fingerprint: Option<String>,
}

impl PseudoinverseCache {
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let lap = build_laplacian(g)?;
        let mut cache = Self::from_laplacian(&lap)?;
        cache.fingerprint = Some(g.fingerprint());
        Ok(cache)
    }

    pub fn from_laplacian(lap: &LaplacianView) -> Result<Self> {
        let n = lap.dim();
        if n == 0 {
            return Ok(PseudoinverseCache { dim: 0, values: Vec::new(), fingerprint: None });
        }
        let shift = 1.0 / n as f64;
        let mut m = DMatrix::<f64>::from_element(n, n, shift);
        for i in 0..n {
            for (j, v) in lap.row(i) {
                m[(i, j)] += v;
            }
        }
        let chol = m.cholesky().ok_or_else(|| {
            Error::Degenerate("Laplacian plus J/n is not positive definite (disconnected graph?)".into())
        })?;
        let inv = chol.inverse();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = inv[(i, j)] - shift;
            }
        }
        double_center(&mut values, n);
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (values[i * n + j] + values[j * n + i]);
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(PseudoinverseCache { dim: n, values, fingerprint: None })
    }

    /// Rebuilds a cache from stored row-major values.
    pub fn from_parts(dim: usize, values: Vec<f64>, fingerprint: Option<String>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: values.len() });
        }
        Ok(PseudoinverseCache { dim, values, fingerprint })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> Option<&str> {
        self.fingerprint.as_deref()
    }

    pub fn set_fingerprint(&mut self, fp: String) {
        self.fingerprint = Some(fp);
    }

    /// Row-major `L⁺`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    /// `L⁺ v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(&self.values[i * self.dim..(i + 1) * self.dim], v)).collect()
    }

    /// `vᵀ L⁺ v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.apply(v))
    }
}

fn double_center(values: &mut [f64], n: usize) {
    let nf = n as f64;
    let row_means: Vec<f64> =
        (0..n).map(|i| values[i * n..(i + 1) * n].iter().sum::<f64>() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| (0..n).map(|i| values[i * n + j]).sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] += grand - row_means[i] - col_means[j];
        }
    }
}

/// GE distance through a dense pseudoinverse.
pub fn ge_distance_dense(cache: &PseudoinverseCache, o1: &[f64], o2: &[f64]) -> Result<f64> {
    check_vector(o1, cache.dim)?;
    check_vector(o2, cache.dim)?;
    // L⁺ annihilates constants, so centering changes nothing but rounding
    let mut d = difference(o1, o2);
    center(&mut d);
    Ok(cache.quadratic_form(&d).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target relative residual `‖Lx - b‖ / ‖b‖`.
    pub tolerance: f64,
    /// Iteration cap; `None` means `max(1000, 2 |V|)`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-8, max_iterations: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Achieved relative residual, recomputed from `x`.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients on `L x = b` with `b` and `x`
/// deflated against the all-ones null vector.
#[derive(Debug, Clone)]
pub struct SolverHandle {
    lap: LaplacianView,
    inv_diag: Vec<f64>,
    options: SolverOptions,
}

impl SolverHandle {
    pub fn new(lap: LaplacianView, options: SolverOptions) -> Result<Self> {
        if !(options.tolerance > 0.0) {
            return Err(Error::InvalidConfig("solver tolerance must be positive".into()));
        }
        let inv_diag = lap.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        Ok(SolverHandle { lap, inv_diag, options })
    }

    pub fn from_graph(g: &Graph, options: SolverOptions) -> Result<Self> {
        Self::new(build_laplacian(g)?, options)
    }

    pub fn dim(&self) -> usize {
        self.lap.dim()
    }

    pub fn laplacian(&self) -> &LaplacianView {
        &self.lap
    }

    pub fn options(&self) -> SolverOptions {
        self.options
    }

    fn max_iterations(&self) -> usize {
        self.options.max_iterations.unwrap_or_else(|| (2 * self.dim()).max(1000))
    }

    /// Solves `L x = b - mean(b)` and returns the mean-free `x`.
    pub fn solve(&self, b: &[f64]) -> Result<Solution> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut rhs = b.to_vec();
        center(&mut rhs);
        let b_norm = dot(&rhs, &rhs).sqrt();
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok(Solution { x, iterations: 0, residual: 0.0 });
        }
        let tol = self.options.tolerance;
        let max_it = self.max_iterations();
        let mut lx = vec![0.0; n];
        let mut r = rhs.clone();
        let mut z = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut iterations = 0;
        // The recurrence residual can drift from the true one; restart from
        // the current iterate when that happens.
        loop {
            for i in 0..n {
                z[i] = self.inv_diag[i] * r[i];
            }
            p.copy_from_slice(&z);
            let mut rz = dot(&r, &z);
            while iterations < max_it && dot(&r, &r).sqrt() > tol * b_norm {
                self.lap.matvec(&p, &mut q);
                let pq = dot(&p, &q);
                if !(pq > 0.0) {
                    break;
                }
                let alpha = rz / pq;
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * q[i];
                    z[i] = self.inv_diag[i] * r[i];
                }
                let rz_next = dot(&r, &z);
                let beta = rz_next / rz;
                rz = rz_next;
                for i in 0..n {
                    p[i] = z[i] + beta * p[i];
                }
                iterations += 1;
            }
            center(&mut x);
            self.lap.matvec(&x, &mut lx);
            for i in 0..n {
                r[i] = rhs[i] - lx[i];
            }
            let residual = dot(&r, &r).sqrt() / b_norm;
            if residual <= tol {
                return Ok(Solution { x, iterations, residual });
            }
            if iterations >= max_it {
                return Err(Error::NotConverged { iterations, residual });
            }
        }
    }
}

/// GE distance through the Laplacian solver: solve `L x = d̃` for the
/// centered difference `d̃` and return `sqrt(d̃ᵀ x)`.
pub fn ge_distance_solver(handle: &SolverHandle, o1: &[f64], o2: &[f64]) -> Result<f64> {
    check_vector(o1, handle.dim())?;
    check_vector(o2, handle.dim())?;
    let mut d = difference(o1, o2);
    center(&mut d);
    let sol = handle.solve(&d)?;
    Ok(dot(&d, &sol.x).max(0.0).sqrt())
}

/// A GE metric bound to one graph, backed by either route.
#[derive(Debug, Clone)]
pub enum GeEngine {
    Dense(PseudoinverseCache),
    Solver(SolverHandle),
}

impl GeEngine {
    pub fn new(lap: LaplacianView, backend: Backend, options: SolverOptions) -> Result<Self> {
        match backend.resolve(lap.dim()) {
            Backend::Dense => Ok(GeEngine::Dense(PseudoinverseCache::from_laplacian(&lap)?)),
            _ => Ok(GeEngine::Solver(SolverHandle::new(lap, options)?)),
        }
    }

    pub fn from_graph(g: &Graph, backend: Backend, options: SolverOptions) -> Result<Self> {
        let mut engine = Self::new(build_laplacian(g)?, backend, options)?;
        if let GeEngine::Dense(c) = &mut engine {
            c.set_fingerprint(g.fingerprint());
        }
        Ok(engine)
    }

    pub fn backend(&self) -> Backend {
        match self {
            GeEngine::Dense(_) => Backend::Dense,
            GeEngine::Solver(_) => Backend::Solver,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeEngine::Dense(c) => c.dim(),
            GeEngine::Solver(h) => h.dim(),
        }
    }

    pub fn distance(&self, o1: &[f64], o2: &[f64]) -> Result<f64> {
        match self {
            GeEngine::Dense(c) => ge_distance_dense(c, o1, o2),
            GeEngine::Solver(h) => ge_distance_solver(h, o1, o2),
        }
    }

    /// Centered copy of `o` and its potential `L⁺ o`.
    pub fn potential(&self, o: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_vector(o, self.dim())?;
        let mut centered = o.to_vec();
        center(&mut centered);
        let z = match self {
            GeEngine::Dense(c) => c.apply(&centered),
            GeEngine::Solver(h) => h.solve(&centered)?.x,
        };
        Ok((centered, z))
    }
}

/// `δ²` from two observations' centered vectors and potentials, using
/// linearity: `(a - b)ᵀ L⁺ (a - b) = (a - b)ᵀ (L⁺a - L⁺b)`.
fn pair_from_potentials(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.0.len() {
        acc += (a.0[k] - b.0[k]) * (a.1[k] - b.1[k]);
    }
    acc.max(0.0).sqrt()
}

/// All pairwise GE distances between the rows of `attrs`.
pub fn pairwise_distances(g: &Graph, attrs: &AttributeMatrix, backend: Backend) -> Result<DistanceMatrix> {
    attrs.check_columns(g.node_count())?;
    let engine = GeEngine::from_graph(g, backend, SolverOptions::default())?;
    pairwise_distances_with(&engine, attrs, &Sequential)
}

/// Pairwise GE distances with a prepared engine. Each observation is pushed
/// through `L⁺` (or the solver) once; every entry then costs `O(|V|)`.
pub fn pairwise_distances_with<E: Executor + ?Sized>(
    engine: &GeEngine,
    attrs: &AttributeMatrix,
    exec: &E,
) -> Result<DistanceMatrix> {
    attrs.check_columns(engine.dim())?;
    let potentials: Vec<Result<(Vec<f64>, Vec<f64>)>> = exec.map(attrs.len(), &|i| {
        engine
            .potential(attrs.row(i))
            .map_err(|e| Error::Observation { index: i, source: alloc::boxed::Box::new(e) })
    });
    let potentials = potentials.into_iter().collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_upper(attrs.len(), Metric::GeneralizedEuclidean, exec, |i, j| {
        Ok(pair_from_potentials(&potentials[i], &potentials[j]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(usize, usize, f64)], n: usize) -> Graph {
        Graph::from_index_edges(n, edges.iter().copied()).unwrap()
    }

    fn both(g: &Graph, o1: &[f64], o2: &[f64]) -> (f64, f64) {
        let cache = PseudoinverseCache::from_graph(g).unwrap();
        let handle = SolverHandle::from_graph(g, SolverOptions::default()).unwrap();
        (ge_distance_dense(&cache, o1, o2).unwrap(), ge_distance_solver(&handle, o1, o2).unwrap())
    }

    #[test]
    fn equal_vectors_are_at_zero() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 3.0)], 3);
        let (d, s) = both(&g, &[0.3, -1.0, 2.0], &[0.3, -1.0, 2.0]);
        assert_eq!(d, 0.0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn constant_shift_is_invisible_to_solver() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 3.0), (2, 0, 0.5)], 3);
        let o = [0.3, -1.0, 2.0];
        let shifted: Vec<f64> = o.iter().map(|x| x + 4.25).collect();
        let (d, s) = both(&g, &o, &shifted);
        assert!(d < 1e-12, "{d}");
        assert_eq!(s, 0.0);
    }

    #[test]
    fn single_node_is_degenerate() {
        let mut b = Graph::builder();
        b.node("x");
        let g = b.build();
        let (d, s) = both(&g, &[1.0], &[5.0]);
        assert_eq!((d, s), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_vectors() {
        let g = graph(&[(0, 1, 1.0)], 2);
        let cache = PseudoinverseCache::from_graph(&g).unwrap();
        assert!(matches!(
            ge_distance_dense(&cache, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ge_distance_dense(&cache, &[1.0, f64::NAN], &[1.0, 2.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let n = 50;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let g = graph(&edges, n);
        let opts = SolverOptions { tolerance: 1e-12, max_iterations: Some(2) };
        let h = SolverHandle::from_graph(&g, opts).unwrap();
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = -1.0;
        match h.solve(&b) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn backend_resolution() {
        assert_eq!(Backend::Auto.resolve(10_000), Backend::Dense);
        assert_eq!(Backend::Auto.resolve(10_001), Backend::Solver);
        assert_eq!(Backend::Dense.resolve(1_000_000), Backend::Dense);
    }

    #[test]
    fn pairwise_edge_cases() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0)], 3);
        let one = AttributeMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let d = pairwise_distances(&g, &one, Backend::Dense).unwrap();
        assert_eq!((d.len(), d.get(0, 0)), (1, 0.0));
        let same = AttributeMatrix::from_rows(&vec![vec![1.0, 2.0, 3.0]; 3]).unwrap();
        for b in [Backend::Dense, Backend::Solver] {
            assert!(pairwise_distances(&g, &same, b).unwrap().is_all_zero());
        }
        let wrong = AttributeMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(pairwise_distances(&g, &wrong, Backend::Dense).is_err());
    }
}
