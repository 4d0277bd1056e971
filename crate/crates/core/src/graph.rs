//! Undirected weighted graphs describing the dependency structure between
//! attribute dimensions, plus their multilayer generalization.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An undirected edge stored once, `u < v` is not required; orientation is
/// the one the edge was first inserted with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected graph with strictly positive edge weights and no self-loops.
///
/// Node indices follow first-appearance order and are the row/column order of
/// every matrix derived from the graph. A higher weight means the endpoints are
/// closer (capacity semantics).
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_ids: Vec<String>,
    edges: Vec<Edge>,
    // CSR adjacency, neighbors sorted by index
    adj_ptr: Vec<usize>,
    adj: Vec<(usize, f64)>,
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    node_ids: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<(usize, usize), usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the dense index of `id`, registering it if unseen.
    pub fn node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.node_ids.len();
        self.node_ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Adds an edge by node identifiers. Repeated pairs sum their weights.
    pub fn edge(&mut self, u: &str, v: &str, weight: f64) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop { line: 0, node: u.to_string() });
        }
        let (a, b) = (self.node(u), self.node(v));
        self.edge_by_index(a, b, weight)
    }

    /// Adds an edge between already registered indices.
    pub fn edge_by_index(&mut self, u: usize, v: usize, weight: f64) -> Result<()> {
        let n = self.node_ids.len();
        if u >= n || v >= n {
            return Err(Error::DimensionMismatch { expected: n, found: u.max(v) + 1 });
        }
        if u == v {
            return Err(Error::SelfLoop { line: 0, node: self.node_ids[u].clone() });
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::NonPositiveWeight { line: 0, weight });
        }
        let key = (u.min(v), u.max(v));
        match self.edge_index.get(&key) {
            Some(&e) => self.edges[e].weight += weight,
            None => {
                self.edge_index.insert(key, self.edges.len());
                self.edges.push(Edge { u, v, weight });
            }
        }
        Ok(())
    }

    pub fn build(self) -> Graph {
        Graph::from_parts(self.node_ids, self.edges)
    }
}

impl Graph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Builds a graph from `n` anonymous nodes named `v0..v{n-1}` and an edge
    /// iterator. Duplicate pairs sum their weights.
    pub fn from_index_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&format!("v{i}"));
        }
        for (u, v, w) in edges {
            b.edge_by_index(u, v, w)?;
        }
        Ok(b.build())
    }

    fn from_parts(node_ids: Vec<String>, edges: Vec<Edge>) -> Graph {
        let n = node_ids.len();
        let mut deg = vec![0usize; n];
        for e in &edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        let mut adj_ptr = vec![0usize; n + 1];
        for i in 0..n {
            adj_ptr[i + 1] = adj_ptr[i] + deg[i];
        }
        let mut fill = adj_ptr.clone();
        let mut adj = vec![(0usize, 0.0f64); adj_ptr[n]];
        for e in &edges {
            adj[fill[e.u]] = (e.v, e.weight);
            fill[e.u] += 1;
            adj[fill[e.v]] = (e.u, e.weight);
            fill[e.v] += 1;
        }
        for i in 0..n {
            adj[adj_ptr[i]..adj_ptr[i + 1]].sort_by_key(|&(j, _)| j);
        }
        Graph { node_ids, edges, adj_ptr, adj }
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[self.adj_ptr[i]..self.adj_ptr[i + 1]]
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.neighbors(i).iter().map(|&(_, w)| w).sum()
    }

    /// Copy of the graph with every weight passed through `f`.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Result<Graph> {
        let mut edges = self.edges.clone();
        for e in &mut edges {
            e.weight = f(e.weight);
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::NonPositiveWeight { line: 0, weight: e.weight });
            }
        }
        Ok(Graph::from_parts(self.node_ids.clone(), edges))
    }

    /// Component index of every node; components are numbered by their
    /// smallest node index.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Connectivity check by traversal from node 0; on failure lists every
    /// component's size, largest first.
    pub fn validate(&self) -> ValidationReport {
        let n = self.node_count();
        if n == 0 {
            return ValidationReport {
                connected: false,
                component_sizes: Vec::new(),
                warnings: vec![ValidationWarning::Empty],
            };
        }
        let (labels, count) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for l in labels {
            sizes[l] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut warnings = Vec::new();
        if n == 1 {
            warnings.push(ValidationWarning::SingleNode);
        }
        ValidationReport { connected: count == 1, component_sizes: sizes, warnings }
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        let report = self.validate();
        if report.connected {
            Ok(())
        } else {
            Err(Error::Disconnected { sizes: report.component_sizes })
        }
    }

    /// Induced subgraph on the largest connected component (ties go to the
    /// component containing the smallest node index). Node order is preserved.
    pub fn largest_component(&self) -> Graph {
        let (labels, count) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let best = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap_or(0);
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut ids = Vec::with_capacity(sizes.get(best).copied().unwrap_or(0));
        for (i, &l) in labels.iter().enumerate() {
            if l == best {
                remap[i] = ids.len();
                ids.push(self.node_ids[i].clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| labels[e.u] == best)
            .map(|e| Edge { u: remap[e.u], v: remap[e.v], weight: e.weight })
            .collect();
        Graph::from_parts(ids, edges)
    }

    /// SHA-256 over the canonical edge list (node ids in index order, then
    /// edges with their weights' bit patterns), hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.node_count() as u64).to_le_bytes());
        for id in &self.node_ids {
            h.update((id.len() as u64).to_le_bytes());
            h.update(id.as_bytes());
        }
        for e in &self.edges {
            let (a, b) = (e.u.min(e.v), e.u.max(e.v));
            h.update((a as u64).to_le_bytes());
            h.update((b as u64).to_le_bytes());
            h.update(e.weight.to_bits().to_le_bytes());
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(bytes.len() * 2);
    for &b in bytes {
        s.push(DIGITS[(b >> 4) as usize] as char);
        s.push(DIGITS[(b & 0xf) as usize] as char);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationWarning {
    Empty,
    /// A single node is connected, but every GE distance on it is zero.
    SingleNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub connected: bool,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.connected
    }
}

/// Intra-layer edge of a multilayer graph, in base-node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub layer: usize,
}

/// Base nodes replicated across layers. A base node has a copy in every layer
/// where it has at least one edge; copies of the same base node are joined by
/// inter-layer couplings (every pair of layers).
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerGraph {
    base_ids: Vec<String>,
    layer_ids: Vec<String>,
    edges: Vec<LayerEdge>,
    declared: Vec<SupraNode>,
}

#[derive(Debug, Default, Clone)]
pub struct MultilayerBuilder {
    base_ids: Vec<String>,
    base_index: BTreeMap<String, usize>,
    layer_ids: Vec<String>,
    layer_index: BTreeMap<String, usize>,
    edges: Vec<LayerEdge>,
    edge_index: BTreeMap<(usize, usize, usize), usize>,
    declared: Vec<SupraNode>,
}

impl MultilayerBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(ids: &mut Vec<String>, index: &mut BTreeMap<String, usize>, id: &str) -> usize {
        if let Some(&i) = index.get(id) {
            return i;
        }
        ids.push(id.to_string());
        index.insert(id.to_string(), ids.len() - 1);
        ids.len() - 1
    }

    pub fn edge(&mut self, u: &str, v: &str, weight: f64, layer: &str) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop { line: 0, node: u.to_string() });
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::NonPositiveWeight { line: 0, weight });
        }
        let a = Self::intern(&mut self.base_ids, &mut self.base_index, u);
        let b = Self::intern(&mut self.base_ids, &mut self.base_index, v);
        let t = Self::intern(&mut self.layer_ids, &mut self.layer_index, layer);
        let key = (a.min(b), a.max(b), t);
        match self.edge_index.get(&key) {
            Some(&e) => self.edges[e].weight += weight,
            None => {
                self.edge_index.insert(key, self.edges.len());
                self.edges.push(LayerEdge { u: a, v: b, weight, layer: t });
            }
        }
        Ok(())
    }

    /// Declares a copy of `base` in `layer` even if it has no intra-layer
    /// edge there.
    pub fn node(&mut self, base: &str, layer: &str) -> SupraNode {
        let node = SupraNode {
            base: Self::intern(&mut self.base_ids, &mut self.base_index, base),
            layer: Self::intern(&mut self.layer_ids, &mut self.layer_index, layer),
        };
        self.declared.push(node);
        node
    }

    pub fn build(self) -> MultilayerGraph {
        MultilayerGraph {
            base_ids: self.base_ids,
            layer_ids: self.layer_ids,
            edges: self.edges,
            declared: self.declared,
        }
    }
}

/// A node copy in the flattened supra-graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SupraNode {
    pub base: usize,
    pub layer: usize,
}

impl MultilayerGraph {
    pub fn builder() -> MultilayerBuilder {
        MultilayerBuilder::new()
    }

    pub fn base_ids(&self) -> &[String] {
        &self.base_ids
    }

    pub fn layer_ids(&self) -> &[String] {
        &self.layer_ids
    }

    pub fn edges(&self) -> &[LayerEdge] {
        &self.edges
    }

    /// Node copies in layer-major order; within a layer, base first-appearance
    /// order.
    pub fn supra_nodes(&self) -> Vec<SupraNode> {
        let mut present = vec![vec![false; self.base_ids.len()]; self.layer_ids.len()];
        for e in &self.edges {
            present[e.layer][e.u] = true;
            present[e.layer][e.v] = true;
        }
        for d in &self.declared {
            present[d.layer][d.base] = true;
        }
        let mut out = Vec::new();
        for (layer, row) in present.iter().enumerate() {
            for (base, &p) in row.iter().enumerate() {
                if p {
                    out.push(SupraNode { base, layer });
                }
            }
        }
        out
    }

    /// Identifier of a supra node: `base@layer`.
    pub fn supra_id(&self, node: SupraNode) -> String {
        format!("{}@{}", self.base_ids[node.base], self.layer_ids[node.layer])
    }

    /// All supra-graph edges as `(u, v, w)` over supra indices: intra-layer
    /// edges first, then couplings between copies of the same base node.
    pub fn supra_edges(&self, coupling_weight: f64) -> Result<(Vec<SupraNode>, Vec<Edge>)> {
        if !(coupling_weight > 0.0) || !coupling_weight.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "coupling weight must be positive, got {coupling_weight}"
            )));
        }
        let nodes = self.supra_nodes();
        let index: BTreeMap<SupraNode, usize> =
            nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            edges.push(Edge {
                u: index[&SupraNode { base: e.u, layer: e.layer }],
                v: index[&SupraNode { base: e.v, layer: e.layer }],
                weight: e.weight,
            });
        }
        let mut copies: Vec<Vec<usize>> = vec![Vec::new(); self.base_ids.len()];
        for (i, n) in nodes.iter().enumerate() {
            copies[n.base].push(i);
        }
        for c in &copies {
            for a in 0..c.len() {
                for b in a + 1..c.len() {
                    edges.push(Edge { u: c[a], v: c[b], weight: coupling_weight });
                }
            }
        }
        Ok((nodes, edges))
    }

    /// The flattened supra-graph as an ordinary graph with ids `base@layer`.
    pub fn flatten(&self, coupling_weight: f64) -> Result<Graph> {
        let (nodes, edges) = self.supra_edges(coupling_weight)?;
        let ids = nodes.iter().map(|&n| self.supra_id(n)).collect();
        Ok(Graph::from_parts(ids, edges))
    }
}
