//! Method variants: Euclidean or GE input space, optionally reduced to two
//! dimensions by t-SNE, then clustered by DBSCAN.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::attributes::AttributeMatrix;
use crate::dbscan::{cluster, Clustering, DbscanConfig, Labeling};
use crate::distance::{euclidean_distances_with, point_distances, DistanceMatrix, Metric};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::ge::{pairwise_distances_with, Backend, GeEngine, SolverOptions};
use crate::graph::Graph;
use crate::tsne::{tsne_embed_with, Embedding, TsneConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Baseline,
    Ge,
    Tsne,
    GeTsne,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Baseline, Method::Ge, Method::Tsne, Method::GeTsne];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Ge => "ge",
            Method::Tsne => "tsne",
            Method::GeTsne => "ge+tsne",
        }
    }

    /// Parses `baseline` or a `+`-separated chain of `ge` and `tsne` stages.
    /// GE measures distances over the graph's nodes, so it can never run on
    /// a t-SNE embedding.
    pub fn parse(s: &str) -> Result<Method> {
        let s = s.trim().to_ascii_lowercase();
        if s == "baseline" {
            return Ok(Method::Baseline);
        }
        let stages: Vec<&str> = s.split('+').map(str::trim).collect();
        for st in &stages {
            match *st {
                "ge" | "tsne" => {}
                "gae" | "n2v" => {
                    return Err(Error::InvalidConfig(format!("method stage `{st}` is not supported")));
                }
                _ => return Err(Error::InvalidConfig(format!("unknown method stage `{st}` in `{s}`"))),
            }
        }
        match stages.as_slice() {
            ["ge"] => Ok(Method::Ge),
            ["tsne"] => Ok(Method::Tsne),
            ["ge", "tsne"] => Ok(Method::GeTsne),
            _ => {
                let ge_after_tsne = stages
                    .iter()
                    .position(|&x| x == "tsne")
                    .is_some_and(|t| stages[t..].contains(&"ge"));
                let why = if ge_after_tsne {
                    "GE cannot follow tSNE: the embedding has no node dimensions left for a graph metric"
                } else {
                    "each stage may appear at most once"
                };
                Err(Error::Composition(format!("`{s}`: {why}")))
            }
        }
    }

    pub fn uses_graph(self) -> bool {
        matches!(self, Method::Ge | Method::GeTsne)
    }

    pub fn uses_tsne(self) -> bool {
        matches!(self, Method::Tsne | Method::GeTsne)
    }

    pub fn input_metric(self) -> Metric {
        if self.uses_graph() {
            Metric::GeneralizedEuclidean
        } else {
            Metric::Euclidean
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSpec {
    pub method: Method,
    pub backend: Backend,
    pub solver: SolverOptions,
    /// Its `seed` is replaced by [`PipelineSpec::seed`].
    pub tsne: TsneConfig,
    pub dbscan: DbscanConfig,
    pub seed: u64,
}

impl PipelineSpec {
    pub fn new(method: Method) -> Self {
        PipelineSpec {
            method,
            backend: Backend::Auto,
            solver: SolverOptions::default(),
            tsne: TsneConfig::default(),
            dbscan: DbscanConfig::default(),
            seed: 0,
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        PipelineSpec { method, ..*self }
    }

    fn tsne_config(&self) -> TsneConfig {
        TsneConfig { seed: self.seed, ..self.tsne }
    }
}

/// Every resolved parameter needed to rerun a result.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub method: Method,
    pub seed: u64,
    pub metric: Metric,
    /// Resolved GE backend, when GE was used.
    pub backend: Option<Backend>,
    pub solver_tolerance: Option<f64>,
    pub graph_fingerprint: Option<String>,
    pub n_observations: usize,
    pub eps: f64,
    pub min_pts: usize,
    pub knee_fallback: bool,
    pub tsne: Option<TsneMetadata>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneMetadata {
    pub perplexity: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub initial_kl: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub labeling: Labeling,
    pub embedding: Option<Embedding>,
    pub metadata: RunMetadata,
}

/// Distances in the method's input space: Euclidean, or GE over `graph`.
pub fn input_distances<E: Executor + ?Sized>(
    graph: Option<&Graph>,
    attrs: &AttributeMatrix,
    spec: &PipelineSpec,
    exec: &E,
) -> Result<(DistanceMatrix, Option<Backend>)> {
    if !spec.method.uses_graph() {
        return Ok((euclidean_distances_with(attrs, exec)?, None));
    }
    let g = graph.ok_or_else(|| Error::InvalidConfig(format!("method `{}` requires a graph", spec.method)))?;
    attrs.check_columns(g.node_count())?;
    let engine = GeEngine::from_graph(g, spec.backend, spec.solver)?;
    let backend = engine.backend();
    Ok((pairwise_distances_with(&engine, attrs, exec)?, Some(backend)))
}

/// Everything after the input distances: optional t-SNE, then DBSCAN.
pub fn cluster_distances<E: Executor + ?Sized>(
    d: &DistanceMatrix,
    spec: &PipelineSpec,
    exec: &E,
) -> Result<(Clustering, Option<Embedding>)> {
    if spec.method.uses_tsne() {
        let emb = tsne_embed_with(d, &spec.tsne_config(), exec)?;
        let d2 = point_distances(&emb.coords, 2);
        Ok((cluster(&d2, &spec.dbscan)?, Some(emb)))
    } else {
        Ok((cluster(d, &spec.dbscan)?, None))
    }
}

pub fn run_pipeline(graph: Option<&Graph>, attrs: &AttributeMatrix, spec: &PipelineSpec) -> Result<PipelineOutput> {
    run_pipeline_with(graph, attrs, spec, &Sequential)
}

pub fn run_pipeline_with<E: Executor + ?Sized>(
    graph: Option<&Graph>,
    attrs: &AttributeMatrix,
    spec: &PipelineSpec,
    exec: &E,
) -> Result<PipelineOutput> {
    let (d, backend) = input_distances(graph, attrs, spec, exec)?;
    let (clustering, embedding) = cluster_distances(&d, spec, exec)?;
    let metadata = RunMetadata {
        method: spec.method,
        seed: spec.seed,
        metric: spec.method.input_metric(),
        backend,
        solver_tolerance: (backend == Some(Backend::Solver)).then_some(spec.solver.tolerance),
        graph_fingerprint: if spec.method.uses_graph() { graph.map(Graph::fingerprint) } else { None },
        n_observations: attrs.len(),
        eps: clustering.eps,
        min_pts: clustering.min_pts,
        knee_fallback: clustering.knee_fallback,
        tsne: embedding.as_ref().map(|e| TsneMetadata {
            perplexity: e.perplexity,
            learning_rate: e.learning_rate,
            iterations: spec.tsne.iterations,
            exaggeration: spec.tsne.exaggeration,
            exaggeration_iterations: spec.tsne.exaggeration_iterations,
            initial_kl: e.initial_kl,
            kl: e.kl,
        }),
    };
    Ok(PipelineOutput { labeling: clustering.labeling, embedding, metadata })
}
