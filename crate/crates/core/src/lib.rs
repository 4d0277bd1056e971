//! Clustering of numeric node attributes on networks.
//!
//! Observations are vectors with one value per graph node. They are compared
//! with the generalized Euclidean (GE) distance
//! `sqrt((a - b)^T L^+ (a - b))`, optionally embedded in two dimensions by
//! t-SNE over that metric, and clustered with DBSCAN. A stochastic block
//! model benchmark and AMI scoring are included for validation.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod attributes;
pub mod dbscan;
pub mod distance;
pub mod edgelist;
pub mod error;
pub mod exec;
pub mod ge;
pub mod graph;
pub mod laplacian;
pub mod metrics;
pub mod pipeline;
pub mod sbm;
pub mod seed;
pub mod sweep;
pub mod tsne;

pub use attributes::AttributeMatrix;
pub use dbscan::{DbscanConfig, EpsMode, Labeling, NOISE};
pub use distance::{DistanceMatrix, Metric};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use ge::{Backend, GeEngine, PseudoinverseCache, SolverHandle, SolverOptions};
pub use graph::{Graph, MultilayerGraph};
pub use laplacian::LaplacianView;
pub use metrics::{ami, EvalMetrics};
pub use pipeline::{Method, PipelineSpec};
pub use sbm::{LabeledDataset, SbmConfig};
pub use tsne::{Embedding, TsneConfig};
