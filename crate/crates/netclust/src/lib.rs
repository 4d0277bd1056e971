//! File formats, configuration, plotting, the runtime bench and the
//! validation sweeps on top of `netclust-core`.

pub mod bench;
pub mod config;
pub mod exec;
pub mod io;
pub mod svg;
pub mod validation;

use netclust_core::pipeline::RunMetadata;
use netclust_core::{DbscanConfig, EpsMode, TsneConfig};
use serde_json::{json, Value};

pub use exec::Pool;

pub fn dbscan_json(cfg: &DbscanConfig) -> Value {
    match cfg.eps {
        EpsMode::Explicit(eps) => json!({ "eps_mode": "explicit", "eps": eps, "min_pts": cfg.min_pts }),
        EpsMode::Knee => json!({ "eps_mode": "knee", "min_pts": cfg.min_pts }),
    }
}

pub fn tsne_config_json(cfg: &TsneConfig) -> Value {
    json!({
        "perplexity": cfg.perplexity,
        "iterations": cfg.iterations,
        "exaggeration": cfg.exaggeration,
        "exaggeration_iterations": cfg.exaggeration_iterations,
        "learning_rate": cfg.learning_rate,
        "momentum": cfg.momentum,
        "final_momentum": cfg.final_momentum,
        "seed": cfg.seed,
    })
}

/// Everything needed to rerun a pipeline invocation.
pub fn run_metadata_json(m: &RunMetadata) -> Value {
    json!({
        "method": m.method.name(),
        "seed": m.seed,
        "metric": m.metric.name(),
        "backend": m.backend.map(|b| b.name()),
        "solver_tolerance": m.solver_tolerance,
        "graph_fingerprint": m.graph_fingerprint,
        "n_observations": m.n_observations,
        "dbscan": {
            "eps": m.eps,
            "min_pts": m.min_pts,
            "knee_fallback": m.knee_fallback,
        },
        "tsne": m.tsne.map(|t| json!({
            "perplexity": t.perplexity,
            "learning_rate": t.learning_rate,
            "iterations": t.iterations,
            "exaggeration": t.exaggeration,
            "exaggeration_iterations": t.exaggeration_iterations,
            "initial_kl": t.initial_kl,
            "kl": t.kl,
        })),
        "ami": { "normalization": "arithmetic", "log": "natural", "noise": "singleton" },
    })
}
