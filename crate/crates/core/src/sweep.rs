//! Parameter sweeps over the synthetic benchmark. Each (value, run) cell
//! draws one dataset from its own derived seed and scores every requested
//! method on it.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::metrics::evaluate;
use crate::pipeline::{cluster_distances, input_distances, Method, PipelineSpec};
use crate::sbm::{generate_dataset, SbmConfig};
use crate::seed::{self, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Sigma,
    Dout,
    /// Total node count; the number of communities follows from it.
    Nodes,
    Nobs,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::Sigma, Experiment::Dout, Experiment::Nodes, Experiment::Nobs];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sigma => "sigma",
            Experiment::Dout => "dout",
            Experiment::Nodes => "nodes",
            Experiment::Nobs => "nobs",
        }
    }

    pub fn parse(s: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name().eq_ignore_ascii_case(s.trim()))
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &SbmConfig, value: f64) -> Result<SbmConfig> {
        let count = |what: &str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{what} must be a non-negative integer, got {value}")))
            }
        };
        let cfg = match self {
            Experiment::Sigma => SbmConfig { sigma: value, ..*base },
            Experiment::Dout => SbmConfig { d_out: value, ..*base },
            Experiment::Nodes => {
                let nodes = count("node count")?;
                if nodes % base.community_size != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "node count {nodes} is not a multiple of the community size {}",
                        base.community_size
                    )));
                }
                SbmConfig { k: nodes / base.community_size, ..*base }
            }
            Experiment::Nobs => SbmConfig { n_obs: count("observation count")?, ..*base },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub values: Vec<f64>,
    pub runs: usize,
    pub base: SbmConfig,
    pub methods: Vec<Method>,
    /// Template for every method; its method and seed are overwritten.
    pub pipeline: PipelineSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub experiment: Experiment,
    pub value: f64,
    pub method: Method,
    pub run: usize,
    pub seed: u64,
    /// `Err` holds the failure message; the run is excluded from summaries.
    pub outcome: core::result::Result<RunScore, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunScore {
    pub ami: f64,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub eps: f64,
    /// Final and initial KL divergence for t-SNE methods.
    pub kl: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: Experiment,
    pub value: f64,
    pub method: Method,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub completed: usize,
    pub failed: usize,
}

pub fn cell_seed(base: u64, experiment: Experiment, value: f64, run: usize) -> u64 {
    seed::derive(base, &[Tag::Str(experiment.name()), Tag::F64(value), Tag::U64(run as u64)])
}

fn run_cell<E: Executor + ?Sized>(spec: &SweepSpec, value: f64, run: usize, exec: &E) -> Vec<SweepRecord> {
    let seed = cell_seed(spec.base.seed, spec.experiment, value, run);
    let record = |method, outcome| SweepRecord { experiment: spec.experiment, value, method, run, seed, outcome };
    let dataset = spec
        .experiment
        .apply(&spec.base, value)
        .and_then(|cfg| generate_dataset(&SbmConfig { seed, ..cfg }));
    let data = match dataset {
        Ok(d) => d,
        Err(e) => return spec.methods.iter().map(|&m| record(m, Err(e.to_string()))).collect(),
    };
    // one distance matrix per input space, shared by the methods using it
    let mut cache: Vec<(bool, Result<crate::distance::DistanceMatrix>)> = Vec::new();
    spec.methods
        .iter()
        .map(|&method| {
            let ps = PipelineSpec { method, seed, ..spec.pipeline };
            let key = method.uses_graph();
            if !cache.iter().any(|(k, _)| *k == key) {
                let d = input_distances(Some(&data.graph), &data.attributes, &ps, exec).map(|(d, _)| d);
                cache.push((key, d));
            }
            let d = &cache.iter().find(|(k, _)| *k == key).expect("cached").1;
            let outcome = d.as_ref().map_err(Clone::clone).and_then(|d| {
                let (clustering, emb) = cluster_distances(d, &ps, exec)?;
                let m = evaluate(&data.truth, &clustering.labeling)?;
                Ok(RunScore {
                    ami: m.ami,
                    n_clusters: m.n_clusters,
                    n_noise: m.n_noise,
                    eps: clustering.eps,
                    kl: emb.map(|e| (e.kl, e.initial_kl)),
                })
            });
            record(method, outcome.map_err(|e| e.to_string()))
        })
        .collect()
}

/// Runs every (value, run) cell through `exec`; records come back ordered
/// by value, run, then method as listed.
pub fn sweep<E: Executor + ?Sized>(spec: &SweepSpec, exec: &E) -> Result<Vec<SweepRecord>> {
    if spec.runs == 0 || spec.values.is_empty() || spec.methods.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value, run and method".into()));
    }
    let cells = spec.values.len() * spec.runs;
    let inner = crate::exec::Sequential;
    let per_cell = exec.map(cells, &|c: usize| run_cell(spec, spec.values[c / spec.runs], c % spec.runs, &inner));
    Ok(per_cell.into_iter().flatten().collect())
}

/// Mean and population standard deviation per (value, method), in first
/// appearance order.
pub fn summarize(records: &[SweepRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Experiment, u64, Method, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|k| k.0 == r.experiment && k.1 == r.value.to_bits() && k.2 == r.method) {
            keys.push((r.experiment, r.value.to_bits(), r.method, r.value));
        }
    }
    keys.into_iter()
        .map(|(experiment, bits, method, value)| {
            let cell: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.experiment == experiment && r.value.to_bits() == bits && r.method == method)
                .collect();
            let scores: Vec<f64> = cell.iter().filter_map(|r| r.outcome.as_ref().ok().map(|s| s.ami)).collect();
            let (mean, std) = mean_std(&scores);
            SummaryRow { experiment, value, method, mean, std, completed: scores.len(), failed: cell.len() - scores.len() }
        })
        .collect()
}

/// NaN for an empty slice.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
