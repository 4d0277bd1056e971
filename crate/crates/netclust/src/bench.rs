//! Runtime scaling of solver-backed GE distance queries on SBM graphs, with
//! a log-log least-squares fit of time against size.

use std::time::Instant;

use netclust_core::ge::{ge_distance_solver, SolverHandle, SolverOptions};
use netclust_core::laplacian::build_laplacian;
use netclust_core::sbm::{sample_sbm, SbmConfig};
use netclust_core::seed::{self, Tag};
use netclust_core::Graph;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::io::{Error, Result};

pub const BENCH_COMMUNITIES: usize = 4;
pub const NODE_MODE_AVG_DEGREE: f64 = 4.0;
pub const BENCH_D_OUT: f64 = 1.0;
/// Node count held fixed in edge mode.
pub const EDGE_MODE_NODES: usize = 20_000;
pub const DEFAULT_NODE_SIZES: [usize; 7] = [100, 300, 1_000, 3_000, 10_000, 30_000, 100_000];
pub const DEFAULT_EDGE_SIZES: [usize; 5] = [40_000, 80_000, 160_000, 320_000, 640_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Nodes,
    Edges,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Nodes => "nodes",
            BenchMode::Edges => "edges",
        }
    }

    pub fn parse(s: &str) -> Option<BenchMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nodes" => Some(BenchMode::Nodes),
            "edges" => Some(BenchMode::Edges),
            _ => None,
        }
    }

    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            BenchMode::Nodes => DEFAULT_NODE_SIZES.to_vec(),
            BenchMode::Edges => DEFAULT_EDGE_SIZES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    /// Natural-log intercept: `ln t = intercept + exponent ln s`.
    pub intercept: f64,
    pub ci95: (f64, f64),
    pub r2: f64,
}

/// Least squares on `ln t = a + b ln s`. Needs at least four points.
pub fn fit_power_law(sizes: &[f64], times: &[f64]) -> Result<PowerFit> {
    if sizes.len() != times.len() {
        return Err(Error::Usage(format!("{} sizes but {} times", sizes.len(), times.len())));
    }
    if sizes.len() < 4 {
        return Err(Error::Usage(format!("a power-law fit needs at least 4 sizes, got {}", sizes.len())));
    }
    if sizes.iter().chain(times).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Usage("sizes and times must be positive and finite".into()));
    }
    let x: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("all sizes are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    let se = (sse / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0).expect("df >= 2").inverse_cdf(0.975);
    Ok(PowerFit { exponent: b, intercept: a, ci95: (b - t * se, b + t * se), r2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// Requested size: node count or target edge count.
    pub target: usize,
    /// Largest connected component actually benchmarked.
    pub nodes: usize,
    pub edges: usize,
    pub setup_seconds: f64,
    /// Mean wall time of one distance query.
    pub query_seconds: f64,
    pub mean_iterations: f64,
}

impl BenchRow {
    /// The realized size the fit is taken against.
    pub fn size(&self, mode: BenchMode) -> usize {
        match mode {
            BenchMode::Nodes => self.nodes,
            BenchMode::Edges => self.edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub mode: BenchMode,
    pub pairs: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub query_fit: PowerFit,
    /// Fit of setup plus all queries, for comparison.
    pub total_fit: PowerFit,
}

pub fn bench_config(mode: BenchMode, size: usize) -> Result<SbmConfig> {
    let cfg = match mode {
        BenchMode::Nodes => {
            if !size.is_multiple_of(BENCH_COMMUNITIES) {
                return Err(Error::Usage(format!("node size {size} is not a multiple of {BENCH_COMMUNITIES}")));
            }
            SbmConfig {
                k: BENCH_COMMUNITIES,
                community_size: size / BENCH_COMMUNITIES,
                avg_degree: NODE_MODE_AVG_DEGREE,
                d_out: BENCH_D_OUT,
                ..SbmConfig::default()
            }
        }
        BenchMode::Edges => SbmConfig {
            k: BENCH_COMMUNITIES,
            community_size: EDGE_MODE_NODES / BENCH_COMMUNITIES,
            avg_degree: 2.0 * size as f64 / EDGE_MODE_NODES as f64,
            d_out: BENCH_D_OUT,
            ..SbmConfig::default()
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One SBM draw reduced to its largest connected component.
pub fn bench_graph(mode: BenchMode, size: usize, seed: u64) -> Result<Graph> {
    let cfg = bench_config(mode, size)?;
    let mut rng = seed::rng(seed, &[Tag::Str("bench-graph"), Tag::Str(mode.name()), Tag::U64(size as u64)]);
    Ok(sample_sbm(&cfg, &mut rng)?.largest_component())
}

/// Runs strictly sequentially on the calling thread. Graph generation is
/// excluded from all timings; Laplacian and solver setup are timed
/// separately from the queries.
pub fn bench_runtime(mode: BenchMode, sizes: &[usize], pairs: usize, seed: u64) -> Result<BenchReport> {
    if sizes.len() < 4 {
        return Err(Error::Usage(format!("a power-law fit needs at least 4 sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("bench sizes must be strictly ascending".into()));
    }
    if pairs == 0 {
        return Err(Error::Usage("need at least one pair per size".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let g = bench_graph(mode, size, seed)?;
        let n = g.node_count();
        let mut rng = seed::rng(seed, &[Tag::Str("bench-pairs"), Tag::Str(mode.name()), Tag::U64(size as u64)]);
        let vectors: Vec<(Vec<f64>, Vec<f64>)> = (0..pairs)
            .map(|_| {
                let mut draw = || (0..n).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>();
                (draw(), draw())
            })
            .collect();

        let start = Instant::now();
        let handle = SolverHandle::new(build_laplacian(&g)?, SolverOptions::default())?;
        let setup_seconds = start.elapsed().as_secs_f64();

        let mut query_total = 0.0;
        let mut iterations = 0usize;
        for (a, b) in &vectors {
            let start = Instant::now();
            let d = ge_distance_solver(&handle, a, b)?;
            query_total += start.elapsed().as_secs_f64();
            std::hint::black_box(d);
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            iterations += handle.solve(&diff)?.iterations;
        }
        rows.push(BenchRow {
            target: size,
            nodes: n,
            edges: g.edge_count(),
            setup_seconds,
            query_seconds: query_total / pairs as f64,
            mean_iterations: iterations as f64 / pairs as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.size(mode) as f64).collect();
    let query: Vec<f64> = rows.iter().map(|r| r.query_seconds).collect();
    let total: Vec<f64> = rows.iter().map(|r| r.setup_seconds + r.query_seconds * pairs as f64).collect();
    Ok(BenchReport {
        mode,
        pairs,
        seed,
        query_fit: fit_power_law(&xs, &query)?,
        total_fit: fit_power_law(&xs, &total)?,
        rows,
    })
}

fn fit_json(f: &PowerFit) -> Value {
    json!({ "exponent": f.exponent, "intercept": f.intercept, "ci95": [f.ci95.0, f.ci95.1], "r2": f.r2 })
}

impl BenchReport {
    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode.name(),
            "pairs_per_size": self.pairs,
            "seed": self.seed,
            "fixed_nodes": (self.mode == BenchMode::Edges).then_some(EDGE_MODE_NODES),
            "communities": BENCH_COMMUNITIES,
            "d_out": BENCH_D_OUT,
            "avg_degree": (self.mode == BenchMode::Nodes).then_some(NODE_MODE_AVG_DEGREE),
            "graph": "largest connected component of one SBM draw",
            "timed": "distance query only; setup reported separately",
            "fit_size": if self.mode == BenchMode::Nodes { "realized |V|" } else { "realized |E|" },
            "query_fit": fit_json(&self.query_fit),
            "setup_plus_query_fit": fit_json(&self.total_fit),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,nodes,edges,setup_seconds,query_seconds,mean_iterations\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:?},{:?},{:?}\n",
                r.target, r.nodes, r.edges, r.setup_seconds, r.query_seconds, r.mean_iterations
            ));
        }
        out
    }
}
