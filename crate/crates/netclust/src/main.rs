use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netclust::bench::{bench_runtime, BenchMode};
use netclust::config::Config;
use netclust::io::{self, Error, Result};
use netclust::validation::{default_grid, reproduce_validation, ValidationOptions};
use netclust::{dbscan_json, run_metadata_json, svg, tsne_config_json, Pool};
use netclust_core::dbscan::cluster;
use netclust_core::distance::{euclidean_distances_with, point_distances};
use netclust_core::ge::{pairwise_distances_with, GeEngine};
use netclust_core::metrics::evaluate;
use netclust_core::pipeline::run_pipeline_with;
use netclust_core::sbm::generate_dataset;
use netclust_core::sweep::Experiment;
use netclust_core::tsne::tsne_embed_with;
use netclust_core::{
    AttributeMatrix, Backend, DbscanConfig, EpsMode, Graph, Labeling, Method, Metric, PipelineSpec, PseudoinverseCache,
    SbmConfig, SolverOptions, TsneConfig,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "netclust", version, about = "Cluster node-attribute observations with graph-aware distances")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an SBM graph with noisy community-indicator observations.
    SbmGen(SbmArgs),
    /// Pairwise distance matrix between observations.
    Dist(DistArgs),
    /// Two-dimensional t-SNE embedding of a distance matrix.
    Tsne(TsneArgs),
    /// DBSCAN on a distance matrix or an embedding.
    Dbscan(DbscanArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Distances, optional t-SNE and DBSCAN in one step.
    Pipeline(PipelineArgs),
    /// Run the four synthetic sweeps for every method.
    Validate(ValidateArgs),
    /// Time solver-backed distance queries over growing graphs.
    BenchRuntime(BenchArgs),
}

#[derive(Args)]
struct SbmArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    community_size: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    d_out: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    n_obs: Option<usize>,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge list `u v [w] [layer]`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Treat the last field of every edge line as its layer.
    #[arg(long)]
    layered: bool,
    /// Weight of the couplings between copies of a node across layers.
    #[arg(long)]
    coupling: Option<f64>,
    /// dense, solver or auto.
    #[arg(long)]
    backend: Option<String>,
    /// Relative residual target of the solver backend.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Observations CSV `observation_id,<node ids>`
    #[arg(long)]
    attrs: PathBuf,
    /// ge or euclidean; defaults to ge when a graph is given.
    #[arg(long)]
    metric: Option<String>,
    /// Directory for persisted pseudoinverses, keyed by graph fingerprint.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TsneFlags {
    /// Effective neighbor count, default 30
    #[arg(long)]
    perplexity: Option<f64>,
    /// Gradient steps, default 1000
    #[arg(long)]
    iterations: Option<usize>,
    /// Step size; max(n / 12, 50) when omitted
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Early exaggeration factor, default 12
    #[arg(long)]
    exaggeration: Option<f64>,
    /// Steps under exaggeration, default 250
    #[arg(long)]
    exaggeration_iterations: Option<usize>,
}

#[derive(Args)]
struct TsneArgs {
    /// Distance CSV.
    #[arg(long)]
    distances: PathBuf,
    #[command(flatten)]
    tsne: TsneFlags,
}

#[derive(Args, Clone)]
struct DbscanFlags {
    /// Neighborhood radius; the k-distance knee when omitted.
    #[arg(long)]
    eps: Option<f64>,
    /// Points within eps, self included, that make a core point; default 4
    #[arg(long)]
    min_pts: Option<usize>,
}

#[derive(Args)]
struct DbscanArgs {
    #[arg(long, conflicts_with = "embedding", required_unless_present = "embedding")]
    distances: Option<PathBuf>,
    /// Embedding CSV `observation_id,x,y`.
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[command(flatten)]
    dbscan: DbscanFlags,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV with `observation_id,label` ground truth.
    #[arg(long)]
    truth: PathBuf,
    /// Labels CSV; noise (-1) becomes singleton clusters.
    #[arg(long)]
    pred: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Observations CSV `observation_id,<node ids>`
    #[arg(long)]
    attrs: PathBuf,
    /// baseline, ge, tsne or ge+tsne.
    #[arg(long)]
    method: Option<String>,
    #[command(flatten)]
    dbscan: DbscanFlags,
    #[command(flatten)]
    tsne: TsneFlags,
    /// Ground truth labels; adds metrics.json.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    runs: Option<usize>,
    /// Comma-separated subset of sigma, dout, nodes, nobs.
    #[arg(long)]
    experiments: Option<String>,
    #[command(flatten)]
    tsne: TsneFlags,
    #[command(flatten)]
    dbscan: DbscanFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// nodes or edges.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated ascending sizes (nodes, or target edges).
    #[arg(long)]
    sizes: Option<String>,
    /// Random attribute pairs timed per size.
    #[arg(long)]
    pairs: Option<usize>,
}

struct Ctx {
    cfg: Config,
    seed: u64,
    out: PathBuf,
    pool: Pool,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("{what}: invalid entry `{}`", x.trim()))))
        .collect()
}

fn tsne_config(ctx: &Ctx, f: &TsneFlags) -> Result<TsneConfig> {
    let d = TsneConfig::default();
    let c = &ctx.cfg;
    let cfg = TsneConfig {
        perplexity: c.resolve("perplexity", f.perplexity, d.perplexity)?,
        iterations: c.resolve("iterations", f.iterations, d.iterations)?,
        learning_rate: c.resolve_opt("learning_rate", f.learning_rate)?,
        exaggeration: c.resolve("exaggeration", f.exaggeration, d.exaggeration)?,
        exaggeration_iterations: c.resolve("exaggeration_iterations", f.exaggeration_iterations, d.exaggeration_iterations)?,
        seed: ctx.seed,
        ..d
    };
    cfg.validate()?;
    Ok(cfg)
}

fn dbscan_config(ctx: &Ctx, f: &DbscanFlags) -> Result<DbscanConfig> {
    let c = &ctx.cfg;
    let eps = match c.resolve_opt("eps", f.eps)? {
        Some(e) => EpsMode::Explicit(e),
        None => EpsMode::Knee,
    };
    let cfg = DbscanConfig { eps, min_pts: c.resolve("min_pts", f.min_pts, DbscanConfig::default().min_pts)? };
    cfg.validate()?;
    Ok(cfg)
}

fn backend(ctx: &Ctx, g: &GraphArgs) -> Result<Backend> {
    let raw = ctx.cfg.resolve("backend", g.backend.clone(), "auto".to_string())?;
    Backend::parse(&raw).ok_or_else(|| usage(format!("unknown backend `{raw}` (dense, solver or auto)")))
}

fn solver_options(ctx: &Ctx, g: &GraphArgs) -> Result<SolverOptions> {
    let d = SolverOptions::default();
    Ok(SolverOptions { tolerance: ctx.cfg.resolve("tolerance", g.tolerance, d.tolerance)?, ..d })
}

fn load_graph(ctx: &Ctx, g: &GraphArgs) -> Result<Option<Graph>> {
    let path = match g.graph.clone().or_else(|| ctx.cfg.raw("graph").map(PathBuf::from)) {
        Some(p) => p,
        None => return Ok(None),
    };
    let layered = g.layered || ctx.cfg.get::<bool>("layered")?.unwrap_or(false);
    let coupling = ctx.cfg.resolve("coupling", g.coupling, 1.0)?;
    let graph = io::read_flat_graph(&path, layered, coupling)?;
    let report = graph.validate();
    if !report.is_ok() {
        for w in &report.warnings {
            eprintln!("warning: {}: {w:?}", path.display());
        }
    }
    Ok(Some(graph))
}

fn load_attrs(path: &Path, graph: Option<&Graph>) -> Result<AttributeMatrix> {
    io::read_attributes(path, graph.map(Graph::node_ids))
}

/// Reorders `labels` (keyed by `ids`) into `order`.
fn align_labels(what: &Path, ids: &[String], labels: &Labeling, order: &[String]) -> Result<Labeling> {
    if ids == order {
        return Ok(labels.clone());
    }
    if ids.len() != order.len() {
        return Err(usage(format!("{}: {} labels for {} observations", what.display(), ids.len(), order.len())));
    }
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let out = order
        .iter()
        .map(|id| {
            pos.get(id.as_str())
                .map(|&i| labels.labels()[i])
                .ok_or_else(|| usage(format!("{}: no label for observation `{id}`", what.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Labeling::new(out))
}

fn cmd_sbm(ctx: &Ctx, a: &SbmArgs) -> Result<()> {
    let d = SbmConfig::default();
    let c = &ctx.cfg;
    let cfg = SbmConfig {
        k: c.resolve("k", a.k, d.k)?,
        community_size: c.resolve("community_size", a.community_size, d.community_size)?,
        avg_degree: c.resolve("avg_degree", a.avg_degree, d.avg_degree)?,
        d_out: c.resolve("d_out", a.d_out, d.d_out)?,
        sigma: c.resolve("sigma", a.sigma, d.sigma)?,
        n_obs: c.resolve("n_obs", a.n_obs, d.n_obs)?,
        seed: ctx.seed,
    };
    let data = generate_dataset(&cfg)?;
    io::write_graph(&ctx.path("graph.edges"), &data.graph)?;
    // node order follows the file, as every later command will read it
    let fingerprint = io::read_flat_graph(&ctx.path("graph.edges"), false, 1.0)?.fingerprint();
    io::write_attributes(&ctx.path("attributes.csv"), &data.attributes, data.graph.node_ids())?;
    io::write_labels(&ctx.path("truth.csv"), data.attributes.ids(), &data.truth)?;
    let mut nodes = String::from("node_id,community\n");
    for (id, c) in data.graph.node_ids().iter().zip(&data.node_truth) {
        nodes.push_str(&format!("{id},{c}\n"));
    }
    io::write_text(&ctx.path("node_truth.csv"), &nodes)?;
    io::write_json(
        &ctx.path("sbm.json"),
        &json!({
            "k": cfg.k, "community_size": cfg.community_size, "avg_degree": cfg.avg_degree,
            "d_out": cfg.d_out, "sigma": cfg.sigma, "n_obs": cfg.n_obs, "seed": cfg.seed,
            "p_in": cfg.p_in(), "p_out": cfg.p_out(),
            "nodes": data.graph.node_count(), "edges": data.graph.edge_count(),
            "graph_fingerprint": fingerprint,
        }),
    )?;
    println!("{} nodes, {} edges, {} observations", data.graph.node_count(), data.graph.edge_count(), cfg.n_obs);
    Ok(())
}

fn dense_engine(g: &Graph, cache_dir: Option<&Path>) -> Result<GeEngine> {
    let fp = g.fingerprint();
    if let Some(dir) = cache_dir {
        if let Some(cache) = io::load_pinv(dir, &fp)? {
            return Ok(GeEngine::Dense(cache));
        }
    }
    let mut cache = PseudoinverseCache::from_graph(g)?;
    cache.set_fingerprint(fp);
    if let Some(dir) = cache_dir {
        io::save_pinv(dir, &cache)?;
    }
    Ok(GeEngine::Dense(cache))
}

fn cmd_dist(ctx: &Ctx, a: &DistArgs) -> Result<()> {
    let graph = load_graph(ctx, &a.graph)?;
    let metric = match a.metric.clone().or_else(|| ctx.cfg.raw("metric").map(str::to_string)) {
        Some(m) if m == "ge" => Metric::GeneralizedEuclidean,
        Some(m) if m == "euclidean" => Metric::Euclidean,
        Some(m) => return Err(usage(format!("unknown metric `{m}` (ge or euclidean)"))),
        None if graph.is_some() => Metric::GeneralizedEuclidean,
        None => Metric::Euclidean,
    };
    let attrs = load_attrs(&a.attrs, graph.as_ref().filter(|_| metric == Metric::GeneralizedEuclidean))?;
    let mut meta = json!({ "metric": metric.name(), "n_observations": attrs.len() });
    let d = match metric {
        Metric::Euclidean => euclidean_distances_with(&attrs, &ctx.pool)?,
        Metric::GeneralizedEuclidean => {
            let g = graph.as_ref().ok_or_else(|| usage("the ge metric needs --graph"))?;
            let backend = backend(ctx, &a.graph)?;
            let options = solver_options(ctx, &a.graph)?;
            let engine = match backend.resolve(g.node_count()) {
                Backend::Dense => dense_engine(g, a.cache_dir.as_deref())?,
                _ => GeEngine::from_graph(g, Backend::Solver, options)?,
            };
            meta["backend"] = json!(engine.backend().name());
            meta["graph_fingerprint"] = json!(g.fingerprint());
            if engine.backend() == Backend::Solver {
                meta["solver_tolerance"] = json!(options.tolerance);
            }
            pairwise_distances_with(&engine, &attrs, &ctx.pool)?
        }
    };
    io::write_distances(&ctx.path("distances.csv"), attrs.ids(), &d)?;
    io::write_json(&ctx.path("dist.json"), &meta)?;
    println!("{} x {} {} distances", d.len(), d.len(), metric.name());
    Ok(())
}

fn cmd_tsne(ctx: &Ctx, a: &TsneArgs) -> Result<()> {
    let (ids, d) = io::read_distances(&a.distances, Metric::Euclidean)?;
    let cfg = tsne_config(ctx, &a.tsne)?;
    let e = tsne_embed_with(&d, &cfg, &ctx.pool)?;
    io::write_embedding(&ctx.path("embedding.csv"), &ids, &e)?;
    let mut meta = tsne_config_json(&cfg);
    meta["effective_perplexity"] = json!(e.perplexity);
    meta["effective_learning_rate"] = json!(e.learning_rate);
    meta["initial_kl"] = json!(e.initial_kl);
    meta["kl"] = json!(e.kl);
    io::write_json(&ctx.path("tsne.json"), &meta)?;
    println!("KL {:.4} -> {:.4}", e.initial_kl, e.kl);
    Ok(())
}

fn cmd_dbscan(ctx: &Ctx, a: &DbscanArgs) -> Result<()> {
    let cfg = dbscan_config(ctx, &a.dbscan)?;
    let (ids, d, coords) = match (&a.distances, &a.embedding) {
        (Some(p), _) => {
            let (ids, d) = io::read_distances(p, Metric::Euclidean)?;
            (ids, d, None)
        }
        (None, Some(p)) => {
            let (ids, coords) = io::read_embedding(p)?;
            (ids, point_distances(&coords, 2), Some(coords))
        }
        (None, None) => return Err(usage("give --distances or --embedding")),
    };
    let c = cluster(&d, &cfg)?;
    io::write_labels(&ctx.path("labels.csv"), &ids, &c.labeling)?;
    if let Some(coords) = coords {
        io::write_text(&ctx.path("embedding.svg"), &svg::scatter("DBSCAN clusters", &coords, c.labeling.labels()))?;
    }
    let mut meta = dbscan_json(&cfg);
    meta["eps"] = json!(c.eps);
    meta["knee_fallback"] = json!(c.knee_fallback);
    meta["n_clusters"] = json!(c.labeling.n_clusters());
    meta["n_noise"] = json!(c.labeling.n_noise());
    io::write_json(&ctx.path("dbscan.json"), &meta)?;
    if c.knee_fallback {
        eprintln!("warning: flat k-distance curve, eps set to the median k-distance");
    }
    println!("eps {:.6}: {} clusters, {} noise", c.eps, c.labeling.n_clusters(), c.labeling.n_noise());
    Ok(())
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let (truth_ids, truth) = io::read_labels(&a.truth)?;
    let (pred_ids, pred) = io::read_labels(&a.pred)?;
    let pred = align_labels(&a.pred, &pred_ids, &pred, &truth_ids)?;
    let m = evaluate(&truth, &pred)?;
    io::write_json(&ctx.path("metrics.json"), &io::metrics_json(&m))?;
    println!("AMI {:.6} ({} clusters, {} noise)", m.ami, m.n_clusters, m.n_noise);
    Ok(())
}

fn cmd_pipeline(ctx: &Ctx, a: &PipelineArgs) -> Result<()> {
    let raw = ctx.cfg.resolve("method", a.method.clone(), "ge+tsne".to_string())?;
    let method = Method::parse(&raw)?;
    let graph = load_graph(ctx, &a.graph)?;
    let attrs = load_attrs(&a.attrs, graph.as_ref().filter(|_| method.uses_graph()))?;
    let spec = PipelineSpec {
        method,
        backend: backend(ctx, &a.graph)?,
        solver: solver_options(ctx, &a.graph)?,
        tsne: tsne_config(ctx, &a.tsne)?,
        dbscan: dbscan_config(ctx, &a.dbscan)?,
        seed: ctx.seed,
    };
    let out = run_pipeline_with(graph.as_ref(), &attrs, &spec, &ctx.pool)?;
    io::write_labels(&ctx.path("labels.csv"), attrs.ids(), &out.labeling)?;
    if let Some(e) = &out.embedding {
        io::write_embedding(&ctx.path("embedding.csv"), attrs.ids(), e)?;
        let title = format!("{method} embedding");
        io::write_text(&ctx.path("embedding.svg"), &svg::scatter(&title, &e.coords, out.labeling.labels()))?;
    }
    let mut meta = run_metadata_json(&out.metadata);
    meta["tsne_config"] = tsne_config_json(&spec.tsne);
    meta["dbscan_config"] = dbscan_json(&spec.dbscan);
    meta["requested_backend"] = json!(spec.backend.name());
    let truth_path = a.truth.clone().or_else(|| ctx.cfg.raw("truth").map(PathBuf::from));
    if let Some(path) = truth_path {
        let (ids, truth) = io::read_labels(&path)?;
        let truth = align_labels(&path, &ids, &truth, attrs.ids())?;
        let m = evaluate(&truth, &out.labeling)?;
        io::write_json(&ctx.path("metrics.json"), &io::metrics_json(&m))?;
        println!("AMI {:.6}", m.ami);
    }
    io::write_json(&ctx.path("metadata.json"), &meta)?;
    println!(
        "{method}: {} clusters, {} noise, eps {:.6}",
        out.labeling.n_clusters(),
        out.labeling.n_noise(),
        out.metadata.eps
    );
    Ok(())
}

fn cmd_validate(ctx: &Ctx, a: &ValidateArgs) -> Result<()> {
    let mut opts = ValidationOptions { runs: ctx.cfg.resolve("runs", a.runs, 10)?, ..Default::default() };
    opts.base.seed = ctx.seed;
    opts.pipeline.tsne = tsne_config(ctx, &a.tsne)?;
    opts.pipeline.dbscan = dbscan_config(ctx, &a.dbscan)?;
    if let Some(list) = a.experiments.clone().or_else(|| ctx.cfg.raw("experiments").map(str::to_string)) {
        opts.experiments = list
            .split(',')
            .map(|s| {
                Experiment::parse(s)
                    .map(|e| (e, default_grid(e)))
                    .ok_or_else(|| usage(format!("unknown experiment `{}`", s.trim())))
            })
            .collect::<Result<_>>()?;
    }
    let report = reproduce_validation(&ctx.out, &opts, &ctx.pool)?;
    for (m, means) in report.table() {
        let cols: Vec<String> = means.iter().map(|v| format!("{v:.3}")).collect();
        println!("{:<9} {}", m.name(), cols.join("  "));
    }
    for (e, v, m, failed) in &report.incomplete {
        eprintln!("incomplete: {} = {v}, {m}: {failed} failed runs", e.name());
    }
    Ok(())
}

fn cmd_bench(ctx: &Ctx, a: &BenchArgs) -> Result<()> {
    let raw = ctx.cfg.resolve("mode", a.mode.clone(), "nodes".to_string())?;
    let mode = BenchMode::parse(&raw).ok_or_else(|| usage(format!("unknown bench mode `{raw}` (nodes or edges)")))?;
    let sizes = match a.sizes.clone().or_else(|| ctx.cfg.raw("sizes").map(str::to_string)) {
        Some(s) => parse_list("sizes", &s)?,
        None => mode.default_sizes(),
    };
    let pairs = ctx.cfg.resolve("pairs", a.pairs, 20)?;
    let report = bench_runtime(mode, &sizes, pairs, ctx.seed)?;
    io::write_text(&ctx.path(&format!("bench_{}.csv", mode.name())), &report.to_csv())?;
    io::write_json(&ctx.path(&format!("bench_{}.json", mode.name())), &report.to_json())?;
    let f = &report.query_fit;
    println!("exponent {:.3} (95% CI {:.3} to {:.3}), R^2 {:.3}", f.exponent, f.ci95.0, f.ci95.1, f.r2);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cfg.resolve("seed", cli.seed, 0)?;
    let threads = cfg.resolve("threads", cli.threads, 0)?;
    let out = cli.out.clone().or_else(|| cfg.raw("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|source| Error::Io { path: out.clone(), source })?;
    let pool = Pool::new(threads).map_err(|e| usage(format!("thread pool: {e}")))?;
    let ctx = Ctx { cfg, seed, out, pool };
    match &cli.command {
        Command::SbmGen(a) => cmd_sbm(&ctx, a),
        Command::Dist(a) => cmd_dist(&ctx, a),
        Command::Tsne(a) => cmd_tsne(&ctx, a),
        Command::Dbscan(a) => cmd_dbscan(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Pipeline(a) => cmd_pipeline(&ctx, a),
        Command::Validate(a) => cmd_validate(&ctx, a),
        Command::BenchRuntime(a) => cmd_bench(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
