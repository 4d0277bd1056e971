//! The four synthetic sweeps (noise, community mixing, graph size, sample
//! size) for every method, with CSV, table and plot outputs.

use std::path::Path;

use netclust_core::sweep::{summarize, sweep, Experiment, SummaryRow, SweepRecord, SweepSpec};
use netclust_core::{Executor, Method, PipelineSpec, SbmConfig};
use serde_json::{json, Value};

use crate::io::{float, write_json, write_text, Result};
use crate::svg::{line_plot, Series};

pub const DEFAULT_RUNS: usize = 10;

/// Methods in table order.
pub const TABLE_ORDER: [Method; 4] = [Method::GeTsne, Method::Tsne, Method::Ge, Method::Baseline];

pub fn default_grid(experiment: Experiment) -> Vec<f64> {
    match experiment {
        Experiment::Sigma => vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0],
        Experiment::Dout => vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        Experiment::Nodes => vec![100.0, 200.0, 400.0, 800.0],
        Experiment::Nobs => vec![100.0, 200.0, 300.0, 400.0, 500.0],
    }
}

fn axis_label(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::Sigma => "sigma (attribute noise)",
        Experiment::Dout => "d_out (edges leaving the community)",
        Experiment::Nodes => "|V| (nodes)",
        Experiment::Nobs => "|O| (observations)",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub runs: usize,
    pub base: SbmConfig,
    pub pipeline: PipelineSpec,
    pub experiments: Vec<(Experiment, Vec<f64>)>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            runs: DEFAULT_RUNS,
            base: SbmConfig::default(),
            pipeline: PipelineSpec::new(Method::Baseline),
            experiments: Experiment::ALL.iter().map(|&e| (e, default_grid(e))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    /// Mean AMI per swept value for one method.
    pub fn series(&self, method: Method) -> Vec<(f64, f64, f64)> {
        self.summary.iter().filter(|r| r.method == method).map(|r| (r.value, r.mean, r.std)).collect()
    }

    /// Mean over every completed run of `method` in this sweep.
    pub fn overall_mean(&self, method: Method) -> f64 {
        let xs: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.outcome.as_ref().ok().map(|s| s.ami))
            .collect();
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub experiments: Vec<ExperimentResult>,
    /// `(experiment, value, method, failed runs)` for every cell missing runs.
    pub incomplete: Vec<(Experiment, f64, Method, usize)>,
    /// t-SNE runs whose final KL was not below the initial KL.
    pub kl_violations: Vec<(Experiment, f64, Method, usize)>,
    pub tsne_runs: usize,
}

impl ValidationReport {
    pub fn experiment(&self, e: Experiment) -> Option<&ExperimentResult> {
        self.experiments.iter().find(|r| r.experiment == e)
    }

    /// Per-method mean AMI over each sweep, rows in [`TABLE_ORDER`].
    pub fn table(&self) -> Vec<(Method, Vec<f64>)> {
        TABLE_ORDER.iter().map(|&m| (m, self.experiments.iter().map(|r| r.overall_mean(m)).collect())).collect()
    }
}

pub fn run_validation<E: Executor + ?Sized>(opts: &ValidationOptions, exec: &E) -> Result<ValidationReport> {
    let mut experiments = Vec::new();
    let mut incomplete = Vec::new();
    let mut kl_violations = Vec::new();
    let mut tsne_runs = 0;
    for (experiment, values) in &opts.experiments {
        let spec = SweepSpec {
            experiment: *experiment,
            values: values.clone(),
            runs: opts.runs,
            base: opts.base,
            methods: Method::ALL.to_vec(),
            pipeline: opts.pipeline,
        };
        let records = sweep(&spec, exec)?;
        for r in &records {
            if let Ok(score) = &r.outcome {
                if let Some((kl, initial)) = score.kl {
                    tsne_runs += 1;
                    if !(kl < initial) {
                        kl_violations.push((r.experiment, r.value, r.method, r.run));
                    }
                }
            }
        }
        let summary = summarize(&records);
        incomplete.extend(
            summary.iter().filter(|s| s.failed > 0).map(|s| (s.experiment, s.value, s.method, s.failed)),
        );
        experiments.push(ExperimentResult { experiment: *experiment, records, summary });
    }
    Ok(ValidationReport { experiments, incomplete, kl_violations, tsne_runs })
}

pub fn records_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("experiment,value,method,run,ami,n_clusters,n_noise,eps,seed,error\n");
    for r in records {
        let (ami, clusters, noise, eps, err) = match &r.outcome {
            Ok(s) => (float(s.ami), s.n_clusters.to_string(), s.n_noise.to_string(), float(s.eps), String::new()),
            Err(e) => (String::new(), String::new(), String::new(), String::new(), csv_quote(e)),
        };
        out.push_str(&format!(
            "{},{},{},{},{ami},{clusters},{noise},{eps},{},{err}\n",
            r.experiment.name(),
            float(r.value),
            r.method,
            r.run,
            r.seed
        ));
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("experiment,value,method,mean,std,completed,failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.experiment.name(),
            float(r.value),
            r.method,
            float(r.mean),
            float(r.std),
            r.completed,
            r.failed
        ));
    }
    out
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn table_csv(report: &ValidationReport) -> String {
    let mut out = String::from("method");
    for r in &report.experiments {
        out.push(',');
        out.push_str(r.experiment.name());
    }
    out.push('\n');
    for (m, means) in report.table() {
        out.push_str(m.name());
        for v in means {
            out.push(',');
            out.push_str(&float(v));
        }
        out.push('\n');
    }
    out
}

/// Markdown table with the best method per column in bold.
fn table_markdown(report: &ValidationReport) -> String {
    let table = report.table();
    let cols = report.experiments.len();
    let best: Vec<f64> = (0..cols)
        .map(|c| table.iter().map(|(_, v)| v[c]).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut out = String::from("| method |");
    for r in &report.experiments {
        out.push_str(&format!(" {} |", r.experiment.name()));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(cols));
    out.push('\n');
    for (m, means) in &table {
        out.push_str(&format!("| {m} |"));
        for (c, v) in means.iter().enumerate() {
            if *v == best[c] {
                out.push_str(&format!(" **{v:.3}** |"));
            } else {
                out.push_str(&format!(" {v:.3} |"));
            }
        }
        out.push('\n');
    }
    out
}

fn plot(result: &ExperimentResult) -> String {
    let series: Vec<Series> = TABLE_ORDER
        .iter()
        .map(|&m| {
            let pts = result.series(m);
            Series {
                name: m.name().to_string(),
                x: pts.iter().map(|p| p.0).collect(),
                mean: pts.iter().map(|p| p.1).collect(),
                std: pts.iter().map(|p| p.2).collect(),
            }
        })
        .collect();
    line_plot(&format!("AMI vs {}", result.experiment.name()), axis_label(result.experiment), "AMI", &series)
}

pub fn report_json(opts: &ValidationOptions, report: &ValidationReport) -> Value {
    let b = &opts.base;
    let p = &opts.pipeline;
    json!({
        "runs": opts.runs,
        "base": {
            "k": b.k, "community_size": b.community_size, "avg_degree": b.avg_degree,
            "d_out": b.d_out, "sigma": b.sigma, "n_obs": b.n_obs, "seed": b.seed,
        },
        "grids": opts.experiments.iter().map(|(e, v)| (e.name().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "backend": p.backend.name(),
        "solver_tolerance": p.solver.tolerance,
        "tsne": {
            "perplexity": p.tsne.perplexity, "iterations": p.tsne.iterations,
            "exaggeration": p.tsne.exaggeration, "exaggeration_iterations": p.tsne.exaggeration_iterations,
        },
        "dbscan": crate::dbscan_json(&p.dbscan),
        "ami": { "normalization": "arithmetic", "log": "natural", "noise": "singleton" },
        "incomplete_cells": report.incomplete.iter().map(|(e, v, m, f)| json!({
            "experiment": e.name(), "value": v, "method": m.name(), "failed": f,
        })).collect::<Vec<_>>(),
        "tsne_runs": report.tsne_runs,
        "kl_not_decreased": report.kl_violations.iter().map(|(e, v, m, r)| json!({
            "experiment": e.name(), "value": v, "method": m.name(), "run": r,
        })).collect::<Vec<_>>(),
    })
}

/// Runs every sweep and writes `sweep_<name>.csv`, `summary_<name>.csv`,
/// `sweep_<name>.svg`, `table.csv`, `table.md` and `report.json`.
pub fn reproduce_validation<E: Executor + ?Sized>(
    out_dir: &Path,
    opts: &ValidationOptions,
    exec: &E,
) -> Result<ValidationReport> {
    let report = run_validation(opts, exec)?;
    write_outputs(out_dir, opts, &report)?;
    Ok(report)
}

pub fn write_outputs(out_dir: &Path, opts: &ValidationOptions, report: &ValidationReport) -> Result<()> {
    for r in &report.experiments {
        let name = r.experiment.name();
        write_text(&out_dir.join(format!("sweep_{name}.csv")), &records_csv(&r.records))?;
        write_text(&out_dir.join(format!("summary_{name}.csv")), &summary_csv(&r.summary))?;
        write_text(&out_dir.join(format!("sweep_{name}.svg")), &plot(r))?;
    }
    write_text(&out_dir.join("table.csv"), &table_csv(report))?;
    write_text(&out_dir.join("table.md"), &table_markdown(report))?;
    write_json(&out_dir.join("report.json"), &report_json(opts, report))
}
