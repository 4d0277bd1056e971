//! File formats. All float output uses the shortest representation that
//! round-trips, so identical values always produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use netclust_core::edgelist::{parse_edge_list, write_edge_list, ParsedGraph};
use netclust_core::ge::PseudoinverseCache;
use netclust_core::metrics::EvalMetrics;
use netclust_core::{AttributeMatrix, DistanceMatrix, Embedding, Graph, Labeling, Metric};
use serde_json::{json, Value};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Core { path: PathBuf, source: netclust_core::Error },
    #[error(transparent)]
    Compute(#[from] netclust_core::Error),
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

fn core_err(path: &Path) -> impl FnOnce(netclust_core::Error) -> Error + '_ {
    move |source| Error::Core { path: path.to_path_buf(), source }
}

pub fn float(v: f64) -> String {
    format!("{v:?}")
}

fn parse_float(path: &Path, line: u64, raw: &str) -> Result<f64> {
    raw.trim().parse().map_err(|_| format_err(path, format!("line {line}: invalid number `{raw}`")))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))
}

pub fn read_graph(path: &Path, weighted: bool, layered: bool) -> Result<ParsedGraph> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_edge_list(&text, weighted, layered).map_err(core_err(path))
}

/// Reads a single-layer graph, or flattens a multilayer one into its
/// supra-graph with nodes named `base@layer`.
pub fn read_flat_graph(path: &Path, layered: bool, coupling: f64) -> Result<Graph> {
    match read_graph(path, true, layered)? {
        ParsedGraph::Single(g) => Ok(g),
        ParsedGraph::Multilayer(mg) => mg.flatten(coupling).map_err(core_err(path)),
    }
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_text(path, &write_edge_list(g))
}

/// Header `observation_id,<node ids>`. When `node_order` is given, columns
/// are matched by node id and reordered to it.
pub fn read_attributes(path: &Path, node_order: Option<&[String]>) -> Result<AttributeMatrix> {
    let mut rdr = csv_reader(path)?;
    let header: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(format_err(path, "expected a header `observation_id,<node ids>`"));
    }
    let cols = &header[1..];
    let perm: Vec<usize> = match node_order {
        None => (0..cols.len()).collect(),
        Some(order) => {
            if order.len() != cols.len() {
                return Err(format_err(
                    path,
                    format!("{} attribute columns but the graph has {} nodes", cols.len(), order.len()),
                ));
            }
            order
                .iter()
                .map(|id| {
                    cols.iter()
                        .position(|c| c == id)
                        .ok_or_else(|| format_err(path, format!("no attribute column for graph node `{id}`")))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        if rec.len() != header.len() {
            return Err(format_err(path, format!("line {line}: expected {} fields, found {}", header.len(), rec.len())));
        }
        ids.push(rec[0].to_string());
        let row: Vec<f64> = (1..rec.len()).map(|j| parse_float(path, line, &rec[j])).collect::<Result<_>>()?;
        values.extend(perm.iter().map(|&j| row[j]));
    }
    AttributeMatrix::new(ids, perm.len(), values).map_err(core_err(path))
}

pub fn write_attributes(path: &Path, attrs: &AttributeMatrix, node_ids: &[String]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["observation_id".to_string()];
    header.extend(node_ids.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for (id, row) in attrs.ids().iter().zip(attrs.rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|&v| float(v)));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Header row and first column both carry observation ids.
pub fn write_distances(path: &Path, ids: &[String], d: &DistanceMatrix) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["observation_id".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, id) in ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(d.row(i).iter().map(|&v| float(v)));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_distances(path: &Path, metric: Metric) -> Result<(Vec<String>, DistanceMatrix)> {
    let mut rdr = csv_reader(path)?;
    let header: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let n = header.len().saturating_sub(1);
    let mut ids = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * n);
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        if rec.len() != n + 1 {
            return Err(format_err(path, format!("line {line}: expected {} fields, found {}", n + 1, rec.len())));
        }
        if rec[0] != header[k + 1] {
            return Err(format_err(path, format!("line {line}: row id `{}` does not match column `{}`", &rec[0], header[k + 1])));
        }
        ids.push(rec[0].to_string());
        for j in 1..=n {
            values.push(parse_float(path, line, &rec[j])?);
        }
    }
    if ids.len() != n {
        return Err(format_err(path, format!("{} rows for {n} columns", ids.len())));
    }
    let d = DistanceMatrix::from_vec(n, values, metric).map_err(core_err(path))?;
    Ok((ids, d))
}

pub fn write_embedding(path: &Path, ids: &[String], e: &Embedding) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["observation_id", "x", "y"]).map_err(csv_err(path))?;
    for (i, id) in ids.iter().enumerate() {
        let [x, y] = e.point(i);
        w.write_record([id.as_str(), &float(x), &float(y)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Returns ids and row-major `n x 2` coordinates.
pub fn read_embedding(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let mut rdr = csv_reader(path)?;
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        if rec.len() != 3 {
            return Err(format_err(path, format!("line {line}: expected `observation_id,x,y`")));
        }
        ids.push(rec[0].to_string());
        coords.push(parse_float(path, line, &rec[1])?);
        coords.push(parse_float(path, line, &rec[2])?);
    }
    Ok((ids, coords))
}

/// `observation_id,label,eval_label`; `eval_label` expands noise into
/// singleton clusters.
pub fn write_labels(path: &Path, ids: &[String], labels: &Labeling) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["observation_id", "label", "eval_label"]).map_err(csv_err(path))?;
    let expanded = labels.singleton_expanded();
    for ((id, l), e) in ids.iter().zip(labels.labels()).zip(expanded.labels()) {
        w.write_record([id.as_str(), &l.to_string(), &e.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads the `label` column of any CSV with `observation_id` and `label`
/// columns.
pub fn read_labels(path: &Path) -> Result<(Vec<String>, Labeling)> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| format_err(path, format!("missing `{name}` column")))
    };
    let (id_col, label_col) = (col("observation_id")?, col("label")?);
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let raw = rec.get(label_col).unwrap_or("");
        let l: i64 = raw
            .parse()
            .map_err(|_| format_err(path, format!("line {}: invalid label `{raw}`", k + 2)))?;
        ids.push(rec.get(id_col).unwrap_or("").to_string());
        labels.push(l);
    }
    Ok((ids, Labeling::new(labels)))
}

pub fn metrics_json(m: &EvalMetrics) -> Value {
    json!({ "ami": m.ami, "n_clusters": m.n_clusters, "n_noise": m.n_noise })
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    write_text(path, &text)
}

const PINV_MAGIC: &[u8; 8] = b"NCPINV01";

pub fn pinv_cache_path(dir: &Path, fingerprint: &str) -> PathBuf {
    dir.join(format!("{fingerprint}.pinv"))
}

/// Binary layout: magic, dimension (u64 LE), fingerprint length and bytes,
/// then the row-major matrix as f64 LE.
pub fn save_pinv(dir: &Path, cache: &PseudoinverseCache) -> Result<PathBuf> {
    let fp = cache
        .fingerprint()
        .ok_or_else(|| Error::Usage("pseudoinverse has no graph fingerprint".into()))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = pinv_cache_path(dir, fp);
    let mut buf = Vec::with_capacity(32 + fp.len() + 8 * cache.values().len());
    buf.extend_from_slice(PINV_MAGIC);
    buf.extend_from_slice(&(cache.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(fp.len() as u64).to_le_bytes());
    buf.extend_from_slice(fp.as_bytes());
    for v in cache.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    f.write_all(&buf).map_err(io_err(&path))?;
    Ok(path)
}

/// `Ok(None)` when no cache file exists for this fingerprint.
pub fn load_pinv(dir: &Path, fingerprint: &str) -> Result<Option<PseudoinverseCache>> {
    let path = pinv_cache_path(dir, fingerprint);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let bad = || format_err(&path, "corrupt pseudoinverse cache");
    let u64_at = |at: usize| -> Result<u64> {
        let raw = bytes.get(at..at + 8).ok_or_else(bad)?;
        Ok(u64::from_le_bytes(raw.try_into().expect("8 bytes")))
    };
    if bytes.get(..8) != Some(PINV_MAGIC.as_slice()) {
        return Err(bad());
    }
    let dim = u64_at(8)? as usize;
    let fp_len = u64_at(16)? as usize;
    let fp = bytes.get(24..24 + fp_len).ok_or_else(bad)?;
    if fp != fingerprint.as_bytes() {
        return Err(format_err(&path, "fingerprint mismatch"));
    }
    let body = &bytes[24 + fp_len..];
    if body.len() != 8 * dim * dim {
        return Err(bad());
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(Some(
        PseudoinverseCache::from_parts(dim, values, Some(fingerprint.to_string())).map_err(core_err(&path))?,
    ))
}
