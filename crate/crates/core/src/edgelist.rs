//! Whitespace-separated edge-list text: `u v [w] [layer]` per line, `#`
//! starts a comment.
//!
//! With `weighted` set the weight column is optional and defaults to 1.0.
//! With `layered` set the layer is always the last field. Repeated pairs sum
//! their weights.

use alloc::format;
use alloc::string::{String, ToString};

use core::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, MultilayerBuilder, MultilayerGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedGraph {
    Single(Graph),
    Multilayer(MultilayerGraph),
}

impl ParsedGraph {
    pub fn into_single(self) -> Option<Graph> {
        match self {
            ParsedGraph::Single(g) => Some(g),
            ParsedGraph::Multilayer(_) => None,
        }
    }
}

struct Line<'a> {
    u: &'a str,
    v: &'a str,
    weight: f64,
    layer: Option<&'a str>,
}

fn parse_line(lineno: usize, text: &str, weighted: bool, layered: bool) -> Result<Option<Line<'_>>> {
    let content = match text.find('#') {
        Some(k) => &text[..k],
        None => text,
    };
    let mut fields: [&str; 5] = [""; 5];
    let mut count = 0;
    for f in content.split_whitespace() {
        if count == fields.len() {
            count += 1;
            break;
        }
        fields[count] = f;
        count += 1;
    }
    if count == 0 {
        return Ok(None);
    }
    let min = 2 + layered as usize;
    let max = min + weighted as usize;
    if count < min || count > max {
        let expected = match (weighted, layered) {
            (false, false) => "`u v`",
            (true, false) => "`u v [w]`",
            (false, true) => "`u v layer`",
            (true, true) => "`u v [w] layer`",
        };
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {expected}, found {count} fields"),
        });
    }
    let layer = if layered { Some(fields[count - 1]) } else { None };
    let weight = if count == max && weighted {
        let raw = fields[2];
        raw.parse::<f64>().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid weight `{raw}`"),
        })?
    } else {
        1.0
    };
    let (u, v) = (fields[0], fields[1]);
    if u == v {
        return Err(Error::SelfLoop { line: lineno, node: u.to_string() });
    }
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::NonPositiveWeight { line: lineno, weight });
    }
    Ok(Some(Line { u, v, weight, layer }))
}

/// Parses an edge list. Line numbers in errors are 1-based.
pub fn parse_edge_list(text: &str, weighted: bool, layered: bool) -> Result<ParsedGraph> {
    if layered {
        let mut b = MultilayerBuilder::new();
        for (k, raw) in text.lines().enumerate() {
            if let Some(l) = parse_line(k + 1, raw, weighted, true)? {
                b.edge(l.u, l.v, l.weight, l.layer.unwrap_or_default())?;
            }
        }
        Ok(ParsedGraph::Multilayer(b.build()))
    } else {
        let mut b = GraphBuilder::new();
        for (k, raw) in text.lines().enumerate() {
            if let Some(l) = parse_line(k + 1, raw, weighted, false)? {
                b.edge(l.u, l.v, l.weight)?;
            }
        }
        Ok(ParsedGraph::Single(b.build()))
    }
}

/// Writes `u v w` lines in stored edge order, which reproduces the node order
/// on reload. Weights use the shortest exact decimal form.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let ids = g.node_ids();
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {:?}", ids[e.u], ids[e.v], e.weight);
    }
    out
}

/// Writes `u v w layer` lines.
pub fn write_multilayer_edge_list(g: &MultilayerGraph) -> String {
    let mut out = String::new();
    let (ids, layers) = (g.base_ids(), g.layer_ids());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {:?} {}", ids[e.u], ids[e.v], e.weight, layers[e.layer]);
    }
    out
}
