//! Edge-list text format and its JSON mirror.
//!
//! ```text
//! # comment
//! node W
//! X -> Y
//! Y -- Z
//! ```
//!
//! `;` also separates statements, so `"X -> Y; Y -- Z"` is a valid graph.
//! Nodes are indexed in order of first appearance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Edge, EdgeKind, NodeId, Pdag};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<String>,
    edges: Vec<JsonEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEdge {
    a: String,
    b: String,
    kind: EdgeKind,
}

struct Interner {
    labels: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl Interner {
    fn id(&mut self, label: &str) -> NodeId {
        if let Some(&v) = self.ids.get(label) {
            return v;
        }
        let v = NodeId(self.labels.len());
        self.labels.push(label.to_string());
        self.ids.insert(label.to_string(), v);
        v
    }
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && !s.chars().any(|c| c.is_whitespace() || c == ',' || c == ';' || c == '#')
        && !s.contains("->")
        && !s.contains("<-")
        && !s.contains("--")
}

impl Pdag {
    /// Parses the edge-list text format.
    pub fn parse(text: &str) -> Result<Pdag> {
        let mut names = Interner { labels: Vec::new(), ids: HashMap::new() };
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for stmt in line.split(';') {
                let stmt = stmt.trim();
                if stmt.is_empty() {
                    continue;
                }
                let err = |message: String| Error::Parse { line: lineno + 1, message };
                if let Some(rest) = stmt.strip_prefix("node ") {
                    let label = rest.trim();
                    if !valid_label(label) {
                        return Err(err(format!("bad node label `{label}`")));
                    }
                    names.id(label);
                    continue;
                }
                let (lhs, op, rhs) = ["->", "<-", "--"]
                    .iter()
                    .find_map(|op| stmt.split_once(op).map(|(l, r)| (l.trim(), *op, r.trim())))
                    .ok_or_else(|| err(format!("expected `A -> B` or `A -- B`, got `{stmt}`")))?;
                if !valid_label(lhs) || !valid_label(rhs) {
                    return Err(err(format!("bad edge `{stmt}`")));
                }
                let (a, b) = (names.id(lhs), names.id(rhs));
                edges.push(match op {
                    "->" => Edge::directed(a, b),
                    "<-" => Edge::directed(b, a),
                    _ => Edge::undirected(a, b),
                });
            }
        }
        Pdag::new(names.labels, edges)
    }

    /// Canonical text form: one `node` line per node in index order, then
    /// edges in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in self.labels() {
            out.push_str("node ");
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&self.edges_text());
        out
    }

    /// Edge lines only, without node declarations for connected nodes.
    pub fn edges_text(&self) -> String {
        let mut out = String::new();
        for e in self.edges() {
            let op = match e.kind {
                EdgeKind::Directed => "->",
                EdgeKind::Undirected => "--",
            };
            out.push_str(&format!("{} {} {}\n", self.label(e.a), op, self.label(e.b)));
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Pdag> {
        let j: JsonGraph = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        let edges: Vec<(String, String, EdgeKind)> =
            j.edges.into_iter().map(|e| (e.a, e.b, e.kind)).collect();
        Pdag::build(&j.nodes, &edges)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let j = JsonGraph {
            nodes: self.labels().to_vec(),
            edges: self
                .edges()
                .iter()
                .map(|e| JsonEdge {
                    a: self.label(e.a).to_string(),
                    b: self.label(e.b).to_string(),
                    kind: e.kind,
                })
                .collect(),
        };
        serde_json::to_value(j).expect("graph serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    /// Parses JSON if the text starts with `{`, the edge-list format otherwise.
    pub fn parse_any(text: &str) -> Result<Pdag> {
        if text.trim_start().starts_with('{') {
            Pdag::from_json(text)
        } else {
            Pdag::parse(text)
        }
    }
}
