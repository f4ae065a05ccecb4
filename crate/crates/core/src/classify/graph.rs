//! The equivalence graph and its line-oriented and DOT renderings.
//!
//! Line format, one record per line:
//!
//! ```text
//! node <fingerprint> <dim> <rays> <picard> <label,label,...|->
//! edge <from-fingerprint> <to-fingerprint> <codim>
//! ```
//!
//! An edge `a -> b` with codimension `c` means `b` is the blow-up of `a`
//! along an invariant subvariety of codimension `c`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::fan::Fan;
use crate::{Error, Result};

use super::iso::IsoKey;

#[derive(Clone, Debug)]
pub struct GraphNode {
    pub key: IsoKey,
    pub fan: Fan,
    pub labels: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub codim: usize,
}

#[derive(Clone, Debug)]
pub struct EquivalenceGraph {
    pub dim: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl EquivalenceGraph {
    /// Nodes are sorted by key and edges by `(from, to, codim)`. Fails if two
    /// keys share a fingerprint.
    pub fn new(dim: usize, mut nodes: Vec<GraphNode>, edges: Vec<GraphEdge>) -> Result<Self> {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].key.cmp(&nodes[b].key));
        let mut new_index = vec![0; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut slots: Vec<Option<GraphNode>> = nodes.drain(..).map(Some).collect();
        let nodes: Vec<GraphNode> = order.iter().map(|&i| slots[i].take().expect("permutation")).collect();
        let mut seen = HashMap::new();
        for n in &nodes {
            if let Some(prev) = seen.insert(n.key.fingerprint(), &n.key) {
                if prev != &n.key {
                    return Err(Error::InvalidFan(format!("fingerprint collision at {}", n.key.fingerprint())));
                }
            }
        }
        let mut edges: Vec<GraphEdge> = edges
            .into_iter()
            .map(|e| GraphEdge { from: new_index[e.from], to: new_index[e.to], codim: e.codim })
            .collect();
        edges.sort();
        edges.dedup();
        Ok(EquivalenceGraph { dim, nodes, edges })
    }

    pub fn find(&self, key: &IsoKey) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.key.cmp(key)).ok()
    }

    pub fn summary(&self) -> GraphSummary {
        let fps: Vec<String> = self.nodes.iter().map(|n| n.key.fingerprint()).collect();
        GraphSummary {
            nodes: self
                .nodes
                .iter()
                .zip(&fps)
                .map(|(n, fp)| NodeLine {
                    fingerprint: fp.clone(),
                    dim: n.fan.dim(),
                    rays: n.fan.n_rays(),
                    picard: n.fan.picard_number(),
                    labels: n.labels.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeLine { from: fps[e.from].clone(), to: fps[e.to].clone(), codim: e.codim })
                .collect(),
        }
    }

    pub fn to_lines(&self) -> String {
        self.summary().to_lines()
    }

    pub fn to_dot(&self) -> String {
        self.summary().to_dot()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLine {
    pub fingerprint: String,
    pub dim: usize,
    pub rays: usize,
    pub picard: usize,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLine {
    pub from: String,
    pub to: String,
    pub codim: usize,
}

/// A graph as stored on disk: invariants and fingerprints, no fans.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSummary {
    pub nodes: Vec<NodeLine>,
    pub edges: Vec<EdgeLine>,
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s != "-" && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl GraphSummary {
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            let labels = if n.labels.is_empty() { "-".to_string() } else { n.labels.join(",") };
            let _ = writeln!(s, "node {} {} {} {} {labels}", n.fingerprint, n.dim, n.rays, n.picard);
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {}", e.from, e.to, e.codim);
        }
        s
    }

    pub fn parse(text: &str) -> Result<GraphSummary> {
        let mut g = GraphSummary::default();
        let mut known = HashMap::new();
        for (ln, line) in text.lines().enumerate() {
            let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
            let num = |s: &str| s.parse::<usize>().map_err(|_| err("expected a number"));
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["node", fp, dim, rays, picard, labels] => {
                    if known.insert(fp.to_string(), ()).is_some() {
                        return Err(err("duplicate node"));
                    }
                    let labels: Vec<String> =
                        if *labels == "-" { Vec::new() } else { labels.split(',').map(str::to_string).collect() };
                    if labels.iter().any(|l| !valid_label(l)) {
                        return Err(err("bad label"));
                    }
                    g.nodes.push(NodeLine {
                        fingerprint: fp.to_string(),
                        dim: num(dim)?,
                        rays: num(rays)?,
                        picard: num(picard)?,
                        labels,
                    });
                }
                ["edge", from, to, codim] => {
                    if !known.contains_key(*from) || !known.contains_key(*to) {
                        return Err(err("edge names an unknown node"));
                    }
                    g.edges.push(EdgeLine { from: from.to_string(), to: to.to_string(), codim: num(codim)? });
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        Ok(g)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph blowups {\n");
        for n in &self.nodes {
            let name = if n.labels.is_empty() { n.fingerprint.clone() } else { n.labels.join("/") };
            let _ = writeln!(s, "  \"{}\" [label=\"{name}\\nrho={}\"];", n.fingerprint, n.picard);
        }
        for e in &self.edges {
            let _ = writeln!(s, "  \"{}\" -> \"{}\" [label=\"{}\"];", e.from, e.to, e.codim);
        }
        s.push_str("}\n");
        s
    }

    pub fn node_index(&self, fingerprint: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.fingerprint == fingerprint)
    }
}
