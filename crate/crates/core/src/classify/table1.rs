//! Expected blow-up relations among the nonsingular toric Fano 4-folds, and
//! their verification against an enumerated equivalence graph.
//!
//! Expectation format, one row per line:
//!
//! ```text
//! 13 E3 <- B3:2 B4:2 B5:4
//! 117 Vt4 <-
//! ```
//!
//! meaning that class `E3` is the blow-up of `B3` and of `B4` along
//! codimension-2 centres, of `B5` along a point, and of nothing else.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::fan::{ConeRef, Fan};
use crate::surgery::blow_up;
use crate::{Error, Result};

use super::catalog::{del_pezzo_fan, product_fan, projective_bundle, projective_space, pseudo_del_pezzo_fan};
use super::graph::{EquivalenceGraph, GraphSummary};
use super::iso::canonical_key;

/// The full table of 124 classes, in the expectation format.
pub const TABLE1: &str = include_str!("../../data/table1.txt");

/// Rows checked by the quick verification.
pub const SPOT_ROWS: [usize; 7] = [4, 6, 8, 13, 117, 118, 124];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub row: usize,
    pub label: String,
    pub parents: Vec<(String, usize)>,
}

pub fn parse_expectations(text: &str) -> Result<Vec<Expectation>> {
    let mut out: Vec<Expectation> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_once("<-").ok_or_else(|| err("missing '<-'"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let [row, label] = head.as_slice() else {
            return Err(err("expected '<row> <label> <-'"));
        };
        let row = row.parse::<usize>().map_err(|_| err("bad row number"))?;
        let mut parents = Vec::new();
        for item in tail.split_whitespace() {
            let (p, c) = item.rsplit_once(':').ok_or_else(|| err("expected parent:codim"))?;
            let c = c.parse::<usize>().map_err(|_| err("bad codimension"))?;
            if p.is_empty() || c < 2 {
                return Err(err("bad parent"));
            }
            parents.push((p.to_string(), c));
        }
        if out.iter().any(|e| e.label == *label || e.row == row) {
            return Err(err("duplicate row or label"));
        }
        out.push(Expectation { row, label: label.to_string(), parents });
    }
    Ok(out)
}

pub fn table1() -> Vec<Expectation> {
    parse_expectations(TABLE1).expect("embedded table parses")
}

/// The fan of `P^2 x P^2` blown up along the three codimension-2 strata
/// `{x1,x4}`, `{x2,x5}`, `{x3,x6}` (rays numbered from 1), in that order.
pub fn w_fixture() -> Result<Fan> {
    let p2 = projective_space(2)?;
    let mut fan = product_fan(&p2, &p2)?;
    for (a, b) in [(0, 3), (1, 4), (2, 5)] {
        fan = blow_up(&fan, &ConeRef::new(vec![a, b]))?.fan;
    }
    Ok(fan)
}

/// Classes of the table that have an independent construction.
pub fn fixtures() -> Result<Vec<(&'static str, Fan)>> {
    Ok(vec![
        ("P4", projective_space(4)?),
        ("B1", projective_bundle(3, &[3])?),
        ("B2", projective_bundle(3, &[2])?),
        ("B3", projective_bundle(3, &[1])?),
        ("B4", projective_bundle(3, &[0])?),
        ("B5", projective_bundle(1, &[0, 0, 1])?),
        ("C2", projective_bundle(2, &[0, 1])?),
        ("Vt4", pseudo_del_pezzo_fan(4)?),
        ("V4", del_pezzo_fan(4)?),
        ("W", w_fixture()?),
    ])
}

/// Label the classes of a 4-dimensional graph that match a fixture.
pub fn attach_fixture_labels(graph: &mut EquivalenceGraph) -> Result<()> {
    for (label, fan) in fixtures()? {
        if let Some(i) = graph.find(&canonical_key(&fan)?) {
            graph.nodes[i].labels.push(label.to_string());
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    Fail(String),
    /// Several classes fit a row whose own label is not pinned down.
    Ambiguous(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowReport {
    pub row: usize,
    pub label: String,
    pub status: RowStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table1Report {
    pub rows: Vec<RowReport>,
}

impl Table1Report {
    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.status == RowStatus::Pass)
    }
}

impl fmt::Display for Table1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            match &r.status {
                RowStatus::Pass => writeln!(f, "row {:>3} {:<6} pass", r.row, r.label)?,
                RowStatus::Fail(m) => writeln!(f, "row {:>3} {:<6} FAIL {m}", r.row, r.label)?,
                RowStatus::Ambiguous(k) => writeln!(f, "row {:>3} {:<6} AMBIGUOUS {k} candidates", r.row, r.label)?,
            }
        }
        Ok(())
    }
}

struct Indexed {
    anchors: HashMap<String, usize>,
    parents: Vec<Vec<(usize, usize)>>,
}

fn index(summary: &GraphSummary) -> Result<Indexed> {
    let mut anchors = HashMap::new();
    for (i, n) in summary.nodes.iter().enumerate() {
        for l in &n.labels {
            if anchors.insert(l.clone(), i).is_some() {
                return Err(Error::Parse { line: 0, message: format!("label {l} is on two classes") });
            }
        }
    }
    let mut parents = vec![Vec::new(); summary.nodes.len()];
    for e in &summary.edges {
        let from = summary.node_index(&e.from);
        let to = summary.node_index(&e.to);
        let (Some(from), Some(to)) = (from, to) else {
            return Err(Error::Parse { line: 0, message: "edge names an unknown node".into() });
        };
        parents[to].push((from, e.codim));
    }
    for p in &mut parents {
        p.sort_unstable();
    }
    Ok(Indexed { anchors, parents })
}

/// Whether `actual` parents fit the row, with unlabelled parents free to be
/// any distinct unlabelled classes.
fn fits(actual: &[(usize, usize)], row: &Expectation, ix: &Indexed, anchored: &HashSet<usize>) -> bool {
    let mut rest: Vec<(usize, usize)> = actual.to_vec();
    let mut free: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (label, c) in &row.parents {
        match ix.anchors.get(label) {
            Some(&n) => match rest.iter().position(|&e| e == (n, *c)) {
                Some(k) => {
                    rest.remove(k);
                }
                None => return false,
            },
            None => free.entry(label).or_default().push(*c),
        }
    }
    if rest.iter().any(|(n, _)| anchored.contains(n)) {
        return false;
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (n, c) in rest {
        groups.entry(n).or_default().push(c);
    }
    let mut have: Vec<Vec<usize>> = groups.into_values().map(|mut v| (v.sort_unstable(), v).1).collect();
    let mut want: Vec<Vec<usize>> = free.into_values().map(|mut v| (v.sort_unstable(), v).1).collect();
    have.sort();
    want.sort();
    have == want
}

fn describe(actual: &[(usize, usize)], summary: &GraphSummary) -> String {
    if actual.is_empty() {
        return "actual parents: none".into();
    }
    let parts: Vec<String> = actual
        .iter()
        .map(|&(n, c)| {
            let node = &summary.nodes[n];
            let name = node.labels.first().cloned().unwrap_or_else(|| node.fingerprint.clone());
            format!("{name}:{c}")
        })
        .collect();
    format!("actual parents: {}", parts.join(" "))
}

/// Check each row against the graph. Labels already attached to graph nodes
/// pin those classes; any other label in a row may be any class that is
/// not pinned, and a row whose own label is unpinned passes when exactly
/// one class fits it.
pub fn verify_table1_edges(summary: &GraphSummary, rows: &[Expectation]) -> Result<Table1Report> {
    let ix = index(summary)?;
    let anchored: HashSet<usize> = ix.anchors.values().copied().collect();
    let mut report = Table1Report::default();
    for row in rows {
        let status = match ix.anchors.get(&row.label) {
            Some(&n) => {
                if fits(&ix.parents[n], row, &ix, &anchored) {
                    RowStatus::Pass
                } else {
                    RowStatus::Fail(describe(&ix.parents[n], summary))
                }
            }
            None => {
                let hits: Vec<usize> = (0..summary.nodes.len())
                    .filter(|n| !anchored.contains(n) && fits(&ix.parents[*n], row, &ix, &anchored))
                    .collect();
                match hits.len() {
                    0 => RowStatus::Fail("no class has exactly these parents".into()),
                    1 => RowStatus::Pass,
                    k => RowStatus::Ambiguous(k),
                }
            }
        };
        report.rows.push(RowReport { row: row.row, label: row.label.clone(), status });
    }
    Ok(report)
}

/// Directed graph with codimension-coloured edges.
struct Digraph {
    ins: Vec<Vec<(usize, usize)>>,
    outs: Vec<Vec<(usize, usize)>>,
}

impl Digraph {
    fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, usize)>) -> Self {
        let mut g = Digraph { ins: vec![Vec::new(); n], outs: vec![Vec::new(); n] };
        for (a, b, c) in edges {
            g.outs[a].push((b, c));
            g.ins[b].push((a, c));
        }
        g
    }

    fn edge_set(&self) -> HashSet<(usize, usize, usize)> {
        self.outs
            .iter()
            .enumerate()
            .flat_map(|(a, v)| v.iter().map(move |&(b, c)| (a, b, c)))
            .collect()
    }
}

type Signature = (usize, Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Colour refinement run jointly on both graphs so colours stay comparable.
/// Returns false as soon as the colour class sizes differ.
fn refine(ga: &Digraph, gb: &Digraph, ca: &mut Vec<usize>, cb: &mut Vec<usize>) -> bool {
    loop {
        let sig = |g: &Digraph, c: &[usize], v: usize| -> Signature {
            let mut i: Vec<(usize, usize)> = g.ins[v].iter().map(|&(u, k)| (c[u], k)).collect();
            let mut o: Vec<(usize, usize)> = g.outs[v].iter().map(|&(u, k)| (c[u], k)).collect();
            i.sort_unstable();
            o.sort_unstable();
            (c[v], i, o)
        };
        let sa: Vec<Signature> = (0..ca.len()).map(|v| sig(ga, ca, v)).collect();
        let sb: Vec<Signature> = (0..cb.len()).map(|v| sig(gb, cb, v)).collect();
        let mut ids: BTreeMap<&Signature, usize> = BTreeMap::new();
        for s in sa.iter().chain(&sb) {
            ids.entry(s).or_insert(0);
        }
        for (k, v) in ids.values_mut().enumerate() {
            *v = k;
        }
        let na: Vec<usize> = sa.iter().map(|s| ids[s]).collect();
        let nb: Vec<usize> = sb.iter().map(|s| ids[s]).collect();
        let count = |c: &[usize]| {
            let mut m = BTreeMap::new();
            for &x in c {
                *m.entry(x).or_insert(0) += 1;
            }
            m
        };
        let (ma, mb) = (count(&na), count(&nb));
        if ma != mb {
            return false;
        }
        let stable = ma.len() == count(ca).len();
        *ca = na;
        *cb = nb;
        if stable {
            return true;
        }
    }
}

fn search(ga: &Digraph, gb: &Digraph, ca: Vec<usize>, cb: Vec<usize>, edges_b: &HashSet<(usize, usize, usize)>) -> Option<Vec<usize>> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in ca.iter().enumerate() {
        classes.entry(c).or_default().push(v);
    }
    let target = classes.iter().filter(|(_, v)| v.len() > 1).min_by_key(|(_, v)| v.len()).map(|(c, v)| (*c, v[0]));
    let Some((color, a)) = target else {
        // Discrete colouring: read off the bijection and check it.
        let where_b: HashMap<usize, usize> = cb.iter().enumerate().map(|(v, &c)| (c, v)).collect();
        let map: Vec<usize> = ca.iter().map(|c| where_b[c]).collect();
        let ok = ga.edge_set().iter().all(|&(x, y, k)| edges_b.contains(&(map[x], map[y], k)))
            && ga.edge_set().len() == edges_b.len();
        return ok.then_some(map);
    };
    let fresh = ca.len() + cb.len() + ca.iter().chain(&cb).max().copied().unwrap_or(0) + 1;
    for b in (0..cb.len()).filter(|&b| cb[b] == color) {
        let mut na = ca.clone();
        let mut nb = cb.clone();
        na[a] = fresh;
        nb[b] = fresh;
        if refine(ga, gb, &mut na, &mut nb) {
            if let Some(m) = search(ga, gb, na, nb, edges_b) {
                return Some(m);
            }
        }
    }
    None
}

/// Match every row of the table to a distinct class of the graph so that
/// each class's parents and codimensions are exactly those listed. Labels
/// already on graph nodes must be respected. Returns `row index -> node`.
pub fn match_table(summary: &GraphSummary, rows: &[Expectation]) -> Result<Option<Vec<usize>>> {
    let ix = index(summary)?;
    if rows.len() != summary.nodes.len() {
        return Ok(None);
    }
    let by_label: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.label.as_str(), i)).collect();
    let mut edges_a = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for (p, c) in &r.parents {
            let &j = by_label
                .get(p.as_str())
                .ok_or_else(|| Error::Parse { line: 0, message: format!("row {} names unknown class {p}", r.row) })?;
            edges_a.push((j, i, *c));
        }
    }
    let ga = Digraph::new(rows.len(), edges_a);
    let gb = Digraph::new(
        summary.nodes.len(),
        ix.parents.iter().enumerate().flat_map(|(to, ps)| ps.iter().map(move |&(from, c)| (from, to, c))),
    );
    let edges_b = gb.edge_set();
    if edges_b.len() != ix.parents.iter().map(Vec::len).sum::<usize>() {
        return Ok(None);
    }
    // Pinned labels get their own colours, shared by both graphs.
    let mut ca = vec![0; rows.len()];
    let mut cb = vec![0; summary.nodes.len()];
    let mut next = 1;
    for (label, &node) in &ix.anchors {
        if let Some(&row) = by_label.get(label.as_str()) {
            ca[row] = next;
            cb[node] = next;
            next += 1;
        }
    }
    if !refine(&ga, &gb, &mut ca, &mut cb) {
        return Ok(None);
    }
    Ok(search(&ga, &gb, ca, cb, &edges_b))
}

/// Attach table labels to graph nodes via [`match_table`].
pub fn label_by_matching(summary: &mut GraphSummary, rows: &[Expectation]) -> Result<bool> {
    let Some(map) = match_table(summary, rows)? else {
        return Ok(false);
    };
    for (i, &node) in map.iter().enumerate() {
        let labels = &mut summary.nodes[node].labels;
        if !labels.contains(&rows[i].label) {
            labels.push(rows[i].label.clone());
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::graph::{EdgeLine, NodeLine};

    #[test]
    fn embedded_table_is_complete() {
        let t = table1();
        assert_eq!(t.len(), 124);
        let labels: HashSet<&str> = t.iter().map(|r| r.label.as_str()).collect();
        for r in &t {
            for (p, _) in &r.parents {
                assert!(labels.contains(p.as_str()), "{p}");
            }
        }
        let e3 = t.iter().find(|r| r.row == 13).unwrap();
        assert_eq!(e3.parents, [("B3".into(), 2), ("B4".into(), 2), ("B5".into(), 4)]);
        assert_eq!(t.iter().filter(|r| r.parents.is_empty()).count(), 21);
    }

    #[test]
    fn expectation_parse_errors() {
        for bad in ["4 B3 P4:4", "x B3 <- P4:4", "4 B3 <- P4", "4 B3 <- P4:1", "4 B3 <-\n5 B3 <-"] {
            assert!(parse_expectations(bad).is_err(), "{bad}");
        }
    }

    fn toy() -> (GraphSummary, Vec<Expectation>) {
        let node = |fp: &str, labels: &[&str]| NodeLine {
            fingerprint: fp.into(),
            dim: 2,
            rays: 3,
            picard: 1,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        };
        let edge = |a: &str, b: &str, c| EdgeLine { from: a.into(), to: b.into(), codim: c };
        let g = GraphSummary {
            nodes: vec![node("a", &["A"]), node("b", &[]), node("c", &[]), node("d", &[])],
            edges: vec![edge("a", "b", 2), edge("a", "c", 2), edge("b", "d", 2), edge("c", "d", 3)],
        };
        let rows = parse_expectations("1 A <-\n2 B <- A:2\n3 C <- A:2\n4 D <- B:2 C:3\n").unwrap();
        (g, rows)
    }

    #[test]
    fn per_row_checks_with_free_labels() {
        let (g, rows) = toy();
        let rep = verify_table1_edges(&g, &rows).unwrap();
        assert_eq!(rep.rows[0].status, RowStatus::Pass);
        assert_eq!(rep.rows[1].status, RowStatus::Ambiguous(2));
        assert_eq!(rep.rows[3].status, RowStatus::Pass);
        let wrong = parse_expectations("4 D <- A:2\n").unwrap();
        assert!(!verify_table1_edges(&g, &wrong).unwrap().all_pass());
    }

    #[test]
    fn structural_matching_resolves_labels() {
        let (mut g, rows) = toy();
        assert!(label_by_matching(&mut g, &rows).unwrap());
        assert_eq!(g.nodes[3].labels, ["D"]);
        assert!(verify_table1_edges(&g, &rows).unwrap().all_pass());
        let (mut g2, _) = toy();
        g2.edges.pop();
        assert!(!label_by_matching(&mut g2, &rows).unwrap());
    }
}
