//! Breadth-first closure of a set of fans under equivariant blow-ups and
//! blow-downs (and flops in weak mode) that stay inside the Fano (resp.
//! weak Fano) world.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::fan::Fan;
use crate::format::{decode_compact, encode_compact};
use crate::primitive::{primitive_relations, PrimitiveCollection, PrimitiveRelation};
use crate::surgery::{
    blow_down_unchecked, blow_up, blowdown_collectionwise, blowdown_conewise, flop, predict_pc_after,
    predict_pc_after_blowdown, predict_with_relations, BlowDownSpec,
};
use crate::{Error, Result};

use super::graph::{EquivalenceGraph, GraphEdge, GraphNode};
use super::iso::{canonical_key_with, find_isomorphism, lattice_map_for, IsoKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Blow-ups and blow-downs through Fano fans.
    Fano,
    /// Blow-ups, blow-downs and flops through weak Fano fans.
    WeakFano,
}

impl Mode {
    fn admits(self, rels: &[PrimitiveRelation]) -> bool {
        match self {
            Mode::Fano => rels.iter().all(|r| r.degree > 0),
            Mode::WeakFano => rels.iter().all(|r| r.degree >= 0),
        }
    }

    fn is_weak(self) -> bool {
        self == Mode::WeakFano
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fano => "fano",
            Mode::WeakFano => "weak",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "fano" => Ok(Mode::Fano),
            "weak" | "weak-fano" => Ok(Mode::WeakFano),
            _ => Err(Error::Parse { line: 0, message: format!("unknown mode {s:?}") }),
        }
    }
}

/// Number of checks of one kind and the ones that failed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
    pub examples: Vec<String>,
}

impl Tally {
    const MAX_EXAMPLES: usize = 8;

    fn record(&mut self, ok: bool, example: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.examples.len() < Self::MAX_EXAMPLES {
                self.examples.push(example());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.failed += other.failed;
        for e in other.examples {
            if self.examples.len() < Self::MAX_EXAMPLES {
                self.examples.push(e);
            }
        }
    }

    pub fn is_clean(&self) -> bool {
        self.failed == 0
    }
}

/// Cross-checks of the theory against direct computation, collected while
/// the closure runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Audit {
    /// Predicted primitive collections after a blow-up equal the computed ones.
    pub blow_up_collections: Tally,
    /// Predicted primitive collections after a blow-down equal the computed ones.
    pub blow_down_collections: Tally,
    /// The relation-only Fano predictor agrees with constructing the blow-down.
    pub blow_down_predictor: Tally,
    /// The cone-wise and collection-wise blow-down criteria agree.
    pub blow_down_criteria: Tally,
    /// Flopping back returns the original fan.
    pub flop_involution: Tally,
    /// Fans with equal keys are related by a relation-preserving bijection
    /// that comes from a unimodular lattice map.
    pub isomorphism_confirmation: Tally,
}

impl Audit {
    pub fn merge(&mut self, other: Audit) {
        self.blow_up_collections.merge(other.blow_up_collections);
        self.blow_down_collections.merge(other.blow_down_collections);
        self.blow_down_predictor.merge(other.blow_down_predictor);
        self.blow_down_criteria.merge(other.blow_down_criteria);
        self.flop_involution.merge(other.flop_involution);
        self.isomorphism_confirmation.merge(other.isomorphism_confirmation);
    }

    pub fn tallies(&self) -> [(&'static str, &Tally); 6] {
        [
            ("blow-up-collections", &self.blow_up_collections),
            ("blow-down-collections", &self.blow_down_collections),
            ("blow-down-predictor", &self.blow_down_predictor),
            ("blow-down-criteria", &self.blow_down_criteria),
            ("flop-involution", &self.flop_involution),
            ("isomorphism-confirmation", &self.isomorphism_confirmation),
        ]
    }

    fn tally_mut(&mut self, name: &str) -> Option<&mut Tally> {
        Some(match name {
            "blow-up-collections" => &mut self.blow_up_collections,
            "blow-down-collections" => &mut self.blow_down_collections,
            "blow-down-predictor" => &mut self.blow_down_predictor,
            "blow-down-criteria" => &mut self.blow_down_criteria,
            "flop-involution" => &mut self.flop_involution,
            "isomorphism-confirmation" => &mut self.isomorphism_confirmation,
            _ => return None,
        })
    }

    pub fn is_clean(&self) -> bool {
        self.tallies().iter().all(|(_, t)| t.is_clean())
    }
}

#[derive(Clone, Debug)]
pub struct CheckpointConfig {
    pub path: PathBuf,
    /// Write after every this many new classes (checked between levels).
    pub interval: usize,
}

#[derive(Clone, Debug)]
pub struct ClosureOptions {
    /// Run every cross-check. When off, blow-down candidates are filtered by
    /// the relation-only predictor before being constructed and verified.
    pub audit: bool,
    /// Confirm every key collision with an explicit isomorphism and lattice map.
    pub confirm_isomorphisms: bool,
    pub checkpoint: Option<CheckpointConfig>,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { audit: true, confirm_isomorphisms: false, checkpoint: None }
    }
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub graph: EquivalenceGraph,
    pub audit: Audit,
}

#[derive(Clone, Copy)]
enum Direction {
    /// The neighbour is a blow-up of the node.
    Up,
    /// The node is a blow-up of the neighbour.
    Down,
    Flop,
}

struct Neighbor {
    key: IsoKey,
    fan: Fan,
    direction: Direction,
    codim: usize,
}

struct Expansion {
    neighbors: Vec<Neighbor>,
    audit: Audit,
}

fn collection_set(rels: &[PrimitiveRelation]) -> BTreeSet<Vec<usize>> {
    rels.iter().map(|r| r.collection.indices().to_vec()).collect()
}

fn pc_set(pcs: &[PrimitiveCollection]) -> BTreeSet<Vec<usize>> {
    pcs.iter().map(|p| p.indices().to_vec()).collect()
}

fn expand(fan: &Fan, mode: Mode, options: &ClosureOptions) -> Result<Expansion> {
    let rels = primitive_relations(fan)?;
    let pcs: Vec<PrimitiveCollection> = rels.iter().map(|r| r.collection.clone()).collect();
    let mut audit = Audit::default();
    let mut neighbors = Vec::new();

    for sigma in fan.cones_of_dim_at_least_two() {
        let up = blow_up(fan, &sigma)?;
        let up_rels = primitive_relations(&up.fan)?;
        if options.audit {
            let predicted = pc_set(&predict_pc_after(&pcs, &sigma, fan.n_rays()));
            audit
                .blow_up_collections
                .record(predicted == collection_set(&up_rels), || format!("blow-up along {sigma:?} of {}", encode_compact(fan)));
        }
        if mode.admits(&up_rels) {
            neighbors.push(Neighbor {
                key: canonical_key_with(&up.fan, &up_rels)?,
                fan: up.fan,
                direction: Direction::Up,
                codim: sigma.len(),
            });
        }
    }

    for rel in rels.iter().filter(|r| r.single_rhs().is_some()) {
        let spec = BlowDownSpec { relation: rel.clone() };
        let by_collections = blowdown_collectionwise(fan, &pcs, &spec);
        if options.audit {
            let by_cones = blowdown_conewise(fan, &spec);
            audit.blow_down_criteria.record(by_cones == by_collections, || {
                format!("criteria disagree on {} in {}", rel.render(0), encode_compact(fan))
            });
        }
        if !by_collections {
            continue;
        }
        let predicted = predict_with_relations(fan.dim(), &rels, &spec, mode.is_weak());
        if !options.audit && !predicted {
            continue;
        }
        let down = blow_down_unchecked(fan, &spec)?;
        let down_rels = primitive_relations(&down.fan)?;
        let admitted = mode.admits(&down_rels);
        if options.audit {
            audit.blow_down_predictor.record(predicted == admitted, || {
                format!("predictor says {predicted} for {} in {}", rel.render(0), encode_compact(fan))
            });
            let mapped: BTreeSet<Vec<usize>> = predict_pc_after_blowdown(&pcs, &spec)
                .iter()
                .map(|p| {
                    let mut v: Vec<usize> = p.indices().iter().map(|&i| down.ray_map[i].expect("kept ray")).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            audit.blow_down_collections.record(mapped == collection_set(&down_rels), || {
                format!("blow-down along {} of {}", rel.render(0), encode_compact(fan))
            });
        }
        if admitted {
            neighbors.push(Neighbor {
                key: canonical_key_with(&down.fan, &down_rels)?,
                fan: down.fan,
                direction: Direction::Down,
                codim: spec.collection().len(),
            });
        }
    }

    if mode == Mode::WeakFano {
        for rel in &rels {
            let floppable = rel.degree == 0
                && rel.coefficients.len() == rel.collection.len()
                && rel.coefficients.iter().all(|&(_, a)| a == 1);
            if !floppable {
                continue;
            }
            let Ok(flopped) = flop(fan, &rel.collection) else {
                continue;
            };
            if options.audit {
                let other = PrimitiveCollection::new(rel.coefficients.iter().map(|&(j, _)| j).collect());
                let back = flop(&flopped.fan, &other);
                audit.flop_involution.record(matches!(&back, Ok(b) if b.fan == *fan), || {
                    format!("flop of {} in {}", rel.render(0), encode_compact(fan))
                });
            }
            let f_rels = primitive_relations(&flopped.fan)?;
            if mode.admits(&f_rels) {
                neighbors.push(Neighbor {
                    key: canonical_key_with(&flopped.fan, &f_rels)?,
                    fan: flopped.fan,
                    direction: Direction::Flop,
                    codim: 0,
                });
            }
        }
    }
    Ok(Expansion { neighbors, audit })
}

fn confirm(a: &Fan, b: &Fan) -> Result<bool> {
    Ok(match find_isomorphism(a, b)? {
        Some(bij) => lattice_map_for(a, b, &bij)?.is_some(),
        None => false,
    })
}

/// Mutable state of a closure run; also what a checkpoint stores.
struct State {
    dim: usize,
    mode: Mode,
    nodes: BTreeMap<IsoKey, Fan>,
    edges: BTreeSet<(IsoKey, IsoKey, usize)>,
    frontier: Vec<IsoKey>,
    audit: Audit,
}

impl State {
    fn write_checkpoint(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# closure checkpoint");
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "mode {}", self.mode);
        for (key, fan) in &self.nodes {
            let _ = writeln!(s, "fan {} {}", key.fingerprint(), encode_compact(fan));
        }
        for (a, b, c) in &self.edges {
            let _ = writeln!(s, "edge {} {} {c}", a.fingerprint(), b.fingerprint());
        }
        for k in &self.frontier {
            let _ = writeln!(s, "frontier {}", k.fingerprint());
        }
        for (name, t) in self.audit.tallies() {
            let _ = writeln!(s, "audit {name} {} {}", t.checked, t.failed);
        }
        s
    }

    fn read_checkpoint(text: &str) -> Result<State> {
        let mut dim = None;
        let mut mode = None;
        let mut nodes = BTreeMap::new();
        let mut by_fp: BTreeMap<String, IsoKey> = BTreeMap::new();
        let mut edges = BTreeSet::new();
        let mut frontier = Vec::new();
        let mut audit = Audit::default();
        for (ln, line) in text.lines().enumerate() {
            let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["dim", d] => dim = Some(d.parse::<usize>().map_err(|_| err("bad dim"))?),
                ["mode", m] => mode = Some(m.parse::<Mode>().map_err(|_| err("bad mode"))?),
                ["fan", fp, enc] => {
                    let fan = decode_compact(enc).map_err(|e| err(&e.to_string()))?;
                    let key = canonical_key_with(&fan, &primitive_relations(&fan)?)?;
                    if key.fingerprint() != *fp {
                        return Err(err("fingerprint does not match fan"));
                    }
                    by_fp.insert(fp.to_string(), key.clone());
                    nodes.insert(key, fan);
                }
                ["edge", a, b, c] => {
                    let look = |fp: &str| by_fp.get(fp).cloned().ok_or_else(|| err("edge names an unknown fan"));
                    edges.insert((look(a)?, look(b)?, c.parse::<usize>().map_err(|_| err("bad codim"))?));
                }
                ["frontier", fp] => {
                    frontier.push(by_fp.get(*fp).cloned().ok_or_else(|| err("frontier names an unknown fan"))?)
                }
                ["audit", name, checked, failed] => {
                    let t = audit.tally_mut(name).ok_or_else(|| err("unknown audit tally"))?;
                    t.checked = checked.parse().map_err(|_| err("bad count"))?;
                    t.failed = failed.parse().map_err(|_| err("bad count"))?;
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse { line: 0, message: "missing dim".into() })?;
        let mode = mode.ok_or_else(|| Error::Parse { line: 0, message: "missing mode".into() })?;
        if nodes.values().any(|f: &Fan| f.dim() != dim) {
            return Err(Error::Parse { line: 0, message: "fan of the wrong dimension".into() });
        }
        Ok(State { dim, mode, nodes, edges, frontier, audit })
    }

    fn into_closure(self) -> Result<Closure> {
        let index: BTreeMap<&IsoKey, usize> = self.nodes.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let edges = self
            .edges
            .iter()
            .map(|(a, b, c)| GraphEdge { from: index[a], to: index[b], codim: *c })
            .collect();
        let nodes = self
            .nodes
            .iter()
            .map(|(k, f)| GraphNode { key: k.clone(), fan: f.clone(), labels: Vec::new() })
            .collect();
        Ok(Closure { graph: EquivalenceGraph::new(self.dim, nodes, edges)?, audit: self.audit })
    }
}

fn run(mut state: State, options: &ClosureOptions) -> Result<Closure> {
    let mode = state.mode;
    let mut since_checkpoint = 0usize;
    while !state.frontier.is_empty() {
        let frontier = std::mem::take(&mut state.frontier);
        let known = &state.nodes;
        let expansions: Vec<(Expansion, Audit)> = frontier
            .par_iter()
            .map(|k| {
                let fan = &known[k];
                let ex = expand(fan, mode, options)?;
                let mut extra = Audit::default();
                if options.confirm_isomorphisms {
                    for nb in &ex.neighbors {
                        if let Some(rep) = known.get(&nb.key) {
                            extra.isomorphism_confirmation.record(confirm(&nb.fan, rep)?, || {
                                format!("{} vs {}", encode_compact(&nb.fan), encode_compact(rep))
                            });
                        }
                    }
                }
                Ok((ex, extra))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (k, (ex, extra)) in frontier.iter().zip(expansions) {
            state.audit.merge(ex.audit);
            state.audit.merge(extra);
            for nb in ex.neighbors {
                match nb.direction {
                    Direction::Up => state.edges.insert((k.clone(), nb.key.clone(), nb.codim)),
                    Direction::Down => state.edges.insert((nb.key.clone(), k.clone(), nb.codim)),
                    Direction::Flop => false,
                };
                if let Some(rep) = state.nodes.get(&nb.key) {
                    if options.confirm_isomorphisms && next.contains(&nb.key) {
                        let ok = confirm(&nb.fan, rep)?;
                        state.audit.isomorphism_confirmation.record(ok, || encode_compact(&nb.fan));
                    }
                } else {
                    state.nodes.insert(nb.key.clone(), nb.fan);
                    next.push(nb.key);
                }
            }
        }
        next.sort();
        since_checkpoint += next.len();
        state.frontier = next;
        if let Some(cp) = &options.checkpoint {
            if since_checkpoint >= cp.interval || state.frontier.is_empty() {
                std::fs::write(&cp.path, state.write_checkpoint())?;
                since_checkpoint = 0;
            }
        }
    }
    state.into_closure()
}

/// Closure of `seeds` under blow-ups and blow-downs (and flops in weak
/// mode) through fans admitted by `mode`. Nodes are sorted by key, so the
/// result does not depend on scheduling.
pub fn f_closure(seeds: &[Fan], dim: usize, mode: Mode, options: &ClosureOptions) -> Result<Closure> {
    let mut nodes = BTreeMap::new();
    for seed in seeds {
        if seed.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: seed.dim() });
        }
        if !seed.is_nonsingular() {
            return Err(Error::Singular("seed fan is singular".into()));
        }
        let rels = primitive_relations(seed)?;
        if !mode.admits(&rels) {
            return Err(Error::InvalidFan(format!("seed fan is not admitted in {mode} mode")));
        }
        nodes.entry(canonical_key_with(seed, &rels)?).or_insert_with(|| seed.clone());
    }
    let frontier = nodes.keys().cloned().collect();
    let state = State { dim, mode, nodes, edges: BTreeSet::new(), frontier, audit: Audit::default() };
    run(state, options)
}

/// Continue a closure from checkpoint text written by an earlier run.
pub fn resume_closure(checkpoint: &str, options: &ClosureOptions) -> Result<Closure> {
    run(State::read_checkpoint(checkpoint)?, options)
}

/// The graph stored in checkpoint text, without continuing the search.
pub fn load_checkpoint(checkpoint: &str) -> Result<Closure> {
    State::read_checkpoint(checkpoint)?.into_closure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::catalog::{hirzebruch, projective_space};

    #[test]
    fn plane_closure_has_five_classes() {
        let c = f_closure(&[projective_space(2).unwrap()], 2, Mode::Fano, &ClosureOptions::default()).unwrap();
        assert_eq!(c.graph.nodes.len(), 5);
        assert!(c.audit.is_clean(), "{:?}", c.audit);
        assert!(c.audit.blow_up_collections.checked > 0);
        assert!(c.audit.blow_down_predictor.checked > 0);
    }

    #[test]
    fn seeds_must_be_admitted() {
        let f2 = hirzebruch(2).unwrap();
        assert!(f_closure(std::slice::from_ref(&f2), 2, Mode::Fano, &ClosureOptions::default()).is_err());
        assert!(f_closure(&[f2], 3, Mode::WeakFano, &ClosureOptions::default()).is_err());
    }

    #[test]
    fn checkpoint_resume_reaches_the_same_graph() {
        let dir = std::env::temp_dir().join(format!("toric-fano-cp-{}", std::process::id()));
        let opts = ClosureOptions {
            checkpoint: Some(CheckpointConfig { path: dir.clone(), interval: 1 }),
            ..ClosureOptions::default()
        };
        let full = f_closure(&[projective_space(2).unwrap()], 2, Mode::Fano, &opts).unwrap();
        let text = std::fs::read_to_string(&dir).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(load_checkpoint(&text).unwrap().graph.to_lines(), full.graph.to_lines());
        let again = resume_closure(&text, &ClosureOptions::default()).unwrap();
        assert_eq!(again.graph.to_lines(), full.graph.to_lines());

        // A checkpoint that still has a frontier resumes to the full closure.
        let partial = "dim 2\nmode fano\nfan ".to_string();
        let p2 = projective_space(2).unwrap();
        let key = canonical_key_with(&p2, &primitive_relations(&p2).unwrap()).unwrap();
        let text = format!("{partial}{} {}\nfrontier {}\n", key.fingerprint(), encode_compact(&p2), key.fingerprint());
        let resumed = resume_closure(&text, &ClosureOptions::default()).unwrap();
        assert_eq!(resumed.graph.to_lines(), full.graph.to_lines());
        assert!(resume_closure("dim 2\nmode fano\nfrontier 00\n", &ClosureOptions::default()).is_err());
    }
}
