//! Isomorphism of nonsingular complete fans: canonical keys and a direct
//! backtracking search for relation-preserving bijections.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::fan::Fan;
use crate::lattice::{find_unimodular_map, IntegerMatrix};
use crate::primitive::{primitive_relations, PrimitiveRelation};
use crate::{Error, Result};

/// Canonical encoding of a fan's primitive relations under a canonical
/// labeling of its rays. Two nonsingular complete fans have equal keys iff
/// they are isomorphic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoKey(Vec<u8>);

impl IsoKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// First 16 hex digits of the SHA-256 digest of the key.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(&self.0);
        hex::encode(&digest[..8])
    }
}

impl fmt::Debug for IsoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IsoKey({})", String::from_utf8_lossy(&self.0))
    }
}

impl fmt::Display for IsoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint())
    }
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Canonical labeling: express every ray in the basis of each maximal cone
/// (in every order), sort, and keep the lexicographically least ray list.
/// Returns `label[old] = new`.
pub fn canonical_labeling(fan: &Fan) -> Result<Vec<usize>> {
    if !fan.is_nonsingular() {
        return Err(Error::Singular("canonical labeling needs a nonsingular fan".into()));
    }
    let d = fan.dim();
    let n = fan.n_rays();
    let perms = permutations(d);
    let mut best: Option<Vec<(Vec<i64>, usize)>> = None;
    for k in 0..fan.max_cones().len() {
        let frame = fan.frame(k);
        let coords = fan
            .rays()
            .iter()
            .map(|r| frame.integral_coords(r).map(|c| c.expect("unimodular cone")))
            .collect::<Result<Vec<_>>>()?;
        for pi in &perms {
            let mut rows: Vec<(Vec<i64>, usize)> =
                (0..n).map(|i| (pi.iter().map(|&j| coords[i][j]).collect(), i)).collect();
            rows.sort_unstable();
            let better = match &best {
                None => true,
                Some(b) => rows.iter().map(|r| &r.0).lt(b.iter().map(|r| &r.0)),
            };
            if better {
                best = Some(rows);
            }
        }
    }
    let best = best.ok_or_else(|| Error::InvalidFan("fan has no maximal cones".into()))?;
    let mut label = vec![0; n];
    for (new, (_, old)) in best.iter().enumerate() {
        label[*old] = new;
    }
    Ok(label)
}

type RelationShape = (Vec<usize>, Vec<(usize, i64)>);

fn relabel(rel: &PrimitiveRelation, label: &[usize]) -> RelationShape {
    let mut p: Vec<usize> = rel.collection.indices().iter().map(|&i| label[i]).collect();
    p.sort_unstable();
    let mut rhs: Vec<(usize, i64)> = rel.coefficients.iter().map(|&(j, a)| (label[j], a)).collect();
    rhs.sort_unstable();
    (p, rhs)
}

pub fn canonical_key(fan: &Fan) -> Result<IsoKey> {
    canonical_key_with(fan, &primitive_relations(fan)?)
}

/// As [`canonical_key`], reusing relations the caller already computed.
pub fn canonical_key_with(fan: &Fan, rels: &[PrimitiveRelation]) -> Result<IsoKey> {
    let label = canonical_labeling(fan)?;
    let mut shapes: Vec<RelationShape> = rels.iter().map(|r| relabel(r, &label)).collect();
    shapes.sort_unstable();
    let mut s = format!("d{} n{}", fan.dim(), fan.n_rays());
    for (p, rhs) in &shapes {
        s.push(' ');
        for (k, i) in p.iter().enumerate() {
            let _ = write!(s, "{}{i}", if k == 0 { "" } else { "+" });
        }
        s.push('=');
        for (k, (j, a)) in rhs.iter().enumerate() {
            let _ = write!(s, "{}{a}x{j}", if k == 0 { "" } else { "+" });
        }
    }
    Ok(IsoKey(s.into_bytes()))
}

/// What a ray does in one relation: `(in collection?, coefficient, #P, deg P)`.
type Role = (bool, i64, usize, i64);

fn signatures(n: usize, rels: &[PrimitiveRelation]) -> Vec<Vec<Role>> {
    let mut sig = vec![Vec::new(); n];
    for r in rels {
        for &i in r.collection.indices() {
            sig[i].push((true, 1, r.collection.len(), r.degree));
        }
        for &(j, a) in &r.coefficients {
            sig[j].push((false, a, r.collection.len(), r.degree));
        }
    }
    for s in &mut sig {
        s.sort_unstable();
    }
    sig
}

struct Search<'a> {
    rels1: &'a [PrimitiveRelation],
    target: HashSet<RelationShape>,
    candidates: Vec<Vec<usize>>,
    /// Relations of the first fan that become fully assigned at each depth.
    closing: Vec<Vec<usize>>,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let i = self.order[depth];
        for c in 0..self.candidates[i].len() {
            let j = self.candidates[i][c];
            if self.used[j] {
                continue;
            }
            self.map[i] = j;
            self.used[j] = true;
            let ok = self.closing[depth]
                .iter()
                .all(|&r| self.target.contains(&relabel(&self.rels1[r], &self.map)));
            if ok && self.run(depth + 1) {
                return true;
            }
            self.used[j] = false;
        }
        false
    }
}

/// A bijection of rays carrying every primitive relation of `f1` onto one of
/// `f2`, if any. Fans of different dimension are never isomorphic.
pub fn find_isomorphism(f1: &Fan, f2: &Fan) -> Result<Option<Vec<usize>>> {
    if f1.dim() != f2.dim() || f1.n_rays() != f2.n_rays() {
        return Ok(None);
    }
    let rels1 = primitive_relations(f1)?;
    let rels2 = primitive_relations(f2)?;
    if rels1.len() != rels2.len() {
        return Ok(None);
    }
    let shape = |rs: &[PrimitiveRelation]| {
        let mut v: Vec<(usize, i64)> = rs.iter().map(|r| (r.collection.len(), r.degree)).collect();
        v.sort_unstable();
        v
    };
    if shape(&rels1) != shape(&rels2) {
        return Ok(None);
    }
    let n = f1.n_rays();
    let sig1 = signatures(n, &rels1);
    let sig2 = signatures(n, &rels2);
    let mut by_sig: HashMap<&[Role], Vec<usize>> = HashMap::new();
    for (j, s) in sig2.iter().enumerate() {
        by_sig.entry(s.as_slice()).or_default().push(j);
    }
    let candidates: Vec<Vec<usize>> =
        sig1.iter().map(|s| by_sig.get(s.as_slice()).cloned().unwrap_or_default()).collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    // Most constrained rays first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));
    let mut position = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        position[i] = k;
    }
    let mut closing = vec![Vec::new(); n];
    for (r, rel) in rels1.iter().enumerate() {
        let last = rel
            .collection
            .indices()
            .iter()
            .chain(rel.coefficients.iter().map(|(j, _)| j))
            .map(|&i| position[i])
            .max()
            .expect("collections are nonempty");
        closing[last].push(r);
    }
    let mut search = Search {
        rels1: &rels1,
        target: rels2.iter().map(|r| relabel(r, &(0..n).collect::<Vec<_>>())).collect(),
        candidates,
        closing,
        order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    Ok(if search.run(0) { Some(search.map) } else { None })
}

pub fn are_isomorphic(f1: &Fan, f2: &Fan) -> Result<bool> {
    Ok(find_isomorphism(f1, f2)?.is_some())
}

/// Confirm that a relation-preserving bijection comes from a unimodular map
/// of the lattice that also carries maximal cones onto maximal cones.
pub fn lattice_map_for(f1: &Fan, f2: &Fan, bijection: &[usize]) -> Result<Option<IntegerMatrix>> {
    let pairs: Vec<_> = f1
        .rays()
        .iter()
        .zip(bijection)
        .map(|(r, &j)| (r.clone(), f2.ray(j).clone()))
        .collect();
    let Some(m) = find_unimodular_map(&pairs)? else {
        return Ok(None);
    };
    let cones2: HashSet<u64> = f2.max_cones().iter().map(|c| c.mask()).collect();
    let maps_cones = f1
        .max_cones()
        .iter()
        .all(|c| cones2.contains(&c.indices().iter().fold(0u64, |acc, &i| acc | 1 << bijection[i])));
    Ok(if maps_cones { Some(m) } else { None })
}
