//! Star subdivisions, blow-ups, blow-downs and flops, with the predictions
//! of primitive collections and Fano-ness across them.
//!
//! Surgeries return a [`Surgery`]: the new fan plus a map from old ray
//! indices to new ones. Blow-ups keep every old index and append the new
//! ray; blow-downs remove one ray and shift the later indices down.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::fan::{bits, ConeRef, Fan};
use crate::lattice::{sum, LatticeVector};
use crate::primitive::{
    is_extremal, primitive_collections, primitive_relation, PrimitiveCollection, PrimitiveRelation,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionSpec {
    pub sigma: ConeRef,
    pub x: LatticeVector,
}

/// A relation `x_1 + ... + x_l = x` along which a fan may be blown down.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlowDownSpec {
    pub relation: PrimitiveRelation,
}

impl BlowDownSpec {
    /// Wrap a relation of the right shape (single right-hand ray, coefficient 1).
    pub fn new(relation: PrimitiveRelation) -> Result<Self> {
        if relation.single_rhs().is_none() {
            return Err(Error::Surgery(format!(
                "relation {} is not of the form x_1+...+x_l=x",
                relation.render(0)
            )));
        }
        Ok(BlowDownSpec { relation })
    }

    pub fn collection(&self) -> &PrimitiveCollection {
        &self.relation.collection
    }

    /// The ray `x` that disappears.
    pub fn target(&self) -> usize {
        self.relation.single_rhs().expect("checked in new")
    }
}

#[derive(Clone, Debug)]
pub struct Surgery {
    pub fan: Fan,
    /// `ray_map[old] = Some(new)`, or `None` for a removed ray.
    pub ray_map: Vec<Option<usize>>,
}

pub fn star_subdivide(fan: &Fan, spec: &SubdivisionSpec) -> Result<Surgery> {
    let sigma = &spec.sigma;
    if sigma.len() < 2 {
        return Err(Error::Surgery("the center must have dimension at least 2".into()));
    }
    if !fan.is_cone(sigma) {
        return Err(Error::NotACone(format!("{sigma:?}")));
    }
    if spec.x.dim() != fan.dim() {
        return Err(Error::DimensionMismatch {
            expected: fan.dim(),
            found: spec.x.dim(),
        });
    }
    if !spec.x.is_primitive() {
        return Err(Error::Surgery(format!("{} is not primitive", spec.x)));
    }
    let loc = fan.locate(&spec.x)?;
    if &loc.cone != sigma {
        return Err(Error::Surgery(format!("{} is not in the relative interior of {sigma:?}", spec.x)));
    }
    let s = sigma.mask();
    let n = fan.n_rays();
    let xbit = 1u64 << n;
    let mut cones = Vec::new();
    for &m in fan.max_masks() {
        if m & s == s {
            for i in bits(s) {
                cones.push(ConeRef::from_mask((m & !(1 << i)) | xbit));
            }
        } else {
            cones.push(ConeRef::from_mask(m));
        }
    }
    let mut rays = fan.rays().to_vec();
    rays.push(spec.x.clone());
    Ok(Surgery {
        fan: Fan::from_trusted(fan.dim(), rays, cones)?,
        ray_map: (0..n).map(Some).collect(),
    })
}

/// Equivariant blow-up along `sigma`: the new ray is the sum of its rays.
pub fn blow_up(fan: &Fan, sigma: &ConeRef) -> Result<Surgery> {
    if sigma.len() < 2 {
        return Err(Error::Surgery("the center must have dimension at least 2".into()));
    }
    if sigma.indices().iter().any(|&i| i >= fan.n_rays()) {
        return Err(Error::NotACone(format!("{sigma:?}")));
    }
    let x = sum(fan.dim(), sigma.indices().iter().map(|&i| fan.ray(i)));
    star_subdivide(
        fan,
        &SubdivisionSpec {
            sigma: sigma.clone(),
            x,
        },
    )
}

fn sort_pcs(mut v: Vec<PrimitiveCollection>) -> Vec<PrimitiveCollection> {
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v.dedup();
    v
}

fn minimal(sets: &[u64]) -> Vec<u64> {
    sets.iter()
        .copied()
        .filter(|&a| !sets.iter().any(|&b| b != a && b & a == b))
        .collect()
}

/// Primitive collections after subdividing `sigma` with new ray `x_index`,
/// predicted from the collections before.
pub fn predict_pc_after(pcs: &[PrimitiveCollection], sigma: &ConeRef, x_index: usize) -> Vec<PrimitiveCollection> {
    let g = sigma.mask();
    let xbit = 1u64 << x_index;
    let mut out = vec![PrimitiveCollection::new(sigma.indices().to_vec())];
    let mut third = Vec::new();
    for p in pcs {
        let m = p.mask();
        if m & g != g {
            out.push(p.clone());
        }
        if m & g != 0 {
            third.push((m & !g) | xbit);
        }
    }
    third.sort_unstable();
    third.dedup();
    out.extend(minimal(&third).into_iter().map(PrimitiveCollection::from_mask));
    sort_pcs(out)
}

/// Condition on collections: every other collection meeting P* leaves, after
/// removing P* and adding x, a set that is not a cone.
pub fn blowdown_collectionwise(fan: &Fan, pcs: &[PrimitiveCollection], spec: &BlowDownSpec) -> bool {
    let p = spec.collection().mask();
    let x = 1u64 << spec.target();
    pcs.iter().all(|q| {
        let m = q.mask();
        m & p == 0 || m == p || !fan.is_cone_mask((m & !p) | x)
    })
}

/// Condition on cones: for every maximal cone through x and every x_i in
/// P*, the rays of the cone together with P* minus x_i span a cone.
pub fn blowdown_conewise(fan: &Fan, spec: &BlowDownSpec) -> bool {
    let p = spec.collection().mask();
    let x = 1u64 << spec.target();
    fan.max_masks()
        .iter()
        .filter(|&&m| m & x != 0)
        .all(|&m| bits(p).all(|i| fan.is_cone_mask((m | p) & !(1 << i))))
}

/// All relations along which the fan blows down to a nonsingular fan.
pub fn blow_down_candidates(fan: &Fan) -> Result<Vec<BlowDownSpec>> {
    let pcs = primitive_collections(fan);
    let mut out = Vec::new();
    for p in &pcs {
        let rel = primitive_relation(fan, p)?;
        if rel.single_rhs().is_none() {
            continue;
        }
        let spec = BlowDownSpec { relation: rel };
        if blowdown_collectionwise(fan, &pcs, &spec) {
            out.push(spec);
        }
    }
    Ok(out)
}

fn check_candidate(fan: &Fan, spec: &BlowDownSpec) -> Result<()> {
    let actual = primitive_relation(fan, spec.collection())?;
    if actual != spec.relation || actual.single_rhs().is_none() {
        return Err(Error::Surgery(format!(
            "{} is not a primitive relation of this fan",
            spec.relation.render(0)
        )));
    }
    if !blowdown_collectionwise(fan, &primitive_collections(fan), spec) {
        return Err(Error::Surgery(format!("{} does not admit a blow-down", spec.relation.render(0))));
    }
    Ok(())
}

pub fn blow_down(fan: &Fan, spec: &BlowDownSpec) -> Result<Surgery> {
    check_candidate(fan, spec)?;
    blow_down_unchecked(fan, spec)
}

pub(crate) fn blow_down_unchecked(fan: &Fan, spec: &BlowDownSpec) -> Result<Surgery> {
    let p = spec.collection().mask();
    let xi = spec.target();
    let x = 1u64 << xi;
    let d = fan.dim();
    let mut masks: HashSet<u64> = HashSet::new();
    for &m in fan.max_masks() {
        let m2 = if m & x != 0 { (m | p) & !x } else { m };
        if m2.count_ones() as usize != d {
            return Err(Error::Surgery(format!("cone {:?} does not contract", ConeRef::from_mask(m))));
        }
        masks.insert(m2);
    }
    let n = fan.n_rays();
    let ray_map: Vec<Option<usize>> = (0..n)
        .map(|i| match i.cmp(&xi) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();
    let compact = |m: u64| ConeRef::new(bits(m).map(|i| ray_map[i].expect("x removed")).collect());
    let rays: Vec<LatticeVector> = (0..n).filter(|&i| i != xi).map(|i| fan.ray(i).clone()).collect();
    let cones = masks.into_iter().map(compact).collect();
    Ok(Surgery {
        fan: Fan::from_trusted(d, rays, cones)?,
        ray_map,
    })
}

/// Primitive collections after blowing down, predicted from those before.
/// Indices refer to the fan before the blow-down; the contracted ray never
/// appears.
pub fn predict_pc_after_blowdown(pcs: &[PrimitiveCollection], spec: &BlowDownSpec) -> Vec<PrimitiveCollection> {
    let g = spec.collection().mask();
    let x = 1u64 << spec.target();
    let masks: HashSet<u64> = pcs.iter().map(|p| p.mask()).collect();
    let mut out = Vec::new();
    for p in pcs {
        let m = p.mask();
        if m & x == 0 {
            if m != g {
                out.push(p.clone());
            }
            continue;
        }
        let rest = m & !x;
        // Any subset S of G(sigma), including the empty set and G itself.
        let mut s = g;
        let blocked = loop {
            if masks.contains(&(rest | s)) {
                break true;
            }
            if s == 0 {
                break false;
            }
            s = (s - 1) & g;
        };
        if !blocked {
            out.push(PrimitiveCollection::from_mask(rest | g));
        }
    }
    sort_pcs(out)
}

/// Whether the blow-down target is Fano (weak Fano if `weak`), decided from
/// the relations of the fan alone.
pub fn predict_blowdown_fano(fan: &Fan, spec: &BlowDownSpec, weak: bool) -> Result<bool> {
    let rels = crate::primitive::primitive_relations(fan)?;
    let ok = if weak {
        rels.iter().all(|r| r.degree >= 0)
    } else {
        rels.iter().all(|r| r.degree > 0)
    };
    if !ok {
        return Err(Error::Surgery(format!(
            "the fan is not {}",
            if weak { "weak Fano" } else { "Fano" }
        )));
    }
    check_candidate(fan, spec)?;
    Ok(predict_with_relations(fan.dim(), &rels, spec, weak))
}

/// Scan for an obstructing relation
/// `y_1+...+y_m = a_1 z_1+...+a_n z_n + b x + c_1 x_1+...+c_{l-1} x_{l-1}`:
/// a, b > 0; at most l-1 of the x_i on the right; the degree is positive
/// (weak: nonnegative); replacing x by x_1+...+x_l makes it nonpositive
/// (weak: negative); and m + n + l <= d + 1. Relations whose collection
/// meets P* (P* itself among them) do not survive the blow-down and are
/// skipped.
pub(crate) fn predict_with_relations(d: usize, rels: &[PrimitiveRelation], spec: &BlowDownSpec, weak: bool) -> bool {
    let p = spec.collection().mask();
    let x = spec.target();
    let l = spec.collection().len() as i64;
    let obstructed = rels.iter().any(|r| {
        if r.collection.mask() & p != 0 {
            return false;
        }
        let Some(&(_, b)) = r.coefficients.iter().find(|(j, _)| *j == x) else {
            return false;
        };
        let mut a_sum = 0i64;
        let mut n = 0i64;
        let mut c_sum = 0i64;
        let mut c_count = 0i64;
        for &(j, a) in &r.coefficients {
            if j == x {
                continue;
            }
            if p & (1 << j) != 0 {
                c_sum += a;
                c_count += 1;
            } else {
                a_sum += a;
                n += 1;
            }
        }
        if c_count > l - 1 {
            return false;
        }
        let m = r.collection.len() as i64;
        let before = m - (a_sum + b + c_sum);
        let after = m - (a_sum + b * l + c_sum);
        let (c2, c3) = if weak { (before >= 0, after < 0) } else { (before > 0, after <= 0) };
        c2 && c3 && m + n + l <= d as i64 + 1
    });
    !obstructed
}

/// Flop a degree-zero relation `x_1+...+x_l = y_1+...+y_l` whose cycle
/// spans an extremal ray: blow up Cone(y), then blow down x_1+...+x_l = z.
pub fn flop(fan: &Fan, p: &PrimitiveCollection) -> Result<Surgery> {
    let rel = primitive_relation(fan, p)?;
    if rel.degree != 0 || rel.coefficients.iter().any(|&(_, a)| a != 1) || rel.coefficients.len() != p.len() {
        return Err(Error::Surgery(format!("{} cannot be flopped", rel.render(0))));
    }
    if !is_extremal(fan, &rel)? {
        return Err(Error::Surgery(format!("{} is not extremal", rel.render(0))));
    }
    let up = blow_up(fan, &rel.sigma)?;
    let z = fan.n_rays();
    let lifted = primitive_relation(&up.fan, p)?;
    if lifted.single_rhs() != Some(z) {
        return Err(Error::Surgery("flop: unexpected relation after blow-up".into()));
    }
    let down = blow_down(&up.fan, &BlowDownSpec::new(lifted)?)?;
    Ok(Surgery {
        fan: down.fan,
        ray_map: (0..fan.n_rays()).map(Some).collect(),
    })
}
