//! Primitive collections and relations, degrees, one-cycles and the Mori cone.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cone::{extreme_rays, make_primitive};
use crate::error::{Error, Result};
use crate::fan::{bits, ConeRef, Fan};
use crate::lattice::{rank_big, sum, LatticeVector};

/// A minimal set of rays that does not span a cone of the fan.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveCollection(ConeRef);

impl PrimitiveCollection {
    pub(crate) fn from_mask(mask: u64) -> Self {
        PrimitiveCollection(ConeRef::from_mask(mask))
    }

    /// Wrap an index set; [`primitive_relation`] checks minimality.
    pub fn new(indices: Vec<usize>) -> Self {
        PrimitiveCollection(ConeRef::new(indices))
    }

    pub fn indices(&self) -> &[usize] {
        self.0.indices()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn mask(&self) -> u64 {
        self.0.mask()
    }
}

/// `sum_{i in P} x_i = sum_j a_j y_j`, with `{y_j}` the rays of sigma(P).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimitiveRelation {
    pub collection: PrimitiveCollection,
    pub sigma: ConeRef,
    /// `(ray, a_j)` sorted by ray, all `a_j > 0`.
    pub coefficients: Vec<(usize, i64)>,
    pub degree: i64,
}

impl PrimitiveRelation {
    /// Human-readable form such as `x1+x2=x6` or `x0+x4=0`, with ray `i`
    /// printed as `x{i + offset}`.
    pub fn render(&self, offset: usize) -> String {
        let mut s = String::new();
        for (k, i) in self.collection.indices().iter().enumerate() {
            if k > 0 {
                s.push('+');
            }
            let _ = write!(s, "x{}", i + offset);
        }
        s.push('=');
        if self.coefficients.is_empty() {
            s.push('0');
        }
        for (k, (j, a)) in self.coefficients.iter().enumerate() {
            if k > 0 {
                s.push('+');
            }
            if *a != 1 {
                let _ = write!(s, "{a}");
            }
            let _ = write!(s, "x{}", j + offset);
        }
        s
    }

    /// The single right-hand ray when the relation reads `x_1+...+x_l = x`.
    pub fn single_rhs(&self) -> Option<usize> {
        match self.coefficients.as_slice() {
            [(j, 1)] => Some(*j),
            _ => None,
        }
    }
}

/// An integer relation `sum_x w_x * x = 0` among the rays.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OneCycle {
    pub weights: Vec<i64>,
}

impl OneCycle {
    /// Whether the weights give an exact lattice identity.
    pub fn holds_in(&self, fan: &Fan) -> bool {
        let mut acc = vec![0i128; fan.dim()];
        for (w, r) in self.weights.iter().zip(fan.rays()) {
            for (a, c) in acc.iter_mut().zip(r.coords()) {
                *a += *w as i128 * *c as i128;
            }
        }
        self.weights.len() == fan.n_rays() && acc.iter().all(|&a| a == 0)
    }
}

/// All primitive collections, sorted by size and then by indices.
pub fn primitive_collections(fan: &Fan) -> Vec<PrimitiveCollection> {
    let faces: HashSet<u64> = fan.cone_masks().into_iter().collect();
    let n = fan.n_rays();
    let mut out = Vec::new();
    let mut level: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    for _ in 2..=fan.dim() + 1 {
        let mut next = Vec::new();
        for &f in &level {
            let top = 63 - f.leading_zeros() as usize;
            for j in top + 1..n {
                let s = f | (1 << j);
                if faces.contains(&s) {
                    next.push(s);
                } else if bits(s).all(|i| faces.contains(&(s & !(1 << i)))) {
                    out.push(s);
                }
            }
        }
        level = next;
        if level.is_empty() {
            break;
        }
    }
    let mut pcs: Vec<PrimitiveCollection> = out.into_iter().map(PrimitiveCollection::from_mask).collect();
    pcs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    pcs
}

pub(crate) fn is_primitive_mask(fan: &Fan, s: u64) -> bool {
    s.count_ones() >= 2 && !fan.is_cone_mask(s) && bits(s).all(|i| fan.is_cone_mask(s & !(1 << i)))
}

pub fn primitive_relation(fan: &Fan, p: &PrimitiveCollection) -> Result<PrimitiveRelation> {
    if p.indices().iter().any(|&i| i >= fan.n_rays()) || !is_primitive_mask(fan, p.mask()) {
        return Err(Error::NotPrimitive(format!("{:?}", p.0)));
    }
    let total = sum(fan.dim(), p.indices().iter().map(|&i| fan.ray(i)));
    let (mask, coefficients) = fan.locate_integral(&total)?;
    let degree = p.len() as i64 - coefficients.iter().map(|(_, a)| a).sum::<i64>();
    Ok(PrimitiveRelation {
        collection: p.clone(),
        sigma: ConeRef::from_mask(mask),
        coefficients,
        degree,
    })
}

/// Relations of all primitive collections, in collection order.
pub fn primitive_relations(fan: &Fan) -> Result<Vec<PrimitiveRelation>> {
    primitive_collections(fan)
        .iter()
        .map(|p| primitive_relation(fan, p))
        .collect()
}

fn require_nonsingular(fan: &Fan) -> Result<()> {
    if fan.is_nonsingular() {
        Ok(())
    } else {
        Err(Error::Singular("Fano tests need a nonsingular fan".into()))
    }
}

pub fn is_fano(fan: &Fan) -> Result<bool> {
    require_nonsingular(fan)?;
    Ok(primitive_relations(fan)?.iter().all(|r| r.degree > 0))
}

pub fn is_weak_fano(fan: &Fan) -> Result<bool> {
    require_nonsingular(fan)?;
    Ok(primitive_relations(fan)?.iter().all(|r| r.degree >= 0))
}

pub fn one_cycle_r(fan: &Fan, rel: &PrimitiveRelation) -> OneCycle {
    let mut weights = vec![0i64; fan.n_rays()];
    for &i in rel.collection.indices() {
        weights[i] += 1;
    }
    for &(j, a) in &rel.coefficients {
        weights[j] -= a;
    }
    OneCycle { weights }
}

/// The wall relation: the two rays off the wall get weight 1.
pub fn one_cycle_v(fan: &Fan, wall: &ConeRef) -> Result<OneCycle> {
    let d = fan.dim();
    if wall.len() + 1 != d || wall.indices().iter().any(|&i| i >= fan.n_rays()) {
        return Err(Error::NotACone(format!("{wall:?} (not a wall)")));
    }
    let w = wall.mask();
    let cones: Vec<usize> = fan
        .max_masks()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m & w == w)
        .map(|(k, _)| k)
        .collect();
    let [a, b] = cones[..] else {
        return Err(Error::NotACone(format!("{wall:?} is not shared by exactly two maximal cones")));
    };
    let za = (fan.max_masks()[a] & !w).trailing_zeros() as usize;
    let zb = (fan.max_masks()[b] & !w).trailing_zeros() as usize;
    let coords = fan
        .frame(a)
        .integral_coords(fan.ray(zb))?
        .ok_or_else(|| Error::Singular(format!("cone {:?}", fan.max_cones()[a])))?;
    let idx = fan.max_cones()[a].indices();
    let mut weights = vec![0i64; fan.n_rays()];
    weights[zb] = 1;
    for (k, &i) in idx.iter().enumerate() {
        weights[i] -= coords[k];
    }
    if weights[za] != 1 {
        return Err(Error::Singular(format!("wall {wall:?}")));
    }
    Ok(OneCycle { weights })
}

/// The cone generated by the cycles r(P), in coordinates of the rays outside
/// a reference maximal cone (an injective image of the relation space).
#[derive(Clone, Debug)]
pub struct MoriCone {
    outside: Vec<usize>,
    normals: Vec<Vec<BigInt>>,
    generators: Vec<(OneCycle, Vec<BigInt>)>,
}

impl MoriCone {
    pub fn of(fan: &Fan) -> Result<MoriCone> {
        require_nonsingular(fan)?;
        let reference = fan.max_masks()[0];
        let outside: Vec<usize> = (0..fan.n_rays()).filter(|&i| reference & (1 << i) == 0).collect();
        let m = outside.len();
        let mut generators = Vec::new();
        for rel in primitive_relations(fan)? {
            let c = one_cycle_r(fan, &rel);
            let g: Vec<BigInt> = outside.iter().map(|&i| BigInt::from(c.weights[i])).collect();
            generators.push((c, g));
        }
        if m == 0 {
            return Err(Error::InvalidFan("a complete fan has at least d+1 rays".into()));
        }
        let rows: Vec<Vec<BigInt>> = generators.iter().map(|(_, g)| g.clone()).collect();
        if rank_big(rows.clone()) < m {
            return Err(Error::InvalidFan("cycles r(P) do not span the relation space".into()));
        }
        let normals = extreme_rays(&rows, m)?;
        Ok(MoriCone {
            outside,
            normals,
            generators,
        })
    }

    fn project(&self, c: &OneCycle) -> Vec<BigInt> {
        self.outside.iter().map(|&i| BigInt::from(c.weights[i])).collect()
    }

    pub fn contains(&self, c: &OneCycle) -> bool {
        let v = self.project(c);
        self.normals.iter().all(|n| dot(n, &v) >= BigInt::zero())
    }

    /// Whether `c` spans an extreme ray (rank test on the tight facets).
    pub fn is_extremal(&self, c: &OneCycle) -> bool {
        let v = self.project(c);
        if v.iter().all(Zero::is_zero) || !self.contains(c) {
            return false;
        }
        let tight: Vec<Vec<BigInt>> = self.normals.iter().filter(|n| dot(n, &v).is_zero()).cloned().collect();
        rank_big(tight) + 1 == self.outside.len()
    }

    /// One cycle r(P) per extreme ray, sorted.
    pub fn extreme_rays(&self) -> Vec<OneCycle> {
        let mut seen: HashMap<Vec<BigInt>, OneCycle> = HashMap::new();
        for (c, g) in &self.generators {
            if self.is_extremal(c) {
                let mut dir = g.clone();
                make_primitive(&mut dir);
                seen.entry(dir).or_insert_with(|| c.clone());
            }
        }
        let mut out: Vec<OneCycle> = seen.into_values().collect();
        out.sort();
        out
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mori_extreme_rays(fan: &Fan) -> Result<Vec<OneCycle>> {
    Ok(MoriCone::of(fan)?.extreme_rays())
}

pub fn is_extremal(fan: &Fan, rel: &PrimitiveRelation) -> Result<bool> {
    Ok(MoriCone::of(fan)?.is_extremal(&one_cycle_r(fan, rel)))
}

pub fn is_splitting_fan(fan: &Fan) -> bool {
    let pcs = primitive_collections(fan);
    let mut seen = 0u64;
    for p in &pcs {
        if seen & p.mask() != 0 {
            return false;
        }
        seen |= p.mask();
    }
    true
}

pub fn is_pseudo_symmetric(fan: &Fan) -> bool {
    let index: HashMap<&LatticeVector, usize> = fan.rays().iter().enumerate().map(|(i, r)| (r, i)).collect();
    let maxes: HashSet<u64> = fan.max_masks().iter().copied().collect();
    fan.max_masks().iter().any(|&m| {
        let mut neg = 0u64;
        for i in bits(m) {
            match index.get(&-fan.ray(i)) {
                Some(&j) => neg |= 1 << j,
                None => return false,
            }
        }
        maxes.contains(&neg)
    })
}
