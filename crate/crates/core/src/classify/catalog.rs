//! Standard fans: projective spaces, products, projective bundles over
//! projective spaces, and the (pseudo) del Pezzo varieties.

use std::collections::BTreeMap;

use crate::fan::{ConeRef, Fan};
use crate::lattice::{sum, LatticeVector};
use crate::polytope::{convex_hull, face_fan};
use crate::{Error, Result};

use super::iso::canonical_key;

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Rays `e_1, ..., e_d, -(e_1 + ... + e_d)`.
pub fn projective_space(d: usize) -> Result<Fan> {
    projective_bundle(d, &[])
}

/// Rays of `f1` (padded with zeros) followed by those of `f2`; maximal cones
/// are unions of one maximal cone from each factor.
pub fn product_fan(f1: &Fan, f2: &Fan) -> Result<Fan> {
    let (d1, d2) = (f1.dim(), f2.dim());
    let mut rays = Vec::with_capacity(f1.n_rays() + f2.n_rays());
    for r in f1.rays() {
        let mut v = r.coords().to_vec();
        v.resize(d1 + d2, 0);
        rays.push(LatticeVector::new(v));
    }
    for r in f2.rays() {
        let mut v = vec![0; d1];
        v.extend_from_slice(r.coords());
        rays.push(LatticeVector::new(v));
    }
    let shift = f1.n_rays();
    let mut cones = Vec::new();
    for a in f1.max_cones() {
        for b in f2.max_cones() {
            let mut c = a.indices().to_vec();
            c.extend(b.indices().iter().map(|i| i + shift));
            cones.push(ConeRef::new(c));
        }
    }
    Fan::from_trusted(d1 + d2, rays, cones)
}

/// The projectivization of `O + O(a_1) + ... + O(a_r)` over `P^base`.
///
/// Rays: `e_1, ..., e_base`, then `v_0 = -sum e_i + sum a_j f_j`, then the
/// fibre rays `f_1, ..., f_r, -(f_1 + ... + f_r)`.
pub fn projective_bundle(base: usize, twists: &[i64]) -> Result<Fan> {
    let r = twists.len();
    let d = base + r;
    if d == 0 {
        return Err(Error::InvalidFan("dimension must be positive".into()));
    }
    let unit = |i| LatticeVector::unit(d, i);
    let mut rays: Vec<LatticeVector> = (0..base).map(unit).collect();
    if base > 0 {
        let mut v0 = vec![-1; base];
        v0.extend_from_slice(twists);
        rays.push(LatticeVector::new(v0));
    }
    let first_fibre = rays.len();
    for j in 0..r {
        rays.push(unit(base + j));
    }
    if r > 0 {
        let mut v = vec![0; base];
        v.extend(std::iter::repeat_n(-1, r));
        rays.push(LatticeVector::new(v));
    }
    let base_cones = if base > 0 { subsets_of_size(base + 1, base) } else { vec![vec![]] };
    let fibre_cones = if r > 0 { subsets_of_size(r + 1, r) } else { vec![vec![]] };
    let mut cones = Vec::new();
    for b in &base_cones {
        for f in &fibre_cones {
            let mut c = b.clone();
            c.extend(f.iter().map(|i| i + first_fibre));
            cones.push(ConeRef::new(c));
        }
    }
    Fan::from_trusted(d, rays, cones)
}

/// The Hirzebruch surface `F_a`.
pub fn hirzebruch(a: i64) -> Result<Fan> {
    projective_bundle(1, &[a])
}

fn del_pezzo_rays(d: usize, negative_sum: bool) -> Vec<LatticeVector> {
    let mut rays: Vec<LatticeVector> = (0..d).map(|i| LatticeVector::unit(d, i)).collect();
    rays.extend((0..d).map(|i| -&LatticeVector::unit(d, i)));
    let s = sum(d, rays[..d].iter());
    rays.push(s.clone());
    if negative_sum {
        rays.push(-&s);
    }
    rays
}

/// Face fan of `conv(±e_i, ±(e_1+...+e_d))` with ray order
/// `e_1..e_d, -e_1..-e_d, sum, -sum`.
fn del_pezzo_like(d: usize, negative_sum: bool) -> Result<Fan> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::InvalidFan(format!("del Pezzo varieties have even dimension >= 2, not {d}")));
    }
    let want = del_pezzo_rays(d, negative_sum);
    let fan = face_fan(&convex_hull(&want)?)?;
    let order = want
        .iter()
        .map(|w| {
            fan.rays()
                .iter()
                .position(|r| r == w)
                .ok_or_else(|| Error::InvalidFan(format!("ray {w} missing from face fan")))
        })
        .collect::<Result<Vec<_>>>()?;
    fan.permute_rays(&order)
}

/// `V^d`, for even `d`.
pub fn del_pezzo_fan(d: usize) -> Result<Fan> {
    del_pezzo_like(d, true)
}

/// `\tilde V^d`, for even `d`.
pub fn pseudo_del_pezzo_fan(d: usize) -> Result<Fan> {
    del_pezzo_like(d, false)
}

/// All products of projective lines, del Pezzo and pseudo del Pezzo
/// varieties of total dimension `d`, one per isomorphism class, sorted by
/// canonical key.
pub fn pseudo_symmetric_catalog(d: usize) -> Result<Vec<Fan>> {
    // Factors are P^1 (dimension 1, code 0), V^{2k} (code 1) and
    // \tilde V^{2k} (code 2); enumerate nondecreasing factor sequences.
    fn rec(left: usize, min: (usize, u8), cur: &mut Vec<(usize, u8)>, out: &mut Vec<Vec<(usize, u8)>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let mut options = vec![(1, 0u8)];
        for k in (2..=left).step_by(2) {
            options.push((k, 1));
            options.push((k, 2));
        }
        for f in options {
            if f >= min && f.0 <= left {
                cur.push(f);
                rec(left - f.0, f, cur, out);
                cur.pop();
            }
        }
    }
    if d == 0 {
        return Err(Error::InvalidFan("dimension must be positive".into()));
    }
    let mut shapes = Vec::new();
    rec(d, (0, 0), &mut Vec::new(), &mut shapes);
    let mut out = BTreeMap::new();
    for shape in shapes {
        let mut fan: Option<Fan> = None;
        for (k, code) in shape {
            let f = match code {
                0 => projective_space(1)?,
                1 => del_pezzo_fan(k)?,
                _ => pseudo_del_pezzo_fan(k)?,
            };
            fan = Some(match fan {
                None => f,
                Some(g) => product_fan(&g, &f)?,
            });
        }
        let fan = fan.expect("positive dimension");
        out.entry(canonical_key(&fan)?).or_insert(fan);
    }
    Ok(out.into_values().collect())
}
