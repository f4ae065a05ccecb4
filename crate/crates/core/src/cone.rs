//! Double description for pointed polyhedral cones, over exact integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::rank_big;

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// Solve `A x = e_j` for a square nonsingular integer `A`, scaled to a
/// primitive integer vector with the same direction.
fn inverse_column(a: &[Vec<BigInt>], j: usize) -> Vec<BigInt> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.push(if i == j { BigRational::one() } else { BigRational::zero() });
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero()).expect("nonsingular");
        m.swap(p, c);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..=n {
                    let t = &m[c][k] * &f;
                    m[i][k] -= t;
                }
            }
        }
    }
    let sol: Vec<BigRational> = m.iter().map(|r| r[n].clone()).collect();
    let l = sol.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut v: Vec<BigInt> = sol.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    make_primitive(&mut v);
    v
}

/// Extreme rays of the cone `{x in Q^dim : <a, x> >= 0 for every row a}`.
///
/// The rows must have rank `dim` (the cone is pointed). Rays are returned
/// as primitive integer vectors in a deterministic (sorted) order.
pub fn extreme_rays(rows: &[Vec<BigInt>], dim: usize) -> Result<Vec<Vec<BigInt>>> {
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rows.iter().map(|r| r.len()).find(|&l| l != dim).unwrap_or(dim),
        });
    }
    if rank_big(rows.to_vec()) < dim {
        return Err(Error::Polytope("cone is not pointed".into()));
    }
    // Greedy choice of an initial independent set of rows.
    let mut init: Vec<usize> = Vec::with_capacity(dim);
    for i in 0..rows.len() {
        let mut trial: Vec<Vec<BigInt>> = init.iter().map(|&k| rows[k].clone()).collect();
        trial.push(rows[i].clone());
        if rank_big(trial) == init.len() + 1 {
            init.push(i);
            if init.len() == dim {
                break;
            }
        }
    }
    let a_init: Vec<Vec<BigInt>> = init.iter().map(|&k| rows[k].clone()).collect();
    let n = rows.len();
    let mut rays: Vec<(Vec<BigInt>, Bits)> = (0..dim)
        .map(|j| {
            let v = inverse_column(&a_init, j);
            let mut z = Bits::new(n);
            for (k, &row) in init.iter().enumerate() {
                if k != j {
                    z.set(row);
                }
            }
            (v, z)
        })
        .collect();
    let mut processed: Vec<bool> = vec![false; n];
    for &i in &init {
        processed[i] = true;
    }
    for i in 0..n {
        if processed[i] {
            continue;
        }
        processed[i] = true;
        let a = &rows[i];
        let vals: Vec<BigInt> = rays.iter().map(|(v, _)| dot(a, v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        if neg.is_empty() {
            for (k, (_, z)) in rays.iter_mut().enumerate() {
                if vals[k].is_zero() {
                    z.set(i);
                }
            }
            continue;
        }
        let mut fresh: Vec<(Vec<BigInt>, Bits)> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].1.and(&rays[q].1);
                if (common.count() as usize) + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|r| r == p || r == q || !common.subset_of(&rays[r].1));
                if !adjacent {
                    continue;
                }
                let ap = &vals[p];
                let aq = -&vals[q];
                let mut v: Vec<BigInt> = rays[q]
                    .0
                    .iter()
                    .zip(&rays[p].0)
                    .map(|(x, y)| ap * x + &aq * y)
                    .collect();
                make_primitive(&mut v);
                let mut z = common;
                z.set(i);
                fresh.push((v, z));
            }
        }
        let mut next: Vec<(Vec<BigInt>, Bits)> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, (v, mut z)) in rays.into_iter().enumerate() {
            if vals[k].is_negative() {
                continue;
            }
            if vals[k].is_zero() {
                z.set(i);
            }
            next.push((v, z));
        }
        next.extend(fresh);
        rays = next;
    }
    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|(v, _)| v).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Inward facet normals of the full-dimensional cone generated by `gens`.
pub fn facet_normals(gens: &[Vec<BigInt>], dim: usize) -> Result<Vec<Vec<BigInt>>> {
    extreme_rays(gens, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn orthant_has_unit_rays() {
        let rows = big(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let rays = extreme_rays(&rows, 3).unwrap();
        assert_eq!(rays, big(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]));
    }

    #[test]
    fn square_pyramid_has_four_facets() {
        // Cone over the square with vertices (+-1, +-1) at height 1.
        let gens = big(&[&[1, 1, 1], &[1, 1, -1], &[1, -1, 1], &[1, -1, -1]]);
        let normals = facet_normals(&gens, 3).unwrap();
        assert_eq!(normals, big(&[&[1, -1, 0], &[1, 0, -1], &[1, 0, 1], &[1, 1, 0]]));
    }

    #[test]
    fn redundant_inequalities_are_ignored() {
        let rows = big(&[&[1, 0], &[0, 1], &[1, 1], &[2, 1]]);
        assert_eq!(extreme_rays(&rows, 2).unwrap(), big(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn non_pointed_input_is_rejected() {
        let rows = big(&[&[1, 0, 0], &[0, 1, 0]]);
        assert!(extreme_rays(&rows, 3).is_err());
    }
}
