//! Integer vectors and matrices in N = Z^d, with exact elimination.
//!
//! Coordinates are stored as `i64`. Anything that can grow (determinants,
//! eliminations, rational solves) runs on `BigInt`/`BigRational`, or on
//! checked `i128` where speed matters.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector(coords)
    }

    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![0; dim])
    }

    /// The `i`-th standard basis vector of Z^dim.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &c| g.gcd(&c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn dot(&self, other: &LatticeVector) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: i64) -> LatticeVector {
        LatticeVector(self.0.iter().map(|c| c * k).collect())
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }
}

/// Sum of a family of vectors of dimension `dim`.
pub fn sum<'a>(dim: usize, vs: impl IntoIterator<Item = &'a LatticeVector>) -> LatticeVector {
    let mut acc = vec![0i64; dim];
    for v in vs {
        for (a, c) in acc.iter_mut().zip(v.coords()) {
            *a += c;
        }
    }
    LatticeVector(acc)
}

/// The primitive vector on the ray through `v`.
pub fn primitive_part(v: &LatticeVector) -> Result<LatticeVector> {
    let g = v.content();
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    Ok(LatticeVector(v.0.iter().map(|c| c / g).collect()))
}

/// Row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(IntegerMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntegerMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[LatticeVector]) -> Result<Self> {
        let rows = cols.first().map_or(0, |c| c.dim());
        let mut entries = vec![0; rows * cols.len()];
        for (j, c) in cols.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: c.dim(),
                });
            }
            for i in 0..rows {
                entries[i * cols.len() + j] = c.coords()[i];
            }
        }
        Ok(IntegerMatrix {
            rows,
            cols: cols.len(),
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        let out = (0..self.rows)
            .map(|r| {
                let acc: i128 = self
                    .row(r)
                    .iter()
                    .zip(v.coords())
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum();
                i64::try_from(acc).map_err(|_| Error::Overflow("matrix application"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticeVector(out))
    }

    fn to_big(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[i64]> = (0..self.rows).map(|r| self.row(r)).collect();
        write!(f, "{rows:?}")
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn det(m: &IntegerMatrix) -> Result<BigInt> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: m.cols,
        });
    }
    Ok(bareiss_det(m.to_big()))
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Rank over Q of a list of integer vectors.
pub fn rank(vectors: &[LatticeVector]) -> usize {
    let rows: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| v.coords().iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    rank_big(rows)
}

pub(crate) fn rank_big(mut a: Vec<Vec<BigInt>>) -> usize {
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            let (x, y) = (a[r][c].clone(), a[i][c].clone());
            for j in c..cols {
                a[i][j] = &a[i][j] * &x - &a[r][j] * &y;
            }
            let g = a[i].iter().fold(BigInt::zero(), |g, v| g.gcd(v));
            if !g.is_zero() && !g.is_one() {
                for v in a[i].iter_mut() {
                    *v /= &g;
                }
            }
        }
        r += 1;
        if r == a.len() {
            break;
        }
    }
    r
}

/// Solve `sum c_i g_i = target` over Q.
///
/// Returns `Ok(None)` when the target is outside the span of the generators,
/// and an error when the generators are linearly dependent.
pub fn solve_in_cone_basis(
    generators: &[LatticeVector],
    target: &LatticeVector,
) -> Result<Option<Vec<BigRational>>> {
    let d = target.dim();
    for g in generators {
        if g.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
    }
    let k = generators.len();
    // Augmented system: d equations in k unknowns.
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            let mut row: Vec<BigRational> = generators
                .iter()
                .map(|g| BigRational::from_integer(g.coords()[i].into()))
                .collect();
            row.push(BigRational::from_integer(target.coords()[i].into()));
            row
        })
        .collect();
    let mut pivots = Vec::with_capacity(k);
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..d).find(|&i| !a[i][c].is_zero()) else {
            return Err(Error::DependentGenerators);
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..d {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..=k {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(r);
        r += 1;
    }
    if (r..d).any(|i| !a[i][k].is_zero()) {
        return Ok(None);
    }
    Ok(Some(pivots.iter().map(|&i| a[i][k].clone()).collect()))
}

/// A unimodular `U` with `U a = b` for every pair, if one exists.
///
/// The sources must span Q^d; otherwise the map is not determined and
/// [`Error::Underdetermined`] is returned.
pub fn find_unimodular_map(pairs: &[(LatticeVector, LatticeVector)]) -> Result<Option<IntegerMatrix>> {
    let Some((a0, _)) = pairs.first() else {
        return Err(Error::Underdetermined);
    };
    let d = a0.dim();
    for (a, b) in pairs {
        if a.dim() != d || b.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if a.dim() != d { a.dim() } else { b.dim() },
            });
        }
    }
    // Greedily pick d independent sources.
    let mut basis: Vec<usize> = Vec::with_capacity(d);
    for (i, (a, _)) in pairs.iter().enumerate() {
        let mut trial: Vec<LatticeVector> = basis.iter().map(|&j| pairs[j].0.clone()).collect();
        trial.push(a.clone());
        if rank(&trial) == trial.len() {
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() < d {
        return Err(Error::Underdetermined);
    }
    let a_cols: Vec<LatticeVector> = basis.iter().map(|&j| pairs[j].0.clone()).collect();
    let frame = Frame::new(&a_cols)?;
    // U = B A^{-1}; row r of U is (row r of B) * A^{-1}, i.e. entry (r, c) is
    // sum_k B[r][k] * inv[k][c] with inv = adj / det.
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            let mut acc: i128 = 0;
            for (k, &j) in basis.iter().enumerate() {
                let b = pairs[j].1.coords()[r] as i128;
                acc = b
                    .checked_mul(frame.adj[k * d + c])
                    .and_then(|t| acc.checked_add(t))
                    .ok_or(Error::Overflow("unimodular map"))?;
            }
            if acc % frame.det != 0 {
                return Ok(None);
            }
            entries.push(i64::try_from(acc / frame.det).map_err(|_| Error::Overflow("unimodular map"))?);
        }
    }
    let u = IntegerMatrix::new(d, d, entries)?;
    if det(&u)?.abs() != BigInt::one() {
        return Ok(None);
    }
    for (a, b) in pairs {
        if &u.apply(a)? != b {
            return Ok(None);
        }
    }
    Ok(Some(u))
}

/// Dual frame of a basis of Q^d: `adj * B = det * I`, where the columns of
/// `B` are the basis vectors. Coordinates of `v` in the basis are
/// `adj * v / det`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub dim: usize,
    pub det: i128,
    /// Row-major `dim x dim`.
    pub adj: Vec<i128>,
}

impl Frame {
    pub fn new(basis: &[LatticeVector]) -> Result<Self> {
        let d = basis.len();
        if basis.iter().any(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.iter().map(|b| b.dim()).find(|&x| x != d).unwrap_or(d),
            });
        }
        // Fraction-free Gauss-Jordan on [B | I].
        let w = 2 * d;
        let mut m = vec![0i128; d * w];
        for (j, b) in basis.iter().enumerate() {
            for i in 0..d {
                m[i * w + j] = b.coords()[i] as i128;
            }
        }
        for i in 0..d {
            m[i * w + d + i] = 1;
        }
        let mut prev: i128 = 1;
        let ovf = || Error::Overflow("frame elimination");
        for k in 0..d {
            let p = (k..d).find(|&i| m[i * w + k] != 0).ok_or(Error::DependentGenerators)?;
            if p != k {
                for j in 0..w {
                    m.swap(p * w + j, k * w + j);
                }
            }
            let pivot = m[k * w + k];
            for i in 0..d {
                if i == k {
                    continue;
                }
                let f = m[i * w + k];
                for j in 0..w {
                    if j == k {
                        continue;
                    }
                    let v = pivot
                        .checked_mul(m[i * w + j])
                        .zip(f.checked_mul(m[k * w + j]))
                        .and_then(|(x, y)| x.checked_sub(y))
                        .ok_or_else(ovf)?;
                    debug_assert_eq!(v % prev, 0);
                    m[i * w + j] = v / prev;
                }
                m[i * w + k] = 0;
            }
            prev = pivot;
        }
        let det = prev;
        let mut adj = Vec::with_capacity(d * d);
        for i in 0..d {
            adj.extend_from_slice(&m[i * w + d..i * w + w]);
        }
        // Row swaps leave the left block at det(PB) * I with the right block
        // equal to det(PB) * B^{-1}, so (adj, det) is consistent as is.
        Ok(Frame { dim: d, det, adj })
    }

    /// Numerators of the coordinates of `v` (denominator `self.det`).
    pub fn numerators(&self, v: &LatticeVector) -> Result<Vec<i128>> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let mut acc: i128 = 0;
                for j in 0..d {
                    acc = self.adj[i * d + j]
                        .checked_mul(v.coords()[j] as i128)
                        .and_then(|t| acc.checked_add(t))
                        .ok_or(Error::Overflow("frame coordinates"))?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Integer coordinates of `v`, or `None` if some coordinate is fractional.
    pub fn integral_coords(&self, v: &LatticeVector) -> Result<Option<Vec<i64>>> {
        let nums = self.numerators(v)?;
        let mut out = Vec::with_capacity(nums.len());
        for n in nums {
            if n % self.det != 0 {
                return Ok(None);
            }
            out.push((n / self.det).to_i64().ok_or(Error::Overflow("frame coordinates"))?);
        }
        Ok(Some(out))
    }

    /// Sign of each coordinate of `v` in the basis.
    pub fn coordinate_signs(&self, v: &LatticeVector) -> Result<Vec<i8>> {
        let s = self.det.signum();
        Ok(self
            .numerators(v)?
            .into_iter()
            .map(|n| (n.signum() * s) as i8)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::new(c.to_vec())
    }

    #[test]
    fn primitive_part_divides_content() {
        assert_eq!(primitive_part(&lv(&[4, -6])).unwrap(), lv(&[2, -3]));
        assert_eq!(primitive_part(&lv(&[0, 0, -5])).unwrap(), lv(&[0, 0, -1]));
        assert!(matches!(primitive_part(&lv(&[0, 0])), Err(Error::ZeroVector)));
    }

    #[test]
    fn det_of_small_matrices() {
        let m = IntegerMatrix::new(2, 2, vec![1, 0, 0, 1]).unwrap();
        assert_eq!(det(&m).unwrap(), BigInt::from(1));
        let m = IntegerMatrix::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(det(&m).unwrap(), BigInt::from(-1));
        let m = IntegerMatrix::new(3, 3, vec![2, 0, 1, 1, 3, 2, 1, 1, 2]).unwrap();
        assert_eq!(det(&m).unwrap(), BigInt::from(6));
    }

    #[test]
    fn solve_reports_span_and_dependence() {
        let g = [lv(&[1, 0, 0]), lv(&[0, 1, 0])];
        let sol = solve_in_cone_basis(&g, &lv(&[3, -2, 0])).unwrap().unwrap();
        assert_eq!(sol[0], BigRational::from_integer(3.into()));
        assert_eq!(sol[1], BigRational::from_integer((-2).into()));
        assert!(solve_in_cone_basis(&g, &lv(&[0, 0, 1])).unwrap().is_none());
        let dep = [lv(&[1, 1]), lv(&[2, 2])];
        assert!(matches!(
            solve_in_cone_basis(&dep, &lv(&[1, 1])),
            Err(Error::DependentGenerators)
        ));
        let sol = solve_in_cone_basis(&[lv(&[2, 0]), lv(&[0, 3])], &lv(&[1, 1])).unwrap().unwrap();
        assert_eq!(sol[0], BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn unimodular_map_of_a_swap() {
        let pairs = vec![
            (lv(&[1, 0]), lv(&[0, 1])),
            (lv(&[0, 1]), lv(&[1, 0])),
            (lv(&[-1, -1]), lv(&[-1, -1])),
        ];
        let u = find_unimodular_map(&pairs).unwrap().unwrap();
        assert_eq!(u, IntegerMatrix::new(2, 2, vec![0, 1, 1, 0]).unwrap());
        // Scaling by 2 is not unimodular.
        let pairs = vec![(lv(&[1, 0]), lv(&[2, 0])), (lv(&[0, 1]), lv(&[0, 2]))];
        assert!(find_unimodular_map(&pairs).unwrap().is_none());
        // A map that is rational but not integral.
        let pairs = vec![(lv(&[2, 0]), lv(&[1, 0])), (lv(&[0, 1]), lv(&[0, 1]))];
        assert!(find_unimodular_map(&pairs).unwrap().is_none());
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-4i64..=4, n * n)
    }

    /// Cofactor expansion, used as an independent check on Bareiss.
    fn laplace(m: &[Vec<i64>]) -> i128 {
        let n = m.len();
        if n == 1 {
            return m[0][0] as i128;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] as i128 * laplace(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(n in 1usize..=5, seed in small_matrix(5)) {
            let entries: Vec<i64> = seed[..n * n].to_vec();
            let rows: Vec<Vec<i64>> = entries.chunks(n).map(|c| c.to_vec()).collect();
            let m = IntegerMatrix::new(n, n, entries).unwrap();
            prop_assert_eq!(det(&m).unwrap(), BigInt::from(laplace(&rows)));
        }

        #[test]
        fn frame_inverts_its_basis(n in 1usize..=5, seed in small_matrix(5)) {
            let cols: Vec<LatticeVector> = seed[..n * n].chunks(n).map(lv).collect();
            let m = IntegerMatrix::from_columns(&cols).unwrap();
            let d = det(&m).unwrap();
            match Frame::new(&cols) {
                Err(Error::DependentGenerators) => prop_assert!(d.is_zero()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
                Ok(f) => {
                    prop_assert_eq!(BigInt::from(f.det).abs(), d.abs());
                    for (j, c) in cols.iter().enumerate() {
                        let nums = f.numerators(c).unwrap();
                        for (i, x) in nums.iter().enumerate() {
                            prop_assert_eq!(*x, if i == j { f.det } else { 0 });
                        }
                    }
                }
            }
        }

        #[test]
        fn primitive_part_is_primitive_and_parallel(c in prop::collection::vec(-50i64..=50, 1..5)) {
            let v = lv(&c);
            prop_assume!(!v.is_zero());
            let p = primitive_part(&v).unwrap();
            prop_assert!(p.is_primitive());
            prop_assert_eq!(p.scale(v.content()), v);
        }
    }
}
