//! Convex polytopes in N_R with exact rational data: hulls, polar duals,
//! reflexivity, face fans and crepant resolutions in low dimension.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::extreme_rays;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::lattice::{find_unimodular_map, rank, rank_big, IntegerMatrix, LatticeVector};
use crate::primitive::is_weak_fano;

pub type RationalPoint = Vec<BigRational>;

/// The half-space `<normal, x> >= -offset`, with `normal` primitive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: LatticeVector,
    pub offset: BigRational,
}

impl Facet {
    fn value(&self, p: &[BigRational]) -> BigRational {
        let s: BigRational = self
            .normal
            .coords()
            .iter()
            .zip(p)
            .map(|(&u, x)| x * BigRational::from_integer(u.into()))
            .sum();
        s + &self.offset
    }

    fn value_int(&self, p: &LatticeVector) -> BigRational {
        BigRational::from_integer(self.normal.dot(p).into()) + &self.offset
    }
}

/// A full-dimensional polytope with both descriptions. Vertices are
/// rational in general (polar duals) and integral for lattice polytopes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<RationalPoint>,
    facets: Vec<Facet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Vertices of the (integral) polar dual.
    PolarVertices(Vec<LatticeVector>),
    /// A facet at lattice distance other than 1 from the origin.
    ViolatingFacet(Facet),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflexivityCertificate {
    pub reflexive: bool,
    pub witness: Witness,
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn to_rational(v: &LatticeVector) -> RationalPoint {
    v.coords().iter().map(|&c| q(c)).collect()
}

fn to_lattice(p: &[BigRational]) -> Option<LatticeVector> {
    p.iter()
        .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
        .collect::<Option<Vec<i64>>>()
        .map(LatticeVector::new)
}

pub fn convex_hull(points: &[LatticeVector]) -> Result<Polytope> {
    let pts: Vec<RationalPoint> = points.iter().map(to_rational).collect();
    convex_hull_rational(&pts)
}

/// Hull of rational points by double description on the homogenized cone.
pub fn convex_hull_rational(points: &[RationalPoint]) -> Result<Polytope> {
    let Some(first) = points.first() else {
        return Err(Error::Polytope("no points".into()));
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: points.iter().map(|p| p.len()).find(|&l| l != d).unwrap_or(d),
        });
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let rows: Vec<Vec<BigInt>> = pts
        .iter()
        .map(|p| {
            let den = p.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            let mut row = vec![den.clone()];
            row.extend(p.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()));
            row
        })
        .collect();
    if rank_big(rows.clone()) < d + 1 {
        return Err(Error::Polytope("points do not span a full-dimensional polytope".into()));
    }
    let mut facets = Vec::new();
    for ray in extreme_rays(&rows, d + 1)? {
        let u: Vec<BigInt> = ray[1..].to_vec();
        let g = u.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if g.is_zero() {
            continue;
        }
        let normal = u
            .iter()
            .map(|x| (x / &g).to_i64())
            .collect::<Option<Vec<i64>>>()
            .ok_or(Error::Overflow("facet normal"))?;
        facets.push(Facet {
            normal: LatticeVector::new(normal),
            offset: BigRational::new(ray[0].clone(), g),
        });
    }
    facets.sort();
    let vertices: Vec<RationalPoint> = pts
        .into_iter()
        .filter(|p| {
            let tight: Vec<LatticeVector> = facets
                .iter()
                .filter(|f| f.value(p).is_zero())
                .map(|f| f.normal.clone())
                .collect();
            rank(&tight) == d
        })
        .collect();
    Ok(Polytope {
        dim: d,
        vertices,
        facets,
    })
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_lattice(&self) -> bool {
        self.vertices.iter().all(|v| v.iter().all(|x| x.is_integer()))
    }

    pub fn lattice_vertices(&self) -> Option<Vec<LatticeVector>> {
        self.vertices.iter().map(|v| to_lattice(v)).collect()
    }

    pub fn origin_is_interior(&self) -> bool {
        self.facets.iter().all(|f| f.offset.is_positive())
    }

    pub fn contains(&self, p: &LatticeVector) -> bool {
        self.facets.iter().all(|f| !f.value_int(p).is_negative())
    }

    /// Indices of the vertices lying on facet `k`.
    pub fn facet_vertices(&self, k: usize) -> Vec<usize> {
        let f = &self.facets[k];
        (0..self.vertices.len()).filter(|&i| f.value(&self.vertices[i]).is_zero()).collect()
    }

    /// All lattice points, sorted.
    pub fn lattice_points(&self) -> Vec<LatticeVector> {
        let d = self.dim;
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for v in &self.vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v[i].floor().to_integer().to_i64().unwrap_or(i64::MIN));
                hi[i] = hi[i].max(v[i].ceil().to_integer().to_i64().unwrap_or(i64::MAX));
            }
        }
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            let p = LatticeVector::new(cur.clone());
            if self.contains(&p) {
                out.push(p);
            }
            let mut i = 0;
            loop {
                if i == d {
                    return out;
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }

    fn on_boundary(&self, p: &LatticeVector) -> bool {
        self.facets.iter().any(|f| f.value_int(p).is_zero())
    }

    pub fn boundary_lattice_points(&self) -> Vec<LatticeVector> {
        let mut v: Vec<LatticeVector> = self.lattice_points().into_iter().filter(|p| self.on_boundary(p)).collect();
        v.sort();
        v
    }
}

/// `{y : <y, x> >= -1 for all x in p}`.
pub fn polar_dual(p: &Polytope) -> Result<Polytope> {
    if !p.origin_is_interior() {
        return Err(Error::Polytope("the origin is not an interior point".into()));
    }
    let pts: Vec<RationalPoint> = p
        .facets
        .iter()
        .map(|f| f.normal.coords().iter().map(|&u| q(u) / &f.offset).collect())
        .collect();
    convex_hull_rational(&pts)
}

pub fn is_reflexive(p: &Polytope) -> Result<ReflexivityCertificate> {
    if !p.origin_is_interior() {
        return Err(Error::Polytope("the origin is not an interior point".into()));
    }
    if !p.is_lattice() {
        return Err(Error::Polytope("not a lattice polytope".into()));
    }
    if let Some(f) = p.facets.iter().find(|f| !f.offset.is_one()) {
        return Ok(ReflexivityCertificate {
            reflexive: false,
            witness: Witness::ViolatingFacet(f.clone()),
        });
    }
    let mut polar: Vec<LatticeVector> = p.facets.iter().map(|f| f.normal.clone()).collect();
    polar.sort();
    Ok(ReflexivityCertificate {
        reflexive: true,
        witness: Witness::PolarVertices(polar),
    })
}

fn require_reflexive(p: &Polytope) -> Result<()> {
    if is_reflexive(p)?.reflexive {
        Ok(())
    } else {
        Err(Error::Polytope("polytope is not reflexive".into()))
    }
}

/// Conv(G(fan)).
pub fn fano_polytope_of(fan: &Fan) -> Result<Polytope> {
    convex_hull(fan.rays())
}

/// Fan over the proper faces of a reflexive polytope with simplicial facets.
/// Rays follow the vertex order of `p`.
pub fn face_fan(p: &Polytope) -> Result<Fan> {
    require_reflexive(p)?;
    let rays = p.lattice_vertices().expect("reflexive polytopes are lattice polytopes");
    let mut cones = Vec::with_capacity(p.facets.len());
    for k in 0..p.facets.len() {
        let vs = p.facet_vertices(k);
        if vs.len() != p.dim {
            return Err(Error::Polytope(
                "a facet is not a simplex; use crepant_resolution instead".into(),
            ));
        }
        cones.push(vs);
    }
    Fan::new(p.dim, rays, cones)
}

/// Weak Fano to Gorenstein Fano: the reflexive polytope Conv(G(fan)).
pub fn gorenstein_class_of(fan: &Fan) -> Result<Polytope> {
    if !is_weak_fano(fan)? {
        return Err(Error::Polytope("fan is not weak Fano".into()));
    }
    let p = fano_polytope_of(fan)?;
    require_reflexive(&p)?;
    Ok(p)
}

fn det3(a: &LatticeVector, b: &LatticeVector, c: &LatticeVector) -> i64 {
    let (a, b, c) = (a.coords(), b.coords(), c.coords());
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn angle_cmp(a: &LatticeVector, b: &LatticeVector) -> Ordering {
    let half = |v: &LatticeVector| {
        let (x, y) = (v.coords()[0], v.coords()[1]);
        if y > 0 || (y == 0 && x > 0) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| {
        let cross = a.coords()[0] * b.coords()[1] - a.coords()[1] * b.coords()[0];
        0.cmp(&cross)
    })
}

/// Nonsingular fan over a unimodular triangulation of the boundary of a
/// reflexive polytope using all its boundary lattice points (d <= 3).
pub fn crepant_resolution(p: &Polytope) -> Result<Fan> {
    require_reflexive(p)?;
    let d = p.dim;
    let mut rays = p.boundary_lattice_points();
    match d {
        1 => Fan::new(1, rays, vec![vec![0], vec![1]]),
        2 => {
            rays.sort_by(angle_cmp);
            let n = rays.len();
            let cones = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
            Fan::new(2, rays, cones)
        }
        3 => {
            let mut cones = Vec::new();
            for k in 0..p.facets.len() {
                cones.extend(triangulate_facet(p, k, &rays)?);
            }
            Fan::new(3, rays, cones)
        }
        _ => Err(Error::Polytope(format!("crepant resolution is only implemented for d <= 3, got {d}"))),
    }
}

/// Fan triangulation from the smallest vertex, then insertion of the
/// remaining lattice points of the facet one at a time.
fn triangulate_facet(p: &Polytope, k: usize, rays: &[LatticeVector]) -> Result<Vec<Vec<usize>>> {
    let f = &p.facets[k];
    let on: Vec<usize> = (0..rays.len()).filter(|&i| f.value_int(&rays[i]).is_zero()).collect();
    let verts: Vec<LatticeVector> = p
        .facet_vertices(k)
        .into_iter()
        .map(|i| to_lattice(&p.vertices[i]).expect("lattice polytope"))
        .collect();
    let idx = |v: &LatticeVector| rays.iter().position(|r| r == v).expect("vertex is a boundary point");
    let mut vs: Vec<usize> = verts.iter().map(idx).collect();
    vs.sort();
    let v0 = vs[0];
    let mut rest: Vec<usize> = vs[1..].to_vec();
    rest.sort_by(|&a, &b| 0.cmp(&det3(&rays[v0], &rays[a], &rays[b])));
    let mut tris: Vec<[usize; 3]> = rest.windows(2).map(|w| [v0, w[0], w[1]]).collect();
    let others: Vec<usize> = on.into_iter().filter(|i| !vs.contains(i)).collect();
    for qi in others {
        let qv = &rays[qi];
        let t = tris
            .iter()
            .position(|&[a, b, c]| {
                let s = det3(&rays[a], &rays[b], &rays[c]).signum();
                [(a, b), (b, c), (c, a)].iter().all(|&(x, y)| det3(&rays[x], &rays[y], qv) * s >= 0)
            })
            .ok_or_else(|| Error::Polytope("facet point outside the triangulation".into()))?;
        let [a, b, c] = tris[t];
        let zeros: Vec<(usize, usize)> = [(a, b), (b, c), (c, a)]
            .into_iter()
            .filter(|&(x, y)| det3(&rays[x], &rays[y], qv) == 0)
            .collect();
        match zeros.as_slice() {
            [] => {
                tris.swap_remove(t);
                tris.extend([[a, b, qi], [b, c, qi], [c, a, qi]]);
            }
            [(x, y)] => {
                let (x, y) = (*x, *y);
                let mut kept = Vec::with_capacity(tris.len() + 2);
                for tri in tris {
                    if tri.contains(&x) && tri.contains(&y) {
                        let w = *tri.iter().find(|&&v| v != x && v != y).expect("triangle");
                        kept.push([x, qi, w]);
                        kept.push([qi, y, w]);
                    } else {
                        kept.push(tri);
                    }
                }
                tris = kept;
            }
            _ => return Err(Error::Polytope("repeated facet point".into())),
        }
    }
    Ok(tris.into_iter().map(|t| t.to_vec()).collect())
}

/// A unimodular map carrying `p` onto `q`, if one exists.
pub fn unimodular_equivalence(p: &Polytope, q: &Polytope) -> Result<Option<IntegerMatrix>> {
    let (Some(pv), Some(qv)) = (p.lattice_vertices(), q.lattice_vertices()) else {
        return Err(Error::Polytope("equivalence needs lattice polytopes".into()));
    };
    if p.dim != q.dim || pv.len() != qv.len() || p.facets.len() != q.facets.len() {
        return Ok(None);
    }
    let d = p.dim;
    // A basis among the vertices of p.
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..pv.len() {
        let mut t: Vec<LatticeVector> = basis.iter().map(|&j| pv[j].clone()).collect();
        t.push(pv[i].clone());
        if rank(&t) == t.len() {
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() < d {
        return Err(Error::Polytope("vertices do not span".into()));
    }
    let mut qsorted = qv.clone();
    qsorted.sort();
    let mut choice = Vec::with_capacity(d);
    search_images(&pv, &qsorted, &basis, &mut choice)
}

fn search_images(
    pv: &[LatticeVector],
    qv: &[LatticeVector],
    basis: &[usize],
    choice: &mut Vec<usize>,
) -> Result<Option<IntegerMatrix>> {
    if choice.len() == basis.len() {
        let pairs: Vec<(LatticeVector, LatticeVector)> = basis
            .iter()
            .zip(choice.iter())
            .map(|(&b, &c)| (pv[b].clone(), qv[c].clone()))
            .collect();
        let Some(u) = find_unimodular_map(&pairs)? else {
            return Ok(None);
        };
        let mut img = pv.iter().map(|v| u.apply(v)).collect::<Result<Vec<_>>>()?;
        img.sort();
        return Ok(if img == qv { Some(u) } else { None });
    }
    for c in 0..qv.len() {
        if choice.contains(&c) {
            continue;
        }
        choice.push(c);
        if let Some(u) = search_images(pv, qv, basis, choice)? {
            return Ok(Some(u));
        }
        choice.pop();
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitive::{is_fano, primitive_relations};

    fn pts(v: &[&[i64]]) -> Vec<LatticeVector> {
        v.iter().map(|c| LatticeVector::new(c.to_vec())).collect()
    }

    #[test]
    fn square_hull_drops_interior_points() {
        let p = convex_hull(&pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1], &[0, 0]])).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert!(p.facets().iter().all(|f| f.offset.is_one()));
        let normals: Vec<LatticeVector> = p.facets().iter().map(|f| f.normal.clone()).collect();
        assert_eq!(normals, pts(&[&[-1, -1], &[-1, 1], &[1, -1], &[1, 1]]));
        let polar = polar_dual(&p).unwrap();
        assert_eq!(polar.lattice_vertices().unwrap(), pts(&[&[-1, -1], &[-1, 1], &[1, -1], &[1, 1]]));
        assert!(is_reflexive(&p).unwrap().reflexive);
    }

    #[test]
    fn projective_plane_triangle_and_its_polar() {
        let p = convex_hull(&pts(&[&[1, 0], &[0, 1], &[-1, -1]])).unwrap();
        let polar = polar_dual(&p).unwrap();
        assert_eq!(polar.lattice_vertices().unwrap(), pts(&[&[-1, -1], &[-1, 2], &[2, -1]]));
        let cert = is_reflexive(&p).unwrap();
        assert!(cert.reflexive);
        let back = polar_dual(&polar).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn doubled_triangle_is_not_reflexive() {
        let p = convex_hull(&pts(&[&[2, 0], &[0, 2], &[-2, -2]])).unwrap();
        let cert = is_reflexive(&p).unwrap();
        assert!(!cert.reflexive);
        let polar = polar_dual(&p).unwrap();
        assert!(!polar.is_lattice());
        assert!(polar
            .vertices()
            .iter()
            .flatten()
            .any(|x| x.denom() == &BigInt::from(2)));
    }

    #[test]
    fn origin_on_boundary_is_rejected() {
        let p = convex_hull(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        assert!(polar_dual(&p).is_err());
        assert!(convex_hull(&pts(&[&[0, 0], &[1, 1], &[2, 2]])).is_err());
    }

    #[test]
    fn resolving_the_square_gives_eight_rays() {
        let p = convex_hull(&pts(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        let f = crepant_resolution(&p).unwrap();
        assert_eq!(f.n_rays(), 8);
        assert!(f.is_nonsingular());
        assert!(is_weak_fano(&f).unwrap());
        assert!(!face_fan(&p).unwrap().is_nonsingular());
    }

    #[test]
    fn resolving_the_big_triangle_gives_nine_rays() {
        let p = convex_hull(&pts(&[&[1, 1], &[-2, 1], &[1, -2]])).unwrap();
        let f = crepant_resolution(&p).unwrap();
        assert_eq!(f.n_rays(), 9);
        assert!(is_weak_fano(&f).unwrap());
    }

    #[test]
    fn hexagon_face_fan() {
        let p = convex_hull(&pts(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1], &[1, 1], &[-1, -1]])).unwrap();
        let f = face_fan(&p).unwrap();
        assert_eq!(f.n_rays(), 6);
        assert!(is_fano(&f).unwrap());
        assert_eq!(primitive_relations(&f).unwrap().len(), 9);
        assert_eq!(crepant_resolution(&p).unwrap().n_rays(), 6);
    }

    #[test]
    fn hirzebruch_two_gorenstein_class() {
        let f = Fan::new(
            2,
            pts(&[&[1, 0], &[0, 1], &[-1, 2], &[0, -1]]),
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap();
        let p = gorenstein_class_of(&f).unwrap();
        assert_eq!(p.lattice_vertices().unwrap(), pts(&[&[-1, 2], &[0, -1], &[1, 0]]));
        assert!(p.boundary_lattice_points().contains(&LatticeVector::new(vec![0, 1])));
    }

    #[test]
    fn three_dimensional_resolution_of_the_octahedron_polar() {
        // The cube [-1,1]^3 is reflexive with 26 boundary points.
        let mut v = Vec::new();
        for a in [-1, 1] {
            for b in [-1, 1] {
                for c in [-1, 1] {
                    v.push(LatticeVector::new(vec![a, b, c]));
                }
            }
        }
        let p = convex_hull(&v).unwrap();
        let f = crepant_resolution(&p).unwrap();
        assert_eq!(f.n_rays(), 26);
        assert!(f.is_nonsingular());
        assert!(is_weak_fano(&f).unwrap());
    }

    #[test]
    fn equivalence_finds_a_map() {
        let a = convex_hull(&pts(&[&[1, 0], &[0, 1], &[-1, -1]])).unwrap();
        let b = convex_hull(&pts(&[&[1, 0], &[-1, 1], &[0, -1]])).unwrap();
        assert!(unimodular_equivalence(&a, &b).unwrap().is_some());
        let sq = convex_hull(&pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]])).unwrap();
        assert!(unimodular_equivalence(&a, &sq).unwrap().is_none());
    }
}
