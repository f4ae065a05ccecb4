//! Complete simplicial fans.
//!
//! A fan is stored as its list of primitive rays and its maximal cones, each
//! maximal cone being a sorted set of ray indices. Cones are also kept as
//! `u64` bitmasks, which caps the number of rays at 64.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cone::extreme_rays;
use crate::error::{Error, Result};
use crate::lattice::{Frame, LatticeVector};

pub const MAX_RAYS: usize = 64;

/// A cone of a simplicial fan, named by the sorted indices of its rays.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConeRef(Vec<usize>);

impl ConeRef {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        ConeRef(indices)
    }

    pub fn from_mask(mask: u64) -> Self {
        ConeRef(bits(mask).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | (1 << i))
    }
}

impl fmt::Debug for ConeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for ConeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Iterate over the set bits of a mask, lowest first.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Where a vector sits in a fan: the cone containing it in its relative
/// interior, and its (positive) coordinates in that cone's rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub cone: ConeRef,
    pub coefficients: Vec<BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Invariant {
    Shape,
    PrimitiveRays,
    DistinctRays,
    RaysUsed,
    Simplicial,
    Completeness,
    FaceIntersection,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Shape => "shape",
            Invariant::PrimitiveRays => "primitive-rays",
            Invariant::DistinctRays => "distinct-rays",
            Invariant::RaysUsed => "rays-used",
            Invariant::Simplicial => "simplicial",
            Invariant::Completeness => "completeness",
            Invariant::FaceIntersection => "face-intersection",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one invariant check. `offending` lists the rays (as
/// singletons), cones, walls or cone pairs responsible for a failure.
#[derive(Clone, Debug)]
pub struct Check {
    pub invariant: Invariant,
    pub status: Status,
    pub offending: Vec<Vec<usize>>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let s = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            write!(f, "{:<18} {s}", c.invariant.to_string())?;
            if let Some(d) = &c.detail {
                write!(f, "  {d}")?;
            }
            if !c.offending.is_empty() {
                let shown: Vec<String> = c.offending.iter().take(8).map(|o| format!("{o:?}")).collect();
                write!(f, "  {}", shown.join(" "))?;
                if c.offending.len() > 8 {
                    write!(f, " (+{} more)", c.offending.len() - 8)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<ConeRef>,
    masks: Vec<u64>,
    frames: Vec<Frame>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.max_cones == other.max_cones
    }
}

impl Eq for Fan {}

impl Fan {
    /// Build a fan, rejecting input that fails any invariant.
    pub fn new(dim: usize, rays: Vec<LatticeVector>, max_cones: Vec<Vec<usize>>) -> Result<Fan> {
        let report = validate_parts(dim, &rays, &max_cones);
        if !report.is_valid() {
            let msg: Vec<String> = report
                .failures()
                .map(|c| match &c.detail {
                    Some(d) => format!("{} ({d})", c.invariant),
                    None => format!("{} {:?}", c.invariant, c.offending.first().unwrap_or(&vec![])),
                })
                .collect();
            return Err(Error::InvalidFan(msg.join("; ")));
        }
        Fan::from_trusted(dim, rays, max_cones.into_iter().map(ConeRef::new).collect())
    }

    /// Build a fan from parts known to be valid (e.g. the output of a
    /// surgery). Only the per-cone frames are computed.
    pub(crate) fn from_trusted(dim: usize, rays: Vec<LatticeVector>, mut max_cones: Vec<ConeRef>) -> Result<Fan> {
        if rays.len() > MAX_RAYS {
            return Err(Error::InvalidFan(format!("more than {MAX_RAYS} rays")));
        }
        max_cones.sort();
        max_cones.dedup();
        let masks = max_cones.iter().map(ConeRef::mask).collect();
        let frames = max_cones
            .iter()
            .map(|c| {
                let basis: Vec<LatticeVector> = c.indices().iter().map(|&i| rays[i].clone()).collect();
                Frame::new(&basis)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Fan {
            dim,
            rays,
            max_cones,
            masks,
            frames,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[ConeRef] {
        &self.max_cones
    }

    pub(crate) fn max_masks(&self) -> &[u64] {
        &self.masks
    }

    pub(crate) fn frame(&self, k: usize) -> &Frame {
        &self.frames[k]
    }

    /// Mask with a bit for every ray.
    pub fn full_mask(&self) -> u64 {
        if self.rays.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.rays.len()) - 1
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let cones: Vec<Vec<usize>> = self.max_cones.iter().map(|c| c.indices().to_vec()).collect();
        validate_parts(self.dim, &self.rays, &cones)
    }

    pub fn is_nonsingular(&self) -> bool {
        self.frames.iter().all(|f| f.det.abs() == 1)
    }

    pub fn picard_number(&self) -> usize {
        self.rays.len() - self.dim
    }

    pub fn is_cone(&self, c: &ConeRef) -> bool {
        c.indices().iter().all(|&i| i < self.rays.len()) && self.is_cone_mask(c.mask())
    }

    pub(crate) fn is_cone_mask(&self, mask: u64) -> bool {
        self.masks.iter().any(|&m| m & mask == mask)
    }

    /// All cones of the fan (including the zero cone) as masks.
    pub fn cone_masks(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for &m in &self.masks {
            let mut sub = m;
            loop {
                out.push(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & m;
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Cones of dimension at least 2, sorted by (dimension, indices).
    pub fn cones_of_dim_at_least_two(&self) -> Vec<ConeRef> {
        let mut out: Vec<ConeRef> = self
            .cone_masks()
            .into_iter()
            .filter(|m| m.count_ones() >= 2)
            .map(ConeRef::from_mask)
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Walls (codimension-one cones) with the two maximal cones through each.
    pub fn walls(&self) -> Vec<(ConeRef, usize, usize)> {
        let mut by_wall: HashMap<u64, Vec<usize>> = HashMap::new();
        for (k, &m) in self.masks.iter().enumerate() {
            for i in bits(m) {
                by_wall.entry(m & !(1 << i)).or_default().push(k);
            }
        }
        let mut out: Vec<(ConeRef, usize, usize)> = by_wall
            .into_iter()
            .filter(|(_, v)| v.len() == 2)
            .map(|(w, v)| (ConeRef::from_mask(w), v[0], v[1]))
            .collect();
        out.sort();
        out
    }

    /// The cone whose relative interior contains `v`, with coordinates.
    pub fn locate(&self, v: &LatticeVector) -> Result<Location> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        for (k, frame) in self.frames.iter().enumerate() {
            let nums = frame.numerators(v)?;
            let s = frame.det.signum();
            if nums.iter().all(|n| n * s >= 0) {
                let idx = self.max_cones[k].indices();
                let mut support = Vec::new();
                let mut coefficients = Vec::new();
                for (j, n) in nums.iter().enumerate() {
                    if *n != 0 {
                        support.push(idx[j]);
                        coefficients.push(BigRational::new(BigInt::from(*n), BigInt::from(frame.det)));
                    }
                }
                return Ok(Location {
                    cone: ConeRef(support),
                    coefficients,
                });
            }
        }
        Err(Error::InvalidFan("vector not covered by any cone".into()))
    }

    /// Integral location for nonsingular fans: (support mask, [(ray, coeff)]).
    pub(crate) fn locate_integral(&self, v: &LatticeVector) -> Result<(u64, Vec<(usize, i64)>)> {
        for (k, frame) in self.frames.iter().enumerate() {
            let nums = frame.numerators(v)?;
            let s = frame.det.signum();
            if nums.iter().all(|n| n * s >= 0) {
                let idx = self.max_cones[k].indices();
                let mut mask = 0u64;
                let mut coeffs = Vec::new();
                for (j, n) in nums.iter().enumerate() {
                    if *n == 0 {
                        continue;
                    }
                    if n % frame.det != 0 {
                        return Err(Error::Singular(format!("cone {:?}", self.max_cones[k])));
                    }
                    let c = i64::try_from(n / frame.det).map_err(|_| Error::Overflow("locate"))?;
                    mask |= 1 << idx[j];
                    coeffs.push((idx[j], c));
                }
                return Ok((mask, coeffs));
            }
        }
        Err(Error::InvalidFan("vector not covered by any cone".into()))
    }

    /// Reorder rays: new ray `i` is old ray `order[i]`.
    pub fn permute_rays(&self, order: &[usize]) -> Result<Fan> {
        let n = self.rays.len();
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || inv[old] != usize::MAX {
                return Err(Error::InvalidFan("not a permutation".into()));
            }
            inv[old] = new;
        }
        if order.len() != n {
            return Err(Error::InvalidFan("not a permutation".into()));
        }
        let rays = order.iter().map(|&o| self.rays[o].clone()).collect();
        let cones = self
            .max_cones
            .iter()
            .map(|c| ConeRef::new(c.indices().iter().map(|&i| inv[i]).collect()))
            .collect();
        Fan::from_trusted(self.dim, rays, cones)
    }
}

/// Check every fan invariant on raw parts.
pub fn validate_parts(dim: usize, rays: &[LatticeVector], cones: &[Vec<usize>]) -> ValidationReport {
    let mut checks = Vec::new();
    let n = rays.len();

    let mut shape = Vec::new();
    let mut shape_detail = None;
    if dim == 0 {
        shape_detail = Some("dimension must be positive".to_string());
    } else if n > MAX_RAYS {
        shape_detail = Some(format!("{n} rays exceeds the limit of {MAX_RAYS}"));
    } else if cones.is_empty() {
        shape_detail = Some("no maximal cones".to_string());
    }
    for (i, r) in rays.iter().enumerate() {
        if r.dim() != dim {
            shape.push(vec![i]);
        }
    }
    if shape.is_empty() {
        for c in cones {
            let mut s = c.clone();
            s.sort_unstable();
            s.dedup();
            if c.len() != dim || s.len() != dim || c.iter().any(|&i| i >= n) {
                shape.push(c.clone());
            }
        }
    }
    if shape.is_empty() && shape_detail.is_none() {
        let mut sorted: Vec<Vec<usize>> = cones
            .iter()
            .map(|c| {
                let mut s = c.clone();
                s.sort_unstable();
                s
            })
            .collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                shape.push(w[0].clone());
            }
        }
        if !shape.is_empty() {
            shape_detail = Some("duplicate cones".to_string());
        }
    }
    let shape_ok = shape.is_empty() && shape_detail.is_none();
    checks.push(Check {
        invariant: Invariant::Shape,
        status: if shape_ok { Status::Pass } else { Status::Fail },
        offending: shape,
        detail: shape_detail,
    });

    let skipped = |inv| Check {
        invariant: inv,
        status: Status::Skipped,
        offending: vec![],
        detail: None,
    };
    if !shape_ok {
        for inv in [
            Invariant::PrimitiveRays,
            Invariant::DistinctRays,
            Invariant::RaysUsed,
            Invariant::Simplicial,
            Invariant::Completeness,
            Invariant::FaceIntersection,
        ] {
            checks.push(skipped(inv));
        }
        return ValidationReport { checks };
    }

    let bad_rays: Vec<Vec<usize>> = (0..n).filter(|&i| !rays[i].is_primitive()).map(|i| vec![i]).collect();
    checks.push(outcome(Invariant::PrimitiveRays, bad_rays));

    let mut dups = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rays[i] == rays[j] {
                dups.push(vec![i, j]);
            }
        }
    }
    checks.push(outcome(Invariant::DistinctRays, dups));

    let mut used = vec![false; n];
    for c in cones {
        for &i in c {
            used[i] = true;
        }
    }
    checks.push(outcome(
        Invariant::RaysUsed,
        (0..n).filter(|&i| !used[i]).map(|i| vec![i]).collect(),
    ));

    let mut frames: Vec<Option<Frame>> = Vec::with_capacity(cones.len());
    let mut degenerate = Vec::new();
    for c in cones {
        let mut s = c.clone();
        s.sort_unstable();
        let basis: Vec<LatticeVector> = s.iter().map(|&i| rays[i].clone()).collect();
        match Frame::new(&basis) {
            Ok(f) => frames.push(Some(f)),
            Err(_) => {
                frames.push(None);
                degenerate.push(s);
            }
        }
    }
    let simplicial_ok = degenerate.is_empty();
    checks.push(outcome(Invariant::Simplicial, degenerate));

    let masks: Vec<u64> = cones.iter().map(|c| c.iter().fold(0u64, |m, &i| m | (1 << i))).collect();
    let mut by_wall: HashMap<u64, usize> = HashMap::new();
    for &m in &masks {
        for i in bits(m) {
            *by_wall.entry(m & !(1 << i)).or_default() += 1;
        }
    }
    let mut open: Vec<Vec<usize>> = by_wall
        .iter()
        .filter(|(_, &k)| k != 2)
        .map(|(&w, _)| bits(w).collect())
        .collect();
    open.sort();
    checks.push(outcome(Invariant::Completeness, open));

    if !simplicial_ok || checks.iter().any(|c| c.invariant == Invariant::PrimitiveRays && c.status == Status::Fail) {
        checks.push(skipped(Invariant::FaceIntersection));
    } else {
        let frames: Vec<Frame> = frames.into_iter().map(|f| f.expect("simplicial")).collect();
        let mut bad = Vec::new();
        for a in 0..cones.len() {
            for b in a + 1..cones.len() {
                match intersects_properly(&frames[a], masks[a], &frames[b], masks[b]) {
                    Ok(true) => {}
                    _ => bad.push(vec![a, b]),
                }
            }
        }
        let mut check = outcome(Invariant::FaceIntersection, bad);
        if check.status == Status::Fail {
            check.detail = Some("pairs of maximal cones (by position)".to_string());
        }
        checks.push(check);
    }
    ValidationReport { checks }
}

fn outcome(invariant: Invariant, offending: Vec<Vec<usize>>) -> Check {
    Check {
        invariant,
        status: if offending.is_empty() { Status::Pass } else { Status::Fail },
        offending,
        detail: None,
    }
}

fn frame_rows(f: &Frame) -> Vec<Vec<BigInt>> {
    let d = f.dim;
    let s = f.det.signum();
    (0..d)
        .map(|i| (0..d).map(|j| BigInt::from(f.adj[i * d + j] * s)).collect())
        .collect()
}

/// Whether two full-dimensional simplicial cones meet in their common face.
fn intersects_properly(fa: &Frame, ma: u64, fb: &Frame, mb: u64) -> Result<bool> {
    let common = ma & mb;
    let a_rows = frame_rows(fa);
    let mut rows = a_rows.clone();
    rows.extend(frame_rows(fb));
    // Every extreme ray of the intersection must lie on the common face of
    // `a`, i.e. have zero coordinate along each ray of `a` outside it.
    for r in extreme_rays(&rows, fa.dim)? {
        for (k, i) in bits(ma).enumerate() {
            if common & (1 << i) != 0 {
                continue;
            }
            let v: BigInt = a_rows[k].iter().zip(&r).map(|(x, y)| x * y).sum();
            if v != BigInt::from(0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::new(c.to_vec())
    }

    fn p2() -> (Vec<LatticeVector>, Vec<Vec<usize>>) {
        (
            vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, -1])],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
    }

    fn status(r: &ValidationReport, inv: Invariant) -> Status {
        r.checks.iter().find(|c| c.invariant == inv).unwrap().status
    }

    #[test]
    fn projective_plane_is_valid() {
        let (rays, cones) = p2();
        let fan = Fan::new(2, rays, cones).unwrap();
        assert!(fan.is_nonsingular());
        assert_eq!(fan.picard_number(), 1);
        assert!(fan.is_cone(&ConeRef::new(vec![0, 2])));
        let loc = fan.locate(&lv(&[1, 1])).unwrap();
        assert_eq!(loc.cone, ConeRef::new(vec![0, 1]));
        let loc = fan.locate(&lv(&[0, 0])).unwrap();
        assert!(loc.cone.is_empty());
    }

    #[test]
    fn missing_cone_breaks_completeness() {
        let (rays, mut cones) = p2();
        cones.pop();
        let r = validate_parts(2, &rays, &cones);
        assert_eq!(status(&r, Invariant::Completeness), Status::Fail);
        assert!(Fan::new(2, rays, cones).is_err());
    }

    #[test]
    fn overlapping_cones_are_caught() {
        // Rays around the circle, but the cones wind around twice.
        let rays = vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, 0]), lv(&[0, -1]), lv(&[1, 1])];
        let cones = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 4], vec![4, 1]];
        let r = validate_parts(2, &rays, &cones);
        assert_eq!(status(&r, Invariant::FaceIntersection), Status::Fail);
    }

    #[test]
    fn double_cover_passes_walls_but_not_intersection() {
        // Six rays at the hexagon, cones taken every other ray twice around:
        // each wall is in two cones, yet the cones overlap.
        let rays = vec![lv(&[1, 0]), lv(&[1, 1]), lv(&[0, 1]), lv(&[-1, 0]), lv(&[-1, -1]), lv(&[0, -1])];
        let cones = vec![vec![0, 2], vec![2, 4], vec![4, 0], vec![1, 3], vec![3, 5], vec![5, 1]];
        let r = validate_parts(2, &rays, &cones);
        assert_eq!(status(&r, Invariant::Completeness), Status::Pass);
        assert_eq!(status(&r, Invariant::FaceIntersection), Status::Fail);
    }

    #[test]
    fn bad_rays_are_reported() {
        let rays = vec![lv(&[2, 0]), lv(&[0, 1]), lv(&[-1, -1])];
        let cones = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        let r = validate_parts(2, &rays, &cones);
        assert_eq!(status(&r, Invariant::PrimitiveRays), Status::Fail);
        let rays = vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, -1]), lv(&[1, 1])];
        let r = validate_parts(2, &rays, &cones);
        assert_eq!(status(&r, Invariant::RaysUsed), Status::Fail);
    }

    #[test]
    fn shape_errors_skip_geometry() {
        let rays = vec![lv(&[1, 0]), lv(&[0, 1]), lv(&[-1, -1])];
        let r = validate_parts(2, &rays, &[vec![0, 5]]);
        assert_eq!(status(&r, Invariant::Shape), Status::Fail);
        assert_eq!(status(&r, Invariant::Completeness), Status::Skipped);
    }

    #[test]
    fn singular_cone_is_detected() {
        let rays = vec![lv(&[1, 0]), lv(&[1, 2]), lv(&[-1, -1])];
        let fan = Fan::new(2, rays, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert!(!fan.is_nonsingular());
    }
}
