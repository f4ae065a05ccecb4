//! Brute-force searches and replayed constructions shared by the
//! integration tests. None of them goes through the closure.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_integer::Integer;
use rand::Rng;
use toric_fano::classify::{canonical_key, product_fan, projective_space};
use toric_fano::fan::{bits, ConeRef, Fan};
use toric_fano::lattice::{primitive_part, sum as sum_vectors, LatticeVector};
use toric_fano::polytope::{convex_hull, unimodular_equivalence, Polytope};
use toric_fano::primitive::{
    is_fano, is_weak_fano, primitive_collections, primitive_relation, primitive_relations, PrimitiveCollection,
};
use toric_fano::surgery::{blow_down, blow_up, flop, predict_pc_after, star_subdivide, BlowDownSpec, SubdivisionSpec};

fn det(a: (i64, i64), b: (i64, i64)) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

fn turns_left(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> bool {
    det((b.0 - a.0, b.1 - a.1), (c.0 - b.0, c.1 - b.1)) > 0
}

/// Counter-clockwise order by angle in [0, 2pi).
fn angle_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    let half = |v: (i64, i64)| if v.1 > 0 || (v.1 == 0 && v.0 > 0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&det(a, b)))
}

fn box_points(r: i64) -> Vec<(i64, i64)> {
    let mut pts = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if (x, y) != (0, 0) {
                pts.push((x, y));
            }
        }
    }
    pts.sort_by(|&a, &b| angle_cmp(a, b));
    pts
}

/// Every smooth Fano polygon with vertices in [-2,2]^2, as a fan. A subset
/// of primitive vectors qualifies when, in angular order, consecutive pairs
/// are lattice bases and the boundary turns strictly left at every vertex.
pub fn smooth_fano_polygons() -> Vec<Fan> {
    let prim: Vec<(i64, i64)> = box_points(2).into_iter().filter(|&(x, y)| x.gcd(&y) == 1).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << prim.len()) {
        if mask.count_ones() < 3 {
            continue;
        }
        let cycle: Vec<(i64, i64)> = (0..prim.len()).filter(|i| mask >> i & 1 == 1).map(|i| prim[i]).collect();
        let n = cycle.len();
        let ok = (0..n).all(|i| {
            let (a, b, c) = (cycle[i], cycle[(i + 1) % n], cycle[(i + 2) % n]);
            det(a, b) == 1 && turns_left(a, b, c)
        });
        if ok {
            let fan = Fan::new(
                2,
                cycle.iter().map(|&(x, y)| LatticeVector::new(vec![x, y])).collect(),
                (0..n).map(|i| vec![i, (i + 1) % n]).collect(),
            )
            .expect("smooth complete fan");
            out.push(fan);
        }
    }
    out
}

/// One representative per unimodular class of reflexive polygons with
/// vertices in [-4,4]^2. Going round the boundary, every edge lies at
/// lattice distance one from the origin, i.e. det(v, w) equals the lattice
/// length of [v, w].
pub fn reflexive_polygons() -> Vec<Polytope> {
    fn edge_ok(v: (i64, i64), w: (i64, i64)) -> bool {
        det(v, w) == (w.0 - v.0).gcd(&(w.1 - v.1))
    }
    fn grow(pts: &[(i64, i64)], cycle: &mut Vec<(i64, i64)>, start: usize, out: &mut BTreeSet<Vec<(i64, i64)>>) {
        let last = *cycle.last().unwrap();
        let n = cycle.len();
        if n >= 3 && edge_ok(last, cycle[0]) && (0..n).all(|i| turns_left(cycle[i], cycle[(i + 1) % n], cycle[(i + 2) % n])) {
            let mut v = cycle.clone();
            v.sort();
            out.insert(v);
        }
        for (k, &w) in pts.iter().enumerate().skip(start) {
            if !edge_ok(last, w) || (n >= 2 && !turns_left(cycle[n - 2], last, w)) {
                continue;
            }
            cycle.push(w);
            grow(pts, cycle, k + 1, out);
            cycle.pop();
        }
    }
    let pts = box_points(4);
    let mut found = BTreeSet::new();
    for i in 0..pts.len() {
        grow(&pts, &mut vec![pts[i]], i + 1, &mut found);
    }
    let mut classes: Vec<Polytope> = Vec::new();
    for verts in found {
        let vs: Vec<LatticeVector> = verts.iter().map(|&(x, y)| LatticeVector::new(vec![x, y])).collect();
        let p = convex_hull(&vs).unwrap();
        if !classes.iter().any(|q| unimodular_equivalence(&p, q).unwrap().is_some()) {
            classes.push(p);
        }
    }
    classes
}

/// Primitive collections straight from the definition: subsets that are not
/// cones while every proper subset is.
pub fn brute_force_collections(fan: &Fan) -> BTreeSet<u64> {
    let cones: BTreeSet<u64> = fan.cone_masks().into_iter().collect();
    (1u64..(1 << fan.n_rays()))
        .filter(|&m| !cones.contains(&m) && bits(m).all(|i| cones.contains(&(m & !(1 << i)))))
        .collect()
}

/// Weak Fano fans that are not Fano, reached from `fans` by one or two
/// blow-ups, one per isomorphism class.
pub fn weak_fano_blow_ups(fans: &[Fan], levels: usize) -> Vec<Fan> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut level = fans.to_vec();
    for _ in 0..levels {
        let mut next = Vec::new();
        for f in &level {
            for c in f.cones_of_dim_at_least_two() {
                let up = blow_up(f, &c).unwrap().fan;
                if is_weak_fano(&up).unwrap() && !is_fano(&up).unwrap() && seen.insert(canonical_key(&up).unwrap()) {
                    next.push(up);
                }
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Flops `x_1+..+x_l = y_1+..+y_l` of `fan` together with the collection
/// `{y_1..y_l}` that undoes them.
pub fn flops_of(fan: &Fan) -> Vec<(Fan, PrimitiveCollection)> {
    let mut out = Vec::new();
    for r in primitive_relations(fan).unwrap() {
        let shape = r.degree == 0
            && r.coefficients.len() == r.collection.len()
            && r.coefficients.iter().all(|&(_, a)| a == 1);
        if !shape {
            continue;
        }
        if let Ok(s) = flop(fan, &r.collection) {
            out.push((s.fan, PrimitiveCollection::new(r.coefficients.iter().map(|&(j, _)| j).collect())));
        }
    }
    out
}

/// Number of floppable instances among `fans`, and how many of them fail
/// to return to the original fan when flopped back.
pub fn flop_round_trips(fans: &[Fan]) -> (usize, usize) {
    let mut total = 0;
    let mut bad = 0;
    for f in fans {
        for (g, back) in flops_of(f) {
            total += 1;
            let ok = primitive_relation(&g, &back).is_ok_and(|_| flop(&g, &back).is_ok_and(|h| h.fan == *f));
            if !ok {
                bad += 1;
            }
        }
    }
    (total, bad)
}

fn sum(indices: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<String> = indices.into_iter().map(|i| format!("x{i}")).collect();
    if v.is_empty() {
        "0".into()
    } else {
        v.join("+")
    }
}

fn relations(fan: &Fan, offset: usize) -> Vec<String> {
    let mut v: Vec<String> = primitive_relations(fan).unwrap().iter().map(|r| r.render(offset)).collect();
    v.sort();
    v
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

/// Replays the two blow-ups and one blow-down joining `P^d` to
/// `P^a x P^(d-a)`, checking the primitive relations and the Fano property
/// after every step. Rays are numbered `x1..x(d+1)` on `P^d`, as in the
/// usual presentation, and `x(d+2)`, `x(d+3)` for the two new rays.
pub fn replay_product_chain(d: usize, a: usize) -> Result<(), String> {
    let fail = |step: &str, got: Vec<String>, want: Vec<String>| format!("d={d} a={a} {step}: got {got:?}, want {want:?}");
    let pd = projective_space(d).unwrap();

    let s1 = blow_up(&pd, &ConeRef::new((0..=a).collect())).unwrap().fan;
    let want1 = sorted(vec![format!("{}={}", sum(1..=a + 1), sum([d + 2])), format!("{}=0", sum(a + 2..=d + 2))]);
    if relations(&s1, 1) != want1 {
        return Err(fail("first blow-up", relations(&s1, 1), want1));
    }
    if !is_fano(&s1).unwrap() {
        return Err(format!("d={d} a={a}: first blow-up is not Fano"));
    }

    let mut sigma = vec![0];
    sigma.extend(a + 1..=d);
    let s2 = blow_up(&s1, &ConeRef::new(sigma)).unwrap().fan;
    let mut lhs2: Vec<usize> = vec![1];
    lhs2.extend(a + 2..=d + 1);
    let want2 = sorted(vec![
        format!("{}={}", sum(lhs2), sum([d + 3])),
        format!("{}=0", sum((2..=a + 1).chain([d + 3]))),
        format!("{}={}", sum([d + 2, d + 3]), sum([1])),
        format!("{}={}", sum(1..=a + 1), sum([d + 2])),
        format!("{}=0", sum(a + 2..=d + 2)),
    ]);
    if relations(&s2, 1) != want2 {
        return Err(fail("second blow-up", relations(&s2, 1), want2));
    }
    if !is_fano(&s2).unwrap() {
        return Err(format!("d={d} a={a}: second blow-up is not Fano"));
    }

    let rel = primitive_relation(&s2, &PrimitiveCollection::new(vec![d + 1, d + 2])).unwrap();
    let down = blow_down(&s2, &BlowDownSpec::new(rel).unwrap()).unwrap().fan;
    // x1 is gone, so the remaining rays x2..x(d+3) are numbered from 2.
    let want3 = sorted(vec![format!("{}=0", sum((2..=a + 1).chain([d + 3]))), format!("{}=0", sum(a + 2..=d + 2))]);
    if relations(&down, 2) != want3 {
        return Err(fail("blow-down", relations(&down, 2), want3));
    }
    let product = product_fan(&projective_space(a).unwrap(), &projective_space(d - a).unwrap()).unwrap();
    if !is_fano(&down).unwrap() || canonical_key(&down).unwrap() != canonical_key(&product).unwrap() {
        return Err(format!("d={d} a={a}: blow-down is not the product of projective spaces"));
    }
    Ok(())
}

/// Primitive relations of the triple blow-up of `P^2 x P^2`, rays from 1.
pub const W_RELATIONS: [&str; 18] = [
    "x1+x4=x7", "x2+x5=x8", "x3+x6=x9",
    "x1+x2+x3=0", "x4+x5+x6=0", "x7+x8+x9=0",
    "x1+x2+x9=x6", "x4+x5+x9=x3", "x1+x3+x8=x5",
    "x4+x6+x8=x2", "x2+x3+x7=x4", "x5+x6+x7=x1",
    "x1+x8+x9=x5+x6", "x4+x8+x9=x2+x3", "x2+x7+x9=x4+x6",
    "x5+x7+x9=x1+x3", "x3+x7+x8=x4+x5", "x6+x7+x8=x1+x2",
];

/// Primitive relations of the pseudo del Pezzo 4-fold, rays from 0.
pub const PSEUDO_DEL_PEZZO_RELATIONS: [&str; 14] = [
    "x0+x4=0", "x1+x5=0", "x2+x6=0", "x3+x7=0",
    "x0+x1+x2=x7+x8", "x0+x1+x3=x6+x8", "x0+x2+x3=x5+x8", "x1+x2+x3=x4+x8",
    "x4+x5+x8=x2+x3", "x4+x6+x8=x1+x3", "x4+x7+x8=x1+x2", "x5+x6+x8=x0+x3",
    "x5+x7+x8=x0+x2", "x6+x7+x8=x0+x1",
];

/// Primitive relations of the del Pezzo 4-fold, rays from 0.
pub const DEL_PEZZO_RELATIONS: [&str; 25] = [
    "x0+x4=0", "x1+x5=0", "x2+x6=0", "x3+x7=0", "x8+x9=0",
    "x0+x1+x2=x7+x8", "x0+x1+x3=x6+x8", "x0+x2+x3=x5+x8", "x1+x2+x3=x4+x8",
    "x0+x1+x9=x6+x7", "x0+x2+x9=x5+x7", "x0+x3+x9=x5+x6", "x1+x2+x9=x4+x7",
    "x1+x3+x9=x4+x6", "x2+x3+x9=x4+x5", "x4+x5+x6=x3+x9", "x4+x5+x7=x2+x9",
    "x4+x6+x7=x1+x9", "x5+x6+x7=x0+x9", "x4+x5+x8=x2+x3", "x4+x6+x8=x1+x3",
    "x4+x7+x8=x1+x2", "x5+x6+x8=x0+x3", "x5+x7+x8=x0+x2", "x6+x7+x8=x0+x1",
];

/// Lattice points spanning a polytope with the origin inside: the
/// cross-polytope plus up to five random points of [-3,3]^d.
pub fn random_polytope_points(rng: &mut impl Rng) -> Vec<LatticeVector> {
    let d = rng.gen_range(2..=3);
    let mut pts = Vec::new();
    for i in 0..d {
        pts.push(LatticeVector::unit(d, i));
        pts.push(LatticeVector::unit(d, i).scale(-1));
    }
    for _ in 0..rng.gen_range(0..6) {
        pts.push(LatticeVector::new((0..d).map(|_| rng.gen_range(-3..=3)).collect()));
    }
    pts
}

/// Star-subdivide a random cone of `fan` at a random positive combination of
/// its rays. Returns the new fan and whether the predicted primitive
/// collections equal the computed ones.
pub fn random_subdivision(fan: &Fan, rng: &mut impl Rng) -> (Fan, bool) {
    let cones = fan.cones_of_dim_at_least_two();
    let sigma = cones[rng.gen_range(0..cones.len())].clone();
    let scaled: Vec<LatticeVector> = sigma.indices().iter().map(|&i| fan.ray(i).scale(rng.gen_range(1..=3))).collect();
    let x = primitive_part(&sum_vectors(fan.dim(), &scaled)).unwrap();
    let after = star_subdivide(fan, &SubdivisionSpec { sigma: sigma.clone(), x }).unwrap().fan;
    let mut predicted = predict_pc_after(&primitive_collections(fan), &sigma, fan.n_rays());
    let mut actual = primitive_collections(&after);
    predicted.sort();
    actual.sort();
    (after, predicted == actual)
}

/// Blow up a random cone and blow it straight back down. Returns the
/// blown-up fan and whether the round trip gave back `fan` exactly.
pub fn random_blow_up_round_trip(fan: &Fan, rng: &mut impl Rng) -> (Fan, bool) {
    let cones = fan.cones_of_dim_at_least_two();
    let sigma = &cones[rng.gen_range(0..cones.len())];
    let up = blow_up(fan, sigma).unwrap().fan;
    let rel = primitive_relation(&up, &PrimitiveCollection::new(sigma.indices().to_vec())).unwrap();
    let ok = rel.single_rhs() == Some(fan.n_rays())
        && BlowDownSpec::new(rel).is_ok_and(|spec| blow_down(&up, &spec).is_ok_and(|s| s.fan == *fan));
    (up, ok)
}
