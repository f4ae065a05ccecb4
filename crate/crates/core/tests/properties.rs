use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::Index;
use toric_fano::classify::{are_isomorphic, canonical_key, classify, ClosureOptions, Mode};
use toric_fano::fan::Fan;
use toric_fano::lattice::{primitive_part, sum, LatticeVector};
use toric_fano::polytope::{convex_hull, fano_polytope_of, is_reflexive, polar_dual};
use toric_fano::primitive::{primitive_collections, primitive_relation, PrimitiveCollection};
use toric_fano::surgery::{blow_down, blow_up, predict_pc_after, star_subdivide, BlowDownSpec, SubdivisionSpec};

/// The Fano fans of dimension 2 and 3.
fn fans() -> &'static [Fan] {
    static FANS: OnceLock<Vec<Fan>> = OnceLock::new();
    FANS.get_or_init(|| {
        let mut v = Vec::new();
        for d in 2..=3 {
            let c = classify(d, Mode::Fano, &ClosureOptions::default()).unwrap();
            v.extend(c.graph.nodes.into_iter().map(|n| n.fan));
        }
        v
    })
}

/// Products of elementary matrices, signed permutations included.
fn unimodular(d: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..d, 0..d, -2i64..=2, any::<bool>()), 0..8).prop_map(move |ops| {
        let mut m: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, k, swap) in ops {
            if swap {
                m.swap(i, j);
                for x in &mut m[i] {
                    *x = -*x;
                }
            } else if i != j {
                let row = m[j].clone();
                for (x, y) in m[i].iter_mut().zip(row) {
                    *x += k * y;
                }
            }
        }
        m
    })
}

fn apply(m: &[Vec<i64>], v: &LatticeVector) -> LatticeVector {
    LatticeVector::new(m.iter().map(|row| row.iter().zip(v.coords()).map(|(a, b)| a * b).sum()).collect())
}

fn transform(fan: &Fan, m: &[Vec<i64>]) -> Fan {
    Fan::new(
        fan.dim(),
        fan.rays().iter().map(|r| apply(m, r)).collect(),
        fan.max_cones().iter().map(|c| c.indices().to_vec()).collect(),
    )
    .unwrap()
}

/// Lattice polytope with the origin inside: the cross-polytope plus extra points.
fn polytope_points() -> impl Strategy<Value = Vec<LatticeVector>> {
    (2usize..=3).prop_flat_map(|d| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, d), 0..6).prop_map(move |extra| {
            let mut pts: Vec<LatticeVector> = Vec::new();
            for i in 0..d {
                pts.push(LatticeVector::unit(d, i));
                pts.push(LatticeVector::unit(d, i).scale(-1));
            }
            pts.extend(extra.into_iter().map(LatticeVector::new));
            pts
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn star_subdivisions_follow_predicted_collections(
        start in any::<Index>(),
        steps in prop::collection::vec((any::<Index>(), prop::collection::vec(1i64..=3, 4)), 1..=3),
    ) {
        let mut fan = start.get(fans()).clone();
        for (cone, weights) in steps {
            let cones = fan.cones_of_dim_at_least_two();
            let sigma = cone.get(&cones).clone();
            let scaled: Vec<LatticeVector> =
                sigma.indices().iter().zip(&weights).map(|(&i, &w)| fan.ray(i).scale(w)).collect();
            let x = primitive_part(&sum(fan.dim(), &scaled)).unwrap();
            let before = primitive_collections(&fan);
            let after = star_subdivide(&fan, &SubdivisionSpec { sigma: sigma.clone(), x }).unwrap().fan;
            let mut predicted = predict_pc_after(&before, &sigma, fan.n_rays());
            let mut actual = primitive_collections(&after);
            predicted.sort();
            actual.sort();
            prop_assert_eq!(predicted, actual);
            fan = after;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn blowing_down_undoes_blowing_up(start in any::<Index>(), path in prop::collection::vec(any::<Index>(), 1..=3)) {
        let mut fan = start.get(fans()).clone();
        for cone in path {
            let cones = fan.cones_of_dim_at_least_two();
            let sigma = cone.get(&cones).clone();
            let up = blow_up(&fan, &sigma).unwrap().fan;
            let rel = primitive_relation(&up, &PrimitiveCollection::new(sigma.indices().to_vec())).unwrap();
            prop_assert_eq!(rel.single_rhs(), Some(fan.n_rays()));
            let down = blow_down(&up, &BlowDownSpec::new(rel).unwrap()).unwrap().fan;
            prop_assert_eq!(&down, &fan);
            fan = up;
        }
    }

    #[test]
    fn keys_survive_relabeling_and_lattice_maps(
        class in any::<Index>(),
        m3 in unimodular(3),
        m2 in unimodular(2),
        shuffle in any::<u64>(),
    ) {
        let fan = class.get(fans());
        let m = if fan.dim() == 3 { m3 } else { m2 };
        let mut order: Vec<usize> = (0..fan.n_rays()).collect();
        let mut s = shuffle;
        for i in (1..order.len()).rev() {
            order.swap(i, (s % (i as u64 + 1)) as usize);
            s /= i as u64 + 1;
        }
        let moved = transform(&fan.permute_rays(&order).unwrap(), &m);
        prop_assert_eq!(canonical_key(&moved).unwrap(), canonical_key(fan).unwrap());
        prop_assert!(are_isomorphic(&moved, fan).unwrap());
    }

    #[test]
    fn reflexivity_is_a_lattice_invariant(pts in polytope_points(), m3 in unimodular(3), m2 in unimodular(2)) {
        let m = if pts[0].dim() == 3 { m3 } else { m2 };
        let p = convex_hull(&pts).unwrap();
        let q = convex_hull(&pts.iter().map(|v| apply(&m, v)).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(is_reflexive(&p).unwrap().reflexive, is_reflexive(&q).unwrap().reflexive);
    }

    #[test]
    fn fano_polytopes_are_reflexive_in_any_basis(class in any::<Index>(), m in unimodular(3)) {
        let fan = class.get(fans());
        if fan.dim() == 3 {
            let p = fano_polytope_of(&transform(fan, &m)).unwrap();
            prop_assert!(is_reflexive(&p).unwrap().reflexive);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn polar_duality_is_an_involution(pts in polytope_points()) {
        let p = convex_hull(&pts).unwrap();
        let back = polar_dual(&polar_dual(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }
}
