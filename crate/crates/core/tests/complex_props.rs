#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rv14_core::complex::{
    assert_monotone, deletion, euler, explicit, fixed_point_complex, link, link_euler_fast,
    r_vector, ComplexError, OrbitState, TypeAssignment,
};
use rv14_core::oracle::sample_invariant_function;
use rv14_core::orbits::{build_poset, compute_orbits, OrbitPoset, OrbitTable};
use rv14_core::{PermGroup, Permutation};

struct Fixture {
    table: OrbitTable,
    poset: OrbitPoset,
}

fn g6_fixture() -> Fixture {
    let g = bundle().group("G6").unwrap().group(1_000_000).unwrap();
    let table = compute_orbits(&g).unwrap();
    let poset = build_poset(&table);
    Fixture { table, poset }
}

fn sample(fx: &Fixture, seed: u64, nontrivial: bool) -> TypeAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_invariant_function(&fx.table, &fx.poset, &mut rng, nontrivial)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn link_r_vector_identity(seed in any::<u64>()) {
        let fx = g6_fixture();
        let a = sample(&fx, seed, true);
        let r = r_vector(&fx.table, &a).unwrap().r;
        let l = link(&fx.table, &a, 0).unwrap().r_vector().r;
        for k in 1..=14 {
            prop_assert_eq!(14 * l[k - 1], k as u64 * r[k]);
        }
    }

    #[test]
    fn fast_link_euler_matches_explicit(seed in any::<u64>(), v in 0usize..14) {
        let fx = g6_fixture();
        let a = sample(&fx, seed, seed % 3 != 0);
        let fast = link_euler_fast(&fx.table, &a, v).unwrap();
        prop_assert_eq!(fast, link(&fx.table, &a, v).unwrap().euler());
        prop_assert_eq!(fast, faces_euler(link(&fx.table, &a, v).unwrap().faces));
    }

    #[test]
    fn euler_matches_face_count(seed in any::<u64>()) {
        let fx = g6_fixture();
        let a = sample(&fx, seed, true);
        let faces = explicit(&fx.table, &a);
        prop_assert!(faces.is_downward_closed());
        prop_assert_eq!(euler(&fx.table, &a).unwrap(), faces_euler(faces.faces.iter().copied()));
        prop_assert_eq!(r_vector(&fx.table, &a).unwrap(), faces.r_vector());
    }

    #[test]
    fn deletion_link_decomposition(seed in any::<u64>()) {
        let fx = g6_fixture();
        let a = sample(&fx, seed, true);
        if a.true_set().contains(fx.table.global("1.0".parse().unwrap()).unwrap()) {
            let d = deletion(&fx.table, &a, 0).unwrap().euler();
            let l = link_euler_fast(&fx.table, &a, 0).unwrap();
            prop_assert_eq!(euler(&fx.table, &a).unwrap(), d + 1 - l);
        }
    }

    #[test]
    fn fixed_point_complex_is_a_complex(seed in any::<u64>(), which in 0usize..11) {
        let b = bundle();
        let fx = g6_fixture();
        let a = sample(&fx, seed, true);
        let h = b.subgroups[which].as_group_record().group(1_000_000).unwrap();
        let fp = fixed_point_complex(&fx.table, &a, &h).unwrap();
        prop_assert!(fp.is_downward_closed());
        let faces = explicit(&fx.table, &a);
        let blocks: Vec<u32> = fp.blocks.iter().map(|b| b.iter().fold(0, |m, p| m | 1 << (p - 1))).collect();
        let mut expected = Vec::new();
        for s in 1u32..1 << blocks.len() {
            let union = (0..blocks.len()).filter(|i| s >> i & 1 == 1).fold(0, |m, i| m | blocks[i]);
            if faces.contains(union) {
                expected.push(s);
            }
        }
        expected.sort_by_key(|s| (s.count_ones(), *s));
        prop_assert_eq!(&fp.faces, &expected);
        prop_assert_eq!(fp.euler, faces_euler(expected));
    }

    #[test]
    fn propagation_equals_brute_closure(
        a in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        steps in proptest::collection::vec((any::<u16>(), any::<bool>()), 1..12),
    ) {
        let g = PermGroup::generate(6, vec![
            Permutation::from_images(a).unwrap(),
            Permutation::from_images(vec![1, 2, 0, 3, 4, 5]).unwrap(),
        ], 1000).unwrap();
        let t = compute_orbits(&g).unwrap();
        let p = build_poset(&t);
        let sets: Vec<BTreeSet<u32>> = (0..t.len()).map(|o| t.members(o).iter().copied().collect()).collect();
        let le = brute_poset(&sets);
        let mut s = TypeAssignment::all_free(t.len());
        for (raw, value) in steps {
            let o = 1 + raw as usize % (t.len() - 1);
            let before = s.clone();
            match s.propagate(&p, o, value) {
                Ok(added) => {
                    for x in 1..t.len() {
                        let forced = if value { le[x][o] } else { le[o][x] };
                        let now = s.state(x);
                        if forced {
                            prop_assert_eq!(now, if value { OrbitState::True } else { OrbitState::False });
                        } else {
                            prop_assert_eq!(now, before.state(x));
                        }
                        prop_assert_eq!(added.contains(&x), forced && before.is_free(x));
                    }
                    prop_assert!(assert_monotone(&p, &s));
                }
                Err(c) => {
                    prop_assert_eq!(&s, &before);
                    let opposite = if value { before.false_set() } else { before.true_set() };
                    prop_assert!(opposite.contains(c.orbit));
                }
            }
        }
    }
}

#[test]
fn entries_round_trip_and_close() {
    let fx = g6_fixture();
    let a = sample(&fx, 5, true);
    let entries = a.to_entries(&fx.table);
    let back = TypeAssignment::from_entries(&fx.table, &fx.poset, &entries).unwrap();
    assert_eq!(back, a);
    let json = serde_json::to_string(&entries).unwrap();
    assert!(json.contains("\"state\":\"T\""));

    let partial: Vec<_> = serde_json::from_str(r#"[{"orbit":"2.0","state":"T"}]"#).unwrap();
    let closed = TypeAssignment::from_entries(&fx.table, &fx.poset, &partial).unwrap();
    assert!(closed.true_set().contains(fx.table.empty_orbit()));
    assert!(closed
        .true_set()
        .contains(fx.table.global("1.0".parse().unwrap()).unwrap()));

    let clash: Vec<_> =
        serde_json::from_str(r#"[{"orbit":"2.0","state":"T"},{"orbit":"1.0","state":"F"}]"#)
            .unwrap();
    assert!(matches!(
        TypeAssignment::from_entries(&fx.table, &fx.poset, &clash),
        Err(ComplexError::Conflict(_))
    ));
    let bad: Vec<_> = serde_json::from_str(r#"[{"orbit":"2.0","state":"X"}]"#).unwrap();
    assert!(matches!(
        TypeAssignment::from_entries(&fx.table, &fx.poset, &bad),
        Err(ComplexError::BadState(_))
    ));
}

#[test]
fn extreme_complexes() {
    let fx = g6_fixture();
    let full = TypeAssignment::full_simplex(&fx.table);
    assert_eq!(euler(&fx.table, &full).unwrap(), 1);
    assert_eq!(link_euler_fast(&fx.table, &full, 0).unwrap(), 1);
    let void = TypeAssignment::void_face(&fx.table);
    assert_eq!(euler(&fx.table, &void).unwrap(), 0);
    let free = TypeAssignment::all_free(fx.table.len());
    assert!(matches!(
        euler(&fx.table, &free),
        Err(ComplexError::FreeOrbit(_))
    ));
    assert!(matches!(
        link_euler_fast(&fx.table, &full, 14),
        Err(ComplexError::BadVertex { .. })
    ));
}
