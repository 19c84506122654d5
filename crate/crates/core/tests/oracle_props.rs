mod common;

use common::*;
use proptest::prelude::*;
use rv14_core::oracle::{
    adversary_path, constant_by_scan, cyclic_group, decision_tree_depth, depth_under,
    exhaustive_conjecture_check, is_elusive, monotone_families, restriction_lemma_check,
    BooleanFunction, OracleError, Restriction,
};

fn monotone_fn(n: usize) -> impl Strategy<Value = BooleanFunction> {
    let tables = brute_monotone_tables(n);
    (0..tables.len()).prop_map(move |i| BooleanFunction::from_table(n, tables[i].clone()).unwrap())
}

fn restriction(n: usize) -> impl Strategy<Value = Restriction> {
    (0u32..1 << n, 0u32..1 << n).prop_map(|(a, v)| Restriction::new(a, a & v).unwrap())
}

/// The table of `f` on the subcube, re-indexed over its free variables.
fn subcube_table(f: &BooleanFunction, r: Restriction) -> Vec<bool> {
    let n = f.arity();
    let free: Vec<usize> = (0..n).filter(|i| r.assigned >> i & 1 == 0).collect();
    (0..1u32 << free.len())
        .map(|y| {
            let x = free
                .iter()
                .enumerate()
                .filter(|(j, _)| y >> j & 1 == 1)
                .fold(r.values, |m, (_, &i)| m | 1 << i);
            f.eval(x)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn memo_matches_naive_on_random_tables(n in 1usize..=4, bits in any::<u16>()) {
        let f = BooleanFunction::from_fn(n, |m| bits >> m & 1 == 1).unwrap();
        prop_assert_eq!(decision_tree_depth(&f).unwrap(), naive_depth(f.table()));
    }

    #[test]
    fn memo_matches_naive_under_restrictions(f in monotone_fn(4), r in restriction(4)) {
        prop_assert_eq!(depth_under(&f, r).unwrap(), naive_depth(&subcube_table(&f, r)));
    }

    #[test]
    fn constancy_fast_path_matches_scan(f in monotone_fn(4), r in restriction(4)) {
        let fast = f.constant_on(r);
        let scan = constant_by_scan(&f, r);
        prop_assert_eq!(fast.is_some(), scan);
        let t = subcube_table(&f, r);
        prop_assert_eq!(scan, t.iter().all(|&b| b == t[0]));
    }

    #[test]
    fn restrict_agrees_with_subcube(f in monotone_fn(4), var in 0usize..4, value in any::<bool>()) {
        let g = f.restrict(var, value);
        let r = Restriction::new(1 << var, if value { 1 << var } else { 0 }).unwrap();
        prop_assert_eq!(g.table(), &subcube_table(&f, r)[..]);
        prop_assert!(g.is_monotone());
    }

    #[test]
    fn adversary_path_is_a_certificate(f in monotone_fn(4)) {
        let c = adversary_path(&f).unwrap();
        prop_assert_eq!(c.path.len(), c.depth);
        prop_assert_eq!(c.depth, decision_tree_depth(&f).unwrap());
        let r = c.path.iter().fold(Restriction::default(), |r, &(v, b)| r.with(v - 1, b));
        prop_assert_eq!(f.constant_on(r), Some(c.value));
        prop_assert_eq!(f.eval(r.values), c.value);
    }
}

#[test]
fn depth_is_invariant_under_negation() {
    for n in 0..=4 {
        for t in brute_monotone_tables(n) {
            let f = BooleanFunction::from_table(n, t).unwrap();
            let d = decision_tree_depth(&f).unwrap();
            assert_eq!(d, decision_tree_depth(&f.negation()).unwrap());
            assert_eq!(d, naive_depth(f.table()));
        }
    }
    let r = exhaustive_conjecture_check(5).unwrap();
    assert_eq!(r.negation_mismatches, 0);
}

#[test]
fn restriction_never_deepens() {
    for t in brute_monotone_tables(4) {
        let f = BooleanFunction::from_table(4, t).unwrap();
        let d = decision_tree_depth(&f).unwrap();
        for a in 0..4 {
            for v in [false, true] {
                assert!(d >= decision_tree_depth(&f.restrict(a, v)).unwrap());
            }
        }
    }
}

#[test]
fn subtree_bound_needs_transitivity() {
    let dictator = BooleanFunction::from_fn(2, |m| m & 0b10 == 0).unwrap();
    assert_eq!(decision_tree_depth(&dictator).unwrap(), 1);
    assert_eq!(decision_tree_depth(&dictator.restrict(0, true)).unwrap(), 1);
    for n in 2..=6 {
        let r = restriction_lemma_check(&cyclic_group(n), 40, n as u64).unwrap();
        assert_eq!(r.subtree_bound_violations, 0, "n = {n}");
    }
}

#[test]
fn dedekind_counts_match_independent_enumeration() {
    for n in 0..=4 {
        assert_eq!(monotone_families(n).len(), brute_monotone_tables(n).len());
    }
    assert_eq!(
        monotone_families(5).len(),
        dedekind_step(&brute_monotone_tables(4))
    );
}

#[test]
fn small_sweeps() {
    for n in 1..=5 {
        let r = exhaustive_conjecture_check(n).unwrap();
        assert!(r.holds(), "n = {n}");
        assert_eq!(r.weakly_symmetric_nontrivial, r.elusive_weakly_symmetric);
        assert_eq!(r.non_elusive, r.non_elusive_chi_one);
    }
    assert_eq!(
        exhaustive_conjecture_check(2)
            .unwrap()
            .weakly_symmetric_nontrivial,
        2
    );
}

#[test]
fn weakly_symmetric_counts_by_brute_force() {
    // Transitivity of the invariance group, recomputed from all n! permutations.
    for n in 1..=4usize {
        let perms: Vec<Vec<usize>> = {
            let mut out = vec![vec![]];
            for k in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|p: Vec<usize>| {
                        (0..=k).map(move |pos| {
                            let mut q = p.clone();
                            q.insert(pos, k);
                            q
                        })
                    })
                    .collect();
            }
            out
        };
        let mut count = 0;
        for t in brute_monotone_tables(n) {
            if !(t[0] && !t[(1 << n) - 1]) {
                continue;
            }
            let inv: Vec<&Vec<usize>> = perms
                .iter()
                .filter(|p| (0..1u32 << n).all(|m| t[m as usize] == t[act_mask(p, m) as usize]))
                .collect();
            if (0..n).all(|j| inv.iter().any(|p| p[0] == j)) {
                count += 1;
            }
        }
        assert_eq!(
            exhaustive_conjecture_check(n)
                .unwrap()
                .weakly_symmetric_nontrivial,
            count
        );
    }
}

#[test]
fn prime_arity_cyclic_functions_are_elusive() {
    let r = restriction_lemma_check(&cyclic_group(5), 60, 1).unwrap();
    assert!(r.holds());
    let g = cyclic_group(5);
    let t = rv14_core::orbits::compute_orbits(&g).unwrap();
    let p = rv14_core::orbits::build_poset(&t);
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a = rv14_core::oracle::sample_invariant_function(&t, &p, &mut rng, true);
        let f = BooleanFunction::from_assignment(&t, &a).unwrap();
        assert!(f.is_nontrivial());
        assert!(is_elusive(&f).unwrap());
    }
}

#[test]
fn restriction_lemma_on_cyclic_six() {
    let r = restriction_lemma_check(&cyclic_group(6), 50, 7).unwrap();
    assert_eq!(r.samples, 50);
    assert_eq!(r.lemma_violations, 0);
    assert_eq!(r.remark_violations, 0);
    assert_eq!(r.subtree_bound_violations, 0);
    assert!(r.lemma_applicable > 0);
}

#[test]
fn vacuous_cases() {
    let full = BooleanFunction::from_fn(4, |_| true).unwrap();
    assert_eq!(decision_tree_depth(&full.restrict(0, true)).unwrap(), 0);
    assert!(!is_elusive(&full).unwrap());
    let vertices = BooleanFunction::from_fn(4, |m| m.count_ones() <= 1).unwrap();
    assert_eq!(decision_tree_depth(&vertices.restrict(0, true)).unwrap(), 3);
    assert_eq!(decision_tree_depth(&vertices).unwrap(), 4);
}

#[test]
fn arity_limits() {
    let f = BooleanFunction::from_fn(15, |_| true).unwrap();
    assert!(matches!(
        decision_tree_depth(&f),
        Err(OracleError::ArityTooLarge { .. })
    ));
    assert!(exhaustive_conjecture_check(6).is_err());
    assert!(exhaustive_conjecture_check(0).is_err());
    assert!(BooleanFunction::from_table(3, vec![true; 7]).is_err());
    let g = rv14_core::PermGroup::trivial(9);
    assert!(restriction_lemma_check(&g, 1, 0).is_err());
}
