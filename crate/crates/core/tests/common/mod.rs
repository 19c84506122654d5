//! Slow reference implementations used as oracles by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::Rng;
use rv14_core::data::Bundle;
use rv14_core::{PermGroup, Permutation};

pub type Images = Vec<usize>;

pub fn images(p: &Permutation) -> Images {
    p.images().collect()
}

/// `x` then `y`, on image vectors.
pub fn compose(x: &[usize], y: &[usize]) -> Images {
    x.iter().map(|&i| y[i]).collect()
}

/// Closure by repeated products until nothing new appears.
pub fn naive_closure(degree: usize, gens: &[Images]) -> HashSet<Images> {
    let id: Images = (0..degree).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(&x, g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn act_mask(p: &[usize], m: u32) -> u32 {
    (0..p.len())
        .filter(|&i| m >> i & 1 == 1)
        .fold(0, |acc, i| acc | 1 << p[i])
}

/// Orbits of subsets as sets of masks, collected by scanning every mask.
pub fn naive_orbits(degree: usize, elements: &[Images]) -> Vec<BTreeSet<u32>> {
    let mut seen = vec![false; 1 << degree];
    let mut out = Vec::new();
    for m in 0..1u32 << degree {
        if seen[m as usize] {
            continue;
        }
        let orbit: BTreeSet<u32> = elements.iter().map(|p| act_mask(p, m)).collect();
        for &x in &orbit {
            seen[x as usize] = true;
        }
        out.push(orbit);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn faces_euler(faces: impl IntoIterator<Item = u32>) -> i64 {
    faces
        .into_iter()
        .filter(|&m| m != 0)
        .map(|m| if m.count_ones() % 2 == 1 { 1 } else { -1 })
        .sum()
}

/// Exponential decision-tree depth straight from the definition.
pub fn naive_depth(table: &[bool]) -> usize {
    if table.iter().all(|&b| b == table[0]) {
        return 0;
    }
    let n = table.len().trailing_zeros() as usize;
    (0..n)
        .map(|i| {
            let part = |v: u32| -> Vec<bool> {
                (0..table.len() as u32)
                    .filter(|x| (x >> i & 1) == v)
                    .map(|x| table[x as usize])
                    .collect()
            };
            1 + naive_depth(&part(0)).max(naive_depth(&part(1)))
        })
        .min()
        .unwrap()
}

/// All non-increasing tables on `n` variables, by brute force over every
/// table (n ≤ 4).
pub fn brute_monotone_tables(n: usize) -> Vec<Vec<bool>> {
    assert!(n <= 4);
    let size = 1usize << n;
    (0u64..1 << size)
        .map(|bits| (0..size).map(|m| bits >> m & 1 == 1).collect::<Vec<bool>>())
        .filter(|t| (0..size).all(|m| !t[m] || (0..n).all(|i| m >> i & 1 == 0 || t[m & !(1 << i)])))
        .collect()
}

/// Dedekind count at `n + 1` from the tables at `n`: a monotone function on
/// `n + 1` variables is a pair `f1 ≤ f0` of monotone functions on `n`.
pub fn dedekind_step(tables: &[Vec<bool>]) -> usize {
    let mut count = 0;
    for f0 in tables {
        for f1 in tables {
            if f1.iter().zip(f0).all(|(a, b)| !a || *b) {
                count += 1;
            }
        }
    }
    count
}

pub fn bundle() -> Bundle {
    Bundle::load().expect("bundled data loads")
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Permutation {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::from_images(v).unwrap()
}

pub fn group_of(degree: usize, cycles: &[&str]) -> PermGroup {
    PermGroup::from_cycle_strings(degree, cycles, 1_000_000).unwrap()
}

/// Lower and upper sets recomputed from the subset relation between all
/// members of all orbits.
pub fn brute_poset(orbits: &[BTreeSet<u32>]) -> Vec<Vec<bool>> {
    let k = orbits.len();
    let mut le = vec![vec![false; k]; k];
    for a in 0..k {
        for b in 0..k {
            le[a][b] = orbits[a]
                .iter()
                .any(|&x| orbits[b].iter().any(|&y| x & !y == 0));
        }
    }
    le
}
