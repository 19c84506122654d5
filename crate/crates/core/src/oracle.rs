//! Exact decision-tree depth by memoized minimax over restrictions, and
//! small-arity exhaustive checks built on it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{ComplexError, TypeAssignment};
use crate::orbits::{
    build_poset, compute_orbits, points_of, OrbitError, OrbitPoset, OrbitTable, SubsetMask,
};
use crate::perm::{PermGroup, Permutation};

/// Largest arity accepted by [`decision_tree_depth`].
pub const MAX_ORACLE_ARITY: usize = 14;
/// Largest arity of the exhaustive sweep.
pub const MAX_EXHAUSTIVE_ARITY: usize = 5;
/// Largest degree for the sampled restriction-lemma check.
pub const MAX_LEMMA_DEGREE: usize = 8;

const UNKNOWN: u8 = u8::MAX;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("arity {n} exceeds the maximum of {max}")]
    ArityTooLarge { n: usize, max: usize },
    #[error("truth table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("restriction assigns values outside its assigned set")]
    BadRestriction,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// A subcube: variables in `assigned` are fixed, those in `values` to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Restriction {
    pub assigned: SubsetMask,
    pub values: SubsetMask,
}

impl Restriction {
    pub fn new(assigned: SubsetMask, values: SubsetMask) -> Result<Self, OracleError> {
        if values & !assigned != 0 {
            return Err(OracleError::BadRestriction);
        }
        Ok(Self { assigned, values })
    }

    pub fn with(self, var: usize, value: bool) -> Self {
        let bit = 1 << var;
        Self {
            assigned: self.assigned | bit,
            values: if value {
                self.values | bit
            } else {
                self.values
            },
        }
    }
}

/// A boolean function given by its truth table over subsets of the
/// variables (`f(x) = table[x]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<bool>,
    monotone: bool,
}

impl BooleanFunction {
    /// The monotone flag is computed, not trusted.
    pub fn from_table(n: usize, table: Vec<bool>) -> Result<Self, OracleError> {
        if n > 30 {
            return Err(OracleError::ArityTooLarge { n, max: 30 });
        }
        if table.len() != 1 << n {
            return Err(OracleError::TableSize {
                expected: 1 << n,
                found: table.len(),
            });
        }
        let monotone = is_non_increasing(n, &table);
        Ok(Self { n, table, monotone })
    }

    pub fn from_fn(n: usize, f: impl Fn(SubsetMask) -> bool) -> Result<Self, OracleError> {
        Self::from_table(n, (0..1u32 << n).map(f).collect())
    }

    /// `f(x) = 1` iff `x` lies in a TRUE orbit.
    pub fn from_assignment(t: &OrbitTable, a: &TypeAssignment) -> Result<Self, OracleError> {
        if let Some(o) = a.first_free() {
            return Err(ComplexError::FreeOrbit(t.id(o)).into());
        }
        Self::from_fn(t.degree(), |m| a.true_set().contains(t.orbit_of(m)))
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn eval(&self, m: SubsetMask) -> bool {
        self.table[m as usize]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn negation(&self) -> Self {
        let table: Vec<bool> = self.table.iter().map(|b| !b).collect();
        let monotone = is_non_increasing(self.n, &table);
        Self {
            n: self.n,
            table,
            monotone,
        }
    }

    /// `f` with variable `var` fixed, re-indexed over the other `n - 1`.
    pub fn restrict(&self, var: usize, value: bool) -> Self {
        let low = (1u32 << var) - 1;
        let fixed = if value { 1 << var } else { 0 };
        let table: Vec<bool> = (0..1u32 << (self.n - 1))
            .map(|y| {
                let x = (y & low) | ((y & !low) << 1) | fixed;
                self.table[x as usize]
            })
            .collect();
        let monotone = is_non_increasing(self.n - 1, &table);
        Self {
            n: self.n - 1,
            table,
            monotone,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&b| b == self.table[0])
    }

    /// For a non-increasing function: `f(∅) = 1` and `f(all) = 0`.
    pub fn is_nontrivial(&self) -> bool {
        self.table[0] && !self.table[self.table.len() - 1]
    }

    /// The value of `f` on the subcube if it is constant there.
    pub fn constant_on(&self, r: Restriction) -> Option<bool> {
        let free = self.full_mask() & !r.assigned;
        let base = self.eval(r.values);
        if self.monotone {
            return (base == self.eval(r.values | free)).then_some(base);
        }
        constant_by_scan(self, r).then_some(base)
    }

    /// χ of the complex of true inputs, empty face excluded.
    pub fn euler(&self) -> i64 {
        (1..self.table.len())
            .filter(|&m| self.table[m])
            .map(|m| if m.count_ones() % 2 == 1 { 1 } else { -1 })
            .sum()
    }

    fn full_mask(&self) -> SubsetMask {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

fn is_non_increasing(n: usize, table: &[bool]) -> bool {
    (0..table.len()).all(|m| !table[m] || (0..n).all(|i| m >> i & 1 == 0 || table[m & !(1 << i)]))
}

/// Full scan of the subcube; used when the monotone shortcut does not apply.
pub fn constant_by_scan(f: &BooleanFunction, r: Restriction) -> bool {
    let free = f.full_mask() & !r.assigned;
    let base = f.eval(r.values);
    let mut sub = free;
    loop {
        if f.eval(r.values | sub) != base {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & free;
    }
}

struct Minimax<'a> {
    f: &'a BooleanFunction,
    pow3: Vec<usize>,
    memo: Vec<u8>,
}

impl<'a> Minimax<'a> {
    fn new(f: &'a BooleanFunction) -> Result<Self, OracleError> {
        if f.n > MAX_ORACLE_ARITY {
            return Err(OracleError::ArityTooLarge {
                n: f.n,
                max: MAX_ORACLE_ARITY,
            });
        }
        let pow3: Vec<usize> = (0..=f.n).map(|i| 3usize.pow(i as u32)).collect();
        Ok(Self {
            f,
            memo: vec![UNKNOWN; pow3[f.n]],
            pow3,
        })
    }

    /// Digit per variable: 0 unqueried, 1 answered 0, 2 answered 1.
    fn key(&self, r: Restriction) -> usize {
        (0..self.f.n)
            .filter(|&i| r.assigned >> i & 1 == 1)
            .map(|i| self.pow3[i] * if r.values >> i & 1 == 1 { 2 } else { 1 })
            .sum()
    }

    fn depth(&mut self, r: Restriction, key: usize) -> u8 {
        if self.f.constant_on(r).is_some() {
            return 0;
        }
        if self.memo[key] != UNKNOWN {
            return self.memo[key];
        }
        let mut best = u8::MAX;
        for i in 0..self.f.n {
            if r.assigned >> i & 1 == 1 {
                continue;
            }
            let one = self.depth(r.with(i, true), key + 2 * self.pow3[i]);
            if one + 1 >= best {
                continue;
            }
            let zero = self.depth(r.with(i, false), key + self.pow3[i]);
            best = best.min(1 + one.max(zero));
            if best == 1 {
                break;
            }
        }
        self.memo[key] = best;
        best
    }

    fn best_query(&mut self, r: Restriction, key: usize) -> Option<(usize, u8, u8)> {
        let target = self.depth(r, key);
        if target == 0 {
            return None;
        }
        (0..self.f.n)
            .filter(|&i| r.assigned >> i & 1 == 0)
            .find_map(|i| {
                let one = self.depth(r.with(i, true), key + 2 * self.pow3[i]);
                let zero = self.depth(r.with(i, false), key + self.pow3[i]);
                (1 + one.max(zero) == target).then_some((i, one, zero))
            })
    }
}

/// `D(f)`: the least worst-case number of queries of any decision tree.
pub fn decision_tree_depth(f: &BooleanFunction) -> Result<usize, OracleError> {
    depth_under(f, Restriction::default())
}

/// Depth of `f` restricted to the subcube `r`.
pub fn depth_under(f: &BooleanFunction, r: Restriction) -> Result<usize, OracleError> {
    let mut m = Minimax::new(f)?;
    let key = m.key(r);
    Ok(m.depth(r, key) as usize)
}

pub fn is_elusive(f: &BooleanFunction) -> Result<bool, OracleError> {
    Ok(decision_tree_depth(f)? == f.arity())
}

/// A root-to-leaf path of an optimal tree against an adversary that always
/// answers toward the deeper subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthCertificate {
    pub depth: usize,
    /// `(1-based variable, answer)` in query order.
    pub path: Vec<(usize, bool)>,
    /// 1-based variables answered 1; unqueried variables are 0.
    pub input: Vec<usize>,
    pub value: bool,
}

pub fn adversary_path(f: &BooleanFunction) -> Result<DepthCertificate, OracleError> {
    let mut m = Minimax::new(f)?;
    let mut r = Restriction::default();
    let depth = m.depth(r, 0) as usize;
    let mut path = Vec::new();
    while let Some((i, one, zero)) = m.best_query(r, m.key(r)) {
        let answer = one >= zero;
        path.push((i + 1, answer));
        r = r.with(i, answer);
    }
    Ok(DepthCertificate {
        depth,
        path,
        input: points_of(r.values),
        value: f.eval(r.values),
    })
}

/// Every permutation of `{0..n}`.
fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    permute(&mut cur, 0, &mut out);
    out
}

fn permute(cur: &mut Vec<u8>, k: usize, out: &mut Vec<Vec<u8>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permute(cur, k + 1, out);
        cur.swap(k, i);
    }
}

/// All down-sets of the subset lattice on `n` points, as bit families over
/// masks (bit `m` set iff `m` is a face).
pub fn monotone_families(n: usize) -> Vec<u64> {
    assert!(n <= MAX_EXHAUSTIVE_ARITY);
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut out = Vec::new();
    families_rec(&masks, 0, 0, &mut out);
    out
}

fn families_rec(masks: &[u32], i: usize, fam: u64, out: &mut Vec<u64>) {
    if i == masks.len() {
        out.push(fam);
        return;
    }
    let m = masks[i];
    let allowed = (0..32).all(|b| m >> b & 1 == 0 || fam >> (m & !(1 << b)) & 1 == 1);
    if allowed {
        families_rec(masks, i + 1, fam | 1 << m, out);
    }
    families_rec(masks, i + 1, fam, out);
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub monotone_functions: usize,
    pub nontrivial: usize,
    pub weakly_symmetric_nontrivial: usize,
    pub elusive_weakly_symmetric: usize,
    /// Faces (1-based) of each nontrivial weakly symmetric non-elusive f.
    pub counterexamples: Vec<Vec<Vec<usize>>>,
    /// Non-elusive functions with `f(∅) = 1`.
    pub non_elusive: usize,
    pub non_elusive_chi_one: usize,
    pub chi_violations: Vec<Vec<Vec<usize>>>,
    /// Functions where `D(f)` and `D` of the negation differ.
    pub negation_mismatches: usize,
}

impl ConjectureReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty() && self.chi_violations.is_empty()
    }
}

fn faces_of(fam: u64, n: usize) -> Vec<Vec<usize>> {
    (0..1u32 << n)
        .filter(|m| fam >> m & 1 == 1)
        .map(points_of)
        .collect()
}

/// Sweeps every monotone non-increasing function on `n ≤ 5` variables.
pub fn exhaustive_conjecture_check(n: usize) -> Result<ConjectureReport, OracleError> {
    if n == 0 || n > MAX_EXHAUSTIVE_ARITY {
        return Err(OracleError::ArityTooLarge {
            n,
            max: MAX_EXHAUSTIVE_ARITY,
        });
    }
    let perms = all_permutations(n);
    let act: Vec<Vec<u32>> = perms
        .iter()
        .map(|p| {
            (0..1u32 << n)
                .map(|m| {
                    (0..n)
                        .filter(|&i| m >> i & 1 == 1)
                        .fold(0, |acc, i| acc | 1 << p[i])
                })
                .collect()
        })
        .collect();
    let families = monotone_families(n);
    let full = (1u32 << n) - 1;
    let mut rep = ConjectureReport {
        n,
        monotone_functions: families.len(),
        nontrivial: 0,
        weakly_symmetric_nontrivial: 0,
        elusive_weakly_symmetric: 0,
        counterexamples: Vec::new(),
        non_elusive: 0,
        non_elusive_chi_one: 0,
        chi_violations: Vec::new(),
        negation_mismatches: 0,
    };
    for fam in families {
        let f = BooleanFunction::from_fn(n, |m| fam >> m & 1 == 1)?;
        let d = decision_tree_depth(&f)?;
        if decision_tree_depth(&f.negation())? != d {
            rep.negation_mismatches += 1;
        }
        if d < n && f.eval(0) {
            rep.non_elusive += 1;
            if f.euler() == 1 {
                rep.non_elusive_chi_one += 1;
            } else {
                rep.chi_violations.push(faces_of(fam, n));
            }
        }
        if !(f.eval(0) && !f.eval(full)) {
            continue;
        }
        rep.nontrivial += 1;
        let mut reach = 1u32;
        for (p, a) in perms.iter().zip(&act) {
            if (0..1usize << n).all(|m| f.eval(m as u32) == f.eval(a[m])) {
                reach |= 1 << p[0];
            }
        }
        if reach != full {
            continue;
        }
        rep.weakly_symmetric_nontrivial += 1;
        if d == n {
            rep.elusive_weakly_symmetric += 1;
        } else {
            rep.counterexamples.push(faces_of(fam, n));
        }
    }
    Ok(rep)
}

/// A random monotone G-invariant assignment: orbits are visited in random
/// order and each still-free orbit gets a fair coin, with propagation. With
/// `nontrivial` the full set is FALSE; the empty set is always TRUE.
pub fn sample_invariant_function<R: Rng>(
    t: &OrbitTable,
    poset: &OrbitPoset,
    rng: &mut R,
    nontrivial: bool,
) -> TypeAssignment {
    let mut a = TypeAssignment::all_free(t.len());
    a.set_raw(t.empty_orbit(), true).expect("fresh");
    if nontrivial {
        a.propagate(poset, t.full_orbit(), false).expect("fresh");
    }
    let mut order: Vec<usize> = (1..t.len()).collect();
    order.shuffle(rng);
    for o in order {
        if a.is_free(o) {
            a.propagate(poset, o, rng.gen_bool(0.5))
                .expect("a free orbit never conflicts in a closed assignment");
        }
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    pub degree: usize,
    pub samples: usize,
    pub nontrivial: usize,
    /// Samples where some `f_{x_a=1}` is elusive.
    pub lemma_applicable: usize,
    pub lemma_violations: usize,
    /// Applicable samples where not every `f_{x_i=1}` is elusive.
    pub remark_violations: usize,
    /// Non-constant samples with `D(f) < 1 + D(f_{x_a=1})`; checked only
    /// for transitive groups, where the bound holds.
    pub subtree_bound_violations: usize,
}

impl RestrictionReport {
    pub fn holds(&self) -> bool {
        self.lemma_violations == 0
            && self.remark_violations == 0
            && self.subtree_bound_violations == 0
    }
}

/// If `f_{x_a=1}` is elusive then `f` is, on sampled G-invariant monotone
/// functions.
pub fn restriction_lemma_check(
    g: &PermGroup,
    samples: usize,
    seed: u64,
) -> Result<RestrictionReport, OracleError> {
    let n = g.degree();
    if n > MAX_LEMMA_DEGREE {
        return Err(OracleError::ArityTooLarge {
            n,
            max: MAX_LEMMA_DEGREE,
        });
    }
    let t = compute_orbits(g)?;
    let poset = build_poset(&t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = RestrictionReport {
        degree: n,
        samples,
        nontrivial: 0,
        lemma_applicable: 0,
        lemma_violations: 0,
        remark_violations: 0,
        subtree_bound_violations: 0,
    };
    let transitive = g.is_transitive();
    for _ in 0..samples {
        let a = sample_invariant_function(&t, &poset, &mut rng, false);
        let f = BooleanFunction::from_assignment(&t, &a)?;
        if f.is_nontrivial() {
            rep.nontrivial += 1;
        }
        let d = decision_tree_depth(&f)?;
        let sub: Vec<usize> = (0..n)
            .map(|v| depth_under(&f, Restriction::new(1 << v, 1 << v).expect("valid")))
            .collect::<Result<_, _>>()?;
        if transitive && !f.is_constant() && sub.iter().any(|&s| d < 1 + s) {
            rep.subtree_bound_violations += 1;
        }
        if sub.iter().any(|&s| s == n - 1) {
            rep.lemma_applicable += 1;
            if d != n {
                rep.lemma_violations += 1;
            }
            if transitive && sub.iter().any(|&s| s != n - 1) {
                rep.remark_violations += 1;
            }
        }
    }
    Ok(rep)
}

/// The cyclic group generated by `(1 2 ... n)`.
pub fn cyclic_group(n: usize) -> PermGroup {
    let images: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let c = Permutation::from_images(images).expect("a cycle is a bijection");
    PermGroup::generate(n, vec![c], n.max(1)).expect("order n")
}
