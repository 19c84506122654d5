//! Backtracking case analysis over the subgroups of G6.
//!
//! Each subgroup `H` contributes a fixed-point condition on Δ^H. Cases are
//! assignments to the orbits governing unions of `H`'s blocks, closed under
//! monotone propagation. Whatever remains free after the last subgroup is
//! enumerated at the leaf, where χ(Δ) = 1 and χ(Link(Δ, x1)) = 1 must both
//! hold for a non-elusive function to exist.

mod replay;

pub use replay::{
    build_anchor_map, replay_appendix, AnchorConflict, AnchorMap, LeafTrace, ReplayError,
    ReplayReport, ResidualCase, ThetaComparison, TraceStep,
};

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::complex::{
    assert_monotone, block_unions, blocks_of, fixed_point_complex, orbit_euler_term,
    orbit_link_term, partial_euler, partial_link_euler, Conflict, TypeAssignment,
};
use crate::data::{Bundle, DataError};
use crate::orbits::{build_poset, compute_orbits, OrbitError, OrbitId, OrbitPoset, OrbitTable};
use crate::perm::{
    classify, find_psi_p_witness, ClassKind, Classification, ClassifyOptions, GroupError,
    OliverWitness, PermGroup, DEFAULT_ELEMENT_CAP,
};

/// Default bound on residual assignments explored at a single leaf.
pub const DEFAULT_RESIDUAL_CAP: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("subgroup {name} is not contained in the ambient group")]
    NotASubgroup { name: String },
    #[error("subgroup {name} is neither cyclic nor an Oliver group by any available test")]
    Unclassified { name: String },
    #[error("bad schedule: {0}")]
    BadSchedule(String),
    #[error(
        "leaf with {free} free orbits exceeded the residual cap of {cap} assignments \
         (after schedule position {depth})"
    )]
    ResidualCapExceeded { free: usize, cap: u64, depth: usize },
    #[error("the ambient group must be transitive")]
    Intransitive,
}

/// Condition that Δ^H must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ChiCondition {
    Exact(i64),
    Mod(u64),
}

impl ChiCondition {
    pub fn holds(&self, chi: i64) -> bool {
        match *self {
            ChiCondition::Exact(v) => chi == v,
            ChiCondition::Mod(q) => (chi - 1).rem_euclid(q as i64) == 0,
        }
    }

    /// Exact(1) for cyclic and Ψ_p groups, χ ≡ 1 (mod q) for Ψ_p^q.
    pub fn for_kind(kind: &ClassKind) -> Option<Self> {
        match *kind {
            ClassKind::Cyclic | ClassKind::PsiP { .. } => Some(ChiCondition::Exact(1)),
            ClassKind::PsiPQ { q, .. } => Some(ChiCondition::Mod(q)),
            ClassKind::SylowLemma { .. } | ClassKind::Unresolved => None,
        }
    }
}

impl std::fmt::Display for ChiCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChiCondition::Exact(v) => write!(f, "chi = {v}"),
            ChiCondition::Mod(q) => write!(f, "chi = 1 mod {q}"),
        }
    }
}

/// One subgroup with its blocks, the orbits its block unions fall into and
/// the condition implied by its classification.
#[derive(Debug, Clone)]
pub struct SubgroupCheck {
    pub name: String,
    pub group: PermGroup,
    pub blocks: Vec<u32>,
    /// `(set of block indices, orbit of the union)`.
    pub unions: Vec<(u32, usize)>,
    /// Distinct orbits in `unions`, ascending.
    pub governed: Vec<usize>,
    pub condition: ChiCondition,
    pub classification: Classification,
    pub claimed_type: String,
    pub claimed_type_holds: bool,
}

impl SubgroupCheck {
    pub fn is_trivial(&self) -> bool {
        self.group.order() == 1
    }

    /// χ(Δ^H) when every governed orbit is assigned.
    pub fn chi_of(&self, a: &TypeAssignment) -> i64 {
        self.unions
            .iter()
            .filter(|(_, o)| a.true_set().contains(*o))
            .map(|(s, _)| if s.count_ones() % 2 == 1 { 1 } else { -1 })
            .sum()
    }
}

/// Ambient group, its orbit lattice and all subgroup checks, in input order.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub group: PermGroup,
    pub table: OrbitTable,
    pub poset: OrbitPoset,
    pub checks: Vec<SubgroupCheck>,
}

/// Input description of one subgroup.
#[derive(Debug, Clone)]
pub struct SubgroupInput {
    pub name: String,
    pub group: PermGroup,
    pub witness: Option<OliverWitness>,
    pub claimed_type: String,
}

fn claimed_type_holds(g: &PermGroup, claimed: &str, c: &Classification) -> bool {
    let claim = claimed.trim();
    match claim {
        "identity" => g.order() == 1,
        "cyclic" => c.kind == ClassKind::Cyclic,
        _ => {
            let Some(rest) = claim.strip_prefix("Psi_") else {
                return false;
            };
            match rest.split_once('^') {
                None => rest
                    .parse::<u64>()
                    .map(|p| find_psi_p_witness(g, p).is_some())
                    .unwrap_or(false),
                Some((p, q)) => match (p.parse::<u64>(), q.parse::<u64>()) {
                    (Ok(p), Ok(q)) => c.kind == ClassKind::PsiPQ { p, q },
                    _ => false,
                },
            }
        }
    }
}

impl Campaign {
    pub fn new(group: PermGroup, subgroups: Vec<SubgroupInput>) -> Result<Self, SearchError> {
        if !group.is_transitive() {
            return Err(SearchError::Intransitive);
        }
        let table = compute_orbits(&group)?;
        let poset = build_poset(&table);
        let opts = ClassifyOptions {
            sylow: false,
            search: true,
        };
        let mut checks = Vec::with_capacity(subgroups.len());
        for s in subgroups {
            if !s.group.is_subgroup_of(&group) {
                return Err(SearchError::NotASubgroup { name: s.name });
            }
            let classification = classify(&s.group, s.witness.as_ref(), opts);
            let condition = ChiCondition::for_kind(&classification.kind).ok_or_else(|| {
                SearchError::Unclassified {
                    name: s.name.clone(),
                }
            })?;
            let blocks = blocks_of(&s.group);
            let unions = block_unions(&table, &blocks);
            let mut governed: Vec<usize> = unions.iter().map(|&(_, o)| o).collect();
            governed.sort_unstable();
            governed.dedup();
            let claimed_type_holds = claimed_type_holds(&s.group, &s.claimed_type, &classification);
            checks.push(SubgroupCheck {
                name: s.name,
                group: s.group,
                blocks,
                unions,
                governed,
                condition,
                classification,
                claimed_type: s.claimed_type,
                claimed_type_holds,
            });
        }
        Ok(Self {
            group,
            table,
            poset,
            checks,
        })
    }

    /// G6 and its eleven subgroups from the bundled data.
    pub fn from_bundle(bundle: &Bundle) -> Result<Self, SearchError> {
        let g6 = bundle
            .group("G6")
            .ok_or_else(|| SearchError::BadSchedule("bundle has no G6".into()))?;
        let group = g6.group(DEFAULT_ELEMENT_CAP)?;
        let mut subs = Vec::new();
        for s in &bundle.subgroups {
            let record = s.as_group_record();
            subs.push(SubgroupInput {
                name: s.name.clone(),
                group: record.group(DEFAULT_ELEMENT_CAP)?,
                witness: record.bundled_witness().map_err(GroupError::from)?,
                claimed_type: s.claimed_type.clone(),
            });
        }
        Self::new(group, subs)
    }

    pub fn check(&self, name: &str) -> Option<&SubgroupCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// All-free state with the nontriviality constraints applied: the empty
    /// set is TRUE and the full set is FALSE.
    pub fn initial_state(&self) -> SearchState {
        let mut a = TypeAssignment::all_free(self.table.len());
        a.set_raw(self.table.empty_orbit(), true)
            .expect("fresh assignment");
        a.propagate(&self.poset, self.table.full_orbit(), false)
            .expect("fresh assignment");
        SearchState::from_assignment(&self.table, a)
    }

    /// Initial state merged with `seed`, or the conflicting orbit.
    pub fn seeded_state(&self, seed: &TypeAssignment) -> Result<SearchState, Conflict> {
        let mut s = self.initial_state();
        for o in seed.true_set().ones() {
            s.propagate_in_place(self, o, true)?;
        }
        for o in seed.false_set().ones() {
            s.propagate_in_place(self, o, false)?;
        }
        Ok(s)
    }

    pub fn propagate(
        &self,
        s: &SearchState,
        o: usize,
        value: bool,
    ) -> Result<SearchState, Conflict> {
        let mut next = s.clone();
        next.propagate_in_place(self, o, value)?;
        Ok(next)
    }
}

/// A node of the search: a partial assignment and its running χ values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    pub assignment: TypeAssignment,
    /// χ(Δ) of the TRUE orbits so far.
    pub chi: i64,
    /// χ(Link(Δ, x1)) of the TRUE orbits so far.
    pub chi_link: i64,
    pub depth: usize,
}

impl SearchState {
    pub fn from_assignment(table: &OrbitTable, assignment: TypeAssignment) -> Self {
        let chi = partial_euler(table, &assignment);
        let chi_link = partial_link_euler(table, &assignment, 0);
        Self {
            assignment,
            chi,
            chi_link,
            depth: 0,
        }
    }

    pub fn propagate_in_place(
        &mut self,
        camp: &Campaign,
        o: usize,
        value: bool,
    ) -> Result<(), Conflict> {
        let added = self.assignment.propagate(&camp.poset, o, value)?;
        if value {
            for x in added {
                self.chi += orbit_euler_term(&camp.table, x);
                self.chi_link += orbit_link_term(&camp.table, x, 0);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CaseStats {
    pub conflicts: u64,
    pub chi_failures: u64,
}

/// Surviving children of `s` under one subgroup check, in lexicographic
/// order of the free governed orbits (TRUE before FALSE).
pub fn enumerate_cases(
    camp: &Campaign,
    s: &SearchState,
    check: &SubgroupCheck,
) -> (Vec<SearchState>, CaseStats) {
    let free: Vec<usize> = check
        .governed
        .iter()
        .copied()
        .filter(|&o| s.assignment.is_free(o))
        .collect();
    let mut out = Vec::new();
    let mut stats = CaseStats::default();
    cases_rec(camp, check, &free, 0, s.clone(), &mut out, &mut stats);
    for c in &mut out {
        c.depth = s.depth + 1;
    }
    (out, stats)
}

fn cases_rec(
    camp: &Campaign,
    check: &SubgroupCheck,
    free: &[usize],
    i: usize,
    s: SearchState,
    out: &mut Vec<SearchState>,
    stats: &mut CaseStats,
) {
    if i == free.len() {
        if check.condition.holds(check.chi_of(&s.assignment)) {
            out.push(s);
        } else {
            stats.chi_failures += 1;
        }
        return;
    }
    let o = free[i];
    if !s.assignment.is_free(o) {
        cases_rec(camp, check, free, i + 1, s, out, stats);
        return;
    }
    for value in [true, false] {
        match camp.propagate(&s, o, value) {
            Ok(next) => cases_rec(camp, check, free, i + 1, next, out, stats),
            Err(_) => stats.conflicts += 1,
        }
    }
}

/// Number of block-level complexes compatible with `s`: assignments of the
/// free governed orbits whose induced family on blocks is downward closed and
/// meets the condition. No propagation to other orbits is applied, so this
/// can exceed the number of cases from [`enumerate_cases`]. Returns `None`
/// when more than 24 governed orbits are free.
pub fn candidate_complexes(s: &SearchState, check: &SubgroupCheck) -> Option<u64> {
    let free: Vec<usize> = check
        .governed
        .iter()
        .copied()
        .filter(|&o| s.assignment.is_free(o))
        .collect();
    if free.len() > 24 {
        return None;
    }
    let nb = check.blocks.len();
    let mut union_orbit = vec![usize::MAX; 1 << nb];
    for &(set, o) in &check.unions {
        union_orbit[set as usize] = o;
    }
    let mut count = 0;
    for bits in 0u64..1 << free.len() {
        let is_true = |o: usize| match free.iter().position(|&x| x == o) {
            Some(k) => bits >> k & 1 == 1,
            None => s.assignment.true_set().contains(o),
        };
        let face = |set: u32| set == 0 || is_true(union_orbit[set as usize]);
        let closed = (1u32..1 << nb)
            .all(|set| !face(set) || (0..nb).all(|b| set >> b & 1 == 0 || face(set & !(1 << b))));
        if !closed {
            continue;
        }
        let chi: i64 = (1u32..1 << nb)
            .filter(|&set| face(set))
            .map(|set| if set.count_ones() % 2 == 1 { 1 } else { -1 })
            .sum();
        if check.condition.holds(chi) {
            count += 1;
        }
    }
    Some(count)
}

/// Order in which subgroup checks are applied. The trivial subgroup must
/// come last; it is handled by the leaf enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub name: String,
    pub order: Vec<String>,
}

impl Schedule {
    /// Ascending block count; ties by descending subgroup order, then input
    /// order.
    pub fn fewest_blocks(camp: &Campaign) -> Self {
        let mut idx: Vec<usize> = (0..camp.checks.len()).collect();
        idx.sort_by_key(|&i| {
            let c = &camp.checks[i];
            (
                c.is_trivial(),
                c.blocks.len(),
                std::cmp::Reverse(c.group.order()),
                i,
            )
        });
        Self {
            name: "fewest-blocks".into(),
            order: idx.iter().map(|&i| camp.checks[i].name.clone()).collect(),
        }
    }

    /// Descending block count, trivial subgroup still last.
    pub fn most_blocks(camp: &Campaign) -> Self {
        let mut idx: Vec<usize> = (0..camp.checks.len()).collect();
        idx.sort_by_key(|&i| {
            let c = &camp.checks[i];
            (
                c.is_trivial(),
                std::cmp::Reverse(c.blocks.len()),
                c.group.order(),
                i,
            )
        });
        Self {
            name: "most-blocks".into(),
            order: idx.iter().map(|&i| camp.checks[i].name.clone()).collect(),
        }
    }

    /// `fewest-blocks`, `most-blocks`, or a comma-separated list of
    /// subgroup names.
    pub fn parse(camp: &Campaign, text: &str) -> Result<Self, SearchError> {
        let s = match text.trim() {
            "fewest-blocks" | "default" => Self::fewest_blocks(camp),
            "most-blocks" => Self::most_blocks(camp),
            list => Self {
                name: "custom".into(),
                order: list.split(',').map(|x| x.trim().to_string()).collect(),
            },
        };
        s.validate(camp)?;
        Ok(s)
    }

    pub fn validate(&self, camp: &Campaign) -> Result<(), SearchError> {
        if self.order.len() != camp.checks.len() {
            return Err(SearchError::BadSchedule(format!(
                "expected {} subgroups, got {}",
                camp.checks.len(),
                self.order.len()
            )));
        }
        for c in &camp.checks {
            let n = self.order.iter().filter(|x| **x == c.name).count();
            if n != 1 {
                return Err(SearchError::BadSchedule(format!(
                    "{} appears {n} times",
                    c.name
                )));
            }
        }
        let last = camp
            .check(self.order.last().expect("nonempty"))
            .expect("validated");
        if !last.is_trivial() {
            return Err(SearchError::BadSchedule(
                "the trivial subgroup must come last".into(),
            ));
        }
        if camp.checks.iter().filter(|c| c.is_trivial()).count() != 1 {
            return Err(SearchError::BadSchedule(
                "exactly one trivial subgroup is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub link_check: bool,
    pub residual_cap: u64,
    /// Worker threads for the first schedule entry; 1 runs inline.
    pub jobs: usize,
    /// Re-verify every produced case from scratch.
    pub audit: bool,
    /// How many feasible functions to keep in the report.
    pub keep_feasible: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            link_check: true,
            residual_cap: DEFAULT_RESIDUAL_CAP,
            jobs: 1,
            audit: false,
            keep_feasible: 16,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchCounters {
    pub nodes_explored: u64,
    pub cases_enumerated: u64,
    pub prunes_by_conflict: u64,
    pub prunes_by_chi: u64,
    pub prunes_by_link: u64,
    pub leaves: u64,
    pub residual_assignments: u64,
    pub max_residual_free: usize,
    pub audit_failures: u64,
    pub feasible_count: u64,
}

impl SearchCounters {
    fn merge(&mut self, o: &SearchCounters) {
        self.nodes_explored += o.nodes_explored;
        self.cases_enumerated += o.cases_enumerated;
        self.prunes_by_conflict += o.prunes_by_conflict;
        self.prunes_by_chi += o.prunes_by_chi;
        self.prunes_by_link += o.prunes_by_link;
        self.leaves += o.leaves;
        self.residual_assignments += o.residual_assignments;
        self.max_residual_free = self.max_residual_free.max(o.max_residual_free);
        self.audit_failures += o.audit_failures;
        self.feasible_count += o.feasible_count;
    }
}

/// Outcome of a full run. `feasible_functions` lists the TRUE orbits of at
/// most `keep_feasible` surviving assignments; `counters.feasible_count` is
/// the exact total.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub schedule: Schedule,
    pub link_check: bool,
    pub seed_conflict: bool,
    pub feasible_functions: Vec<Vec<OrbitId>>,
    #[serde(flatten)]
    pub counters: SearchCounters,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SearchReport {
    pub fn no_feasible_function(&self) -> bool {
        self.counters.feasible_count == 0
    }
}

struct Worker<'a> {
    camp: &'a Campaign,
    checks: Vec<&'a SubgroupCheck>,
    opts: SearchOptions,
    counters: SearchCounters,
    feasible: Vec<Vec<OrbitId>>,
}

impl<'a> Worker<'a> {
    fn new(camp: &'a Campaign, schedule: &Schedule, opts: SearchOptions) -> Self {
        let checks = schedule
            .order
            .iter()
            .map(|n| camp.check(n).expect("validated schedule"))
            .filter(|c| !c.is_trivial())
            .collect();
        Self {
            camp,
            checks,
            opts,
            counters: SearchCounters::default(),
            feasible: Vec::new(),
        }
    }

    fn expand(&mut self, s: &SearchState, pos: usize) -> Vec<SearchState> {
        let check = self.checks[pos];
        let (children, stats) = enumerate_cases(self.camp, s, check);
        self.counters.prunes_by_conflict += stats.conflicts;
        self.counters.prunes_by_chi += stats.chi_failures;
        self.counters.cases_enumerated += children.len() as u64;
        if self.opts.audit {
            for c in &children {
                if !self.audit_case(c, check) {
                    self.counters.audit_failures += 1;
                }
            }
        }
        children
    }

    fn audit_case(&self, c: &SearchState, check: &SubgroupCheck) -> bool {
        let table = &self.camp.table;
        let a = &c.assignment;
        let fpc = match fixed_point_complex(table, a, &check.group) {
            Ok(f) => f,
            Err(_) => return false,
        };
        assert_monotone(&self.camp.poset, a)
            && fpc.is_downward_closed()
            && check.condition.holds(fpc.euler)
            && c.chi == partial_euler(table, a)
            && c.chi_link == partial_link_euler(table, a, 0)
    }

    fn dfs(&mut self, s: SearchState, pos: usize) -> Result<(), SearchError> {
        self.counters.nodes_explored += 1;
        if pos == self.checks.len() {
            return self.leaf(s);
        }
        for child in self.expand(&s, pos) {
            self.dfs(child, pos + 1)?;
        }
        Ok(())
    }

    fn leaf(&mut self, s: SearchState) -> Result<(), SearchError> {
        self.counters.leaves += 1;
        let free = s.assignment.free_orbits();
        self.counters.max_residual_free = self.counters.max_residual_free.max(free.len());
        let mut budget = self.opts.residual_cap;
        let depth = s.depth;
        self.residual(s, &free, 0, &mut budget)
            .map_err(|()| SearchError::ResidualCapExceeded {
                free: free.len(),
                cap: self.opts.residual_cap,
                depth,
            })
    }

    fn residual(
        &mut self,
        s: SearchState,
        free: &[usize],
        i: usize,
        budget: &mut u64,
    ) -> Result<(), ()> {
        if i == free.len() {
            if *budget == 0 {
                return Err(());
            }
            *budget -= 1;
            self.counters.residual_assignments += 1;
            if s.chi != 1 {
                self.counters.prunes_by_chi += 1;
                return Ok(());
            }
            if self.opts.link_check && s.chi_link != 1 {
                self.counters.prunes_by_link += 1;
                return Ok(());
            }
            self.counters.feasible_count += 1;
            if self.feasible.len() < self.opts.keep_feasible {
                self.feasible
                    .push(s.assignment.true_ids(&self.camp.table)[1..].to_vec());
            }
            return Ok(());
        }
        let o = free[i];
        if !s.assignment.is_free(o) {
            return self.residual(s, free, i + 1, budget);
        }
        for value in [true, false] {
            match self.camp.propagate(&s, o, value) {
                Ok(next) => self.residual(next, free, i + 1, budget)?,
                Err(_) => self.counters.prunes_by_conflict += 1,
            }
        }
        Ok(())
    }
}

pub fn run_search(
    camp: &Campaign,
    schedule: &Schedule,
    opts: SearchOptions,
) -> Result<SearchReport, SearchError> {
    run_search_from(camp, schedule, opts, None)
}

/// Runs the search from the initial state, optionally merged with `seed`.
/// A seed that conflicts with nontriviality yields an empty report with
/// `seed_conflict` set.
pub fn run_search_from(
    camp: &Campaign,
    schedule: &Schedule,
    opts: SearchOptions,
    seed: Option<&TypeAssignment>,
) -> Result<SearchReport, SearchError> {
    schedule.validate(camp)?;
    let start = Instant::now();
    let root = match seed {
        None => camp.initial_state(),
        Some(a) => match camp.seeded_state(a) {
            Ok(s) => s,
            Err(_) => {
                return Ok(SearchReport {
                    schedule: schedule.clone(),
                    link_check: opts.link_check,
                    seed_conflict: true,
                    feasible_functions: Vec::new(),
                    counters: SearchCounters::default(),
                    wall_time: start.elapsed(),
                })
            }
        },
    };
    let mut top = Worker::new(camp, schedule, opts);
    let (counters, feasible) = if opts.jobs <= 1 || top.checks.is_empty() {
        top.dfs(root, 0)?;
        (top.counters, top.feasible)
    } else {
        top.counters.nodes_explored += 1;
        let children = top.expand(&root, 0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool");
        let results: Result<Vec<_>, SearchError> = pool.install(|| {
            use rayon::prelude::*;
            children
                .into_par_iter()
                .map(|child| {
                    let mut w = Worker::new(camp, schedule, opts);
                    w.dfs(child, 1)?;
                    Ok((w.counters, w.feasible))
                })
                .collect()
        });
        let mut counters = top.counters;
        let mut feasible = Vec::new();
        for (c, f) in results? {
            counters.merge(&c);
            feasible.extend(f);
        }
        feasible.truncate(opts.keep_feasible);
        (counters, feasible)
    };
    Ok(SearchReport {
        schedule: schedule.clone(),
        link_check: opts.link_check,
        seed_conflict: false,
        feasible_functions: feasible,
        counters,
        wall_time: start.elapsed(),
    })
}
