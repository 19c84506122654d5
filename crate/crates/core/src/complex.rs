//! Monotone families of subsets encoded as per-orbit type assignments.
//!
//! A fully assigned [`TypeAssignment`] describes the complex Δ_f of a
//! monotone non-increasing G-invariant function: the union of its TRUE
//! orbits. No Euler characteristic in this module ever counts the empty face.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbits::{OrbitError, OrbitId, OrbitPoset, OrbitTable, SubsetMask};
use crate::perm::PermGroup;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("orbit {0} is still free")]
    FreeOrbit(OrbitId),
    #[error("the union of blocks {blocks:?} lies in free orbit {orbit}")]
    IndeterminateFace { blocks: Vec<usize>, orbit: OrbitId },
    #[error("conflicting states for orbit {0}")]
    Conflict(OrbitId),
    #[error("state must be \"T\" or \"F\", got {0:?}")]
    BadState(String),
    #[error("subgroup degree {found} does not match orbit table degree {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} out of range for degree {degree}")]
    BadVertex { vertex: usize, degree: usize },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitState {
    #[serde(rename = "T")]
    True,
    #[serde(rename = "F")]
    False,
    #[serde(rename = "FREE")]
    Free,
}

/// Propagation hit an orbit that would need both values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub orbit: usize,
}

/// One line of an assignment file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub orbit: OrbitId,
    pub state: String,
}

/// TRUE / FALSE sets over global orbit indices; everything else is FREE.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeAssignment {
    t: FixedBitSet,
    f: FixedBitSet,
}

impl TypeAssignment {
    pub fn all_free(orbits: usize) -> Self {
        Self {
            t: FixedBitSet::with_capacity(orbits),
            f: FixedBitSet::with_capacity(orbits),
        }
    }

    /// Every nonempty orbit TRUE: the full simplex.
    pub fn full_simplex(table: &OrbitTable) -> Self {
        let mut a = Self::all_free(table.len());
        a.t.insert_range(..);
        a
    }

    /// Only the empty face: `Δ = {∅}`.
    pub fn void_face(table: &OrbitTable) -> Self {
        let mut a = Self::all_free(table.len());
        a.f.insert_range(..);
        a.f.set(table.empty_orbit(), false);
        a.t.insert(table.empty_orbit());
        a
    }

    /// TRUE exactly on the orbits of `true_orbits` and FALSE elsewhere; no
    /// consistency check.
    pub fn from_true_set(table: &OrbitTable, true_orbits: &FixedBitSet) -> Self {
        let mut t = true_orbits.clone();
        t.grow(table.len());
        let mut f = t.clone();
        f.toggle_range(..);
        Self { t, f }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.len() == 0
    }

    pub fn true_set(&self) -> &FixedBitSet {
        &self.t
    }

    pub fn false_set(&self) -> &FixedBitSet {
        &self.f
    }

    pub fn state(&self, o: usize) -> OrbitState {
        if self.t.contains(o) {
            OrbitState::True
        } else if self.f.contains(o) {
            OrbitState::False
        } else {
            OrbitState::Free
        }
    }

    pub fn is_free(&self, o: usize) -> bool {
        !self.t.contains(o) && !self.f.contains(o)
    }

    pub fn free_orbits(&self) -> Vec<usize> {
        (0..self.t.len()).filter(|&o| self.is_free(o)).collect()
    }

    pub fn first_free(&self) -> Option<usize> {
        (0..self.t.len()).find(|&o| self.is_free(o))
    }

    pub fn is_full(&self) -> bool {
        self.first_free().is_none()
    }

    /// Sets a single orbit without propagation.
    pub fn set_raw(&mut self, o: usize, value: bool) -> Result<(), Conflict> {
        let (mine, other) = if value {
            (&mut self.t, &self.f)
        } else {
            (&mut self.f, &self.t)
        };
        if other.contains(o) {
            return Err(Conflict { orbit: o });
        }
        mine.insert(o);
        Ok(())
    }

    /// Sets `o` and closes Lower under TRUE or Upper under FALSE. Returns the
    /// orbits that changed state. On conflict `self` is left untouched.
    pub fn propagate(
        &mut self,
        poset: &OrbitPoset,
        o: usize,
        value: bool,
    ) -> Result<Vec<usize>, Conflict> {
        let (closure, mine, other) = if value {
            (poset.lower(o), &mut self.t, &self.f)
        } else {
            (poset.upper(o), &mut self.f, &self.t)
        };
        if let Some(x) = closure.intersection(other).next() {
            return Err(Conflict { orbit: x });
        }
        let added: Vec<usize> = closure.difference(mine).collect();
        mine.union_with(closure);
        Ok(added)
    }

    /// Closes every TRUE orbit downward and every FALSE orbit upward.
    pub fn close(&mut self, poset: &OrbitPoset) -> Result<(), Conflict> {
        let ts: Vec<usize> = self.t.ones().collect();
        let fs: Vec<usize> = self.f.ones().collect();
        for o in ts {
            self.propagate(poset, o, true)?;
        }
        for o in fs {
            self.propagate(poset, o, false)?;
        }
        Ok(())
    }

    /// Builds an assignment from file entries and closes it under
    /// propagation. Any TRUE orbit makes the empty orbit TRUE.
    pub fn from_entries(
        table: &OrbitTable,
        poset: &OrbitPoset,
        entries: &[AssignmentEntry],
    ) -> Result<Self, ComplexError> {
        let mut a = Self::all_free(table.len());
        for e in entries {
            let o = table.global(e.orbit)?;
            let value = match e.state.as_str() {
                "T" => true,
                "F" => false,
                other => return Err(ComplexError::BadState(other.to_string())),
            };
            a.set_raw(o, value)
                .map_err(|c| ComplexError::Conflict(table.id(c.orbit)))?;
        }
        if a.t.count_ones(..) > 0 && a.is_free(table.empty_orbit()) {
            a.set_raw(table.empty_orbit(), true).expect("free");
        }
        a.close(poset)
            .map_err(|c| ComplexError::Conflict(table.id(c.orbit)))?;
        Ok(a)
    }

    /// Entries for every assigned orbit, in canonical order.
    pub fn to_entries(&self, table: &OrbitTable) -> Vec<AssignmentEntry> {
        (0..self.t.len())
            .filter_map(|o| {
                let state = match self.state(o) {
                    OrbitState::True => "T",
                    OrbitState::False => "F",
                    OrbitState::Free => return None,
                };
                Some(AssignmentEntry {
                    orbit: table.id(o),
                    state: state.to_string(),
                })
            })
            .collect()
    }

    /// Canonical ids of the TRUE orbits.
    pub fn true_ids(&self, table: &OrbitTable) -> Vec<OrbitId> {
        self.t.ones().map(|o| table.id(o)).collect()
    }

    pub fn false_ids(&self, table: &OrbitTable) -> Vec<OrbitId> {
        self.f.ones().map(|o| table.id(o)).collect()
    }

    fn require_full(&self, table: &OrbitTable) -> Result<(), ComplexError> {
        match self.first_free() {
            Some(o) => Err(ComplexError::FreeOrbit(table.id(o))),
            None => Ok(()),
        }
    }
}

/// Face counts by size; `r[0]` records the empty face and is ignored by
/// [`RVector::euler`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RVector {
    pub r: Vec<u64>,
}

impl RVector {
    pub fn euler(&self) -> i64 {
        self.r
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c as i64 } else { -(c as i64) })
            .sum()
    }
}

fn sign_odd_positive(level: usize) -> i64 {
    if level % 2 == 1 {
        1
    } else {
        -1
    }
}

/// χ contribution of one TRUE orbit.
pub fn orbit_euler_term(table: &OrbitTable, o: usize) -> i64 {
    let k = table.level_of(o);
    if k == 0 {
        0
    } else {
        sign_odd_positive(k) * table.size(o) as i64
    }
}

/// χ(Link(Δ, x_v)) contribution of one TRUE orbit: its members containing
/// `v` become faces of size `k - 1`.
pub fn orbit_link_term(table: &OrbitTable, o: usize, v: usize) -> i64 {
    let k = table.level_of(o);
    if k < 2 {
        0
    } else {
        -sign_odd_positive(k) * table.containing(o, v) as i64
    }
}

/// Sum of [`orbit_euler_term`] over TRUE orbits, ignoring FREE ones.
pub fn partial_euler(table: &OrbitTable, a: &TypeAssignment) -> i64 {
    a.t.ones().map(|o| orbit_euler_term(table, o)).sum()
}

pub fn partial_link_euler(table: &OrbitTable, a: &TypeAssignment, v: usize) -> i64 {
    a.t.ones().map(|o| orbit_link_term(table, o, v)).sum()
}

pub fn r_vector(table: &OrbitTable, a: &TypeAssignment) -> Result<RVector, ComplexError> {
    a.require_full(table)?;
    let mut r = vec![0u64; table.degree() + 1];
    for o in a.t.ones() {
        r[table.level_of(o)] += table.size(o);
    }
    Ok(RVector { r })
}

pub fn euler(table: &OrbitTable, a: &TypeAssignment) -> Result<i64, ComplexError> {
    a.require_full(table)?;
    Ok(partial_euler(table, a))
}

/// χ(Link(Δ, x_v)) from per-orbit containing counts, without building the
/// link.
pub fn link_euler_fast(
    table: &OrbitTable,
    a: &TypeAssignment,
    v: usize,
) -> Result<i64, ComplexError> {
    check_vertex(table, v)?;
    a.require_full(table)?;
    Ok(partial_link_euler(table, a, v))
}

fn check_vertex(table: &OrbitTable, v: usize) -> Result<(), ComplexError> {
    if v >= table.degree() {
        return Err(ComplexError::BadVertex {
            vertex: v + 1,
            degree: table.degree(),
        });
    }
    Ok(())
}

/// A family of subsets listed face by face.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitComplex {
    pub degree: usize,
    /// Sorted; includes the empty face when present.
    pub faces: Vec<SubsetMask>,
}

impl ExplicitComplex {
    pub fn new(degree: usize, mut faces: Vec<SubsetMask>) -> Self {
        faces.sort_unstable();
        faces.dedup();
        Self { degree, faces }
    }

    pub fn contains(&self, m: SubsetMask) -> bool {
        self.faces.binary_search(&m).is_ok()
    }

    pub fn r_vector(&self) -> RVector {
        let mut r = vec![0u64; self.degree + 1];
        for &m in &self.faces {
            r[m.count_ones() as usize] += 1;
        }
        RVector { r }
    }

    pub fn euler(&self) -> i64 {
        self.faces
            .iter()
            .filter(|m| **m != 0)
            .map(|m| sign_odd_positive(m.count_ones() as usize))
            .sum()
    }

    pub fn is_downward_closed(&self) -> bool {
        self.faces.iter().all(|&m| {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest &= rest - 1;
                if !self.contains(m & !bit) {
                    return false;
                }
            }
            true
        })
    }
}

/// Every member of every TRUE orbit.
pub fn explicit(table: &OrbitTable, a: &TypeAssignment) -> ExplicitComplex {
    let faces =
        a.t.ones()
            .flat_map(|o| table.members(o).iter().copied())
            .collect();
    ExplicitComplex::new(table.degree(), faces)
}

/// `{t \ {v} : v ∈ t ∈ Δ}`.
pub fn link(
    table: &OrbitTable,
    a: &TypeAssignment,
    v: usize,
) -> Result<ExplicitComplex, ComplexError> {
    check_vertex(table, v)?;
    a.require_full(table)?;
    let bit = 1 << v;
    let faces = explicit(table, a)
        .faces
        .into_iter()
        .filter(|m| m & bit != 0)
        .map(|m| m & !bit)
        .collect();
    Ok(ExplicitComplex::new(table.degree(), faces))
}

/// `{t ∈ Δ : v ∉ t}`.
pub fn deletion(
    table: &OrbitTable,
    a: &TypeAssignment,
    v: usize,
) -> Result<ExplicitComplex, ComplexError> {
    check_vertex(table, v)?;
    a.require_full(table)?;
    let bit = 1 << v;
    let faces = explicit(table, a)
        .faces
        .into_iter()
        .filter(|m| m & bit == 0)
        .collect();
    Ok(ExplicitComplex::new(table.degree(), faces))
}

/// Orbits of a subgroup on the variables, as masks.
pub fn blocks_of(sub: &PermGroup) -> Vec<SubsetMask> {
    sub.point_orbits()
        .iter()
        .map(|b| b.iter().fold(0, |m, &p| m | 1 << p))
        .collect()
}

/// For every nonempty set `S` of blocks (as a bitmask over block indices),
/// the orbit of `∪S`.
pub fn block_unions(table: &OrbitTable, blocks: &[SubsetMask]) -> Vec<(u32, usize)> {
    (1u32..1 << blocks.len())
        .map(|s| {
            let union = blocks
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .fold(0, |m, (_, b)| m | b);
            (s, table.orbit_of(union))
        })
        .collect()
}

/// Δ^H over the blocks of a subgroup `H`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPointComplex {
    /// Blocks as sorted 1-based point lists.
    pub blocks: Vec<Vec<usize>>,
    /// Nonempty faces as bitmasks over block indices, ordered by size and
    /// then value.
    pub faces: Vec<u32>,
    pub euler: i64,
}

impl FixedPointComplex {
    /// Face counts for sizes `1..=blocks`.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.blocks.len()];
        for s in &self.faces {
            c[s.count_ones() as usize - 1] += 1;
        }
        c
    }

    pub fn is_downward_closed(&self) -> bool {
        self.faces.iter().all(|&s| {
            (0..self.blocks.len()).all(|b| {
                let t = s & !(1 << b);
                s >> b & 1 == 0 || t == 0 || self.faces.contains(&t)
            })
        })
    }

    /// Faces as lists of block indices.
    pub fn face_lists(&self) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .map(|s| (0..32).filter(|b| s >> b & 1 == 1).collect())
            .collect()
    }
}

/// Builds Δ^H from the block unions that lie in TRUE orbits.
pub fn fixed_point_complex(
    table: &OrbitTable,
    a: &TypeAssignment,
    sub: &PermGroup,
) -> Result<FixedPointComplex, ComplexError> {
    if sub.degree() != table.degree() {
        return Err(ComplexError::DegreeMismatch {
            expected: table.degree(),
            found: sub.degree(),
        });
    }
    let blocks = blocks_of(sub);
    let mut faces = Vec::new();
    for (s, o) in block_unions(table, &blocks) {
        match a.state(o) {
            OrbitState::True => faces.push(s),
            OrbitState::False => {}
            OrbitState::Free => {
                return Err(ComplexError::IndeterminateFace {
                    blocks: (0..blocks.len())
                        .filter(|b| s >> b & 1 == 1)
                        .map(|b| b + 1)
                        .collect(),
                    orbit: table.id(o),
                })
            }
        }
    }
    faces.sort_by_key(|s| (s.count_ones(), *s));
    let euler = faces
        .iter()
        .map(|s| sign_odd_positive(s.count_ones() as usize))
        .sum();
    Ok(FixedPointComplex {
        blocks: sub
            .point_orbits()
            .into_iter()
            .map(|b| b.into_iter().map(|p| p + 1).collect())
            .collect(),
        faces,
        euler,
    })
}

/// No TRUE orbit has a FALSE orbit below it and no FALSE orbit has a TRUE
/// orbit above it.
pub fn assert_monotone(poset: &OrbitPoset, a: &TypeAssignment) -> bool {
    if a.t.intersection(&a.f).next().is_some() {
        return false;
    }
    a.t.ones().all(|o| poset.lower(o).is_disjoint(&a.f))
        && a.f.ones().all(|o| poset.upper(o).is_disjoint(&a.t))
}
