//! Orbits of variable subsets under a permutation group and the inclusion
//! order between them.
//!
//! Subsets of `{x1..xn}` are bitmasks with `x1` as the least significant bit.
//! Orbits are numbered globally in (level, index) order; the index within a
//! level is the rank of the orbit's smallest member among the smallest
//! members of all orbits of that level.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::perm::{PermGroup, Permutation};

pub type SubsetMask = u32;

/// Largest degree for which the full mask table is materialized.
pub const MAX_ORBIT_DEGREE: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("malformed orbit id {0:?}; expected \"level.index\"")]
    BadId(String),
    #[error("no orbit {0}")]
    UnknownOrbit(OrbitId),
}

/// `level.index`, e.g. `6.24`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitId {
    pub level: usize,
    pub index: usize,
}

impl fmt::Display for OrbitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.level, self.index)
    }
}

impl FromStr for OrbitId {
    type Err = OrbitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OrbitError::BadId(s.to_string());
        let (a, b) = s.trim().split_once('.').ok_or_else(bad)?;
        Ok(OrbitId {
            level: a.parse().map_err(|_| bad())?,
            index: b.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for OrbitId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrbitId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Image of a subset under `sigma`: bit `σ(i)` is set iff bit `i` is.
pub fn act(sigma: &Permutation, m: SubsetMask) -> SubsetMask {
    let mut out = 0;
    let mut rest = m;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= 1 << sigma.apply(i);
    }
    out
}

/// Mask from 1-based points.
pub fn mask_of(points: &[usize]) -> SubsetMask {
    points.iter().fold(0, |m, &p| m | 1 << (p - 1))
}

/// 1-based points of a mask, ascending.
pub fn points_of(m: SubsetMask) -> Vec<usize> {
    (0..32).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect()
}

#[derive(Debug, Clone)]
pub struct OrbitInfo {
    pub id: OrbitId,
    pub size: u64,
    pub representative: SubsetMask,
    /// Members containing each variable, indexed by 0-based point.
    pub containing: Vec<u64>,
}

/// Every orbit of every level, with a total membership map.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    degree: usize,
    group_order: u64,
    transitive: bool,
    orbit_of: Vec<u32>,
    level_start: Vec<usize>,
    info: Vec<OrbitInfo>,
    members: Vec<Vec<SubsetMask>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub orbit: OrbitId,
    pub level: usize,
    pub index: usize,
    pub size: u64,
    pub representative: Vec<usize>,
    pub containing_x1: u64,
}

impl OrbitTable {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    /// Number of orbits over all levels, including the empty set and the
    /// full set.
    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn is_empty(&self) -> bool {
        self.info.is_empty()
    }

    /// Orbits at levels `1..=n`.
    pub fn nonempty_count(&self) -> usize {
        self.info.len() - 1
    }

    pub fn level_count(&self, level: usize) -> usize {
        self.level_start[level + 1] - self.level_start[level]
    }

    /// Global indices of the orbits at `level`.
    pub fn level(&self, level: usize) -> std::ops::Range<usize> {
        self.level_start[level]..self.level_start[level + 1]
    }

    pub fn info(&self, o: usize) -> &OrbitInfo {
        &self.info[o]
    }

    pub fn id(&self, o: usize) -> OrbitId {
        self.info[o].id
    }

    pub fn level_of(&self, o: usize) -> usize {
        self.info[o].id.level
    }

    pub fn size(&self, o: usize) -> u64 {
        self.info[o].size
    }

    pub fn containing_x1(&self, o: usize) -> u64 {
        self.info[o].containing[0]
    }

    pub fn containing(&self, o: usize, vertex: usize) -> u64 {
        self.info[o].containing[vertex]
    }

    pub fn representative(&self, o: usize) -> SubsetMask {
        self.info[o].representative
    }

    pub fn members(&self, o: usize) -> &[SubsetMask] {
        &self.members[o]
    }

    /// Global index of the orbit containing `m`.
    pub fn orbit_of(&self, m: SubsetMask) -> usize {
        self.orbit_of[m as usize] as usize
    }

    pub fn orbit_id_of(&self, m: SubsetMask) -> OrbitId {
        self.id(self.orbit_of(m))
    }

    pub fn global(&self, id: OrbitId) -> Result<usize, OrbitError> {
        if id.level > self.degree || id.index >= self.level_count(id.level) {
            return Err(OrbitError::UnknownOrbit(id));
        }
        Ok(self.level_start[id.level] + id.index)
    }

    pub fn empty_orbit(&self) -> usize {
        0
    }

    pub fn full_orbit(&self) -> usize {
        self.info.len() - 1
    }

    pub fn census(&self) -> Vec<CensusEntry> {
        self.info
            .iter()
            .map(|i| CensusEntry {
                orbit: i.id,
                level: i.id.level,
                index: i.id.index,
                size: i.size,
                representative: points_of(i.representative),
                containing_x1: i.containing[0],
            })
            .collect()
    }

    /// Orbit counts per level `0..=n`.
    pub fn level_counts(&self) -> Vec<usize> {
        (0..=self.degree).map(|k| self.level_count(k)).collect()
    }
}

/// Orbits of all subsets of `{x1..xn}` under `g`.
pub fn compute_orbits(g: &PermGroup) -> Result<OrbitTable, OrbitError> {
    let n = g.degree();
    if n > MAX_ORBIT_DEGREE {
        return Err(OrbitError::DegreeTooLarge {
            degree: n,
            max: MAX_ORBIT_DEGREE,
        });
    }
    let transitive = g.is_transitive();
    if !transitive {
        log::warn!("computing subset orbits of an intransitive group");
    }
    let total = 1usize << n;
    let mut provisional = vec![u32::MAX; total];
    let mut by_level: Vec<Vec<Vec<SubsetMask>>> = vec![Vec::new(); n + 1];
    for start in 0..total as SubsetMask {
        if provisional[start as usize] != u32::MAX {
            continue;
        }
        let level = start.count_ones() as usize;
        let tag = by_level[level].len() as u32;
        provisional[start as usize] = tag;
        let mut orbit = vec![start];
        let mut k = 0;
        while k < orbit.len() {
            let m = orbit[k];
            for s in g.generators() {
                let img = act(s, m);
                if provisional[img as usize] == u32::MAX {
                    provisional[img as usize] = tag;
                    orbit.push(img);
                }
            }
            k += 1;
        }
        orbit.sort_unstable();
        by_level[level].push(orbit);
    }
    // Masks are scanned in increasing order, so discovery order within a
    // level already ranks orbits by their smallest member.
    let mut level_start = vec![0usize; n + 2];
    for k in 0..=n {
        level_start[k + 1] = level_start[k] + by_level[k].len();
    }
    let mut orbit_of = vec![0u32; total];
    let mut info = Vec::with_capacity(level_start[n + 1]);
    let mut members = Vec::with_capacity(level_start[n + 1]);
    for (level, orbits) in by_level.into_iter().enumerate() {
        for (index, orbit) in orbits.into_iter().enumerate() {
            let global = level_start[level] + index;
            let mut containing = vec![0u64; n];
            for &m in &orbit {
                orbit_of[m as usize] = global as u32;
                for (v, c) in containing.iter_mut().enumerate() {
                    *c += u64::from(m >> v & 1);
                }
            }
            info.push(OrbitInfo {
                id: OrbitId { level, index },
                size: orbit.len() as u64,
                representative: orbit[0],
                containing,
            });
            members.push(orbit);
        }
    }
    Ok(OrbitTable {
        degree: n,
        group_order: g.order(),
        transitive,
        orbit_of,
        level_start,
        info,
        members,
    })
}

/// The inclusion order between orbits, with both closures materialized.
#[derive(Debug, Clone)]
pub struct OrbitPoset {
    covers: Vec<Vec<usize>>,
    lower: Vec<FixedBitSet>,
    upper: Vec<FixedBitSet>,
}

impl OrbitPoset {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Orbits one level down that lie below `o`.
    pub fn covers(&self, o: usize) -> &[usize] {
        &self.covers[o]
    }

    /// `o` together with every orbit below it.
    pub fn lower(&self, o: usize) -> &FixedBitSet {
        &self.lower[o]
    }

    /// `o` together with every orbit above it.
    pub fn upper(&self, o: usize) -> &FixedBitSet {
        &self.upper[o]
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.lower[b].contains(a)
    }
}

/// Covers come from the one-step sub-masks of each representative; the
/// closures are then accumulated level by level. The empty orbit is kept
/// outside the order: it is neither below nor above any other orbit.
pub fn build_poset(t: &OrbitTable) -> OrbitPoset {
    let m = t.len();
    let mut covers = vec![Vec::new(); m];
    for (o, c) in covers.iter_mut().enumerate() {
        let rep = t.representative(o);
        if rep.count_ones() < 2 {
            continue;
        }
        let mut rest = rep;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            c.push(t.orbit_of(rep & !bit));
        }
        c.sort_unstable();
        c.dedup();
    }
    let mut lower: Vec<FixedBitSet> = Vec::with_capacity(m);
    for (o, c) in covers.iter().enumerate() {
        let mut set = FixedBitSet::with_capacity(m);
        set.insert(o);
        for &x in c {
            set.union_with(&lower[x]);
        }
        lower.push(set);
    }
    let mut upper = vec![FixedBitSet::with_capacity(m); m];
    for (b, l) in lower.iter().enumerate() {
        for a in l.ones() {
            upper[a].insert(b);
        }
    }
    OrbitPoset {
        covers,
        lower,
        upper,
    }
}

/// Cover edges `(lower, upper)` in global indices.
pub fn cover_edges(p: &OrbitPoset) -> Vec<(usize, usize)> {
    (0..p.len())
        .flat_map(|b| p.covers(b).iter().map(move |&a| (a, b)))
        .collect()
}
