use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::{PermError, Permutation};

/// Default bound on the number of elements materialized by [`PermGroup::generate`].
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group closure exceeded the cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("element {0} is not in the group")]
    NotInGroup(String),
}

/// A finitely generated permutation group with its full element list.
///
/// `elements[0]` is always the identity; the remaining elements appear in
/// breadth-first order of word length over the generators, which makes every
/// element-indexed scan deterministic.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
}

impl std::fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("generators", &self.generators)
            .field("order", &self.order())
            .finish()
    }
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        Self::generate(degree, Vec::new(), 1).expect("trivial group fits any cap")
    }

    /// Breadth-first closure of `generators` under right multiplication.
    pub fn generate(
        degree: usize,
        generators: Vec<Permutation>,
        cap: usize,
    ) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                }
                .into());
            }
        }
        let id = Permutation::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &generators {
                let next = elements[i].then(g);
                if !index.contains_key(&next) {
                    if elements.len() >= cap {
                        return Err(GroupError::CapExceeded { cap });
                    }
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        Ok(Self {
            degree,
            generators,
            elements,
            index,
        })
    }

    /// Parses cycle-notation generators and closes them.
    pub fn from_cycle_strings<S: AsRef<str>>(
        degree: usize,
        generators: &[S],
        cap: usize,
    ) -> Result<Self, GroupError> {
        let gens = generators
            .iter()
            .map(|s| Permutation::parse_cycles(s.as_ref(), degree))
            .collect::<Result<Vec<_>, _>>()?;
        Self::generate(degree, gens, cap)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains_key(p)
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Orbits on points, 0-based, each sorted, ordered by smallest point.
    pub fn point_orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut orbits = Vec::new();
        for start in 0..self.degree {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut k = 0;
            while k < orbit.len() {
                let p = orbit[k];
                for g in &self.generators {
                    let q = g.apply(p);
                    if !seen[q] {
                        seen[q] = true;
                        orbit.push(q);
                    }
                }
                k += 1;
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    pub fn is_transitive(&self) -> bool {
        self.point_orbits().len() == 1
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order();
        self.elements.iter().any(|g| g.order() == n)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.generators.iter().all(|g| other.contains(g))
    }

    /// Subgroup generated by elements that must already lie in `self`.
    pub fn subgroup(&self, generators: Vec<Permutation>) -> Result<PermGroup, GroupError> {
        if let Some(bad) = generators.iter().find(|g| !self.contains(g)) {
            return Err(GroupError::NotInGroup(bad.to_string()));
        }
        PermGroup::generate(self.degree, generators, self.elements.len())
    }

    /// True when `self` is a normal subgroup of `parent`.
    pub fn is_normal_in(&self, parent: &PermGroup) -> bool {
        if !self.is_subgroup_of(parent) {
            return false;
        }
        parent.generators.iter().all(|g| {
            let gi = g.inverse();
            self.generators
                .iter()
                .all(|h| self.contains(&gi.then(h).then(g)))
        })
    }

    /// Smallest normal subgroup of `self` containing `seeds`.
    pub fn normal_closure(&self, seeds: &[Permutation]) -> Result<PermGroup, GroupError> {
        let mut gens: Vec<Permutation> = seeds.to_vec();
        loop {
            let sub = self.subgroup(gens.clone())?;
            let mut grew = false;
            for g in &self.generators {
                let gi = g.inverse();
                for h in sub.generators.clone() {
                    let c = gi.then(&h).then(g);
                    if !sub.contains(&c) && !gens.contains(&c) {
                        gens.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                return Ok(sub);
            }
        }
    }

    /// Conjugacy classes as element-index lists, in order of first member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut class_of = vec![usize::MAX; self.elements.len()];
        let inverses: Vec<Permutation> = self.generators.iter().map(|g| g.inverse()).collect();
        let mut classes = Vec::new();
        for start in 0..self.elements.len() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            class_of[start] = id;
            let mut class = vec![start];
            let mut k = 0;
            while k < class.len() {
                let x = &self.elements[class[k]];
                for (g, gi) in self.generators.iter().zip(&inverses) {
                    let j = self.index[&gi.then(x).then(g)];
                    if class_of[j] == usize::MAX {
                        class_of[j] = id;
                        class.push(j);
                    }
                }
                k += 1;
            }
            class.sort_unstable();
            classes.push(class);
        }
        classes
    }

    /// Coset table of `self / normal`; `normal` must be a normal subgroup.
    pub fn quotient(&self, normal: &PermGroup) -> Quotient {
        let mut coset_of = vec![usize::MAX; self.elements.len()];
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        for (i, g) in self.elements.iter().enumerate() {
            if coset_of[i] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = normal
                .elements
                .iter()
                .map(|n| self.index[&g.then(n)])
                .collect();
            members.sort_unstable();
            for &m in &members {
                coset_of[m] = cosets.len();
            }
            cosets.push(members);
        }
        // Coset multiplication through representatives; well defined because
        // `normal` is normal.
        let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|&a| {
                reps.iter()
                    .map(|&b| coset_of[self.index[&self.elements[a].then(&self.elements[b])]])
                    .collect()
            })
            .collect();
        Quotient {
            cosets,
            coset_of,
            table,
        }
    }
}

/// A materialized quotient group: cosets as sorted element-index sets and
/// their multiplication table. Coset 0 contains the identity.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub cosets: Vec<Vec<usize>>,
    pub coset_of: Vec<usize>,
    table: Vec<Vec<usize>>,
}

impl Quotient {
    pub fn order(&self) -> usize {
        self.cosets.len()
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn element_order(&self, coset: usize) -> usize {
        let mut k = 1;
        let mut x = coset;
        while x != 0 {
            x = self.multiply(x, coset);
            k += 1;
        }
        k
    }

    /// A coset whose order equals the quotient order, if any.
    pub fn cyclic_generator(&self) -> Option<usize> {
        (0..self.order()).find(|&c| self.element_order(c) == self.order())
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic_generator().is_some()
    }
}
