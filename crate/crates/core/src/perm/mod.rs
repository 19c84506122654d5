//! Permutations of `{1..n}` written in cycle notation, finitely generated
//! permutation groups, and the group-theoretic classifications used to decide
//! which fixed-point condition applies to a group.
//!
//! Points are 1-based at every external boundary (parsing, display, JSON) and
//! 0-based internally.

mod classify;
mod group;

pub use classify::{
    classify, find_psi_p_witness, verify_psi_p, verify_psi_pq, verify_sylow_lemma, ClassKind,
    Classification, ClassifyOptions, OliverWitness, WitnessSource,
};
pub use group::{GroupError, PermGroup, Quotient, DEFAULT_ELEMENT_CAP};

use std::fmt;

use thiserror::Error;

/// Largest degree a [`Permutation`] can carry (images are stored as bytes).
pub const MAX_DEGREE: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("point {point} appears more than once in `{text}`")]
    RepeatedPoint { point: usize, text: String },
    #[error("point {point} is outside 1..={degree} in `{text}`")]
    PointOutOfRange {
        point: usize,
        degree: usize,
        text: String,
    },
    #[error("malformed cycle notation `{text}`: {reason}")]
    Malformed { text: String, reason: String },
    #[error("degree {0} is not supported (1..={MAX_DEGREE})")]
    BadDegree(usize),
    #[error("image array is not a bijection")]
    NotBijection,
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
}

/// A bijection on `{0..n}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Self {
            images: (0..degree).map(|i| i as u8).collect(),
        }
    }

    /// Builds a permutation from 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        if n == 0 || n > MAX_DEGREE {
            return Err(PermError::BadDegree(n));
        }
        let mut seen = vec![false; n];
        for &j in &images {
            if j >= n || seen[j] {
                return Err(PermError::NotBijection);
            }
            seen[j] = true;
        }
        Ok(Self {
            images: images.into_iter().map(|j| j as u8).collect(),
        })
    }

    /// Parses a product of disjoint cycles over points `1..=degree`, e.g.
    /// `"(1,12)(2,11)(13,14)"`. Whitespace is ignored; the empty string and
    /// `"()"` denote the identity.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Self, PermError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(PermError::BadDegree(degree));
        }
        let malformed = |reason: &str| PermError::Malformed {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut images: Vec<usize> = (0..degree).collect();
        let mut used = vec![false; degree];
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| malformed("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| malformed("unclosed `(`"))?;
            let inner = &body[..close];
            rest = &body[close + 1..];
            if inner.contains('(') {
                return Err(malformed("nested `(`"));
            }
            if inner.is_empty() {
                continue;
            }
            let mut cycle = Vec::new();
            for tok in inner.split(',') {
                let point: usize = tok
                    .parse()
                    .map_err(|_| malformed(&format!("`{tok}` is not a point")))?;
                if point == 0 || point > degree {
                    return Err(PermError::PointOutOfRange {
                        point,
                        degree,
                        text: text.to_string(),
                    });
                }
                if used[point - 1] {
                    return Err(PermError::RepeatedPoint {
                        point,
                        text: text.to_string(),
                    });
                }
                used[point - 1] = true;
                cycle.push(point - 1);
            }
            for (k, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&j| j as usize)
    }

    /// `self` followed by `other`: `i -> other(self(i))`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: self
                .images
                .iter()
                .map(|&j| other.images[j as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &j)| i == j as usize)
    }

    pub fn pow(&self, mut k: u64) -> Permutation {
        let mut acc = Permutation::identity(self.degree());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        acc
    }

    /// Cycles as 0-based point lists, each starting at its smallest point,
    /// fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.apply(j);
            }
            out.push(cyc);
        }
        out
    }

    /// Sorted cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i == j as usize)
            .count()
    }

    /// Order as the lcm of cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| lcm(acc, c.len() as u64))
    }

    /// 1-based cycle notation without fixed points; `()` for the identity.
    pub fn to_cycle_string(&self) -> String {
        let mut s = String::new();
        for cyc in self.cycles().into_iter().filter(|c| c.len() > 1) {
            s.push('(');
            let pts: Vec<String> = cyc.iter().map(|p| (p + 1).to_string()).collect();
            s.push_str(&pts.join(","));
            s.push(')');
        }
        if s.is_empty() {
            s.push_str("()");
        }
        s
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{}", self.to_cycle_string())
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// True when `n` is `p^k` for some `k >= 0`.
pub fn is_power_of(n: u64, p: u64) -> bool {
    let mut n = n;
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}
