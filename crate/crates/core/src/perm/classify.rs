use serde::{Serialize, Serializer};

use super::group::GroupError;
use super::{factorize, is_power_of, is_prime, PermGroup, Permutation};

/// Witness that a group lies in Ψ_p (`q` absent) or Ψ_p^q (`q` and
/// `h_generators` present).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OliverWitness {
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub p_generators: Vec<Permutation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_generators: Option<Vec<Permutation>>,
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_cycle_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    Cyclic,
    PsiP { p: u64 },
    PsiPQ { p: u64, q: u64 },
    SylowLemma { p: u64 },
    Unresolved,
}

impl ClassKind {
    pub fn method_tag(&self) -> &'static str {
        match self {
            ClassKind::Cyclic => "cyclic",
            ClassKind::PsiP { .. } => "psi_p",
            ClassKind::PsiPQ { .. } => "psi_pq",
            ClassKind::SylowLemma { .. } => "sylow_lemma",
            ClassKind::Unresolved => "unresolved",
        }
    }
}

impl std::fmt::Display for ClassKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassKind::Cyclic => write!(f, "cyclic"),
            ClassKind::PsiP { p } => write!(f, "Psi_{p}"),
            ClassKind::PsiPQ { p, q } => write!(f, "Psi_{p}^{q}"),
            ClassKind::SylowLemma { p } => write!(f, "Sylow lemma (p={p})"),
            ClassKind::Unresolved => write!(f, "unresolved"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Structural,
    Bundled,
    Search,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub kind: ClassKind,
    pub source: WitnessSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<OliverWitness>,
    /// Generator of a cyclic group, or the p-element found by the Sylow test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<Permutation>,
    /// Set when a bundled witness was supplied but failed to verify.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundled_witness_rejected: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub sylow: bool,
    pub search: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            sylow: true,
            search: true,
        }
    }
}

/// Checks `G ∈ Ψ_p` with `P = ⟨w.p_generators⟩`: P normal, of p-power order,
/// and `G/P` cyclic.
pub fn verify_psi_p(g: &PermGroup, w: &OliverWitness) -> Result<bool, GroupError> {
    let p_sub = g.subgroup(w.p_generators.clone())?;
    if !is_power_of(p_sub.order(), w.p) || !p_sub.is_normal_in(g) {
        return Ok(false);
    }
    Ok(g.quotient(&p_sub).is_cyclic())
}

/// Checks `G ∈ Ψ_p^q`: `P ◁ H ◁ G`, `|P|` a p-power, `|G/H|` a q-power and
/// `H/P` cyclic.
pub fn verify_psi_pq(g: &PermGroup, w: &OliverWitness) -> Result<bool, GroupError> {
    let (Some(q), Some(h_gens)) = (w.q, w.h_generators.as_ref()) else {
        return Ok(false);
    };
    let p_sub = g.subgroup(w.p_generators.clone())?;
    let h_sub = g.subgroup(h_gens.clone())?;
    if let Some(bad) = p_sub.generators().iter().find(|x| !h_sub.contains(x)) {
        return Err(GroupError::NotInGroup(format!(
            "{bad} (P is not contained in H)"
        )));
    }
    if !is_power_of(p_sub.order(), w.p) || !is_power_of(g.order() / h_sub.order(), q) {
        return Ok(false);
    }
    if !p_sub.is_normal_in(&h_sub) || !h_sub.is_normal_in(g) {
        return Ok(false);
    }
    Ok(h_sub.quotient(&p_sub).is_cyclic())
}

/// For a transitive group of degree `p + 1` with `p` prime exactly dividing
/// `|G|`, returns an element of order `p` fixing exactly one point.
pub fn verify_sylow_lemma(g: &PermGroup) -> Option<Permutation> {
    let n = g.degree() as u64;
    if n < 2 || !g.is_transitive() {
        return None;
    }
    let p = n - 1;
    let order = g.order();
    if !is_prime(p) || !order.is_multiple_of(p) || order.is_multiple_of(p * p) {
        return None;
    }
    g.elements()
        .iter()
        .find(|x| x.order() == p && x.fixed_points() == 1)
        .cloned()
}

/// Tries, in order: cyclicity, the bundled witness, the Sylow-lemma test and
/// a bounded witness search. The search is sound but not complete.
pub fn classify(
    g: &PermGroup,
    bundled: Option<&OliverWitness>,
    opts: ClassifyOptions,
) -> Classification {
    let mut out = Classification {
        kind: ClassKind::Unresolved,
        source: WitnessSource::None,
        witness: None,
        element: None,
        bundled_witness_rejected: None,
    };
    if let Some(x) = g.elements().iter().find(|x| x.order() == g.order()) {
        out.kind = ClassKind::Cyclic;
        out.source = WitnessSource::Structural;
        out.element = Some(x.clone());
        return out;
    }
    if let Some(w) = bundled {
        let verdict = match w.q {
            None => verify_psi_p(g, w),
            Some(_) => verify_psi_pq(g, w),
        };
        match verdict {
            Ok(true) => {
                out.kind = match w.q {
                    None => ClassKind::PsiP { p: w.p },
                    Some(q) => ClassKind::PsiPQ { p: w.p, q },
                };
                out.source = WitnessSource::Bundled;
                out.witness = Some(w.clone());
                return out;
            }
            Ok(false) => out.bundled_witness_rejected = Some("witness does not verify".into()),
            Err(e) => out.bundled_witness_rejected = Some(e.to_string()),
        }
    }
    if opts.sylow {
        if let Some(x) = verify_sylow_lemma(g) {
            out.kind = ClassKind::SylowLemma {
                p: g.degree() as u64 - 1,
            };
            out.source = WitnessSource::Structural;
            out.element = Some(x);
            return out;
        }
    }
    if opts.search {
        if let Some(w) = search_witness(g) {
            out.kind = match w.q {
                None => ClassKind::PsiP { p: w.p },
                Some(q) => ClassKind::PsiPQ { p: w.p, q },
            };
            out.source = WitnessSource::Search;
            out.witness = Some(w);
        }
    }
    out
}

fn search_witness(g: &PermGroup) -> Option<OliverWitness> {
    for (p, _) in factorize(g.order()) {
        if let Some(w) = find_psi_p_witness(g, p) {
            return Some(w);
        }
    }
    for (q, _) in factorize(g.order()) {
        let core = q_residual(g, q);
        let mut candidates = vec![core.clone()];
        let mut seen_orders = vec![core.order()];
        for x in g.elements() {
            if core.contains(x) {
                continue;
            }
            let mut seeds = core.generators().to_vec();
            seeds.push(x.clone());
            if let Ok(h) = g.normal_closure(&seeds) {
                if h.order() < g.order() && !seen_orders.contains(&h.order()) {
                    seen_orders.push(h.order());
                    candidates.push(h);
                }
            }
        }
        for h in candidates {
            if !is_power_of(g.order() / h.order(), q) {
                continue;
            }
            for (p, _) in factorize(h.order()) {
                if let Some(inner) = find_psi_p_witness(&h, p) {
                    return Some(OliverWitness {
                        p,
                        q: Some(q),
                        p_generators: inner.p_generators,
                        h_generators: Some(minimal_generators(&h)),
                    });
                }
            }
        }
    }
    None
}

/// Ψ_p holds iff `G / O_p(G)` is cyclic, where `O_p(G)` is the largest
/// normal p-subgroup.
pub fn find_psi_p_witness(g: &PermGroup, p: u64) -> Option<OliverWitness> {
    let op = largest_normal_p_subgroup(g, p);
    if !g.quotient(&op).is_cyclic() {
        return None;
    }
    Some(OliverWitness {
        p,
        q: None,
        p_generators: minimal_generators(&op),
        h_generators: None,
    })
}

/// Join of the normal closures of p-elements whose closure is a p-group;
/// one closure per conjugacy class.
fn largest_normal_p_subgroup(g: &PermGroup, p: u64) -> PermGroup {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut current = PermGroup::trivial(g.degree());
    for class in g.conjugacy_classes() {
        let x = &g.elements()[class[0]];
        let ord = x.order();
        if ord == 1 || !is_power_of(ord, p) || current.contains(x) {
            continue;
        }
        let Ok(nc) = g.normal_closure(std::slice::from_ref(x)) else {
            continue;
        };
        if !is_power_of(nc.order(), p) {
            continue;
        }
        gens.extend(nc.generators().iter().cloned());
        current = g
            .subgroup(gens.clone())
            .expect("normal closures lie inside the group");
    }
    // Joins of normal p-subgroups can only stay p-groups; checked anyway.
    debug_assert!(is_power_of(current.order(), p));
    current
}

/// `O^q(G)`: the subgroup generated by all elements of order prime to `q`.
fn q_residual(g: &PermGroup, q: u64) -> PermGroup {
    let gens: Vec<Permutation> = g
        .conjugacy_classes()
        .iter()
        .flat_map(|c| c.iter().map(|&i| g.elements()[i].clone()))
        .filter(|x| x.order() % q != 0 && !x.is_identity())
        .collect();
    let small = greedy_generators(g, gens);
    g.subgroup(small).expect("elements of g")
}

/// A short generating list for `h`, picked greedily from its elements.
fn minimal_generators(h: &PermGroup) -> Vec<Permutation> {
    greedy_generators(h, h.elements().to_vec())
}

fn greedy_generators(ambient: &PermGroup, pool: Vec<Permutation>) -> Vec<Permutation> {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut current = PermGroup::trivial(ambient.degree());
    for x in pool {
        if current.contains(&x) {
            continue;
        }
        gens.push(x);
        current = ambient
            .subgroup(gens.clone())
            .expect("pool lies in ambient");
    }
    gens
}
