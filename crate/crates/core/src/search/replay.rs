//! Replay of the worked branch of the case analysis against its printed
//! trace.
//!
//! Printed orbit labels are arbitrary, so they are tied to canonical orbits
//! through printed subsets ("anchors"). Comparisons only use labels with a
//! consistent anchor.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::{candidate_complexes, enumerate_cases, Campaign, SearchState, SubgroupCheck};
use crate::complex::{fixed_point_complex, OrbitState};
use crate::data::{expand_labels, Bundle, CaseChoice, DataError, StepRecord};
use crate::orbits::{mask_of, OrbitId};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("step {step}: subgroup {name} is not part of the campaign")]
    UnknownSubgroup { step: usize, name: String },
}

/// An anchor whose canonical orbit disagrees with the majority, or whose
/// size does not match the printed level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnchorConflict {
    pub printed_orbit: OrbitId,
    pub source: String,
    pub points: Vec<usize>,
    pub canonical: OrbitId,
    pub reason: String,
}

/// Printed label to canonical global orbit index.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorMap {
    #[serde(serialize_with = "serialize_map")]
    pub map: BTreeMap<OrbitId, usize>,
    #[serde(skip)]
    pub canonical: BTreeMap<OrbitId, OrbitId>,
    pub conflicts: Vec<AnchorConflict>,
    /// Labels whose votes tied between canonical orbits.
    pub ambiguous: Vec<OrbitId>,
}

fn serialize_map<S: serde::Serializer>(
    m: &BTreeMap<OrbitId, usize>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.keys())
}

impl AnchorMap {
    pub fn get(&self, label: OrbitId) -> Option<usize> {
        self.map.get(&label).copied()
    }

    /// Printed label of a canonical orbit, when it is anchored.
    pub fn label_of(&self, global: usize) -> Option<OrbitId> {
        self.map.iter().find(|(_, &g)| g == global).map(|(l, _)| *l)
    }
}

/// Majority vote over every printed subset with a printed orbit label.
pub fn build_anchor_map(camp: &Campaign, bundle: &Bundle) -> AnchorMap {
    let mut sources: Vec<(OrbitId, String, Vec<usize>)> = bundle
        .appendix
        .anchors
        .iter()
        .map(|a| (a.printed_orbit, a.source.clone(), a.points.clone()))
        .collect();
    for s in &bundle.subgroups {
        for b in &s.printed_orbits {
            sources.push((
                b.printed_orbit,
                format!("{} block {}", s.name, b.label),
                b.points.clone(),
            ));
        }
    }
    let table = &camp.table;
    let mut conflicts = Vec::new();
    let mut votes: BTreeMap<OrbitId, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut valid = Vec::new();
    for (label, source, points) in sources {
        let canonical = table.orbit_of(mask_of(&points));
        if points.len() != label.level {
            conflicts.push(AnchorConflict {
                printed_orbit: label,
                source,
                points,
                canonical: table.id(canonical),
                reason: "subset size differs from printed level".into(),
            });
            continue;
        }
        *votes
            .entry(label)
            .or_default()
            .entry(canonical)
            .or_default() += 1;
        valid.push((label, source, points, canonical));
    }
    let mut map = BTreeMap::new();
    let mut ambiguous = Vec::new();
    for (label, v) in &votes {
        let best = v.values().copied().max().unwrap_or(0);
        let winners: Vec<usize> = v
            .iter()
            .filter(|(_, &n)| n == best)
            .map(|(&o, _)| o)
            .collect();
        if winners.len() == 1 {
            map.insert(*label, winners[0]);
        } else {
            ambiguous.push(*label);
        }
    }
    for (label, source, points, canonical) in valid {
        if map.get(&label).is_some_and(|&o| o != canonical) || ambiguous.contains(&label) {
            conflicts.push(AnchorConflict {
                printed_orbit: label,
                source,
                points,
                canonical: table.id(canonical),
                reason: "disagrees with the majority for this label".into(),
            });
        }
    }
    // Two labels must not share a canonical orbit: the label with more
    // votes keeps it, a tie drops both.
    let mut by_orbit: BTreeMap<usize, Vec<(usize, OrbitId)>> = BTreeMap::new();
    for (l, o) in &map {
        by_orbit.entry(*o).or_default().push((votes[l][o], *l));
    }
    for labels in by_orbit.values_mut().filter(|v| v.len() > 1) {
        labels.sort_by_key(|l| std::cmp::Reverse(l.0));
        let keep_first = labels[0].0 > labels[1].0;
        for &(_, l) in labels.iter().skip(usize::from(keep_first)) {
            map.remove(&l);
            ambiguous.push(l);
        }
    }
    ambiguous.sort();
    ambiguous.dedup();
    let canonical = map.iter().map(|(l, &o)| (*l, table.id(o))).collect();
    AnchorMap {
        map,
        canonical,
        conflicts,
        ambiguous,
    }
}

/// Printed Θ set against the computed assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ThetaComparison {
    pub printed: usize,
    pub checked: usize,
    /// Anchored labels whose computed state is the opposite value.
    pub contradictions: Vec<OrbitId>,
    /// Anchored labels that are still free in the computed state.
    pub still_free: Vec<OrbitId>,
    /// Printed labels without an anchor.
    pub unmapped: Vec<OrbitId>,
    /// Anchored orbits with this computed value that are not printed.
    pub not_printed: Vec<OrbitId>,
}

impl ThetaComparison {
    pub fn consistent(&self) -> bool {
        self.contradictions.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub label: String,
    pub points: Vec<usize>,
    pub orbit: OrbitId,
    pub printed_orbit: Option<OrbitId>,
}

/// Size and x1-count of one governed orbit.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRow {
    pub orbit: OrbitId,
    pub printed_orbit: Option<OrbitId>,
    pub size: u64,
    pub containing_x1: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub subgroup: String,
    pub condition: String,
    pub blocks: Vec<BlockRow>,
    pub governed: Vec<OrbitRow>,
    pub printed_cases: usize,
    /// Block-level complexes meeting the condition.
    pub candidate_complexes: Option<u64>,
    /// Cases that also survive propagation.
    pub propagated_cases: usize,
    pub cases_match: bool,
    pub selected_case: Option<usize>,
    pub selected_faces: Vec<Vec<String>>,
    pub erratum_applied: bool,
    pub chi: i64,
    pub chi_link: i64,
    pub theta_t: ThetaComparison,
    pub theta_f: ThetaComparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualCase {
    pub true_orbits: Vec<OrbitId>,
    pub chi_link: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafTrace {
    pub chi: i64,
    pub printed_chi: i64,
    pub chi_link: i64,
    pub printed_chi_link: i64,
    pub free: Vec<OrbitRow>,
    pub printed_free: Vec<OrbitId>,
    pub chi_one_cases: Vec<ResidualCase>,
    pub printed_chi_one_cases: usize,
    pub chi_ok: bool,
    pub chi_link_ok: bool,
    pub free_count_ok: bool,
    pub case_count_ok: bool,
    pub all_fail_link: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub anchors: AnchorMap,
    pub steps: Vec<TraceStep>,
    pub leaf: Option<LeafTrace>,
    /// Set when a step had no case matching its printed choice.
    pub stopped_at: Option<usize>,
}

fn block_labels(bundle: &Bundle, check: &SubgroupCheck) -> Vec<String> {
    let printed = bundle
        .subgroup(&check.name)
        .map(|s| s.printed_orbits.clone())
        .unwrap_or_default();
    check
        .blocks
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            printed
                .iter()
                .find(|p| mask_of(&p.points) == b)
                .map(|p| p.label.clone())
                .unwrap_or_else(|| format!("#{}", i + 1))
        })
        .collect()
}

fn choice_matches(choice: &CaseChoice, labels: &[String], faces: &[u32], counts: &[usize]) -> bool {
    if let Some(want) = &choice.faces {
        let mut sets = BTreeSet::new();
        for f in want {
            let mut set = 0u32;
            for l in f {
                match labels.iter().position(|x| x == l) {
                    Some(i) => set |= 1 << i,
                    None => return false,
                }
            }
            sets.insert(set);
        }
        return sets == faces.iter().copied().collect();
    }
    if let Some(want) = &choice.face_counts {
        let used = counts.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        return want.as_slice() == &counts[..used];
    }
    false
}

fn compare_theta(
    anchors: &AnchorMap,
    printed: &[OrbitId],
    s: &SearchState,
    want: OrbitState,
) -> ThetaComparison {
    let opposite = match want {
        OrbitState::True => OrbitState::False,
        _ => OrbitState::True,
    };
    let mut c = ThetaComparison {
        printed: printed.len(),
        ..Default::default()
    };
    for &label in printed {
        match anchors.get(label) {
            None => c.unmapped.push(label),
            Some(o) => {
                c.checked += 1;
                let st = s.assignment.state(o);
                if st == opposite {
                    c.contradictions.push(label);
                } else if st == OrbitState::Free {
                    c.still_free.push(label);
                }
            }
        }
    }
    let printed_set: BTreeSet<OrbitId> = printed.iter().copied().collect();
    for (label, &o) in &anchors.map {
        if o != 0 && s.assignment.state(o) == want && !printed_set.contains(label) {
            c.not_printed.push(*label);
        }
    }
    c
}

fn governed_rows(camp: &Campaign, anchors: &AnchorMap, orbits: &[usize]) -> Vec<OrbitRow> {
    orbits
        .iter()
        .map(|&o| OrbitRow {
            orbit: camp.table.id(o),
            printed_orbit: anchors.label_of(o),
            size: camp.table.size(o),
            containing_x1: camp.table.containing_x1(o),
        })
        .collect()
}

fn replay_step(
    camp: &Campaign,
    bundle: &Bundle,
    anchors: &AnchorMap,
    rec: &StepRecord,
    state: &SearchState,
) -> Result<(TraceStep, Option<SearchState>), ReplayError> {
    let check = camp
        .check(&rec.subgroup)
        .ok_or_else(|| ReplayError::UnknownSubgroup {
            step: rec.step,
            name: rec.subgroup.clone(),
        })?;
    let labels = block_labels(bundle, check);
    let candidates = candidate_complexes(state, check);
    let (cases, _) = enumerate_cases(camp, state, check);
    let shapes: Vec<(Vec<u32>, Vec<usize>)> = cases
        .iter()
        .map(|c| {
            let f = fixed_point_complex(&camp.table, &c.assignment, &check.group)
                .expect("every governed orbit is assigned in a case");
            let counts = f.face_counts();
            (f.faces, counts)
        })
        .collect();
    let find = |choice: &CaseChoice| {
        shapes
            .iter()
            .position(|(faces, counts)| choice_matches(choice, &labels, faces, counts))
    };
    let mut erratum_applied = false;
    let mut selected = find(&rec.choice);
    if selected.is_none() {
        if let Some(alt) = &rec.erratum_choice {
            selected = find(alt);
            erratum_applied = selected.is_some();
        }
    }
    let next = selected.map(|i| cases[i].clone());
    let shown = next.as_ref().unwrap_or(state);
    let theta_t = compare_theta(
        anchors,
        &expand_labels(&rec.theta_t)?,
        shown,
        OrbitState::True,
    );
    let theta_f = compare_theta(
        anchors,
        &expand_labels(&rec.theta_f)?,
        shown,
        OrbitState::False,
    );
    let selected_faces = selected
        .map(|i| {
            shapes[i]
                .0
                .iter()
                .map(|s| {
                    (0..labels.len())
                        .filter(|b| s >> b & 1 == 1)
                        .map(|b| labels[b].clone())
                        .collect()
                })
                .collect()
        })
        .unwrap_or_default();
    let blocks = check
        .blocks
        .iter()
        .zip(&labels)
        .map(|(&b, l)| {
            let o = camp.table.orbit_of(b);
            BlockRow {
                label: l.clone(),
                points: crate::orbits::points_of(b),
                orbit: camp.table.id(o),
                printed_orbit: anchors.label_of(o),
            }
        })
        .collect();
    let step = TraceStep {
        step: rec.step,
        subgroup: rec.subgroup.clone(),
        condition: check.condition.to_string(),
        blocks,
        governed: governed_rows(camp, anchors, &check.governed),
        printed_cases: rec.printed_cases,
        candidate_complexes: candidates,
        propagated_cases: cases.len(),
        cases_match: candidates == Some(rec.printed_cases as u64),
        selected_case: selected,
        selected_faces,
        erratum_applied,
        chi: shown.chi,
        chi_link: shown.chi_link,
        theta_t,
        theta_f,
    };
    Ok((step, next))
}

fn replay_leaf(
    camp: &Campaign,
    bundle: &Bundle,
    anchors: &AnchorMap,
    s: &SearchState,
) -> LeafTrace {
    let rec = &bundle.appendix.leaf;
    let free = s.assignment.free_orbits();
    let mut cases = Vec::new();
    residual_cases(camp, s.clone(), &free, 0, &mut cases);
    let chi_one: Vec<ResidualCase> = cases
        .into_iter()
        .filter(|c| c.chi == 1)
        .map(|c| ResidualCase {
            true_orbits: free
                .iter()
                .filter(|&&o| c.assignment.true_set().contains(o))
                .map(|&o| camp.table.id(o))
                .collect(),
            chi_link: c.chi_link,
        })
        .collect();
    LeafTrace {
        chi: s.chi,
        printed_chi: rec.chi,
        chi_link: s.chi_link,
        printed_chi_link: rec.chi_link,
        free: governed_rows(camp, anchors, &free),
        printed_free: rec.free.clone(),
        chi_ok: s.chi == rec.chi,
        chi_link_ok: s.chi_link == rec.chi_link,
        free_count_ok: free.len() == rec.free.len(),
        case_count_ok: chi_one.len() == rec.chi_one_cases.len(),
        all_fail_link: chi_one.iter().all(|c| c.chi_link != 1),
        printed_chi_one_cases: rec.chi_one_cases.len(),
        chi_one_cases: chi_one,
    }
}

fn residual_cases(
    camp: &Campaign,
    s: SearchState,
    free: &[usize],
    i: usize,
    out: &mut Vec<SearchState>,
) {
    if i == free.len() {
        out.push(s);
        return;
    }
    let o = free[i];
    if !s.assignment.is_free(o) {
        residual_cases(camp, s, free, i + 1, out);
        return;
    }
    for value in [true, false] {
        if let Ok(next) = camp.propagate(&s, o, value) {
            residual_cases(camp, next, free, i + 1, out);
        }
    }
}

/// Follows the printed branch step by step, then enumerates the residual
/// free orbits at the leaf.
pub fn replay_appendix(camp: &Campaign, bundle: &Bundle) -> Result<ReplayReport, ReplayError> {
    let anchors = build_anchor_map(camp, bundle);
    let mut state = camp.initial_state();
    let mut steps = Vec::new();
    let mut stopped_at = None;
    for rec in &bundle.appendix.steps {
        let (step, next) = replay_step(camp, bundle, &anchors, rec, &state)?;
        steps.push(step);
        match next {
            Some(n) => state = n,
            None => {
                stopped_at = Some(rec.step);
                break;
            }
        }
    }
    let leaf = stopped_at
        .is_none()
        .then(|| replay_leaf(camp, bundle, &anchors, &state));
    Ok(ReplayReport {
        anchors,
        steps,
        leaf,
        stopped_at,
    })
}
