//! The combined verdict over G1..G6 and its serialized forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Bundle, DataError, GroupRecord};
use crate::perm::{
    classify, ClassKind, Classification, ClassifyOptions, GroupError, DEFAULT_ELEMENT_CAP,
};
use crate::search::{
    run_search, Campaign, ReplayReport, Schedule, SearchError, SearchOptions, SearchReport,
};

pub const TOOL: &str = "rv14";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the group whose verdict comes from the search.
pub const SEARCH_GROUP: &str = "G6";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("group {name}: {source}")]
    Group {
        name: String,
        #[source]
        source: GroupError,
    },
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone)]
pub struct Verify14Options {
    pub schedules: Vec<String>,
    pub search: SearchOptions,
    pub sylow: bool,
    /// Let classification fall back to the bounded witness search.
    pub witness_search: bool,
}

impl Default for Verify14Options {
    fn default() -> Self {
        Self {
            schedules: vec!["fewest-blocks".into()],
            search: SearchOptions::default(),
            sylow: true,
            witness_search: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub schedule: String,
    pub order: Vec<String>,
    pub feasible_count: u64,
    pub nodes_explored: u64,
    pub cases_enumerated: u64,
    pub leaves: u64,
    pub residual_assignments: u64,
    pub prunes_by_chi: u64,
    pub prunes_by_link: u64,
}

impl From<&SearchReport> for SearchSummary {
    fn from(r: &SearchReport) -> Self {
        Self {
            schedule: r.schedule.name.clone(),
            order: r.schedule.order.clone(),
            feasible_count: r.counters.feasible_count,
            nodes_explored: r.counters.nodes_explored,
            cases_enumerated: r.counters.cases_enumerated,
            leaves: r.counters.leaves,
            residual_assignments: r.counters.residual_assignments,
            prunes_by_chi: r.counters.prunes_by_chi,
            prunes_by_link: r.counters.prunes_by_link,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupVerdict {
    pub name: String,
    pub order_computed: u64,
    pub order_printed: Option<u64>,
    pub claimed_orders: Vec<u64>,
    pub order_discrepancy: bool,
    pub transitive: bool,
    pub method: String,
    pub verified: bool,
    pub classification: serde_json::Value,
    pub search: Vec<SearchSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub tool: String,
    pub version: String,
    pub verdict: bool,
    pub groups: Vec<GroupVerdict>,
    pub digests: BTreeMap<String, String>,
}

impl VerdictReport {
    pub fn group(&self, name: &str) -> Option<&GroupVerdict> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            let printed = g
                .order_printed
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into());
            let flag = if g.order_discrepancy {
                " (order differs from printed)"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:<4} order {:>5} printed {:>5}{} method {:<12} {}",
                g.name,
                g.order_computed,
                printed,
                flag,
                g.method,
                if g.verified {
                    "verified"
                } else {
                    "NOT VERIFIED"
                }
            );
            for s in &g.search {
                let _ = writeln!(
                    out,
                    "     search [{}] feasible {} nodes {} leaves {}",
                    s.schedule, s.feasible_count, s.nodes_explored, s.leaves
                );
            }
        }
        let _ = writeln!(
            out,
            "verdict: {}",
            if self.verdict {
                "all six verified"
            } else {
                "not verified"
            }
        );
        out
    }
}

fn classification_value(c: &Classification) -> serde_json::Value {
    serde_json::to_value(c).expect("classification is plain data")
}

fn verdict_for(
    record: &GroupRecord,
    opts: &Verify14Options,
    campaign: &mut Option<Campaign>,
    bundle: &Bundle,
) -> Result<GroupVerdict, ReportError> {
    let wrap = |source| ReportError::Group {
        name: record.name.clone(),
        source,
    };
    let g = record.group(DEFAULT_ELEMENT_CAP).map_err(wrap)?;
    let witness = record
        .bundled_witness()
        .map_err(|e| wrap(GroupError::from(e)))?;
    let transitive = g.is_transitive();
    let c = classify(
        &g,
        witness.as_ref(),
        ClassifyOptions {
            sylow: opts.sylow,
            search: opts.witness_search,
        },
    );
    let mut v = GroupVerdict {
        name: record.name.clone(),
        order_computed: g.order(),
        order_printed: record.printed_order,
        claimed_orders: record.claimed_orders.clone(),
        order_discrepancy: record.printed_order.is_some_and(|p| p != g.order()),
        transitive,
        method: c.kind.method_tag().to_string(),
        verified: transitive && c.kind != ClassKind::Unresolved,
        classification: classification_value(&c),
        search: Vec::new(),
    };
    if c.kind == ClassKind::Unresolved && record.name == SEARCH_GROUP && transitive {
        if campaign.is_none() {
            *campaign = Some(Campaign::from_bundle(bundle)?);
        }
        let camp = campaign.as_ref().expect("just built");
        let mut all_zero = true;
        for name in &opts.schedules {
            let sched = Schedule::parse(camp, name)?;
            let rep = run_search(camp, &sched, opts.search)?;
            all_zero &= rep.no_feasible_function();
            v.search.push(SearchSummary::from(&rep));
        }
        v.method = "search".into();
        v.verified = all_zero && !v.search.is_empty();
    }
    Ok(v)
}

/// Orders and transitivity of every bundled group, classification of each,
/// and the orbit search wherever classification leaves G6 unresolved.
pub fn verify14(bundle: &Bundle, opts: &Verify14Options) -> Result<VerdictReport, ReportError> {
    let mut campaign = None;
    let groups = bundle
        .groups
        .iter()
        .map(|r| verdict_for(r, opts, &mut campaign, bundle))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VerdictReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        verdict: !groups.is_empty() && groups.iter().all(|g| g.verified),
        groups,
        digests: bundle.digests.clone(),
    })
}

fn labels(ids: &[crate::orbits::OrbitId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-readable form of the replay trace.
pub fn replay_text(r: &ReplayReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "anchors: {} labels mapped, {} conflicts, {} ambiguous",
        r.anchors.map.len(),
        r.anchors.conflicts.len(),
        r.anchors.ambiguous.len()
    );
    for c in &r.anchors.conflicts {
        let _ = writeln!(
            out,
            "  conflict {} ({}): {}",
            c.printed_orbit, c.source, c.reason
        );
    }
    for s in &r.steps {
        let cand = s
            .candidate_complexes
            .map(|c| c.to_string())
            .unwrap_or_else(|| "?".into());
        let _ = writeln!(
            out,
            "step {} {} [{}]: printed {} cases, {} candidate complexes, {} after propagation{}",
            s.step,
            s.subgroup,
            s.condition,
            s.printed_cases,
            cand,
            s.propagated_cases,
            if s.cases_match {
                ""
            } else {
                " (count differs)"
            }
        );
        for b in &s.blocks {
            let _ = writeln!(out, "    block {} {:?} -> {}", b.label, b.points, b.orbit);
        }
        for o in &s.governed {
            let label = o.printed_orbit.map(|l| format!(" ({l})")).unwrap_or_default();
            let _ = writeln!(
                out,
                "    orbit {}{} a={} b={}",
                o.orbit, label, o.size, o.containing_x1
            );
        }
        let faces: Vec<String> = s
            .selected_faces
            .iter()
            .map(|f| format!("{{{}}}", f.join(",")))
            .collect();
        let _ = writeln!(
            out,
            "    selected {:?} faces {}{}; chi {} chi_link {}",
            s.selected_case,
            faces.join(" "),
            if s.erratum_applied {
                " (erratum choice)"
            } else {
                ""
            },
            s.chi,
            s.chi_link
        );
        let _ = writeln!(
            out,
            "    theta_T: {} printed, {} contradictions; theta_F: {} printed, {} contradictions",
            s.theta_t.printed,
            s.theta_t.contradictions.len(),
            s.theta_f.printed,
            s.theta_f.contradictions.len()
        );
    }
    if let Some(at) = r.stopped_at {
        let _ = writeln!(
            out,
            "stopped at step {at}: no case matches the printed choice"
        );
    }
    if let Some(l) = &r.leaf {
        let free: Vec<_> = l.free.iter().map(|o| o.orbit).collect();
        let _ = writeln!(
            out,
            "leaf: chi {} (printed {}), chi_link {} (printed {})",
            l.chi, l.printed_chi, l.chi_link, l.printed_chi_link
        );
        let _ = writeln!(out, "    free orbits {}: {}", free.len(), labels(&free));
        let _ = writeln!(
            out,
            "    printed free {}: {}",
            l.printed_free.len(),
            labels(&l.printed_free)
        );
        let _ = writeln!(
            out,
            "    chi = 1 cases: {} (printed {}), all fail the link condition: {}",
            l.chi_one_cases.len(),
            l.printed_chi_one_cases,
            l.all_fail_link
        );
    }
    out
}
