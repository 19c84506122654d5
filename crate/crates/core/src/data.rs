//! Bundled inputs: the six minimal transitive groups of degree 14, the
//! eleven subgroups of G6 and the worked-branch trace used by the replay.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::orbits::OrbitId;
use crate::perm::{GroupError, OliverWitness, PermError, PermGroup, Permutation};

pub const GROUPS_JSON: &str = include_str!("../data/groups.json");
pub const SUBGROUPS_JSON: &str = include_str!("../data/subgroups.json");
pub const APPENDIX_JSON: &str = include_str!("../data/appendix.json");

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file} (sha256 {digest}) is not valid: {source}")]
    Json {
        file: String,
        digest: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{file} (sha256 {digest}): entry {name}: {source}")]
    Generator {
        file: String,
        digest: String,
        name: String,
        #[source]
        source: PermError,
    },
    #[error("{file} (sha256 {digest}): {reason}")]
    Integrity {
        file: String,
        digest: String,
        reason: String,
    },
    #[error("bad orbit label {0:?}")]
    BadLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub p_generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_generators: Option<Vec<String>>,
}

impl WitnessRecord {
    pub fn to_witness(&self, degree: usize) -> Result<OliverWitness, PermError> {
        let parse = |v: &[String]| {
            v.iter()
                .map(|s| Permutation::parse_cycles(s, degree))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(OliverWitness {
            p: self.p,
            q: self.q,
            p_generators: parse(&self.p_generators)?,
            h_generators: self.h_generators.as_deref().map(parse).transpose()?,
        })
    }
}

/// A group entry. Only `degree` and `generators` are required, so the same
/// record serves as the user-facing group file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRecord {
    #[serde(default)]
    pub name: String,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_order: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claimed_orders: Vec<u64>,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_generators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
}

impl GroupRecord {
    pub fn permutations(&self) -> Result<Vec<Permutation>, PermError> {
        self.generators
            .iter()
            .map(|s| Permutation::parse_cycles(s, self.degree))
            .collect()
    }

    pub fn group(&self, cap: usize) -> Result<PermGroup, GroupError> {
        PermGroup::generate(self.degree, self.permutations()?, cap)
    }

    pub fn bundled_witness(&self) -> Result<Option<OliverWitness>, PermError> {
        self.witness
            .as_ref()
            .map(|w| w.to_witness(self.degree))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedOrbit {
    pub label: String,
    pub points: Vec<usize>,
    pub printed_orbit: OrbitId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupRecord {
    pub name: String,
    pub gap_index: u32,
    pub degree: usize,
    pub generators: Vec<String>,
    pub claimed_type: String,
    pub printed_orbits: Vec<PrintedOrbit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
}

impl SubgroupRecord {
    pub fn as_group_record(&self) -> GroupRecord {
        GroupRecord {
            name: self.name.clone(),
            degree: self.degree,
            gap_index: Some(self.gap_index),
            printed_order: None,
            claimed_orders: Vec::new(),
            generators: self.generators.clone(),
            printed_generators: None,
            notes: Vec::new(),
            witness: self.witness.clone(),
        }
    }
}

/// A printed subset together with the printed label of its orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub source: String,
    pub points: Vec<usize>,
    pub printed_orbit: OrbitId,
}

/// How the replay picks a case: by its printed fixed-point faces (block
/// labels) or, when only the shape is printed, by face counts per size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseChoice {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub subgroup: String,
    pub printed_cases: usize,
    pub choice: CaseChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erratum_choice: Option<CaseChoice>,
    pub theta_t: Vec<String>,
    pub theta_f: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedCase {
    pub t: Vec<OrbitId>,
    pub f: Vec<OrbitId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub chi: i64,
    pub chi_link: i64,
    pub free: Vec<OrbitId>,
    pub chi_one_cases: Vec<PrintedCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixRecord {
    pub anchors: Vec<Anchor>,
    pub steps: Vec<StepRecord>,
    pub leaf: LeafRecord,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub groups: Vec<GroupRecord>,
    pub subgroups: Vec<SubgroupRecord>,
    pub appendix: AppendixRecord,
    /// File name to lowercase hex sha256.
    pub digests: BTreeMap<String, String>,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<T, DataError> {
    serde_json::from_str(text).map_err(|source| DataError::Json {
        file: file.to_string(),
        digest: sha256_hex(text),
        source,
    })
}

impl Bundle {
    pub fn load() -> Result<Self, DataError> {
        Self::from_sources(GROUPS_JSON, SUBGROUPS_JSON, APPENDIX_JSON)
    }

    /// Parses and validates the three data files. Every generator and
    /// witness element must parse, names must be unique, and every subgroup
    /// referenced by the trace must exist.
    pub fn from_sources(groups: &str, subgroups: &str, appendix: &str) -> Result<Self, DataError> {
        let digests = BTreeMap::from([
            ("appendix.json".to_string(), sha256_hex(appendix)),
            ("groups.json".to_string(), sha256_hex(groups)),
            ("subgroups.json".to_string(), sha256_hex(subgroups)),
        ]);
        let group_records: Vec<GroupRecord> = parse_json("groups.json", groups)?;
        let subgroup_records: Vec<SubgroupRecord> = parse_json("subgroups.json", subgroups)?;
        let appendix_record: AppendixRecord = parse_json("appendix.json", appendix)?;

        let integrity = |file: &str, reason: String| DataError::Integrity {
            file: file.to_string(),
            digest: digests[file].clone(),
            reason,
        };
        let generator_error = |file: &str, name: &str, source: PermError| DataError::Generator {
            file: file.to_string(),
            digest: digests[file].clone(),
            name: name.to_string(),
            source,
        };

        let mut names = BTreeSet::new();
        for g in &group_records {
            if !names.insert(g.name.clone()) {
                return Err(integrity(
                    "groups.json",
                    format!("duplicate name {}", g.name),
                ));
            }
            g.permutations()
                .map_err(|e| generator_error("groups.json", &g.name, e))?;
            g.bundled_witness()
                .map_err(|e| generator_error("groups.json", &g.name, e))?;
        }
        let mut sub_names = BTreeSet::new();
        for s in &subgroup_records {
            if !sub_names.insert(s.name.clone()) {
                return Err(integrity(
                    "subgroups.json",
                    format!("duplicate name {}", s.name),
                ));
            }
            let record = s.as_group_record();
            record
                .permutations()
                .map_err(|e| generator_error("subgroups.json", &s.name, e))?;
            record
                .bundled_witness()
                .map_err(|e| generator_error("subgroups.json", &s.name, e))?;
        }
        for step in &appendix_record.steps {
            if !sub_names.contains(&step.subgroup) {
                return Err(integrity(
                    "appendix.json",
                    format!(
                        "step {} names unknown subgroup {}",
                        step.step, step.subgroup
                    ),
                ));
            }
            for label in step.theta_t.iter().chain(&step.theta_f) {
                expand_label(label).map_err(|e| integrity("appendix.json", e.to_string()))?;
            }
        }
        Ok(Self {
            groups: group_records,
            subgroups: subgroup_records,
            appendix: appendix_record,
            digests,
        })
    }

    pub fn group(&self, name: &str) -> Option<&GroupRecord> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn subgroup(&self, name: &str) -> Option<&SubgroupRecord> {
        self.subgroups.iter().find(|g| g.name == name)
    }
}

/// Expands `a.b` or a range `a.b~a.c` into labels.
pub fn expand_label(label: &str) -> Result<Vec<OrbitId>, DataError> {
    let bad = || DataError::BadLabel(label.to_string());
    match label.split_once('~') {
        None => Ok(vec![label.parse().map_err(|_| bad())?]),
        Some((a, b)) => {
            let a: OrbitId = a.parse().map_err(|_| bad())?;
            let b: OrbitId = b.parse().map_err(|_| bad())?;
            if a.level != b.level || a.index > b.index {
                return Err(bad());
            }
            Ok((a.index..=b.index)
                .map(|index| OrbitId {
                    level: a.level,
                    index,
                })
                .collect())
        }
    }
}

pub fn expand_labels(labels: &[String]) -> Result<Vec<OrbitId>, DataError> {
    let mut out = Vec::new();
    for l in labels {
        out.extend(expand_label(l)?);
    }
    Ok(out)
}

/// A group file holds one group object or a list of them.
pub fn parse_group_file(text: &str) -> Result<Vec<GroupRecord>, DataError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(GroupRecord),
        Many(Vec<GroupRecord>),
    }
    Ok(match parse_json("group file", text)? {
        OneOrMany::One(g) => vec![g],
        OneOrMany::Many(v) => v,
    })
}
