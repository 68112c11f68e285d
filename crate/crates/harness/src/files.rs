//! JSON persistence for instances and policies.
//!
//! Instance documents carry `m`, `gamma`, `p`, either `q` or `reward`, a
//! `cost` matrix whose entries are numbers or the string `"inf"`, and a
//! free-form `meta` object. Loading checks shape only; numeric invariants are
//! left to `validate_instance` so a slightly broken file can still be
//! inspected.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use stratpol::{CostMatrix, Instance, Outcome, Policy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Syntax or type error; `at` is the JSON path of the offending field.
    #[error("{path}: line {line}, column {column}, at `{at}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        at: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Shape { path: PathBuf, message: String },
}

impl FileError {
    fn shape(path: &Path, message: impl Into<String>) -> Self {
        FileError::Shape {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// A cost entry: a finite number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEntry(pub f64);

impl Serialize for CostEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for CostEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EntryVisitor;

        impl Visitor<'_> for EntryVisitor {
            type Value = CostEntry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<CostEntry, E> {
                Ok(CostEntry(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<CostEntry, E> {
                Ok(CostEntry(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<CostEntry, E> {
                Ok(CostEntry(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<CostEntry, E> {
                match v {
                    "inf" | "+inf" | "Infinity" => Ok(CostEntry(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(EntryVisitor)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub gamma: f64,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<Vec<f64>>,
    pub cost: Vec<Vec<CostEntry>>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let (q, reward) = match &inst.outcome {
            Outcome::Probabilities(q) => (Some(q.clone()), None),
            Outcome::Rewards(r) => (None, Some(r.clone())),
        };
        InstanceFile {
            m: inst.m(),
            gamma: inst.gamma,
            p: inst.p.clone(),
            q,
            reward,
            cost: inst
                .cost
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(CostEntry).collect())
                .collect(),
            meta: inst.meta.clone(),
        }
    }

    /// Checks lengths and builds the instance. `path` only labels errors.
    pub fn into_instance(self, path: &Path) -> Result<Instance, FileError> {
        let m = self.m;
        let check_len = |name: &str, len: usize| {
            if len == m {
                Ok(())
            } else {
                Err(FileError::shape(path, format!("`{name}` has {len} entries, expected m = {m}")))
            }
        };
        check_len("p", self.p.len())?;
        check_len("cost", self.cost.len())?;
        for (i, row) in self.cost.iter().enumerate() {
            if row.len() != m {
                return Err(FileError::shape(
                    path,
                    format!("`cost[{i}]` has {} entries, expected m = {m}", row.len()),
                ));
            }
        }
        let rows = self
            .cost
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.0).collect())
            .collect();
        let cost = CostMatrix::from_rows(rows).map_err(|e| FileError::shape(path, e.to_string()))?;
        let mut inst = match (self.q, self.reward) {
            (Some(q), None) => {
                check_len("q", q.len())?;
                Instance::new(self.p, q, self.gamma, cost)
            }
            (None, Some(r)) => {
                check_len("reward", r.len())?;
                Instance::with_rewards(self.p, r, self.gamma, cost)
            }
            (Some(_), Some(_)) => {
                return Err(FileError::shape(path, "give either `q` or `reward`, not both"))
            }
            (None, None) => return Err(FileError::shape(path, "missing `q` or `reward`")),
        };
        inst.meta = self.meta;
        Ok(inst)
    }
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deserializes `text`, reporting the JSON path of the failing field.
fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, FileError> {
    let parse_error = |at: String, inner: serde_json::Error| FileError::Parse {
        path: path.to_path_buf(),
        line: inner.line(),
        column: inner.column(),
        at,
        message: inner.to_string(),
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let at = err.path().to_string();
        parse_error(at, err.into_inner())
    })?;
    de.end().map_err(|e| parse_error(".".into(), e))?;
    Ok(value)
}

pub fn parse_instance(text: &str, path: &Path) -> Result<Instance, FileError> {
    parse::<InstanceFile>(text, path)?.into_instance(path)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, FileError> {
    let path = path.as_ref();
    parse_instance(&read(path)?, path)
}

pub fn instance_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), FileError> {
    write(path.as_ref(), &(instance_json(inst) + "\n"))
}

/// A policy on disk: either a bare array or an object with a `pi` array
/// plus optional context about how it was produced.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PolicyFile {
    Bare(Vec<f64>),
    Record(PolicyRecord),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct PolicyRecord {
    pub pi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    /// Instance file the policy was computed for, relative to the record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
}

impl PolicyFile {
    pub fn pi(&self) -> &[f64] {
        match self {
            PolicyFile::Bare(pi) => pi,
            PolicyFile::Record(r) => &r.pi,
        }
    }

    pub fn policy(&self) -> Policy {
        Policy::new(self.pi().to_vec())
    }
}

pub fn load_policy_file(path: impl AsRef<Path>) -> Result<PolicyFile, FileError> {
    let path = path.as_ref();
    parse(&read(path)?, path)
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<Policy, FileError> {
    load_policy_file(path).map(|f| f.policy())
}

pub fn save_policy(record: &PolicyRecord, path: impl AsRef<Path>) -> Result<(), FileError> {
    let text = serde_json::to_string_pretty(record).expect("policy serializes");
    write(path.as_ref(), &(text + "\n"))
}
