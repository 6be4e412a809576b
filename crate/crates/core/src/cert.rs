//! Verification certificates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Boundedness witness for one component: with `Λ` the offsets reached from the
/// base cell, `Λ - lambda ⊆ S`. Witnesses for the other cells of the component
/// follow by subtracting their label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub color: usize,
    pub base: String,
    pub lambda: Vec<i64>,
    pub cells: u64,
}

/// An explicit chain, given as offsets from a point of the start cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub color: Option<usize>,
    pub reason: String,
    pub start: String,
    pub chain: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub kind: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    /// Number of components examined.
    #[serde(default)]
    pub components: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Serialized inputs, present when the certificate can be replayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<Certificate>,
}

impl Certificate {
    pub fn new(kind: &str, verdict: Verdict) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            verdict,
            params: BTreeMap::new(),
            components: 0,
            witnesses: Vec::new(),
            counterexample: None,
            notes: Vec::new(),
            input: None,
            provenance: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn fail_with(mut self, cx: Counterexample) -> Self {
        self.verdict = Verdict::Fail;
        self.counterexample = Some(cx);
        self
    }

    /// Pass only when every provenance node passes too.
    pub fn all_passed(&self) -> bool {
        self.passed() && self.provenance.iter().all(Certificate::all_passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Text form of a residue cell: `3` or `(3,4)`.
pub fn cell_label(cell: &[i64]) -> String {
    if cell.len() == 1 {
        return cell[0].to_string();
    }
    let parts: Vec<String> = cell.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}
