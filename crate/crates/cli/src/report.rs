//! Machine-readable run reports.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of one command. Serialized with sorted keys so identical runs give
/// byte-identical documents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub rule: String,
    /// A label, or a list of labels for project subsets.
    pub chosen: Value,
    pub value: Option<f64>,
    pub argmin_set: Vec<String>,
    pub active_scenarios: Vec<String>,
    pub findings: Vec<Value>,
    pub tie_break: Option<String>,
    /// Command-specific extras.
    pub details: Value,
    pub input_fingerprint: String,
    pub tool_version: String,
}

impl Report {
    pub fn new(command: &str, rule: &str, fingerprint: String) -> Self {
        Self {
            command: command.into(),
            rule: rule.into(),
            chosen: Value::Null,
            value: None,
            argmin_set: Vec::new(),
            active_scenarios: Vec::new(),
            findings: Vec::new(),
            tie_break: None,
            details: Value::Null,
            input_fingerprint: fingerprint,
            tool_version: TOOL_VERSION.into(),
        }
    }

    /// Pretty JSON with every object's keys in sorted order, newline-terminated.
    pub fn to_json(&self) -> String {
        // `Value` objects are ordered maps, so converting first sorts all keys.
        let value = serde_json::to_value(self).expect("report is serializable");
        let mut text = serde_json::to_string_pretty(&value).expect("value is serializable");
        text.push('\n');
        text
    }
}

/// SHA-256 over `(role, content)` pairs, each length-prefixed.
pub fn fingerprint<'a>(inputs: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut hasher = Sha256::new();
    for (role, content) in inputs {
        for part in [role.as_bytes(), content] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part);
        }
    }
    format!("sha256:{}", hex::encode(hasher.finalize()))
}
