//! The JSON envelope every subcommand emits.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tag_core::Rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Sequence,
    Windows,
    Zeckendorf,
    Classify,
    Cutoffs,
    Gamma,
    SSequence,
    Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    /// `p/q`, or absent for documents not tied to one alpha.
    pub alpha: Option<String>,
    pub horizon: Option<Value>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub kind: Kind,
    pub payload: Value,
    pub meta: Meta,
}

impl OutputDocument {
    pub fn new(kind: Kind, alpha: Option<&Rational>, horizon: Option<Value>, payload: Value) -> Self {
        OutputDocument {
            kind,
            payload,
            meta: Meta {
                alpha: alpha.map(Rational::to_fraction_string),
                horizon,
                version: VERSION.to_string(),
            },
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents always serialize");
        text.push('\n');
        text
    }
}
