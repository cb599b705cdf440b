use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Sizes {
    pub species: usize,
    pub reactions: usize,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Flags {
    pub truncated: bool,
    pub tolerance_used: bool,
}

/// Machine-readable summary printed on stdout by every command.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Sizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Sizes>,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    pub flags: Flags,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Self::default() }
    }

    /// Runs `f` and records its wall-clock time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_ms.insert(phase.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("serialisable detail");
        self.details.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable report")
    }
}
