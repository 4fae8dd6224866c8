//! JSON reports.
//!
//! Keys are emitted in sorted order and floats in shortest round-trip form,
//! so parsing a report and serializing it again reproduces it byte for byte.
//! Non-finite floats become `null`.

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
    pub runtime_ms: f64,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "runtime_ms": self.runtime_ms,
            "library_version": gcnlab_core::VERSION,
        });
        if !self.warnings.is_empty() {
            v["warnings"] = json!(self.warnings);
        }
        v
    }

    pub fn render(&self) -> String {
        render(&self.to_value())
    }

    /// Writes to `out`, or to stdout when `None`.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = self.render();
        match out {
            Some(p) => std::fs::write(p, text + "\n")
                .with_context(|| format!("cannot write {}", p.display())),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("a JSON value always serializes")
}

/// Removes every `runtime_ms` entry, recursively.
pub fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_runtime);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}
