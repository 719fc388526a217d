//! JSON reports. Every report carries the parameters, seed, worker count and
//! crate version so that an artifact can be traced back to its run.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub params: Value,
    pub grid: Value,
    pub estimates: Value,
    pub stderrs: Value,
    pub verdicts: Value,
    pub seed: u64,
    pub workers: usize,
    pub version: &'static str,
    /// Command-specific extras.
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Self {
        Report {
            experiment: cfg.command.name().to_string(),
            params: json!({ "q": cfg.q, "d": cfg.d, "mu": cfg.mu }),
            grid: Value::Null,
            estimates: Value::Null,
            stderrs: Value::Null,
            verdicts: Value::Null,
            seed: cfg.seed,
            workers: cfg.workers,
            version: VERSION,
            details: Map::new(),
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> CliResult<()> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> CliResult<()> {
        let text = self.to_json()?;
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// A matrix as nested `[re, im]` pairs, row-major.
pub fn matrix_json(m: &conebessel::cone::SquareMatrix) -> Value {
    let q = m.q();
    Value::Array(
        (0..q)
            .map(|i| Value::Array((0..q).map(|j| json!([m.get(i, j).re, m.get(i, j).im])).collect()))
            .collect(),
    )
}
