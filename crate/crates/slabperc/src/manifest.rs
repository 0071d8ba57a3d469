//! Run manifests. A manifest names the subcommand, its full parameter set
//! and the effective seed, which together determine every output byte.
//! The worker count is deliberately absent.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::Command;
use crate::Error;

pub const SCHEMA: &str = "slabperc-manifest/1";
pub const FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub artifact_version: String,
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    /// Files written next to the manifest, relative to it.
    pub outputs: Vec<String>,
    /// The only field allowed to differ between replays.
    pub wall_clock_ms: u64,
}

impl RunManifest {
    pub fn new(command: &Command, outputs: Vec<String>, wall_clock_ms: u64) -> Result<Self, Error> {
        let tagged = serde_json::to_value(command)?;
        Ok(RunManifest {
            schema: SCHEMA.into(),
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: tagged["subcommand"].as_str().unwrap_or_default().into(),
            params: tagged["params"].clone(),
            seed: command.seed(),
            outputs,
            wall_clock_ms,
        })
    }

    pub fn command(&self) -> Result<Command, Error> {
        if self.schema != SCHEMA {
            return Err(Error::Invalid(format!("unsupported manifest schema {:?}", self.schema)));
        }
        let tagged = serde_json::json!({ "subcommand": self.subcommand, "params": self.params });
        Ok(serde_json::from_value(tagged)?)
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        crate::io::read_json(path)
    }

    /// Equality ignoring wall-clock time.
    pub fn same_run(&self, other: &RunManifest) -> bool {
        RunManifest { wall_clock_ms: 0, ..self.clone() } == RunManifest { wall_clock_ms: 0, ..other.clone() }
    }
}
