use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk config: a versioned wrapper around one experiment's parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<C> {
    pub schema_version: u32,
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub config: C,
}

impl<C: Serialize> Envelope<C> {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> CliResult<String> {
        let bytes = serde_json::to_vec(self).map_err(|e| CliError::invalid(e.to_string()))?;
        Ok(format!("{:x}", Sha256::digest(bytes)))
    }
}

pub fn parse<C: DeserializeOwned>(text: &str, experiment: &str) -> CliResult<Envelope<C>> {
    // check the header first so a wrong experiment is reported as such
    #[derive(Deserialize)]
    struct Header {
        schema_version: Option<u32>,
        experiment: Option<String>,
    }
    let header: Header = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))?;
    match header.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(CliError::invalid(format!("config: `schema_version` {v} is not supported (expected {SCHEMA_VERSION})"))),
        None => return Err(CliError::invalid("config: missing field `schema_version`")),
    }
    match header.experiment.as_deref() {
        Some(e) if e == experiment => {}
        Some(e) => return Err(CliError::invalid(format!("config: `experiment` is `{e}`, this command runs `{experiment}`"))),
        None => return Err(CliError::invalid("config: missing field `experiment`")),
    }
    serde_json::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))
}

pub fn load<C: DeserializeOwned>(
    experiment: &str,
    presets: &[(&str, &str)],
    preset: Option<&str>,
    path: Option<&Path>,
) -> CliResult<Envelope<C>> {
    match (preset, path) {
        (Some(_), Some(_)) => Err(CliError::invalid("give either --preset or --config, not both")),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            parse(&text, experiment)
        }
        (name, None) => {
            let name = name.unwrap_or(presets[0].0);
            let (_, text) = presets.iter().find(|(n, _)| *n == name).ok_or_else(|| {
                let known: Vec<&str> = presets.iter().map(|(n, _)| *n).collect();
                CliError::invalid(format!("unknown preset `{name}` for {experiment}; known: {}", known.join(", ")))
            })?;
            parse(text, experiment)
        }
    }
}
