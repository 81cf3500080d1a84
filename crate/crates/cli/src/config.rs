//! Loading of JSON configuration and shared flag types.

use std::path::Path;

use alpha_lab::harness::{CorruptionSpec, FeatureConfig, GmmSpec};
use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Prefix selecting a built-in mixture instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

/// Reads and parses a JSON file.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A built-in mixture by name.
pub fn builtin_gmm(name: &str) -> CliResult<GmmSpec> {
    match name {
        "symmetric" => Ok(GmmSpec::standard_symmetric()),
        "landscape" => Ok(GmmSpec::landscape_reference()),
        "saturation" => Ok(GmmSpec::saturation_reference()),
        _ => Err(CliError::Config(format!(
            "unknown built-in mixture '{name}' (expected symmetric, landscape or saturation)"
        ))),
    }
}

/// Loads a mixture from `builtin:<name>` or a JSON file, and validates it.
pub fn load_gmm(source: &str) -> CliResult<GmmSpec> {
    let spec = match source.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => builtin_gmm(name)?,
        None => load_json(Path::new(source))?,
    };
    spec.validate()?;
    Ok(spec)
}

/// A mixture given inline or by reference inside another JSON document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GmmSource {
    Inline(GmmSpec),
    Reference(String),
}

impl GmmSource {
    pub fn resolve(&self) -> CliResult<GmmSpec> {
        match self {
            GmmSource::Inline(spec) => {
                spec.validate()?;
                Ok(spec.clone())
            }
            GmmSource::Reference(s) => load_gmm(s),
        }
    }
}

/// Loads and validates a corruption spec.
pub fn load_corruption(path: &Path) -> CliResult<CorruptionSpec> {
    let spec: CorruptionSpec = load_json(path)?;
    spec.validate()?;
    Ok(spec)
}

/// Feature map selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureMode {
    /// Features as drawn.
    Raw,
    /// Clip to [−6, 6]^d and map affinely onto [0, 1]^d.
    Normalized,
}

impl FeatureMode {
    pub fn config(self, bias: bool) -> FeatureConfig {
        let base = match self {
            FeatureMode::Raw => FeatureConfig::raw(),
            FeatureMode::Normalized => FeatureConfig::normalized(),
        };
        if bias {
            base.with_bias()
        } else {
            base
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Raw => "raw",
            FeatureMode::Normalized => "normalized",
        }
    }
}
