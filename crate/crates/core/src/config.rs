//! Run configuration files (TOML).
//!
//! ```toml
//! dimension = 1
//! seed = 42
//!
//! [[components]]
//! weight = 0.5
//! pmf = [0.0, 0.0, 1.0]
//!
//! [[components]]
//! weight = 0.5
//! pmf = [0.5, 0.5]
//! ```
//!
//! Every key except `components` has a default. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envmodel::{validate, EnvironmentLaw, ValidationReport};
use crate::experiments::{DiagnosticsOptions, Sampling};
use crate::lattice::{check_dim, Site};
use crate::particles::Configuration;
use crate::polymer::FreeEnergyMethod;
use crate::renorm::diamond;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolymerSection {
    pub t: u32,
    pub replicas: usize,
    pub method: FreeEnergyMethod,
}

impl Default for PolymerSection {
    fn default() -> Self {
        PolymerSection {
            t: 100,
            replicas: 200,
            method: FreeEnergyMethod::Slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub rho: Vec<f64>,
    pub t_polymer: u32,
    pub polymer_replicas: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            rho: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            t_polymer: 100,
            polymer_replicas: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockSection {
    pub n: u32,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "T")]
    pub t: u32,
    /// 0 disables clipping.
    pub site_cap: u64,
}

impl Default for BlockSection {
    fn default() -> Self {
        BlockSection {
            n: 4,
            l: 12,
            t: 40,
            site_cap: crate::renorm::BLOCK_SITE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FkgSection {
    pub t: u32,
    /// Catalog names; empty means the default catalog.
    pub functionals: Vec<String>,
}

impl Default for FkgSection {
    fn default() -> Self {
        FkgSection {
            t: 20,
            functionals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub seed: u64,
    pub components: Vec<ComponentSpec>,
    pub horizon: u32,
    pub cap: u64,
    pub replicas: usize,
    /// `"x1,..,xd:count;..."` or `"diamond:n"`.
    pub initial: String,
    pub sampling: Sampling,
    pub polymer: PolymerSection,
    pub sweep: SweepSection,
    pub block: BlockSection,
    pub fkg: FkgSection,
    pub diagnostics: DiagnosticsOptions,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 1,
            seed: 0,
            components: Vec::new(),
            horizon: 200,
            cap: crate::particles::DEFAULT_CAP,
            replicas: 1000,
            initial: "origin".into(),
            sampling: Sampling::Annealed,
            polymer: PolymerSection::default(),
            sweep: SweepSection::default(),
            block: BlockSection::default(),
            fkg: FkgSection::default(),
            diagnostics: DiagnosticsOptions::default(),
            out: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// A loaded configuration with its environment law and validation report.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub law: EnvironmentLaw,
    pub report: ValidationReport,
}

pub fn parse_config_str(text: &str) -> Result<LoadedConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    check_dim(config.dimension).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    if config.components.is_empty() {
        return Err(ConfigError::Invalid("missing `components`: the environment law is required".into()));
    }
    let law = EnvironmentLaw::new(
        config
            .components
            .iter()
            .map(|c| (c.weight, c.pmf.clone()))
            .collect(),
    )
    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    parse_initial(&config.initial, config.dimension).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let report = validate(&law);
    Ok(LoadedConfig { config, law, report })
}

pub fn parse_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses an initial configuration: `origin`, `diamond:n`, or
/// `x1,..,xd:count` entries separated by `;`.
pub fn parse_initial(spec: &str, dim: usize) -> crate::Result<Configuration> {
    let bad = |why: &str| crate::Error::Domain(format!("bad initial configuration `{spec}`: {why}"));
    let spec = spec.trim();
    if spec == "origin" {
        return Ok(Configuration::single(Site::new(&vec![0; dim])?, 1));
    }
    if let Some(n) = spec.strip_prefix("diamond:") {
        let n: u32 = n.trim().parse().map_err(|_| bad("diamond radius"))?;
        return Ok(diamond(n, dim)?.configuration());
    }
    let mut c = Configuration::new();
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (site, count) = entry.rsplit_once(':').ok_or_else(|| bad("expected site:count"))?;
        let coords = site
            .split(',')
            .map(|v| v.trim().parse::<i32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("site coordinates"))?;
        if coords.len() != dim {
            return Err(bad(&format!("site has {} coordinates, dimension is {dim}", coords.len())));
        }
        let count: u64 = count.trim().parse().map_err(|_| bad("count"))?;
        c.add(Site::new(&coords)?, count);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[[components]]\nweight = 1.0\npmf = [0.25, 0.25, 0.5]\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.config.horizon, 200);
        assert_eq!(c.config.cap, 1_000_000);
        assert_eq!(c.config.replicas, 1000);
        assert_eq!(c.config.dimension, 1);
        assert!(c.report.is_valid());
    }

    #[test]
    fn unnormalised_pmf_names_component() {
        let text = "[[components]]\nweight = 0.5\npmf = [0.5, 0.5]\n[[components]]\nweight = 0.5\npmf = [0.5, 0.4]\n";
        let err = parse_config_str(text).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
        assert!(err.to_string().contains("component 1"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str(&format!("horizonn = 10\n{MINIMAL}")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("horizonn"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config_str("dimension = = 2\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn missing_law_is_an_error() {
        assert!(parse_config_str("dimension = 2\n").is_err());
    }

    #[test]
    fn initial_configurations() {
        let c = parse_initial("0,0:2; 1,1:1", 2).unwrap();
        assert_eq!(c.total(), 3);
        assert_eq!(parse_initial("diamond:2", 2).unwrap().total(), 9);
        assert_eq!(parse_initial("origin", 3).unwrap().total(), 1);
        assert!(parse_initial("0:1", 2).is_err());
        assert!(parse_initial("0,0", 2).is_err());
    }
}
