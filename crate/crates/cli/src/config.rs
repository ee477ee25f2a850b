//! JSON experiment documents, one per subcommand.

use std::path::{Path, PathBuf};

use conformal_euler::analysis::FoldingInstance;
use conformal_euler::conformal::DomainSpec;
use conformal_euler::dynamics::TrajectoryOptions;
use conformal_euler::moduli::Modulus;
use conformal_euler::velocity::{GridSpec, VorticityField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub r_min: f64,
    pub points: usize,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec { r_min: 1e-12, points: 241 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for RhoSpec {
    fn default() -> Self {
        RhoSpec { t_min: -2.0, t_max: 3.0, points: 101 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusConfig {
    pub modulus: Modulus<f64>,
    #[serde(default)]
    pub table: TableSpec,
    #[serde(default)]
    pub rho: RhoSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub points: usize,
    pub eps: f64,
    pub richardson: bool,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec { points: 720, eps: 1e-6, richardson: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub domain: DomainSpec<f64>,
    #[serde(default)]
    pub trace: TraceSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lower,
    Upper,
    Arrival,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub domain: DomainSpec<f64>,
    pub field: VorticityField<f64>,
    #[serde(default)]
    pub grid: GridSpec<f64>,
    /// Initial point `[re, im]` in the disc.
    pub zeta0: [f64; 2],
    #[serde(default)]
    pub trajectory: TrajectoryOptions<f64>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default = "default_d_target")]
    pub d_target: f64,
    /// Overrides `<out>/field_cache`.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_d_target() -> f64 {
    1e-4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma31Config {
    pub domain: DomainSpec<f64>,
    /// Defaults to the modulus of the domain profile.
    #[serde(default)]
    pub modulus: Option<Modulus<f64>>,
    #[serde(default = "default_xis")]
    pub xi: Vec<[f64; 2]>,
}

fn default_xis() -> Vec<[f64; 2]> {
    (1..=4).map(|k| [1.0 - 10f64.powi(-k), 0.0]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldingConfig {
    #[serde(default)]
    pub instances: Vec<FoldingInstance<f64>>,
    /// Number of additional instances drawn from the seeded generator.
    #[serde(default)]
    pub random: usize,
    #[serde(default)]
    pub chain: bool,
}

/// Reads and parses a config; returns the parsed value and its canonical JSON.
pub fn load<C: Serialize + DeserializeOwned>(path: &Path) -> Result<(C, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: C = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let canon = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, canon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<C: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) {
        let a: C = serde_json::from_str(text).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: C = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(s, serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn configs_roundtrip() {
        roundtrip::<ModulusConfig>(r#"{"modulus":{"family":"capped_log","a":1.0}}"#);
        roundtrip::<DomainConfig>(
            r#"{"domain":{"construction":"modulus_domain","beta_tilde":{"modulus":{"family":"zero"},"r0":0.25}}}"#,
        );
        roundtrip::<SimulateConfig>(
            r#"{"domain":{"uniform_density":1.0},"field":{"kind":"constant","c":1.0},"zeta0":[0.5,0.0],"checks":["lower"]}"#,
        );
        roundtrip::<Lemma31Config>(r#"{"domain":{"uniform_density":1.0}}"#);
        roundtrip::<FoldingConfig>(r#"{"random":3,"chain":true}"#);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<FoldingConfig>(r#"{"randm":3}"#).is_err());
    }
}
