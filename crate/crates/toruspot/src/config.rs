//! Experiment configuration files and their content hash.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};
use crate::formats::{DensitySpec, Instance};

/// Lebesgue exponent; `"inf"` in JSON stands for `p = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 1 or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exponent, E> {
                if v >= 1.0 {
                    Ok(Exponent(v))
                } else {
                    Err(E::custom("exponent must be at least 1"))
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                match v {
                    "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
                    _ => Err(E::custom("expected \"inf\"")),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Inline value or a path relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: serde::de::DeserializeOwned + Clone> Source<T> {
    pub fn load(&self, base: &Path) -> AppResult<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::Path(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinftyParams {
    pub instance: Source<Instance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyParams {
    pub density: DensitySpec,
    /// Grid of the transport enclosure; per-dimension default when absent.
    #[serde(default)]
    pub dinfty_n: Option<usize>,
}

fn default_norms() -> Vec<Exponent> {
    vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub density: DensitySpec,
    pub s: f64,
    /// Spectral cutoff `K`; defaults to `(N - 1) / 2`.
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default = "default_norms")]
    pub norms: Vec<Exponent>,
    /// Emit the field itself as CSV.
    #[serde(default = "yes")]
    pub emit_field: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub c0: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityFamilyName {
    Cosine,
    Bump,
    Laplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    pub family: StabilityFamilyName,
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub dinfty_n: Option<usize>,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    #[serde(default)]
    pub density: Option<DensitySpec>,
    pub s: f64,
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Perturbed kernel whose coefficients are scanned for negative values.
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub scan_k: Option<usize>,
    #[serde(default)]
    pub stability: Option<StabilityParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingParams {
    /// Potential norms and transport bounds of the Laplacian family.
    Laplacian { d: usize, p: Exponent, s: f64, m: u32, eps: Vec<f64>, cells_per_eps: f64 },
    /// Norms of the mollified kernel `u_ε`, measured in `L^q` with `q` conjugate to `p`.
    UEps { d: usize, beta: f64, p: Exponent, eps: Vec<f64>, cells_per_eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Pure,
    Perturbed { c0: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelConfig {
    pub name: String,
    pub kernel: KernelSpec,
    pub t_end: f64,
    #[serde(default)]
    pub particles: Option<usize>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub integrator: Option<IntegratorName>,
    #[serde(default)]
    pub snapshot_every: Option<u64>,
    #[serde(default)]
    pub table: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub panels: Vec<PanelConfig>,
}

fn default_verify_samples() -> usize {
    100
}

fn default_calibration_sets() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    /// Random cases per invariant suite.
    #[serde(default = "default_verify_samples")]
    pub samples: usize,
    /// Random regular sets in the calibration run.
    #[serde(default = "default_calibration_sets")]
    pub calibration_sets: usize,
    /// Shipped constants the set-geometry suite is checked against; the fresh
    /// calibration is used when absent.
    #[serde(default)]
    pub calibration_file: Option<PathBuf>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { samples: default_verify_samples(), calibration_sets: default_calibration_sets(), calibration_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub count: usize,
    /// Largest number of atoms per side; brute force is factorial in it.
    pub n_max: usize,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Dinfty(DinftyParams),
    Discrepancy(DiscrepancyParams),
    Potential(PotentialParams),
    Energy(EnergyParams),
    Scaling(ScalingParams),
    Flow(FlowParams),
    Verify(VerifyParams),
    Oracle(OracleParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dinfty(_) => "dinfty",
            Command::Discrepancy(_) => "discrepancy",
            Command::Potential(_) => "potential",
            Command::Energy(_) => "energy",
            Command::Scaling(_) => "scaling",
            Command::Flow(_) => "flow",
            Command::Verify(_) => "verify",
            Command::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> AppResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text)
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_forms() {
        let v: Vec<Exponent> = serde_json::from_str(r#"[1, 2.5, "inf"]"#).unwrap();
        assert_eq!(v[0].0, 1.0);
        assert_eq!(v[1].0, 2.5);
        assert!(v[2].0.is_infinite());
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1.0,2.5,"inf"]"#);
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
    }

    #[test]
    fn tagged_commands() {
        let cfg = ExperimentConfig::parse(
            r#"{"command": "scaling", "kind": "laplacian", "d": 1, "p": 2, "s": 0.5, "m": 2,
                "eps": [0.0625, 0.03125], "cells_per_eps": 64, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.command.name(), "scaling");
        assert_eq!(cfg.seed, Some(3));
        let again = ExperimentConfig::parse(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig { command: Command::Verify(VerifyParams::default()), seed: Some(1) };
        let mut b = a.clone();
        b.seed = Some(2);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn malformed_json_is_an_error() {
        let e = ExperimentConfig::parse("{\"command\": ").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
