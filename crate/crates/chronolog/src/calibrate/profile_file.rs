//! Platform profiles on disk.
//!
//! A profile records what one machine measured: fitted constant vectors
//! keyed by model signature, directly measured builtin constants, and
//! enough metadata to judge staleness. The format is TOML.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::calibrate::fit::{ModelFit, SampleMatrix};
use crate::calibrate::CalibrateError;
use crate::metric::CostModel;

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct StoredFit {
    /// Model signature as produced by `CostModel::signature`.
    pub signature: String,
    /// ns per event, aligned with the signature's components.
    pub k: Vec<f64>,
    pub s: f64,
    pub m: usize,
    pub v: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct PlatformProfile {
    pub host: String,
    pub created_unix: u64,
    pub seed: u64,
    #[serde(default)]
    pub fits: Vec<StoredFit>,
    /// Directly measured builtin and operator constants, ns per call.
    #[serde(default)]
    pub builtins: BTreeMap<String, f64>,
}

impl PlatformProfile {
    pub fn new(host: &str, seed: u64) -> PlatformProfile {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        PlatformProfile {
            host: host.to_string(),
            created_unix,
            seed,
            fits: Vec::new(),
            builtins: BTreeMap::new(),
        }
    }

    /// Inserts or replaces the fit for its model signature.
    pub fn add_fit(&mut self, fit: &ModelFit) {
        let stored = StoredFit {
            signature: fit.model.signature(),
            k: fit.k.clone(),
            s: fit.s,
            m: fit.m,
            v: fit.v,
            warnings: fit.warnings.clone(),
        };
        if let Some(slot) = self
            .fits
            .iter_mut()
            .find(|f| f.signature == stored.signature)
        {
            *slot = stored;
        } else {
            self.fits.push(stored);
        }
    }

    pub fn find_fit(&self, model: &CostModel) -> Option<&StoredFit> {
        let sig = model.signature();
        self.fits.iter().find(|f| f.signature == sig)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_toml(s: &str) -> Result<PlatformProfile, CalibrateError> {
        toml::from_str(s).map_err(|e| CalibrateError::Profile(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CalibrateError> {
        Ok(std::fs::write(path, self.to_toml())?)
    }

    pub fn load(path: &Path) -> Result<PlatformProfile, CalibrateError> {
        PlatformProfile::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Renders a sample matrix as CSV: one column per model component, then
/// the observed duration.
pub fn export_csv(samples: &SampleMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = samples
        .model
        .components
        .iter()
        .map(|c| c.to_string())
        .collect();
    out.push_str(&header.join(","));
    out.push_str(",duration_ns\n");
    for i in 0..samples.c.rows() {
        for j in 0..samples.c.cols() {
            out.push_str(&format!("{},", samples.c.get(i, j)));
        }
        out.push_str(&format!("{}\n", samples.t[i]));
    }
    out
}
