//! Structured reports: every scalar carries a provenance tag, matrices are
//! serialized as interleaved `[re, im]` row-major arrays with explicit
//! dimensions, and NaN/Inf never reach disk.

use std::collections::BTreeMap;

use qlock_core::linalg::CMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    MonteCarlo,
    SearchLowerBound,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub package: String,
    pub version: String,
}

/// Dense complex matrix in wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, interleaved `[re0, im0, re1, im1, ...]`.
    pub entries: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(2 * m.entries().len());
        for z in m.entries() {
            entries.push(z.re);
            entries.push(z.im);
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != 2 * self.rows * self.cols {
            return Err(CliError::Config(format!(
                "matrix payload length {} does not match {}x{}",
                self.entries.len(),
                self.rows,
                self.cols
            )));
        }
        let complex: Vec<_> = self
            .entries
            .chunks_exact(2)
            .map(|c| qlock_core::linalg::C64::new(c[0], c[1]))
            .collect();
        Ok(CMatrix::new(complex, self.rows, self.cols)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    /// Name -> value with provenance; BTreeMap keeps the order stable.
    pub results: BTreeMap<String, Scalar>,
    /// Path of the per-trial CSV, when the config asked for one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<MatrixJson>>,
    pub versions: Versions,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            results: BTreeMap::new(),
            trial_table: None,
            matrices: None,
            versions: Versions {
                package: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, name: &str, value: f64, provenance: Provenance) {
        self.results.insert(
            name.to_string(),
            Scalar {
                value,
                std_error: None,
                provenance,
            },
        );
    }

    pub fn push_with_se(&mut self, name: &str, value: f64, se: f64, provenance: Provenance) {
        self.results.insert(
            name.to_string(),
            Scalar {
                value,
                std_error: Some(se),
                provenance,
            },
        );
    }

    /// NaN and infinities are forbidden in outputs.
    pub fn check_finite(&self) -> Result<()> {
        for (name, scalar) in &self.results {
            if !scalar.value.is_finite() {
                return Err(CliError::NonFinite(name.clone()));
            }
            if let Some(se) = scalar.std_error {
                if !se.is_finite() {
                    return Err(CliError::NonFinite(format!("{name} (std_error)")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        self.check_finite()?;
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Canonical byte serialization of the scalar results alone; the
    /// determinism contract is stated over these.
    pub fn results_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(&self.results)?)
    }
}
