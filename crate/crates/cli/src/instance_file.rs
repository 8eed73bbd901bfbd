//! JSON instance files.
//!
//! ```json
//! {
//!   "format": "seqalloc-instance/1",
//!   "prices": [..T..],
//!   "limit": 123.4,
//!   "mu": [..T..],
//!   "sigma": [[..T..], ..T rows..]
//! }
//! ```
//!
//! `mu` and `sigma` describe the log demands. Numbers are written in their
//! shortest round-trip form, so a load after a save is bit-exact.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use seqalloc::{DemandModel, Instance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "seqalloc-instance/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub prices: Vec<f64>,
    pub limit: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let sigma = inst.model().sigma();
        Self {
            format: FORMAT.to_string(),
            prices: inst.prices().to_vec(),
            limit: inst.limit(),
            mu: inst.model().mu().iter().copied().collect(),
            sigma: (0..sigma.nrows())
                .map(|i| sigma.row(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_instance(&self) -> CliResult<Instance> {
        if self.format != FORMAT {
            return Err(CliError::Validation(format!(
                "format: expected \"{FORMAT}\", got \"{}\"",
                self.format
            )));
        }
        let t = self.mu.len();
        if let Some(i) = self.sigma.iter().position(|row| row.len() != t) {
            return Err(CliError::Validation(format!(
                "sigma[{i}]: expected {t} entries, got {}",
                self.sigma[i].len()
            )));
        }
        if self.sigma.len() != t {
            return Err(CliError::Validation(format!(
                "sigma: expected {t} rows, got {}",
                self.sigma.len()
            )));
        }
        let sigma = DMatrix::from_fn(t, t, |i, j| self.sigma[i][j]);
        let model = DemandModel::new(DVector::from_vec(self.mu.clone()), sigma)?;
        Ok(Instance::new(self.prices.clone(), self.limit, model)?)
    }
}

pub fn save(inst: &Instance, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(inst))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> CliResult<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read instance {}: {e}", path.display()))
    })?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    file.to_instance().map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}
