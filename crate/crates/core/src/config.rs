//! JSON configuration schemas and the CSV data loader.
//!
//! Every config file carries `"schema": 1`. Problems name catalog entries:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "loss": {"id": "check", "params": [0.5]},
//!   "kernel": {"id": "walsh"},
//!   "raw": {"model": "iid", "distribution": {"family": "normal", "params": [0, 1]}}
//! }
//! ```
//!
//! `distribution` is the law `R` of the kernel values. It may be omitted when
//! it follows from `raw` (identity kernel, or means of normal/Cauchy draws);
//! with the identity kernel, `raw` may be omitted instead.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{AnalysisError, AnalysisSettings, PopulationProblem};
use crate::estimator::{Policy, DEFAULT_CAP};
use crate::population::{Data, DistSpec, Distribution, PopulationError, RawModel, RawSpec};
use crate::problem::{ConvexLoss, Kernel, KernelSpec, LossSpec, ProblemError};

pub const SCHEMA_VERSION: u32 = 1;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {msg}")]
    Csv { path: PathBuf, msg: String },
    #[error("{path}: unsupported schema {found} (expected {SCHEMA_VERSION})")]
    Schema { path: PathBuf, found: String },
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Invalid(String),
}

fn schema_one() -> u32 {
    SCHEMA_VERSION
}

/// Loss, kernel and laws of one estimation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub loss: LossSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistSpec>,
    /// Pins `m` instead of locating it (needed when `V` is flat at zero).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl ProblemConfig {
    pub fn loss(&self) -> Result<ConvexLoss, ConfigError> {
        Ok(ConvexLoss::from_spec(&self.loss)?)
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        Ok(Kernel::from_spec(self.kernel.as_ref().unwrap_or(&KernelSpec::new("identity", &[])))?)
    }

    /// Data-generating model; with the identity kernel it defaults to i.i.d.
    /// draws from `distribution`.
    pub fn raw_model(&self) -> Result<Option<RawModel>, ConfigError> {
        match (&self.raw, &self.distribution) {
            (Some(r), _) => Ok(Some(RawModel::from_spec(r)?)),
            (None, Some(d)) if self.kernel()?.degree() == 1 && self.kernel()?.is_mean() => {
                Ok(Some(RawModel::Iid(Distribution::from_spec(d)?)))
            }
            _ => Ok(None),
        }
    }

    pub fn population(&self) -> Result<PopulationProblem, ConfigError> {
        let kernel = self.kernel()?;
        let raw = self.raw_model()?;
        let prob = match (&self.distribution, raw) {
            (Some(d), Some(raw)) => PopulationProblem::with_raw(Distribution::from_spec(d)?, raw, kernel),
            (Some(d), None) if kernel.degree() == 1 => PopulationProblem::univariate(Distribution::from_spec(d)?),
            (Some(_), None) => {
                return Err(AnalysisError::MissingRaw(format!("kernel `{}` has degree {}", kernel.id(), kernel.degree())).into())
            }
            (None, Some(raw)) => PopulationProblem::from_raw(raw, kernel)?,
            (None, None) => return Err(ConfigError::Invalid("problem needs `distribution` or `raw`".into())),
        };
        prob.validate()?;
        Ok(prob)
    }
}

/// Input of `estimate` and `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default = "schema_one")]
    pub schema: u32,
    #[serde(flatten)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

/// Read a JSON config, checking `"schema"` first.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })?;
    match value.get("schema") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => return Err(ConfigError::Schema { path: path.into(), found: v.to_string() }),
        None => return Err(ConfigError::Schema { path: path.into(), found: "none".into() }),
    }
    serde_json::from_value(value).map_err(|source| ConfigError::Json { path: path.into(), source })
}

/// Numeric CSV, one observation per row. A non-numeric first row is taken
/// as a header.
pub fn load_data(path: &Path) -> Result<Data, ConfigError> {
    let file = std::fs::File::open(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_data(file).map_err(|msg| ConfigError::Csv { path: path.into(), msg })
}

pub fn parse_data<R: std::io::Read>(input: R) -> Result<Data, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
                    return Err(format!("row {}: column {} is not finite", i + 1, bad + 1));
                }
                rows.push(v)
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(format!("row {}: {e}", i + 1)),
        }
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Data::from_rows(&rows).map_err(|e| e.to_string())
}
