//! Experiment configuration read from TOML.
//!
//! ```toml
//! sweep = "obolor_sweep"      # entropy_sweep | obolor_sweep | bounds_suite | gibbs_suite
//! seed = 7
//! output_dir = "out"
//!
//! [model]
//! name = "tfi"                # tfi {h, g} | xxz {delta_z} | oscillator {n_levels, coupling}
//! h = 2.0
//!
//! [[contrast]]                # optional extra models, recorded but never gating
//! name = "tfi"
//! h = 1.0
//!
//! [grid]
//! d = [8]
//! j = [4]                     # default: ⌊d/2⌋
//! l = [0, 1, 2]               # default: 0..=2
//! q = [0.5]                   # default: the filter width chosen from l and the gap
//! energy = [1.0]              # gibbs_suite, reference spectrum
//! energy_fraction = [0.25]    # gibbs_suite, model spectra
//!
//! [filter]
//! constant = 8.0
//! tau_scale = 1.0
//!
//! [tolerances]
//! saturation = 0.05
//! refine = 1e-6
//! slack = 1e-9
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nnichain::locality_filters::{DEFAULT_FILTER_CONSTANT, DEFAULT_TAU_SCALE};
use nnichain::nni_hamiltonian::{ModelSpec, ASSEMBLY_CAP, DENSE_EIGEN_CAP};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUTPUT_DIR_ENV: &str = "NNICHAIN_OUTPUT_DIR";

/// Named tolerances with their defaults.
pub const KNOWN_TOLERANCES: [(&str, f64); 3] =
    [("saturation", 0.05), ("refine", 1e-6), ("slack", 1e-9)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    EntropySweep,
    ObolorSweep,
    BoundsSuite,
    GibbsSuite,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::EntropySweep => "entropy_sweep",
            SweepKind::ObolorSweep => "obolor_sweep",
            SweepKind::BoundsSuite => "bounds_suite",
            SweepKind::GibbsSuite => "gibbs_suite",
        }
    }

    fn needs_full_spectrum(self) -> bool {
        !matches!(self, SweepKind::EntropySweep)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub d: Vec<usize>,
    pub j: Option<Vec<usize>>,
    pub l: Option<Vec<usize>>,
    pub q: Option<Vec<f64>>,
    pub energy: Option<Vec<f64>>,
    pub energy_fraction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSettings {
    pub constant: f64,
    pub tau_scale: f64,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            constant: DEFAULT_FILTER_CONSTANT,
            tau_scale: DEFAULT_TAU_SCALE,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sweep: SweepKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub model: ModelSpec,
    #[serde(default)]
    pub contrast: Vec<ModelSpec>,
    pub grid: Grid,
    #[serde(default)]
    pub filter: FilterSettings,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("nnichain-out")
}

/// Dotted key path (`table.key`) of the assignment containing byte `offset`.
fn field_at(text: &str, offset: usize) -> Option<String> {
    let mut table: Option<String> = None;
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        let end = start + line.len();
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            let name = trimmed.trim_matches(|c| c == '[' || c == ']').trim();
            table = Some(name.to_string());
        }
        if offset < end || end == text.len() {
            let key = trimmed.split_once('=').map(|(k, _)| k.trim())?;
            if key.is_empty() {
                return None;
            }
            return Some(match table {
                Some(t) => format!("{t}.{key}"),
                None => key.to_string(),
            });
        }
        start = end;
    }
    None
}

/// Name of the table whose header is the last one before byte `offset`.
fn table_at(text: &str, offset: usize) -> Option<String> {
    let mut table = None;
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        if start > offset {
            break;
        }
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = Some(trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string());
        }
        start += line.len();
    }
    table
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn non_empty<T>(field: &str, v: &Option<Vec<T>>) -> Result<(), CliError> {
    match v {
        Some(xs) if xs.is_empty() => Err(config_error(field, "grid must not be empty")),
        _ => Ok(()),
    }
}

fn positive_reals(field: &str, v: &Option<Vec<f64>>) -> Result<(), CliError> {
    non_empty(field, v)?;
    if let Some(bad) = v.iter().flatten().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(config_error(field, format!("entries must be finite and > 0, got {bad}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let missing = e
                .message()
                .strip_prefix("missing field `")
                .and_then(|m| m.split('`').next());
            let field = match (missing, e.span()) {
                (Some(name), Some(span)) => Some(match table_at(text, span.start) {
                    Some(t) => format!("{t}.{name}"),
                    None => name.to_string(),
                }),
                (_, span) => span.and_then(|span| field_at(text, span.start)),
            };
            match field {
                Some(f) => CliError::Config(format!("{f}: {}", e.message())),
                None => CliError::Config(e.to_string()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn models(&self) -> Vec<ModelSpec> {
        std::iter::once(self.model.clone()).chain(self.contrast.iter().cloned()).collect()
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            KNOWN_TOLERANCES
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .expect("unknown tolerance name")
        })
    }

    /// Output directory, with the environment override applied.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.d.is_empty() {
            return Err(config_error("grid.d", "grid must not be empty"));
        }
        if let Some(&d) = self.grid.d.iter().find(|&&d| d < 2) {
            return Err(config_error("grid.d", format!("chains need at least 2 sites, got {d}")));
        }
        non_empty("grid.j", &self.grid.j)?;
        non_empty("grid.l", &self.grid.l)?;
        positive_reals("grid.q", &self.grid.q)?;
        positive_reals("grid.energy", &self.grid.energy)?;
        non_empty("grid.energy_fraction", &self.grid.energy_fraction)?;
        if let Some(bad) = self
            .grid
            .energy_fraction
            .iter()
            .flatten()
            .find(|f| !(**f > 0.0 && **f < 1.0))
        {
            return Err(config_error("grid.energy_fraction", format!("entries must lie in (0,1), got {bad}")));
        }
        if !(self.filter.constant > 0.0) || !self.filter.constant.is_finite() {
            return Err(config_error("filter.constant", "must be finite and > 0"));
        }
        if !(self.filter.tau_scale > 0.0) || !self.filter.tau_scale.is_finite() {
            return Err(config_error("filter.tau_scale", "must be finite and > 0"));
        }
        for (name, value) in &self.tolerances {
            if !KNOWN_TOLERANCES.iter().any(|(k, _)| k == name) {
                let known: Vec<&str> = KNOWN_TOLERANCES.iter().map(|(k, _)| *k).collect();
                return Err(config_error(
                    &format!("tolerances.{name}"),
                    format!("unknown tolerance (known: {})", known.join(", ")),
                ));
            }
            if !(*value > 0.0) || !value.is_finite() {
                return Err(config_error(&format!("tolerances.{name}"), "must be finite and > 0"));
            }
        }
        for model in self.models() {
            self.check_caps(&model)?;
        }
        Ok(())
    }

    fn check_caps(&self, model: &ModelSpec) -> Result<(), CliError> {
        let cap = if self.sweep.needs_full_spectrum() { DENSE_EIGEN_CAP } else { ASSEMBLY_CAP };
        for &d in &self.grid.d {
            let dim = (model.local_dim() as f64).powi(d as i32);
            if dim > cap as f64 {
                return Err(CliError::Cap(format!(
                    "{} with d = {d} has dimension {dim} above the {} cap {cap}",
                    model.label(),
                    self.sweep.name()
                )));
            }
        }
        Ok(())
    }
}
