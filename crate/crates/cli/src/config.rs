//! Run configuration: a single JSON document, optionally one of the shipped
//! presets, with command-line overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use lottery_core::{StepSchedule, Window};
use lottery_models::{IcMode, MoralHazardModel, MoralHazardParams, TaxEconomy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const PRESETS: [(&str, &str); 4] = [
    ("example1", include_str!("../presets/example1.json")),
    ("judd25", include_str!("../presets/judd25.json")),
    ("tiny", include_str!("../presets/tiny.json")),
    ("convex", include_str!("../presets/convex.json")),
];

pub const DEFAULT_LADDER: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    MoralHazard(MoralHazardParams),
    Taxation(TaxationConfig),
    /// Model section read from another file, relative to the config.
    Custom {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxationConfig {
    pub economy: EconomySpec,
    #[serde(default)]
    pub mode: IcMode,
    /// Overrides the economy's labor bound.
    #[serde(default)]
    pub ell_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EconomySpec {
    Named(String),
    Inline(TaxEconomy),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerChoice {
    #[default]
    Foc,
    Grid {
        points: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    /// Multiplier on the resource row.
    #[serde(default = "half")]
    pub resource: f64,
    /// Multiplier on every incentive row.
    #[serde(default)]
    pub incentive: f64,
}

fn half() -> f64 {
    0.5
}

impl Default for Initial {
    fn default() -> Self {
        Self { resource: 0.5, incentive: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Consumption grid step for the LP.
    pub c_step: f64,
    pub max_nonzeros: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { c_step: 0.01, max_nonzeros: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub schedule: Option<StepSchedule>,
    #[serde(default)]
    pub n_iters: Option<usize>,
    /// `"A:B"`, 1-based and inclusive.
    #[serde(default)]
    pub window: Option<String>,
    #[serde(default)]
    pub cluster_tol: Option<f64>,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub inner: InnerChoice,
    /// Present to enable LP solves in `compare` and `benchmark`.
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "one")]
    pub trajectory_stride: usize,
    #[serde(default)]
    pub ladder: Option<Vec<f64>>,
    #[serde(default = "three")]
    pub benchmark_repeats: usize,
}

fn one() -> usize {
    1
}

fn three() -> usize {
    3
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub iters: Option<usize>,
    pub window: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum ResolvedModel {
    MoralHazard(MoralHazardModel),
    Taxation { economy: TaxEconomy, mode: IcMode },
}

/// Validated settings with model-specific defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: ResolvedModel,
    pub schedule: StepSchedule,
    pub n_iters: usize,
    pub window: Window,
    pub cluster_tol: f64,
    pub initial: Initial,
    pub inner: InnerChoice,
    pub stride: usize,
}

pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    if let ModelConfig::Custom { path: rel } = &cfg.model {
        let full = path.parent().unwrap_or(Path::new(".")).join(rel);
        let text = fs::read_to_string(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
        let model: ModelConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("{}: line {} column {}: {e}", full.display(), e.line(), e.column()))
        })?;
        if matches!(model, ModelConfig::Custom { .. }) {
            return Err(CliError::Config(format!("{}: custom models cannot nest", full.display())));
        }
        cfg.model = model;
    }
    Ok(cfg)
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    parse_config(text, &format!("preset {name}"))
}

fn field(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{name}`: {msg}"))
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.iters {
            self.n_iters = Some(n);
        }
        if let Some(w) = &o.window {
            self.window = Some(w.clone());
        }
        if let Some(out) = &o.out {
            self.out_dir = Some(out.clone());
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn ladder(&self) -> Vec<f64> {
        self.ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec())
    }

    pub fn oracle_or_default(&self) -> OracleConfig {
        self.oracle.unwrap_or_default()
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        if self.trajectory_stride == 0 {
            return Err(field("trajectory_stride", "must be at least 1"));
        }
        if let Some(o) = &self.oracle {
            if !(o.c_step > 0.0) {
                return Err(field("oracle.c_step", "must be positive"));
            }
        }
        for (name, v) in [("initial.resource", self.initial.resource), ("initial.incentive", self.initial.incentive)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(field(name, format!("{v} is not a nonnegative number")));
            }
        }
        let cluster_tol = self.cluster_tol.unwrap_or(1e-2);
        if !(cluster_tol >= 0.0) {
            return Err(field("cluster_tol", "must be nonnegative"));
        }
        let (model, default_schedule, default_iters) = match &self.model {
            ModelConfig::MoralHazard(p) => {
                let m = MoralHazardModel::new(p.clone()).map_err(|e| field("model", e))?;
                let schedule = StepSchedule::new(1.0, 1.0 / (p.da * p.da), 0.8).map_err(|e| field("model.da", e))?;
                (ResolvedModel::MoralHazard(m), schedule, (100.0 / p.da).round() as usize)
            }
            ModelConfig::Taxation(t) => {
                let mut economy = match &t.economy {
                    EconomySpec::Named(n) if n == "judd25" => TaxEconomy::judd25(),
                    EconomySpec::Named(n) => return Err(field("model.economy", format!("unknown economy `{n}`"))),
                    EconomySpec::Inline(e) => e.clone(),
                };
                if let Some(l) = t.ell_max {
                    economy.ell_max = l;
                }
                economy.validate().map_err(|e| field("model.economy", e))?;
                if matches!(self.inner, InnerChoice::Grid { .. }) {
                    return Err(field("inner", "taxation runs use the per-type solver; use \"foc\""));
                }
                let schedule = StepSchedule::new(0.05, 0.0, 0.51).expect("valid");
                (ResolvedModel::Taxation { economy, mode: t.mode }, schedule, 100_000)
            }
            ModelConfig::Custom { .. } => {
                return Err(field("model", "custom models must be loaded from a file"));
            }
        };
        let n_iters = self.n_iters.unwrap_or(default_iters);
        if n_iters == 0 {
            return Err(field("n_iters", "must be positive"));
        }
        let window = match &self.window {
            Some(w) => w.parse::<Window>().map_err(|e| field("window", e))?,
            None => match model {
                ResolvedModel::MoralHazard(_) => {
                    Window::new(((0.95 * n_iters as f64).round() as usize).max(1), n_iters)
                }
                ResolvedModel::Taxation { .. } => Window::default_for(n_iters),
            },
        };
        window.check(n_iters).map_err(|e| field("window", e))?;
        if let InnerChoice::Grid { points } = &self.inner {
            if points.len() != 2 || points.iter().any(|&p| p < 2) {
                return Err(field("inner.grid.points", "need two axes of at least 2 points"));
            }
        }
        Ok(Resolved {
            model,
            schedule: self.schedule.unwrap_or(default_schedule),
            n_iters,
            window,
            cluster_tol,
            initial: self.initial,
            inner: self.inner.clone(),
            stride: self.trajectory_stride,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_resolve() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn hash_ignores_the_output_directory() {
        let mut a = preset("example1").unwrap();
        let h = a.hash();
        a.out_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.n_iters = Some(10);
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let mut cfg = preset("example1").unwrap();
        cfg.n_iters = Some(0);
        assert!(cfg.resolve().unwrap_err().to_string().contains("n_iters"));
        let err =
            parse_config("{\"model\": {\"kind\": \"moral_hazard\", \"da\": 0.1, \"bogus\": 1}}", "x").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(err.to_string().contains("line 1"));
    }
}
