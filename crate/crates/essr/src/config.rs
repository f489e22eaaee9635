//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//!
//! [simulate]
//! model = "maier_stein"
//! samples = 1_000_000
//! h = 0.001
//!
//! [preprocess]
//! bins = [20, 20]
//!
//! [jump]
//! population = 500
//!
//! [drift]
//! groups = [{ outputs = [0] }, { outputs = [1], tau2 = 0.09 }]
//! ```
//!
//! Stage tables accept `enabled`, `restarts`, `functions`, `groups` and
//! any GP hyperparameter; unset hyperparameters keep the stage defaults.

use std::fmt;
use std::path::PathBuf;

use essr_core::discovery::{OutputGroup, RingOptions, StageSettings};
use essr_core::evolution::GpConfig;
use essr_core::expr::FunctionSet;
use essr_core::sde::{BoxDomain, SdeModel, StableSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A configuration problem, located by its dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MaierStein,
    Chaotic3d,
    OrnsteinUhlenbeck,
    PureJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub alpha: f64,
    /// Zero disables the Lévy component.
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub model: ModelKind,
    pub samples: usize,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Model dimension for `ornstein_uhlenbeck` and `pure_jump`.
    pub dim: Option<usize>,
    /// Lower corner of the sampling box; one value is broadcast.
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub jump: Option<JumpSpec>,
    /// Mean-reversion rate and noise level of `ornstein_uhlenbeck`.
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
}

fn default_h() -> f64 {
    1e-3
}

impl Simulation {
    pub fn dim(&self) -> usize {
        match self.model {
            ModelKind::MaierStein => 2,
            ModelKind::Chaotic3d => 3,
            ModelKind::OrnsteinUhlenbeck | ModelKind::PureJump => self.dim.unwrap_or(1),
        }
    }

    fn default_half_width(&self) -> f64 {
        match self.model {
            ModelKind::MaierStein => 2.0,
            ModelKind::Chaotic3d => 3.0,
            _ => 1.0,
        }
    }

    pub fn domain(&self) -> Result<BoxDomain, ConfigError> {
        let w = self.default_half_width();
        box_from(self.lo.as_deref(), self.hi.as_deref(), self.dim(), -w, w, "simulate")
    }

    pub fn model(&self) -> Result<SdeModel, ConfigError> {
        let n = self.dim();
        let jump = match self.jump {
            Some(j) if j.sigma2 == 0.0 => None,
            Some(j) => Some(StableSpec::new(j.alpha, j.sigma2, n).map_err(|e| ConfigError::new("simulate.jump", e))?),
            None => match self.model {
                ModelKind::MaierStein | ModelKind::PureJump => Some(StableSpec { alpha: 1.5, sigma2: 1.0, dim: n }),
                ModelKind::Chaotic3d => Some(StableSpec { alpha: 0.5, sigma2: 0.5, dim: 3 }),
                ModelKind::OrnsteinUhlenbeck => None,
            },
        };
        if self.dim.is_some_and(|d| d != n) {
            return Err(ConfigError::new("simulate.dim", format!("this model has dimension {n}")));
        }
        if n == 0 {
            return Err(ConfigError::new("simulate.dim", "must be at least 1"));
        }
        match self.model {
            ModelKind::MaierStein => Ok(SdeModel::maier_stein_with_jump(jump)),
            ModelKind::Chaotic3d => Ok(SdeModel::chaotic_3d_with_jump(jump)),
            ModelKind::OrnsteinUhlenbeck => {
                SdeModel::ornstein_uhlenbeck(n, self.theta.unwrap_or(1.0), self.sigma.unwrap_or(1.0), jump)
                    .map_err(|e| ConfigError::new("simulate", e))
            }
            ModelKind::PureJump => {
                let spec = jump.ok_or_else(|| ConfigError::new("simulate.jump.sigma2", "a pure-jump model needs sigma2 > 0"))?;
                Ok(SdeModel::pure_jump(spec))
            }
        }
    }
}

fn box_from(lo: Option<&[f64]>, hi: Option<&[f64]>, dim: usize, dlo: f64, dhi: f64, path: &str) -> Result<BoxDomain, ConfigError> {
    let expand = |v: Option<&[f64]>, d: f64, key: &str| -> Result<Vec<f64>, ConfigError> {
        match v {
            None => Ok(vec![d; dim]),
            Some([one]) => Ok(vec![*one; dim]),
            Some(v) if v.len() == dim => Ok(v.to_vec()),
            Some(v) => Err(ConfigError::new(format!("{path}.{key}"), format!("expected 1 or {dim} values, found {}", v.len()))),
        }
    };
    let lo = expand(lo, dlo, "lo")?;
    let hi = expand(hi, dhi, "hi")?;
    BoxDomain::new(lo, hi).map_err(|e| ConfigError::new(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    pub path: PathBuf,
    /// Time step, required for CSV input.
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    File(DataFile),
    Simulate(Simulation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Preprocess {
    /// Small-jump radius ε.
    pub eps: f64,
    /// Ring ratio m.
    pub m: f64,
    /// Ring count N.
    pub rings: usize,
    /// Bins per axis; defaults to 20 (9 from three dimensions up).
    pub bins: Option<Vec<usize>>,
    /// Binning box; defaults to the simulation box or the range of `Z`.
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub min_occupancy: Option<usize>,
}

impl Default for Preprocess {
    fn default() -> Self {
        let r = RingOptions::default();
        Self { eps: r.eps, m: r.m, rings: r.rings, bins: None, lo: None, hi: None, min_occupancy: None }
    }
}

impl Preprocess {
    pub fn rings(&self) -> RingOptions {
        RingOptions { eps: self.eps, m: self.m, rings: self.rings }
    }

    pub fn bin_counts(&self, dim: usize) -> Result<Vec<usize>, ConfigError> {
        match &self.bins {
            None => Ok(vec![if dim >= 3 { 9 } else { 20 }; dim]),
            Some(b) if b.len() == 1 => Ok(vec![b[0]; dim]),
            Some(b) if b.len() == dim => Ok(b.clone()),
            Some(b) => Err(ConfigError::new("preprocess.bins", format!("expected 1 or {dim} values, found {}", b.len()))),
        }
    }

    /// Binning box, falling back to `fallback` per unset side.
    pub fn domain(&self, dim: usize, fallback: &BoxDomain) -> Result<BoxDomain, ConfigError> {
        let lo = self.lo.clone().unwrap_or_else(|| fallback.lo().to_vec());
        let hi = self.hi.clone().unwrap_or_else(|| fallback.hi().to_vec());
        box_from(Some(&lo), Some(&hi), dim, 0.0, 0.0, "preprocess")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupConfig {
    pub outputs: Vec<usize>,
    pub gp: GpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageConfig {
    pub enabled: bool,
    pub restarts: usize,
    pub functions: Vec<String>,
    pub gp: GpConfig,
    /// Empty means one group holding every output.
    pub groups: Vec<GroupConfig>,
}

impl StageConfig {
    fn from_settings(s: StageSettings) -> Self {
        Self { enabled: true, restarts: s.restarts, functions: s.functions.names(), gp: s.gp, groups: Vec::new() }
    }

    pub fn settings(&self) -> StageSettings {
        self.settings_with(self.gp.clone())
    }

    fn settings_with(&self, gp: GpConfig) -> StageSettings {
        let functions = FunctionSet::from_names(&self.functions).expect("validated when parsed");
        StageSettings { gp, functions, restarts: self.restarts }
    }

    /// Output groups for a training set with `outputs` outputs.
    pub fn output_groups(&self, outputs: usize) -> Vec<OutputGroup> {
        if self.groups.is_empty() {
            return vec![OutputGroup { outputs: (0..outputs).collect(), settings: self.settings() }];
        }
        self.groups.iter().map(|g| OutputGroup { outputs: g.outputs.clone(), settings: self.settings_with(g.gp.clone()) }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveryConfig {
    pub seed: u64,
    pub data: DataSource,
    pub preprocess: Preprocess,
    pub jump: StageConfig,
    pub drift: StageConfig,
    pub diffusion: StageConfig,
}

impl DiscoveryConfig {
    pub fn dim(&self) -> Option<usize> {
        match &self.data {
            DataSource::Simulate(s) => Some(s.dim()),
            DataSource::File(_) => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    data: Option<DataFile>,
    simulate: Option<Simulation>,
    #[serde(default)]
    preprocess: Preprocess,
    jump: Option<toml::Table>,
    drift: Option<toml::Table>,
    diffusion: Option<toml::Table>,
}

fn deserialize_at<T: DeserializeOwned>(value: toml::Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (_, ".") => prefix.to_string(),
            (true, p) => p.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        ConfigError::new(path, e.into_inner())
    })
}

fn take<T: DeserializeOwned>(table: &mut toml::Table, key: &str, prefix: &str) -> Result<Option<T>, ConfigError> {
    table.remove(key).map(|v| deserialize_at(v, &format!("{prefix}.{key}"))).transpose()
}

/// Overlays the keys of `overrides` on `base`.
fn merge_gp(base: &GpConfig, overrides: toml::Table, path: &str) -> Result<GpConfig, ConfigError> {
    let mut table = toml::Table::try_from(base).map_err(|e| ConfigError::new(path, e))?;
    table.extend(overrides);
    let gp: GpConfig = deserialize_at(toml::Value::Table(table), path)?;
    gp.validate().map_err(|e| ConfigError::new(path, e))?;
    Ok(gp)
}

fn parse_stage(name: &str, defaults: StageSettings, table: Option<toml::Table>) -> Result<StageConfig, ConfigError> {
    let mut stage = StageConfig::from_settings(defaults);
    let Some(mut table) = table else { return Ok(stage) };
    if let Some(v) = take(&mut table, "enabled", name)? {
        stage.enabled = v;
    }
    if let Some(v) = take::<usize>(&mut table, "restarts", name)? {
        if v == 0 {
            return Err(ConfigError::new(format!("{name}.restarts"), "must be at least 1"));
        }
        stage.restarts = v;
    }
    if let Some(v) = take::<Vec<String>>(&mut table, "functions", name)? {
        FunctionSet::from_names(&v).map_err(|e| ConfigError::new(format!("{name}.functions"), e))?;
        stage.functions = v;
    }
    let groups: Option<Vec<toml::Table>> = take(&mut table, "groups", name)?;
    stage.gp = merge_gp(&stage.gp, table, name)?;
    for (k, mut g) in groups.unwrap_or_default().into_iter().enumerate() {
        let path = format!("{name}.groups[{k}]");
        let outputs: Vec<usize> =
            take(&mut g, "outputs", &path)?.ok_or_else(|| ConfigError::new(format!("{path}.outputs"), "missing field `outputs`"))?;
        if outputs.is_empty() {
            return Err(ConfigError::new(format!("{path}.outputs"), "must name at least one output"));
        }
        let gp = merge_gp(&stage.gp, g, &path)?;
        stage.groups.push(GroupConfig { outputs, gp });
    }
    Ok(stage)
}

pub fn parse_config(text: &str) -> Result<DiscoveryConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("", e.message()))?;
    let raw: RawConfig = deserialize_at(toml::Value::Table(table), "")?;
    let data = match (raw.data, raw.simulate) {
        (Some(d), None) => DataSource::File(d),
        (None, Some(s)) => {
            if s.samples == 0 {
                return Err(ConfigError::new("simulate.samples", "must be at least 1"));
            }
            if !(s.h > 0.0 && s.h.is_finite()) {
                return Err(ConfigError::new("simulate.h", "must be positive"));
            }
            s.model()?;
            s.domain()?;
            DataSource::Simulate(s)
        }
        (Some(_), Some(_)) => return Err(ConfigError::new("", "give either [data] or [simulate], not both")),
        (None, None) => return Err(ConfigError::new("", "missing field `data` or `simulate`")),
    };
    let p = &raw.preprocess;
    if !(p.eps > 0.0 && p.eps.is_finite()) {
        return Err(ConfigError::new("preprocess.eps", "must be positive"));
    }
    if !(p.m > 1.0 && p.m.is_finite()) {
        return Err(ConfigError::new("preprocess.m", "must exceed 1"));
    }
    if p.rings == 0 {
        return Err(ConfigError::new("preprocess.rings", "must be at least 1"));
    }
    if p.bins.as_ref().is_some_and(|b| b.is_empty() || b.contains(&0)) {
        return Err(ConfigError::new("preprocess.bins", "bin counts must be positive"));
    }
    let cfg = DiscoveryConfig {
        seed: raw.seed,
        data,
        preprocess: raw.preprocess,
        jump: parse_stage("jump", StageSettings::jump(), raw.jump)?,
        drift: parse_stage("drift", StageSettings::drift(), raw.drift)?,
        diffusion: parse_stage("diffusion", StageSettings::diffusion(), raw.diffusion)?,
    };
    if let Some(n) = cfg.dim() {
        cfg.preprocess.bin_counts(n)?;
    }
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<DiscoveryConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
