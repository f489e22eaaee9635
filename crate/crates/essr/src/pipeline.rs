//! Data acquisition and the jump → drift → diffusion sequence.

use std::path::Path;

use essr_core::discovery::{run_diffusion, run_drift, run_jump, JumpStage, LearnedModel, MomentStage};
use essr_core::km::{partition_bins, BinGrid, MomentOptions};
use essr_core::sde::{generate_dataset, BoxDomain, SnapshotDataset};

use crate::config::{ConfigError, DataSource, DiscoveryConfig, StageConfig};
use crate::dataset::{self, FormatError};
use crate::report::{DatasetSummary, DiscoveryReport, JumpReport, MomentReport, StageReport, REPORT_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("dataset: {0}")]
    Data(#[from] FormatError),
    #[error("{0}")]
    Runtime(#[from] essr_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Jump,
    Drift,
    Diffusion,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Jump, Stage::Drift, Stage::Diffusion];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Jump => "jump",
            Stage::Drift => "drift",
            Stage::Diffusion => "diffusion",
        }
    }
}

/// A dataset plus the box it was drawn from, when known.
pub struct LoadedData {
    pub data: SnapshotDataset,
    pub domain: Option<BoxDomain>,
    pub summary: DatasetSummary,
}

pub fn simulate(cfg: &DiscoveryConfig) -> Result<LoadedData, PipelineError> {
    let DataSource::Simulate(sim) = &cfg.data else {
        return Err(ConfigError { path: "simulate".into(), message: "missing field `simulate`".into() }.into());
    };
    let model = sim.model()?;
    let domain = sim.domain()?;
    let data = generate_dataset(&model, &domain, sim.samples, sim.h, cfg.seed)?;
    let model_name = serde_json::to_value(sim.model).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let summary = DatasetSummary { dim: data.dim(), samples: data.len(), h: data.h(), source: format!("simulate:{model_name}") };
    Ok(LoadedData { data, domain: Some(domain), summary })
}

pub fn acquire(cfg: &DiscoveryConfig) -> Result<LoadedData, PipelineError> {
    match &cfg.data {
        DataSource::Simulate(_) => simulate(cfg),
        DataSource::File(f) => {
            let data = dataset::load(&f.path, f.h)?;
            let summary =
                DatasetSummary { dim: data.dim(), samples: data.len(), h: data.h(), source: f.path.display().to_string() };
            Ok(LoadedData { data, domain: None, summary })
        }
    }
}

fn bounding_box(data: &SnapshotDataset) -> Result<BoxDomain, PipelineError> {
    let n = data.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for z in data.z_flat().chunks_exact(n) {
        for k in 0..n {
            lo[k] = lo[k].min(z[k]);
            hi[k] = hi[k].max(z[k]);
        }
    }
    Ok(BoxDomain::new(lo, hi)?)
}

/// Intermediate products kept for the CSV exports.
#[derive(Default)]
pub struct Artifacts {
    pub jump: Option<JumpStage>,
    pub drift: Option<MomentStage>,
    pub diffusion: Option<MomentStage>,
}

impl Artifacts {
    /// `(file stem, model)` for every learned model.
    pub fn models(&self) -> Vec<(String, &LearnedModel)> {
        let mut out = Vec::new();
        if let Some(m) = self.jump.as_ref().and_then(|j| j.model.as_ref()) {
            out.push(("jump".to_string(), m));
        }
        for (name, stage) in [("drift", &self.drift), ("diffusion", &self.diffusion)] {
            if let Some(s) = stage {
                for (k, m) in s.models.iter().enumerate() {
                    let stem = if s.models.len() == 1 { name.to_string() } else { format!("{name}_g{k}") };
                    out.push((stem, m));
                }
            }
        }
        out
    }
}

pub struct Outcome {
    pub report: DiscoveryReport,
    pub artifacts: Artifacts,
}

fn check_groups(name: &str, stage: &StageConfig, outputs: usize) -> Result<(), ConfigError> {
    for (k, g) in stage.groups.iter().enumerate() {
        if let Some(o) = g.outputs.iter().find(|&&o| o >= outputs) {
            return Err(ConfigError {
                path: format!("{name}.groups[{k}].outputs"),
                message: format!("output {o} does not exist (this stage has {outputs})"),
            });
        }
    }
    Ok(())
}

/// Binning box and counts; configuration mistakes surface here.
fn grid_spec(cfg: &DiscoveryConfig, loaded: &LoadedData) -> Result<(BoxDomain, Vec<usize>), PipelineError> {
    let n = loaded.data.dim();
    let fallback = match &loaded.domain {
        Some(d) => d.clone(),
        None => bounding_box(&loaded.data)?,
    };
    Ok((cfg.preprocess.domain(n, &fallback)?, cfg.preprocess.bin_counts(n)?))
}

fn moment_options(cfg: &DiscoveryConfig, dim: usize) -> MomentOptions {
    let mut o = MomentOptions::new(cfg.preprocess.eps, dim);
    if let Some(m) = cfg.preprocess.min_occupancy {
        o.min_occupancy = m;
    }
    o
}

/// Runs `stages` (in pipeline order) on loaded data. A failed stage is
/// recorded in the report and the remaining stages still run; the
/// diffusion stage uses the jump stage's power law when it is available.
pub fn run_stages(cfg: &DiscoveryConfig, loaded: &LoadedData, stages: &[Stage]) -> Result<Outcome, PipelineError> {
    let data = &loaded.data;
    let n = data.dim();
    let drift_outputs = n;
    let diffusion_outputs = n * (n + 1) / 2;
    check_groups("drift", &cfg.drift, drift_outputs)?;
    check_groups("diffusion", &cfg.diffusion, diffusion_outputs)?;
    let wants = |s: Stage| stages.contains(&s);
    let mut artifacts = Artifacts::default();
    let mut report = DiscoveryReport {
        format: REPORT_FORMAT.into(),
        seed: cfg.seed,
        dataset: loaded.summary.clone(),
        config: serde_json::to_value(cfg).expect("configs serialize"),
        jump: None,
        drift: None,
        diffusion: None,
    };
    let needs_grid = (wants(Stage::Drift) && cfg.drift.enabled) || (wants(Stage::Diffusion) && cfg.diffusion.enabled);
    let grid: Option<Result<BinGrid, String>> = if needs_grid {
        let (domain, counts) = grid_spec(cfg, loaded)?;
        Some(partition_bins(data, &domain, &counts).map_err(|e| e.to_string()))
    } else {
        None
    };
    let moments = moment_options(cfg, n);

    if wants(Stage::Jump) {
        report.jump = Some(if !cfg.jump.enabled {
            StageReport::Disabled
        } else {
            match run_jump(data, &cfg.preprocess.rings(), &cfg.jump.settings(), cfg.seed) {
                Ok(stage) => {
                    let r = StageReport::Completed { result: JumpReport::new(&stage) };
                    artifacts.jump = Some(stage);
                    r
                }
                Err(e) => StageReport::Failed { error: e.to_string() },
            }
        });
    }

    if wants(Stage::Drift) {
        report.drift = Some(if !cfg.drift.enabled {
            StageReport::Disabled
        } else {
            match grid.as_ref().expect("grid built for drift") {
                Err(e) => StageReport::Failed { error: e.clone() },
                Ok(grid) => match run_drift(data, grid, &moments, &cfg.drift.output_groups(drift_outputs), cfg.seed) {
                    Ok(stage) => {
                        let r = StageReport::Completed { result: MomentReport::new(&stage, grid.bin_count()) };
                        artifacts.drift = Some(stage);
                        r
                    }
                    Err(e) => StageReport::Failed { error: e.to_string() },
                },
            }
        });
    }

    if wants(Stage::Diffusion) {
        report.diffusion = Some(if !cfg.diffusion.enabled {
            StageReport::Disabled
        } else {
            match grid.as_ref().expect("grid built for diffusion") {
                Err(e) => StageReport::Failed { error: e.clone() },
                Ok(grid) => {
                    let tail = artifacts.jump.as_ref().and_then(JumpStage::tail);
                    let groups = cfg.diffusion.output_groups(diffusion_outputs);
                    match run_diffusion(data, grid, &moments, tail.as_ref(), &groups, cfg.seed) {
                        Ok(stage) => {
                            let r = StageReport::Completed { result: MomentReport::new(&stage, grid.bin_count()) };
                            artifacts.diffusion = Some(stage);
                            r
                        }
                        Err(e) => StageReport::Failed { error: e.to_string() },
                    }
                }
            }
        });
    }
    Ok(Outcome { report, artifacts })
}

/// Simulates or loads the data, then runs every stage.
pub fn run_full(cfg: &DiscoveryConfig) -> Result<Outcome, PipelineError> {
    let loaded = acquire(cfg)?;
    run_stages(cfg, &loaded, &Stage::ALL)
}

/// Runs one stage; diffusion also runs the jump stage for its correction.
pub fn run_single(cfg: &DiscoveryConfig, stage: Stage) -> Result<Outcome, PipelineError> {
    let loaded = acquire(cfg)?;
    let stages: &[Stage] = match stage {
        Stage::Diffusion => &[Stage::Jump, Stage::Diffusion],
        Stage::Jump => &[Stage::Jump],
        Stage::Drift => &[Stage::Drift],
    };
    run_stages(cfg, &loaded, stages)
}

pub fn write_dataset(path: &Path, data: &SnapshotDataset) -> Result<(), PipelineError> {
    Ok(dataset::save(path, data)?)
}
