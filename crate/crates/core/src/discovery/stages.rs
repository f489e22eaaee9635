use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::power_law::{infer_stable_params, learned_radial, power_law_fit, PowerLawFit, StableEstimate, POWER_LAW_SAMPLES};
use crate::evolution::{evolve, GenerationRecord, GpConfig};
use crate::expr::{FunctionSet, Individual};
use crate::km::{
    build_ring_training, local_diffusion_fit, local_drift_fit, tail_correction, BinGrid, JumpTail,
    LocalMomentTraining, MomentOptions, RingTrainingSet,
};
use crate::regression::{hard_threshold_prune, RegressionProblem};
use crate::rng::derive_seed;
use crate::sde::SnapshotDataset;
use crate::Error;

const JUMP_TAG: u64 = 0x1a;
const DRIFT_TAG: u64 = 0xd1;
const DIFFUSION_TAG: u64 = 0xdf;

/// GP settings for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSettings {
    pub gp: GpConfig,
    pub functions: FunctionSet,
    /// Independent seeds tried; the lowest final loss is kept.
    pub restarts: usize,
}

impl StageSettings {
    /// Jump-measure stage of the planar Maier–Stein experiment.
    pub fn jump() -> Self {
        Self {
            gp: GpConfig {
                population: 500,
                generations: 100,
                init_candidates: 5,
                n_thre: 20,
                schedule_loss: 1e-5,
                e_thre: 5e-7,
                tau2: 0.1,
                ..GpConfig::default()
            },
            functions: FunctionSet::without_sin(),
            restarts: 1,
        }
    }

    pub fn drift() -> Self {
        Self {
            gp: GpConfig {
                population: 1000,
                generations: 100,
                init_candidates: 20,
                n_thre: 50,
                schedule_loss: 0.1,
                e_thre: 1e-3,
                tau2: 0.02,
                ..GpConfig::default()
            },
            functions: FunctionSet::full(),
            restarts: 1,
        }
    }

    pub fn diffusion() -> Self {
        Self {
            gp: GpConfig {
                population: 1000,
                generations: 100,
                init_candidates: 20,
                n_thre: 50,
                schedule_loss: 5e-3,
                e_thre: 1e-4,
                tau2: 0.04,
                ..GpConfig::default()
            },
            functions: FunctionSet::full(),
            restarts: 1,
        }
    }
}

/// Outcome of the GP search for one group of outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    /// Indices into the training outputs.
    pub outputs: Vec<usize>,
    /// Candidates with nonzero coefficients after hard-thresholding,
    /// least-squares coefficients.
    pub individual: Individual,
    pub loss: f64,
    pub history: Vec<GenerationRecord>,
    pub generations: usize,
    pub reached_target: bool,
    pub seed: u64,
    /// Final loss of every restart, in order.
    pub restart_losses: Vec<f64>,
}

fn zero_model_loss(problem: &RegressionProblem) -> f64 {
    let t = problem.targets();
    let n: usize = t.iter().map(Vec::len).sum();
    t.iter().flatten().map(|v| v * v).sum::<f64>() / n as f64
}

/// Drops zero-coefficient candidates, then hard-thresholds and refits.
pub fn finalize_individual(ind: &Individual, problem: &RegressionProblem, rho: f64) -> Result<Individual, Error> {
    let active: Vec<_> = if ind.is_fitted() {
        (0..ind.candidates.len()).filter(|&j| ind.coefficient_magnitude(j) != 0.0).map(|j| ind.candidates[j].clone()).collect()
    } else {
        Vec::new()
    };
    if active.is_empty() {
        let mut out = Individual::new(Vec::new());
        out.outputs = problem.outputs();
        out.loss = zero_model_loss(problem);
        return Ok(out);
    }
    let design = problem.design(&active)?;
    let (out, _) = hard_threshold_prune(&Individual::new(active), &design, rho);
    Ok(out)
}

/// Runs `settings.restarts` searches with seeds derived from `(seed, tags)`.
pub fn search(
    problem: &RegressionProblem,
    settings: &StageSettings,
    outputs: Vec<usize>,
    seed: u64,
    tags: &[u64],
) -> Result<LearnedModel, Error> {
    let mut best: Option<LearnedModel> = None;
    let mut losses = Vec::new();
    for r in 0..settings.restarts.max(1) {
        let mut t = tags.to_vec();
        t.push(r as u64);
        let s = derive_seed(seed, &t);
        let res = evolve(problem, &settings.functions, &settings.gp, s)?;
        let individual = finalize_individual(&res.best, problem, settings.gp.rho)?;
        losses.push(individual.loss);
        if best.as_ref().is_none_or(|b| individual.loss < b.loss) {
            best = Some(LearnedModel {
                outputs: outputs.clone(),
                loss: individual.loss,
                individual,
                history: res.history,
                generations: res.generations,
                reached_target: res.reached_target,
                seed: s,
                restart_losses: Vec::new(),
            });
        }
    }
    let mut best = best.expect("at least one restart runs");
    best.restart_losses = losses;
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RingOptions {
    pub eps: f64,
    pub m: f64,
    pub rings: usize,
}

impl Default for RingOptions {
    fn default() -> Self {
        Self { eps: 1.0, m: 1.5, rings: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpStage {
    pub training: RingTrainingSet,
    /// `None` when no displacement reached the rings.
    pub model: Option<LearnedModel>,
    pub power_law: Option<PowerLawFit>,
    pub stable: Option<StableEstimate>,
    pub notes: Vec<String>,
}

impl JumpStage {
    /// Tail used for the small-jump correction of the diffusion stage.
    pub fn tail(&self) -> Option<JumpTail> {
        self.power_law.map(|p| JumpTail::PowerLaw { prefactor: p.prefactor, exponent: p.exponent })
    }

    pub fn levy_absent(&self) -> bool {
        self.training.is_empty_signal()
    }
}

/// Learns the radial jump density from ring counts and reads `(α, σ₂)`
/// off its power-law fit.
pub fn run_jump(data: &SnapshotDataset, opts: &RingOptions, settings: &StageSettings, seed: u64) -> Result<JumpStage, Error> {
    let training = build_ring_training(data, opts.eps, opts.m, opts.rings)?;
    let mut stage = JumpStage { training, model: None, power_law: None, stable: None, notes: Vec::new() };
    if stage.training.is_empty_signal() {
        stage.notes.push("no displacement fell in any ring; no Lévy component detected".into());
        return Ok(stage);
    }
    let empty = stage.training.counts.iter().filter(|&&c| c == 0).count();
    if empty > 0 {
        stage.notes.push(format!("{empty} of {} rings are empty", stage.training.rings));
    }
    let problem = RegressionProblem::rings(&stage.training.edges, stage.training.targets.clone())?;
    let model = search(&problem, settings, alloc::vec![0], seed, &[JUMP_TAG])?;
    let (lo, hi) = (stage.training.edges[0], stage.training.outer_radius());
    match power_law_fit(|r| learned_radial(&model.individual, r), lo, hi, POWER_LAW_SAMPLES) {
        Ok(fit) => {
            stage.power_law = Some(fit);
            match infer_stable_params(fit.prefactor, fit.exponent, data.dim()) {
                Ok(s) => stage.stable = Some(s),
                Err(e) => stage.notes.push(format!("jump kernel is not α-stable: {e}")),
            }
        }
        Err(e) => stage.notes.push(format!("power-law fit failed: {e}")),
    }
    stage.model = Some(model);
    Ok(stage)
}

/// A set of outputs searched jointly with their own settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGroup {
    pub outputs: Vec<usize>,
    pub settings: StageSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentStage {
    pub training: LocalMomentTraining,
    /// Row-major `S(ε)` subtracted from the second moments.
    pub correction: Option<Vec<f64>>,
    pub models: Vec<LearnedModel>,
}

fn validate_groups(groups: &[OutputGroup], outputs: usize) -> Result<(), Error> {
    if groups.is_empty() {
        return Err(Error::InvalidInput("at least one output group is required".into()));
    }
    for g in groups {
        if g.outputs.is_empty() {
            return Err(Error::InvalidInput("output groups must not be empty".into()));
        }
        if let Some(&o) = g.outputs.iter().find(|&&o| o >= outputs) {
            return Err(Error::InvalidInput(format!("output {o} does not exist (there are {outputs})")));
        }
    }
    Ok(())
}

fn run_groups(training: &LocalMomentTraining, groups: &[OutputGroup], seed: u64, tag: u64) -> Result<Vec<LearnedModel>, Error> {
    validate_groups(groups, training.outputs())?;
    let mut models = Vec::with_capacity(groups.len());
    for (k, g) in groups.iter().enumerate() {
        let t = training.select_outputs(&g.outputs);
        let problem = RegressionProblem::pointwise(t.inputs.clone(), t.targets)?;
        models.push(search(&problem, &g.settings, g.outputs.clone(), seed, &[tag, k as u64])?);
    }
    Ok(models)
}

/// Drift components from per-bin affine fits.
pub fn run_drift(
    data: &SnapshotDataset,
    grid: &BinGrid,
    opts: &MomentOptions,
    groups: &[OutputGroup],
    seed: u64,
) -> Result<MomentStage, Error> {
    let training = local_drift_fit(data, grid, opts)?;
    let models = run_groups(&training, groups, seed, DRIFT_TAG)?;
    Ok(MomentStage { training, correction: None, models })
}

/// Diffusion components; `tail` supplies the small-jump correction.
pub fn run_diffusion(
    data: &SnapshotDataset,
    grid: &BinGrid,
    opts: &MomentOptions,
    tail: Option<&JumpTail>,
    groups: &[OutputGroup],
    seed: u64,
) -> Result<MomentStage, Error> {
    let s = tail.map(|t| tail_correction(opts.eps, data.dim(), t)).transpose()?;
    let training = local_diffusion_fit(data, grid, opts, s.as_ref())?;
    let models = run_groups(&training, groups, seed, DIFFUSION_TAG)?;
    Ok(MomentStage { training, correction: s.map(|m| m.as_slice().to_vec()), models })
}
