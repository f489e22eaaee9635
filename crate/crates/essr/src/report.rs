//! The JSON discovery report and its plain-text rendering.

use std::fmt::Write as _;

use essr_core::discovery::{JumpStage, LearnedModel, MomentStage, PowerLawFit, StableEstimate};
use essr_core::evolution::GenerationRecord;
use essr_core::expr::{format_significant, format_tree, to_infix};
use essr_core::km::{component_of, MomentKind};
use serde::{Deserialize, Serialize};

pub const REPORT_FORMAT: &str = "essr-report/1";

/// JSON has no infinities, so non-finite values travel as strings.
mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, found {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dim: usize,
    pub samples: usize,
    pub h: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub generation: usize,
    #[serde(with = "real")]
    pub best_loss: f64,
    #[serde(with = "real")]
    pub best_fitness: f64,
    pub candidate_count: usize,
    pub node_count: usize,
    #[serde(with = "real")]
    pub min_loss: f64,
    pub tau1: f64,
}

impl From<&GenerationRecord> for HistoryRow {
    fn from(r: &GenerationRecord) -> Self {
        Self {
            generation: r.generation,
            best_loss: r.best_loss,
            best_fitness: r.best_fitness,
            candidate_count: r.candidate_count,
            node_count: r.node_count,
            min_loss: r.min_loss,
            tau1: r.tau1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub sexpr: String,
    pub infix: String,
    /// One coefficient per output of the model.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    /// Labels of the outputs this model describes.
    pub outputs: Vec<String>,
    pub terms: Vec<Term>,
    #[serde(with = "real")]
    pub loss: f64,
    pub generations: usize,
    pub reached_target: bool,
    pub seed: u64,
    pub restart_losses: Vec<f64>,
    pub history: Vec<HistoryRow>,
}

impl ModelReport {
    pub fn new(model: &LearnedModel, labels: Vec<String>, var_names: &[&str]) -> Self {
        let ind = &model.individual;
        let terms = ind
            .candidates
            .iter()
            .enumerate()
            .map(|(j, c)| Term {
                sexpr: format_tree(c),
                infix: to_infix(c, var_names, 6),
                coefficients: (0..ind.outputs).map(|o| ind.coefficient(o, j)).collect(),
            })
            .collect();
        Self {
            outputs: labels,
            terms,
            loss: model.loss,
            generations: model.generations,
            reached_target: model.reached_target,
            seed: model.seed,
            restart_losses: model.restart_losses.clone(),
            history: model.history.iter().map(HistoryRow::from).collect(),
        }
    }

    /// `label = c1*term1 + c2*term2` for output `o`.
    pub fn equation(&self, o: usize) -> String {
        let mut parts = Vec::new();
        for t in &self.terms {
            let c = t.coefficients[o];
            if c != 0.0 {
                parts.push(format!("{}*{}", format_significant(c, 5), paren(&t.infix)));
            }
        }
        let rhs = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        format!("{} = {rhs}", self.outputs[o])
    }
}

fn paren(s: &str) -> String {
    if s.contains(' ') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub eps: f64,
    pub m: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub targets: Vec<f64>,
    pub levy_absent: bool,
    pub model: Option<ModelReport>,
    pub power_law: Option<PowerLawFit>,
    pub stable: Option<StableEstimate>,
    pub notes: Vec<String>,
}

impl JumpReport {
    pub fn new(stage: &JumpStage) -> Self {
        let t = &stage.training;
        Self {
            eps: t.eps,
            m: t.m,
            edges: t.edges.clone(),
            counts: t.counts.clone(),
            targets: t.targets.clone(),
            levy_absent: stage.levy_absent(),
            model: stage.model.as_ref().map(|m| ModelReport::new(m, vec!["W(r)".into()], &["r"])),
            power_law: stage.power_law,
            stable: stage.stable,
            notes: stage.notes.clone(),
        }
    }
}

pub fn output_label(kind: MomentKind, dim: usize, o: usize) -> String {
    let (i, j) = component_of(kind, dim, o);
    match kind {
        MomentKind::Drift => format!("b{}", i + 1),
        MomentKind::Diffusion => format!("a{}{}", i + 1, j + 1),
    }
}

pub fn variable_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub outputs: Vec<String>,
    pub bins_total: usize,
    pub bins_used: usize,
    pub fallbacks: usize,
    /// Row-major small-jump correction subtracted from the targets.
    pub correction: Option<Vec<f64>>,
    pub models: Vec<ModelReport>,
}

impl MomentReport {
    pub fn new(stage: &MomentStage, bins_total: usize) -> Self {
        let t = &stage.training;
        let names = variable_names(t.dim);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let label = |o: usize| output_label(t.kind, t.dim, o);
        Self {
            outputs: (0..t.outputs()).map(label).collect(),
            bins_total,
            bins_used: t.bins.len(),
            fallbacks: t.fallbacks,
            correction: stage.correction.clone(),
            models: stage.models.iter().map(|m| ModelReport::new(m, m.outputs.iter().map(|&o| label(o)).collect(), &names)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageReport<T> {
    Completed { result: T },
    Failed { error: String },
    Disabled,
}

impl<T> StageReport<T> {
    pub fn result(&self) -> Option<&T> {
        match self {
            StageReport::Completed { result } => Some(result),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub format: String,
    pub seed: u64,
    pub dataset: DatasetSummary,
    /// The resolved configuration.
    pub config: serde_json::Value,
    pub jump: Option<StageReport<JumpReport>>,
    pub drift: Option<StageReport<MomentReport>>,
    pub diffusion: Option<StageReport<MomentReport>>,
}

impl DiscoveryReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn num(v: f64) -> String {
    format_significant(v, 6)
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let mut w: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (k, c) in r.iter().enumerate() {
            w[k] = w[k].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells.iter().enumerate().map(|(k, c)| format!("{c:<width$}", width = w[k])).collect();
        parts.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", w.iter().map(|&n| "-".repeat(n)).collect::<Vec<_>>().join("  "));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

fn render_model(out: &mut String, m: &ModelReport) {
    let mut header = vec!["term".to_string()];
    header.extend(m.outputs.iter().cloned());
    let rows: Vec<Vec<String>> = m
        .terms
        .iter()
        .map(|t| {
            let mut r = vec![t.infix.clone()];
            r.extend(t.coefficients.iter().map(|&c| num(c)));
            r
        })
        .collect();
    table(out, &header, &rows);
    for o in 0..m.outputs.len() {
        let _ = writeln!(out, "{}", m.equation(o));
    }
    let _ = writeln!(
        out,
        "loss {}  generations {}  target reached {}  seed {}",
        num(m.loss),
        m.generations,
        if m.reached_target { "yes" } else { "no" },
        m.seed
    );
    if m.restart_losses.len() > 1 {
        let l: Vec<String> = m.restart_losses.iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "restart losses {}", l.join(", "));
    }
}

fn render_stage<T>(out: &mut String, title: &str, stage: &Option<StageReport<T>>, body: impl Fn(&mut String, &T)) {
    let Some(stage) = stage else { return };
    let _ = writeln!(out, "\n== {title} ==");
    match stage {
        StageReport::Completed { result } => body(out, result),
        StageReport::Failed { error } => {
            let _ = writeln!(out, "failed: {error}");
        }
        StageReport::Disabled => {
            let _ = writeln!(out, "disabled");
        }
    }
}

fn render_moment(out: &mut String, r: &MomentReport) {
    let _ = writeln!(out, "bins used {} of {}  constant fallbacks {}", r.bins_used, r.bins_total, r.fallbacks);
    if let Some(s) = &r.correction {
        let n = (s.len() as f64).sqrt() as usize;
        let diag: Vec<String> = (0..n).map(|i| num(s[i * n + i])).collect();
        let _ = writeln!(out, "small-jump correction diag {}", diag.join(", "));
    }
    for m in &r.models {
        let _ = writeln!(out);
        render_model(out, m);
    }
}

/// Human-readable tables for a report.
pub fn render(report: &DiscoveryReport) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let _ = writeln!(out, "dataset  {}  dim {}  samples {}  h {}", d.source, d.dim, d.samples, num(d.h));
    let _ = writeln!(out, "seed     {}", report.seed);
    render_stage(&mut out, "jump measure", &report.jump, |out, r| {
        let rows: Vec<Vec<String>> = (0..r.counts.len())
            .map(|j| vec![j.to_string(), num(r.edges[j]), num(r.edges[j + 1]), r.counts[j].to_string(), num(r.targets[j])])
            .collect();
        table(out, &["ring", "r_lo", "r_hi", "count", "target"].map(String::from), &rows);
        if r.levy_absent {
            let _ = writeln!(out, "no Lévy component detected");
        }
        if let Some(m) = &r.model {
            let _ = writeln!(out);
            render_model(out, m);
        }
        if let Some(p) = &r.power_law {
            let _ = writeln!(out, "power law {} r^-{}", num(p.prefactor), num(p.exponent));
        }
        if let Some(s) = &r.stable {
            let _ = writeln!(out, "alpha {}  sigma2 {}", num(s.alpha), num(s.sigma2));
        }
        for n in &r.notes {
            let _ = writeln!(out, "note: {n}");
        }
    });
    render_stage(&mut out, "drift", &report.drift, render_moment);
    render_stage(&mut out, "diffusion", &report.diffusion, render_moment);
    out
}
