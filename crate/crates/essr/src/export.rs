//! CSV exports: histories, training sets, design matrices and fits.

use std::io::Write;

use essr_core::discovery::LearnedModel;
use essr_core::evolution::GenerationRecord;
use essr_core::expr::format_tree;
use essr_core::km::{LocalMomentTraining, RingTrainingSet};
use essr_core::regression::DesignMatrix;

use crate::report::{output_label, DiscoveryReport};

type Result<T> = std::result::Result<T, csv::Error>;

fn real(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_history<W: Write>(w: W, history: &[GenerationRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["generation", "best_loss", "best_fitness", "candidate_count", "node_count"])?;
    for r in history {
        out.write_record([
            r.generation.to_string(),
            real(r.best_loss),
            real(r.best_fitness),
            r.candidate_count.to_string(),
            r.node_count.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ring_training<W: Write>(w: W, t: &RingTrainingSet) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ring", "r_lo", "r_hi", "count", "target"])?;
    for j in 0..t.rings {
        out.write_record([j.to_string(), real(t.edges[j]), real(t.edges[j + 1]), t.counts[j].to_string(), real(t.targets[j])])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per used bin: center, occupancy, `p_k`, then every output.
pub fn write_moment_training<W: Write>(w: W, t: &LocalMomentTraining) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["bin".to_string()];
    header.extend((1..=t.dim).map(|i| format!("x{i}")));
    header.push("occupancy".into());
    header.push("p".into());
    header.extend((0..t.outputs()).map(|o| output_label(t.kind, t.dim, o)));
    out.write_record(&header)?;
    for (k, &bin) in t.bins.iter().enumerate() {
        let mut row = vec![bin.to_string()];
        row.extend(t.inputs.point(k).iter().map(|&v| real(v)));
        row.push(t.occupancy[k].to_string());
        row.push(real(t.p[k]));
        row.extend(t.targets.iter().map(|col| real(col[k])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `phi1..phik` then targets `y1..yo`, one row per training row.
pub fn write_design<W: Write>(w: W, d: &DesignMatrix) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=d.cols()).map(|j| format!("phi{j}")).collect();
    header.extend((1..=d.outputs()).map(|o| format!("y{o}")));
    out.write_record(&header)?;
    for r in 0..d.rows() {
        let mut row: Vec<String> = d.phi.row(r).iter().map(|&v| real(v)).collect();
        row.extend(d.targets.iter().map(|t| real(t[r])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `term` (s-expression) then one coefficient column per output.
pub fn write_fit<W: Write>(w: W, model: &LearnedModel, labels: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["term".to_string()];
    header.extend(labels.iter().cloned());
    out.write_record(&header)?;
    let ind = &model.individual;
    for (j, c) in ind.candidates.iter().enumerate() {
        let mut row = vec![format_tree(c)];
        row.extend((0..ind.outputs).map(|o| real(ind.coefficient(o, j))));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Flat table of every learned term: stage, group, term, output, value.
pub fn write_report_terms<W: Write>(w: W, report: &DiscoveryReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["stage", "group", "output", "term", "infix", "coefficient", "loss"])?;
    let mut models = Vec::new();
    if let Some(m) = report.jump.as_ref().and_then(|s| s.result()).and_then(|j| j.model.as_ref()) {
        models.push(("jump", 0, m));
    }
    for (name, stage) in [("drift", &report.drift), ("diffusion", &report.diffusion)] {
        if let Some(r) = stage.as_ref().and_then(|s| s.result()) {
            models.extend(r.models.iter().enumerate().map(|(k, m)| (name, k, m)));
        }
    }
    for (stage, group, m) in models {
        for t in &m.terms {
            for (o, label) in m.outputs.iter().enumerate() {
                out.write_record([
                    stage.to_string(),
                    group.to_string(),
                    label.clone(),
                    t.sexpr.clone(),
                    t.infix.clone(),
                    real(t.coefficients[o]),
                    real(m.loss),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
