//! Command-line entry point.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use essr_core::discovery::LearnedModel;
use essr_core::regression::{DesignMatrix, RegressionProblem};

use crate::config::{load_config, ConfigError, DiscoveryConfig};
use crate::pipeline::{self, Artifacts, Outcome, PipelineError, Stage};
use crate::report::{output_label, render, DiscoveryReport};
use crate::{dataset, export};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "essr", version, about = "Discover drift, diffusion and Lévy jump laws from snapshot data")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StageArg {
    Jump,
    Drift,
    Diffusion,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured model and write a dataset file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset path; a `.csv` extension selects CSV.
        #[arg(long)]
        out: PathBuf,
        /// `csv` writes CSV whatever the extension.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run all enabled stages and write the report.
    Discover(RunArgs),
    /// Run one stage (diffusion also runs the jump stage).
    Stage {
        #[arg(value_enum)]
        stage: StageArg,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Print a report as tables.
    Render {
        report: PathBuf,
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `csv` prints the learned terms as CSV.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn io_fail(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn csv_fail(path: &Path) -> impl Fn(csv::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn load(path: &Path, seed: Option<u64>) -> Result<DiscoveryConfig, Failure> {
    let mut cfg = load_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path).map_err(io_fail(path))?))
}

fn write_csv_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> Result<(), csv::Error>) -> Result<(), Failure> {
    f(create(path)?).map_err(csv_fail(path))
}

fn design_for(outcome_artifacts: &Artifacts, stem: &str, model: &LearnedModel) -> Option<DesignMatrix> {
    let problem = if stem == "jump" {
        let t = &outcome_artifacts.jump.as_ref()?.training;
        RegressionProblem::rings(&t.edges, t.targets.clone()).ok()?
    } else {
        let stage = if stem.starts_with("drift") { outcome_artifacts.drift.as_ref()? } else { outcome_artifacts.diffusion.as_ref()? };
        let t = stage.training.select_outputs(&model.outputs);
        RegressionProblem::pointwise(t.inputs.clone(), t.targets).ok()?
    };
    if model.individual.candidates.is_empty() {
        return None;
    }
    problem.design(&model.individual.candidates).ok()
}

fn model_labels(artifacts: &Artifacts, stem: &str, model: &LearnedModel) -> Vec<String> {
    let stage = if stem.starts_with("drift") {
        artifacts.drift.as_ref()
    } else if stem.starts_with("diffusion") {
        artifacts.diffusion.as_ref()
    } else {
        None
    };
    match stage {
        Some(s) => model.outputs.iter().map(|&o| output_label(s.training.kind, s.training.dim, o)).collect(),
        None => vec!["W(r)".into()],
    }
}

fn write_outputs(out: &Path, outcome: &Outcome, format: Format) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(io_fail(out))?;
    let report = &outcome.report;
    match format {
        Format::Json => {
            let p = out.join("report.json");
            create(&p)?.write_all(report.to_json().as_bytes()).map_err(io_fail(&p))?;
        }
        Format::Csv => write_csv_file(&out.join("report.csv"), |w| export::write_report_terms(w, report))?,
    }
    let a = &outcome.artifacts;
    if let Some(j) = &a.jump {
        write_csv_file(&out.join("training_jump.csv"), |w| export::write_ring_training(w, &j.training))?;
    }
    for (name, stage) in [("drift", &a.drift), ("diffusion", &a.diffusion)] {
        if let Some(s) = stage {
            write_csv_file(&out.join(format!("training_{name}.csv")), |w| export::write_moment_training(w, &s.training))?;
        }
    }
    for (stem, model) in a.models() {
        write_csv_file(&out.join(format!("history_{stem}.csv")), |w| export::write_history(w, &model.history))?;
        let labels = model_labels(a, &stem, model);
        write_csv_file(&out.join(format!("fit_{stem}.csv")), |w| export::write_fit(w, model, &labels))?;
        if let Some(d) = design_for(a, &stem, model) {
            write_csv_file(&out.join(format!("design_{stem}.csv")), |w| export::write_design(w, &d))?;
        }
    }
    Ok(())
}

fn summary(report: &DiscoveryReport) -> String {
    use crate::report::StageReport;
    fn line<T>(name: &str, s: &StageReport<T>) -> String {
        match s {
            StageReport::Completed { .. } => format!("{name}: ok"),
            StageReport::Failed { error } => format!("{name}: failed: {error}"),
            StageReport::Disabled => format!("{name}: disabled"),
        }
    }
    let mut lines = Vec::new();
    if let Some(s) = &report.jump {
        lines.push(line("jump", s));
    }
    if let Some(s) = &report.drift {
        lines.push(line("drift", s));
    }
    if let Some(s) = &report.diffusion {
        lines.push(line("diffusion", s));
    }
    lines.join("\n")
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        // A second call in the same process finds the pool already built.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Simulate { config, seed, out, format } => {
            let cfg = load(&config, seed)?;
            let loaded = pipeline::simulate(&cfg)?;
            let res = match format {
                Some(Format::Csv) => dataset::write_csv(create(&out)?, &loaded.data),
                Some(Format::Json) => return Err(Failure::Config("datasets are written as binary or csv".into())),
                None => dataset::save(&out, &loaded.data),
            };
            res.map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            eprintln!("wrote {} samples of dimension {} to {}", loaded.data.len(), loaded.data.dim(), out.display());
        }
        Command::Discover(args) => {
            let cfg = load(&args.config, args.seed)?;
            let outcome = pipeline::run_full(&cfg)?;
            write_outputs(&args.out, &outcome, args.format)?;
            eprintln!("{}", summary(&outcome.report));
        }
        Command::Stage { stage, args } => {
            let cfg = load(&args.config, args.seed)?;
            let stage = match stage {
                StageArg::Jump => Stage::Jump,
                StageArg::Drift => Stage::Drift,
                StageArg::Diffusion => Stage::Diffusion,
            };
            let outcome = pipeline::run_single(&cfg, stage)?;
            write_outputs(&args.out, &outcome, args.format)?;
            eprintln!("{}", summary(&outcome.report));
        }
        Command::Render { report, out, format } => {
            let text = fs::read_to_string(&report).map_err(io_fail(&report))?;
            let parsed = DiscoveryReport::from_json(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", report.display())))?;
            let rendered = match format {
                Format::Json => render(&parsed),
                Format::Csv => {
                    let mut buf = Vec::new();
                    export::write_report_terms(&mut buf, &parsed).map_err(csv_fail(&report))?;
                    String::from_utf8(buf).expect("csv output is utf-8")
                }
            };
            match out {
                Some(p) => create(&p)?.write_all(rendered.as_bytes()).map_err(io_fail(&p))?,
                None => print!("{rendered}"),
            }
        }
    }
    Ok(())
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}
