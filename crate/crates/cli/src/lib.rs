//! The `loadsense` command line.
//!
//! Exit codes: 0 on success, 1 on data errors, 2 on usage errors.

mod output;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use loadsense::eval::{
    featurize_dataset, features_csv, make_split_plan, render_report, run_nested_cv, train_model, ClassScheme,
    CvOptions, EvaluationReport, FeatureConfig, FeatureSubset, ReportFormat, DEFAULT_OUTER_FOLDS,
};
use loadsense::io::{load_dataset, write_dataset, LoadOptions};
use loadsense::learn::ModelKind;
use loadsense::stats::{self, DEFAULT_RELIABILITY_THRESHOLD};
use loadsense::synth::{generate_dataset, generate_null_dataset, GeneratorConfig};
use loadsense::{Dataset, FeatureRow, TaskKind, FORMAT_VERSION};

pub use output::header;
use output::OutputDir;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A bad invocation that clap cannot catch on its own.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "loadsense", version, about = "Driver workload estimation from physiological and driving data")]
struct Cli {
    /// Root seed. Falls back to LOADSENSE_SEED, then 7.
    #[arg(long, global = true, env = "LOADSENSE_SEED")]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset tree.
    Synth(SynthArgs),
    /// Check a dataset tree and list every issue.
    Validate(ValidateArgs),
    /// Write the eight-feature table of a dataset.
    Features(DataArgs),
    /// Descriptives, correlations, reliability and paired t-tests.
    Stats(DataArgs),
    /// Fit one final model on a train/validation split.
    Train(TrainArgs),
    /// Participant-level nested cross-validation report.
    Evaluate(EvaluateArgs),
    /// Re-render a saved evaluation report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory; must be empty or absent.
    #[arg(long)]
    out: PathBuf,
    /// Number of participants (overrides the config file).
    #[arg(long)]
    participants: Option<usize>,
    /// Generator config in key = value form.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Remove every level effect.
    #[arg(long)]
    null: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Also write the findings to <out>/validation.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop at the first invalid segment.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fail on any invalid segment instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum TaskArg {
    Nback,
    VisualSearch,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> TaskKind {
        match t {
            TaskArg::Nback => TaskKind::NBack,
            TaskArg::VisualSearch => TaskKind::VisualSearch,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum SchemeArg {
    Multi,
    Binary,
}

impl From<SchemeArg> for ClassScheme {
    fn from(s: SchemeArg) -> ClassScheme {
        match s {
            SchemeArg::Multi => ClassScheme::Multi,
            SchemeArg::Binary => ClassScheme::Binary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum SubsetArg {
    All,
    EyeDrive,
    HeartEye,
    HeartDrive,
    HeartAlone,
}

impl From<SubsetArg> for FeatureSubset {
    fn from(s: SubsetArg) -> FeatureSubset {
        match s {
            SubsetArg::All => FeatureSubset::All,
            SubsetArg::EyeDrive => FeatureSubset::EyeDrive,
            SubsetArg::HeartEye => FeatureSubset::HeartEye,
            SubsetArg::HeartDrive => FeatureSubset::HeartDrive,
            SubsetArg::HeartAlone => FeatureSubset::HeartAlone,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum ModelArg {
    Lda,
    Knn,
    Adaboost,
    Ensemble,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> ModelKind {
        match m {
            ModelArg::Lda => ModelKind::Lda,
            ModelArg::Knn => ModelKind::Knn,
            ModelArg::Adaboost => ModelKind::AdaBoost,
            ModelArg::Ensemble => ModelKind::Ensemble,
        }
    }
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum, default_value = "multi")]
    scheme: SchemeArg,
    /// Feature subsets to evaluate (repeatable; default all five).
    #[arg(long, value_enum)]
    subset: Vec<SubsetArg>,
    #[arg(long, default_value_t = DEFAULT_OUTER_FOLDS)]
    folds: usize,
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum, default_value = "multi")]
    scheme: SchemeArg,
    /// Feature subset (default all).
    #[arg(long, value_enum)]
    subset: Vec<SubsetArg>,
    #[arg(long, value_enum, default_value = "ensemble")]
    model: ModelArg,
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// A report_<task>_<scheme>.json written by `evaluate`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("error: {e}");
                eprintln!("Run `loadsense --help` for usage.");
                EXIT_USAGE
            } else {
                eprintln!("error: {e:#}");
                EXIT_DATA
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let seed = cli.seed.unwrap_or(loadsense::rng::DEFAULT_SEED);
    let pool = match cli.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?,
        None => rayon::ThreadPoolBuilder::new().build()?,
    };
    let explicit_seed = cli.seed.is_some();
    pool.install(move || match cli.command {
        Command::Synth(a) => synth(a, seed, explicit_seed),
        Command::Validate(a) => validate(a, seed),
        Command::Features(a) => features(a, seed),
        Command::Stats(a) => stats_cmd(a, seed),
        Command::Train(a) => train(a, seed),
        Command::Evaluate(a) => evaluate(a, seed),
        Command::Report(a) => report(a, seed),
    })
}

/// Refuses output directories inside the input tree so no command can
/// modify its dataset.
fn check_out_outside(dataset: &Path, out: &Path) -> Result<()> {
    let data = fs::canonicalize(dataset).with_context(|| format!("cannot read dataset {}", dataset.display()))?;
    if !data.is_dir() {
        bail!("dataset {} is not a directory", dataset.display());
    }
    let mut probe = if out.is_absolute() {
        out.to_path_buf()
    } else {
        std::env::current_dir()?.join(out)
    };
    // resolve the deepest existing ancestor
    let mut tail = Vec::new();
    while !probe.exists() {
        match (probe.file_name(), probe.parent()) {
            (Some(name), Some(parent)) => {
                tail.push(name.to_owned());
                probe = parent.to_path_buf();
            }
            _ => break,
        }
    }
    let mut resolved = fs::canonicalize(&probe).unwrap_or(probe);
    resolved.extend(tail.iter().rev());
    if resolved.starts_with(&data) {
        return Err(usage(format!(
            "--out {} lies inside the dataset {}; choose a separate directory",
            out.display(),
            dataset.display()
        )));
    }
    Ok(())
}

fn load(dataset: &Path, strict: bool) -> Result<Dataset> {
    let report = load_dataset(dataset, LoadOptions { strict })
        .with_context(|| format!("cannot load dataset {}", dataset.display()))?;
    for s in &report.skipped {
        eprintln!("skipped {}: {}", s.path.display(), s.reason);
    }
    Ok(report.dataset)
}

fn featurize(dataset: &Path, strict: bool) -> Result<Vec<FeatureRow>> {
    Ok(featurize_dataset(&load(dataset, strict)?, &FeatureConfig::default()))
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[derive(Serialize)]
struct SynthRecord {
    participants: usize,
    null: bool,
    generator: String,
}

fn synth(a: SynthArgs, seed: u64, explicit_seed: bool) -> Result<i32> {
    let mut config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
            GeneratorConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?
        }
        None => GeneratorConfig::default(),
    };
    if explicit_seed || a.config.is_none() {
        config.seed = seed;
    }
    if let Some(n) = a.participants {
        if n == 0 {
            return Err(usage("--participants must be at least 1"));
        }
        config.n_participants = n;
    }
    config.validate()?;
    if a.out.exists() && fs::read_dir(&a.out)?.next().is_some() {
        bail!("output directory {} is not empty", a.out.display());
    }
    let out = OutputDir::prepare(&a.out, "synth", config.seed)?;
    let dataset = if a.null {
        generate_null_dataset(&config)?
    } else {
        generate_dataset(&config)?
    };
    write_dataset(&out.root, &dataset)?;
    out.write_text("synth_config.txt", &config.to_text())?;
    out.write_run_record(&SynthRecord {
        participants: config.n_participants,
        null: a.null,
        generator: config.to_text(),
    })?;
    println!(
        "wrote {} segments for {} participants to {}",
        dataset.len(),
        config.n_participants,
        a.out.display()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ValidateRecord {
    dataset: String,
    strict: bool,
}

fn validate(a: ValidateArgs, seed: u64) -> Result<i32> {
    let out = match &a.out {
        Some(o) => {
            check_out_outside(&a.dataset, o)?;
            Some(OutputDir::prepare(o, "validate", seed)?)
        }
        None => None,
    };
    let report = load_dataset(&a.dataset, LoadOptions { strict: a.strict })
        .with_context(|| format!("cannot load dataset {}", a.dataset.display()))?;
    let mut text = format!(
        "segments loaded: {}\nparticipants: {}\nsegments skipped: {}\n",
        report.dataset.len(),
        report.dataset.participant_ids().len(),
        report.skipped.len()
    );
    for s in &report.skipped {
        text.push_str(&format!("invalid {}: {}\n", s.path.display(), s.reason));
    }
    for (label, issue) in &report.warnings {
        text.push_str(&format!("{label}: {issue}\n"));
    }
    print!("{text}");
    if let Some(out) = out {
        out.write_text("validation.txt", &text)?;
        out.write_run_record(&ValidateRecord {
            dataset: path_string(&a.dataset),
            strict: a.strict,
        })?;
    }
    Ok(if report.skipped.is_empty() { EXIT_OK } else { EXIT_DATA })
}

#[derive(Serialize)]
struct DataRecord {
    dataset: String,
    strict: bool,
}

fn features(a: DataArgs, seed: u64) -> Result<i32> {
    check_out_outside(&a.dataset, &a.out)?;
    let out = OutputDir::prepare(&a.out, "features", seed)?;
    let rows = featurize(&a.dataset, a.strict)?;
    out.write_text("features.csv", &features_csv(&rows))?;
    out.write_run_record(&DataRecord {
        dataset: path_string(&a.dataset),
        strict: a.strict,
    })?;
    println!("wrote {} feature rows to {}", rows.len(), a.out.join("features.csv").display());
    Ok(EXIT_OK)
}

fn stats_cmd(a: DataArgs, seed: u64) -> Result<i32> {
    check_out_outside(&a.dataset, &a.out)?;
    let out = OutputDir::prepare(&a.out, "stats", seed)?;
    let rows = featurize(&a.dataset, a.strict)?;

    let table = stats::descriptive_table(&rows);
    out.write_text("descriptives.csv", &stats::descriptive_csv(&table))?;
    out.write_text("descriptives.txt", &stats::descriptive_text(&table))?;

    let matrices = stats::correlation_matrices(&rows);
    let mut csv = String::from("matrix,row,column,r,p,n,stars\n");
    let mut text = String::new();
    for m in &matrices {
        for line in stats::correlation_csv(m).lines().skip(1) {
            csv.push_str(&format!("{},{line}\n", m.title));
        }
        text.push_str(&stats::correlation_text(m));
        text.push('\n');
    }
    out.write_text("correlations.csv", &csv)?;
    out.write_text("correlations.txt", &text)?;

    let screen = stats::reliability_from_rows(&rows, DEFAULT_RELIABILITY_THRESHOLD);
    out.write_text("reliability.csv", &stats::reliability_csv(&screen))?;
    out.write_text("reliability.txt", &stats::reliability_text(&screen))?;

    let checks = stats::manipulation_checks(&rows, &screen);
    out.write_text("checks.csv", &stats::checks_csv(&checks))?;
    out.write_text("checks.txt", &stats::checks_text(&checks))?;
    out.write_run_record(&DataRecord {
        dataset: path_string(&a.dataset),
        strict: a.strict,
    })?;
    print!("{}", stats::reliability_text(&screen));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TrainRecord {
    dataset: String,
    task: TaskArg,
    scheme: SchemeArg,
    subset: SubsetArg,
    model: ModelArg,
    strict: bool,
    options: CvOptions,
}

fn train(a: TrainArgs, seed: u64) -> Result<i32> {
    let subset = match a.subset.as_slice() {
        [] => SubsetArg::All,
        [s] => *s,
        _ => return Err(usage("train takes at most one --subset")),
    };
    check_out_outside(&a.dataset, &a.out)?;
    let out = OutputDir::prepare(&a.out, "train", seed)?;
    let rows = featurize(&a.dataset, a.strict)?;
    let options = CvOptions::default();
    let outcome = train_model(
        &rows,
        a.task.into(),
        a.scheme.into(),
        subset.into(),
        a.model.into(),
        seed,
        &options,
    )?;
    let mut json = outcome.model.to_json()?;
    json.push('\n');
    out.write_raw("model.json", json.as_bytes())?;

    let mut text = format!(
        "model: {}\nvalidation accuracy: {:.4}\ntrain participants: {}\nvalidation participants: {}\n\nrank,config,val_accuracy\n",
        outcome.model.kind.label(),
        outcome.val_accuracy,
        outcome.train_participants.join(" "),
        outcome.validation_participants.join(" ")
    );
    for (i, r) in outcome.ranking.iter().enumerate() {
        text.push_str(&format!("{},{},{}\n", i + 1, r.config, r.val_accuracy));
    }
    out.write_text("training.txt", &text)?;
    out.write_run_record(&TrainRecord {
        dataset: path_string(&a.dataset),
        task: a.task,
        scheme: a.scheme,
        subset,
        model: a.model,
        strict: a.strict,
        options,
    })?;
    println!(
        "{} model, validation accuracy {:.1}%, written to {}",
        outcome.model.kind.label(),
        100.0 * outcome.val_accuracy,
        a.out.join("model.json").display()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EvaluateRecord {
    dataset: String,
    task: TaskArg,
    scheme: SchemeArg,
    subsets: Vec<SubsetArg>,
    folds: usize,
    strict: bool,
    options: CvOptions,
}

fn report_stem(report: &EvaluationReport) -> String {
    format!("report_{}_{}", report.task, report.scheme)
}

fn write_report(out: &OutputDir, report: &EvaluationReport) -> Result<()> {
    let stem = report_stem(report);
    for format in [ReportFormat::Text, ReportFormat::Csv] {
        out.write_text(&format!("{stem}.{}", format.extension()), &render_report(report, format)?)?;
    }
    out.write_json(&format!("{stem}.json"), "report", report)?;
    Ok(())
}

fn evaluate(a: EvaluateArgs, seed: u64) -> Result<i32> {
    let mut subsets = a.subset.clone();
    if subsets.is_empty() {
        subsets = vec![
            SubsetArg::All,
            SubsetArg::EyeDrive,
            SubsetArg::HeartEye,
            SubsetArg::HeartDrive,
            SubsetArg::HeartAlone,
        ];
    }
    let mut seen = std::collections::HashSet::new();
    subsets.retain(|s| seen.insert(*s));
    if a.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    check_out_outside(&a.dataset, &a.out)?;
    let out = OutputDir::prepare(&a.out, "evaluate", seed)?;
    let rows = featurize(&a.dataset, a.strict)?;
    let task: TaskKind = a.task.into();
    let scheme: ClassScheme = a.scheme.into();
    let mut ids: Vec<String> = rows
        .iter()
        .filter(|r| r.task == task)
        .map(|r| r.participant_id.clone())
        .collect();
    ids.sort();
    ids.dedup();
    let plan = make_split_plan(&ids, a.folds, seed)?;
    let options = CvOptions::default();
    let subset_kinds: Vec<FeatureSubset> = subsets.iter().map(|s| (*s).into()).collect();
    let report = run_nested_cv(&rows, task, scheme, &subset_kinds, &plan, &options)?;

    write_report(&out, &report)?;
    out.write_json("split_plan.json", "plan", &plan)?;
    out.write_run_record(&EvaluateRecord {
        dataset: path_string(&a.dataset),
        task: a.task,
        scheme: a.scheme,
        subsets,
        folds: a.folds,
        strict: a.strict,
        options,
    })?;
    print!("{}", render_report(&report, ReportFormat::Text)?);
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
struct SavedReport {
    format_version: u32,
    report: EvaluationReport,
}

#[derive(Serialize)]
struct ReportRecord {
    input: String,
}

fn report(a: ReportArgs, _seed: u64) -> Result<i32> {
    let text = fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let saved: SavedReport =
        serde_json::from_str(&text).with_context(|| format!("{} is not an evaluation report", a.input.display()))?;
    if saved.format_version != FORMAT_VERSION {
        bail!(
            "{}: format version {} is not supported (expected {FORMAT_VERSION})",
            a.input.display(),
            saved.format_version
        );
    }
    // the report keeps the seed of the run that produced it
    let out = OutputDir::prepare(&a.out, "report", saved.report.seed)?;
    write_report(&out, &saved.report)?;
    out.write_run_record(&ReportRecord {
        input: path_string(&a.input),
    })?;
    print!("{}", render_report(&saved.report, ReportFormat::Text)?);
    Ok(EXIT_OK)
}
