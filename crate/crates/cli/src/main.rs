use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tilda::augment::generate_variants;
use tilda::harness::synth::{GaussianClusters, SynthConfig};
use tilda::harness::{
    examples_from_pairs, report_emit, run_scenario, Example, Method, ModelParams, ReportFormat,
    Scenario, ScenarioSpec, TildaLearner,
};
use tilda::{io, FeatureVector, ModelConfig};

#[derive(Parser)]
#[command(
    name = "tilda",
    version,
    about = "Incremental classification with per-class anchors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a model from a feature file and save it.
    Train(TrainArgs),
    /// Predict a label for every vector in a feature file.
    Predict(PredictArgs),
    /// Run an incremental benchmark and print the per-stage report.
    Bench(BenchArgs),
    /// Expand every image into its 10 augmentation variants.
    Augment(AugmentArgs),
    /// Write a Gaussian cluster dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ModelOpts {
    /// Number of subspaces.
    #[arg(short = 'P', long = "subspaces", default_value_t = 16)]
    subspaces: usize,
    /// Anchors per class and subspace.
    #[arg(short = 'k', long = "anchors", default_value_t = 30)]
    anchors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelOpts {
    fn params(&self) -> ModelParams {
        ModelParams {
            subspaces: self.subspaces,
            anchors: self.anchors,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Feature file (TFV1), or CSV with --csv.
    #[arg(long)]
    features: PathBuf,
    /// Label file, one label per line. Not used with --csv.
    #[arg(long, required_unless_present = "csv")]
    labels: Option<PathBuf>,
    /// Read features and labels from a CSV file (label in the last column).
    #[arg(long)]
    csv: bool,
    /// The CSV file has a header row.
    #[arg(long, requires = "csv")]
    header: bool,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    opts: ModelOpts,
    #[arg(long, default_value = "tilda")]
    method: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    out: PredictFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// ci, ei or oneshot.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "tilda")]
    method: String,
    /// FEATURES,LABELS
    #[arg(long)]
    train: String,
    /// FEATURES,LABELS
    #[arg(long)]
    test: String,
    #[arg(long, default_value_t = 10)]
    parts: usize,
    /// text, csv or json.
    #[arg(long, default_value = "text")]
    report: String,
    #[command(flatten)]
    opts: ModelOpts,
    #[arg(long, default_value_t = 0)]
    order_seed: u64,
    /// Class-incremental: score every stage on the full test set.
    #[arg(long)]
    full_test: bool,
    /// One-shot: also report after every N examples.
    #[arg(long, value_name = "N")]
    checkpoint: Option<usize>,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    per_class: usize,
    /// Distance between class centres, in units of the noise deviation.
    #[arg(long)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// FEATURES,LABELS for the training split.
    #[arg(long)]
    out: String,
    /// FEATURES,LABELS for an independent test split.
    #[arg(long, requires = "test_per_class")]
    test_out: Option<String>,
    #[arg(long)]
    test_per_class: Option<usize>,
}

enum Failure {
    Usage(String),
    Data(tilda::Error),
}

impl From<tilda::Error> for Failure {
    fn from(e: tilda::Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Bench(a) => bench(a),
        Command::Augment(a) => augment(a),
        Command::Synth(a) => synth(a),
    }
}

fn usage<T: std::fmt::Display>(e: T) -> Failure {
    Failure::Usage(e.to_string())
}

fn path(p: &Path) -> PathBuf {
    io::resolve_path(p)
}

fn pair(arg: &str, name: &str) -> CliResult<(PathBuf, PathBuf)> {
    match arg.split_once(',') {
        Some((f, l)) if !f.is_empty() && !l.is_empty() => {
            Ok((path(Path::new(f)), path(Path::new(l))))
        }
        _ => Err(Failure::Usage(format!(
            "--{name} expects FEATURES,LABELS, got '{arg}'"
        ))),
    }
}

fn load_pairs(features: &Path, labels: &Path) -> CliResult<Vec<Example>> {
    Ok(examples_from_pairs(io::read_labeled(features, labels)?))
}

fn train(a: TrainArgs) -> CliResult<()> {
    let method: Method = a.method.parse().map_err(usage)?;
    if !matches!(method, Method::Tilda | Method::TildaDa | Method::TildaP) {
        return Err(Failure::Usage(format!(
            "train saves anchor models only (tilda, tilda-da, tilda-p), not '{method}'"
        )));
    }
    let pairs = if a.csv {
        io::read_csv_features(path(&a.features), a.header)?
    } else {
        let labels = a.labels.as_deref().expect("required by clap");
        io::read_labeled(path(&a.features), path(labels))?
    };
    let Some(dim) = pairs.first().map(|(x, _)| x.len()) else {
        return Err(tilda::Error::EmptySplit.into());
    };
    let subspaces = if method == Method::TildaP {
        1
    } else {
        a.opts.subspaces
    };
    let config = ModelConfig::new(subspaces, a.opts.anchors, dim, a.opts.seed).map_err(usage)?;
    let mut learner = TildaLearner::new(config, method.uses_augmentation())?;
    for example in examples_from_pairs(pairs) {
        tilda::harness::Learner::learn(&mut learner, &example)?;
    }
    io::save_model(path(&a.model), learner.store())?;
    Ok(())
}

fn predict(a: PredictArgs) -> CliResult<()> {
    let store = io::load_model(path(&a.model))?;
    let vectors = io::read_features(path(&a.features))?;
    let predictions: Vec<String> = vectors
        .iter()
        .map(|x| store.predict_one(x).map(|p| p.label))
        .collect::<tilda::Result<_>>()?;
    let mut out = std::io::stdout().lock();
    let written = match a.out {
        PredictFormat::Text => predictions.iter().try_for_each(|l| writeln!(out, "{l}")),
        PredictFormat::Csv => writeln!(out, "index,label").and_then(|_| {
            predictions
                .iter()
                .enumerate()
                .try_for_each(|(i, l)| writeln!(out, "{i},{l}"))
        }),
    };
    written.map_err(|e| Failure::Data(e.into()))
}

fn bench(a: BenchArgs) -> CliResult<()> {
    let scenario: Scenario = a.scenario.parse().map_err(usage)?;
    let method: Method = a.method.parse().map_err(usage)?;
    let format: ReportFormat = a.report.parse().map_err(usage)?;
    let (train_f, train_l) = pair(&a.train, "train")?;
    let (test_f, test_l) = pair(&a.test, "test")?;
    let train = load_pairs(&train_f, &train_l)?;
    let test = load_pairs(&test_f, &test_l)?;

    let mut spec = ScenarioSpec::new(scenario, method);
    spec.params = a.opts.params();
    spec.parts = a.parts;
    spec.order_seed = a.order_seed;
    spec.full_test = a.full_test;
    spec.checkpoint_every = a.checkpoint;
    let report = run_scenario(&spec, &train, &test)?;
    std::io::stdout()
        .write_all(&report_emit(&report, format))
        .map_err(|e| Failure::Data(e.into()))
}

fn augment(a: AugmentArgs) -> CliResult<()> {
    let images = io::read_images(path(&a.images))?;
    let expanded: Vec<_> = images.iter().flat_map(generate_variants).collect();
    io::write_images(path(&a.out), &expanded)?;
    Ok(())
}

fn write_split(examples: &[Example], target: &str, name: &str) -> CliResult<()> {
    let (f, l) = pair(target, name)?;
    let vectors: Vec<FeatureVector> = examples.iter().map(|e| e.original().clone()).collect();
    let labels: Vec<&str> = examples.iter().map(|e| e.label.as_str()).collect();
    io::write_features(f, &vectors)?;
    io::write_labels(l, &labels)?;
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let generator =
        GaussianClusters::new(SynthConfig::new(a.classes, a.dim, a.sep, a.seed)).map_err(usage)?;
    write_split(&generator.sample(a.per_class, 0), &a.out, "out")?;
    if let (Some(target), Some(n)) = (a.test_out.as_deref(), a.test_per_class) {
        write_split(&generator.sample(n, 1), target, "test-out")?;
    }
    Ok(())
}
