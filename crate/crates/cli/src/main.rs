use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use splitlab::diagnostics::write_pca_csv;
use splitlab::{
    generate_synthetic, parse_dataset, pca_fit, pca_project, run_experiment, similarity_diagnostic,
    split, Aggregation, Dataset, ExperimentConfig, IngestOptions, Learner, SimilarityReport,
    SplitConfig, SplitPair, Strategy, SynthConfig,
};

/// Train/test splitting strategies, a train/test similarity diagnostic and
/// tree-ensemble baselines for botnet flow data.
#[derive(Parser)]
#[command(name = "splitlab", version)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "SPLITLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repeated split / train / evaluate experiment.
    Run(RunArgs),
    /// Produce one train/test split as JSON.
    Split(SplitArgs),
    /// Fraction of test rows the permutation classifier does not recognize.
    Diagnose(DiagnoseArgs),
    /// Project rows onto the first two principal components.
    Pca(PcaArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Dataset CSV.
    #[arg(long, short, value_name = "CSV")]
    input: Option<PathBuf>,
    /// Generate the dataset from a synthetic layout file.
    #[arg(long, value_name = "JSON")]
    synth_config: Option<PathBuf>,
    /// Generate the dataset from the built-in synthetic layout.
    #[arg(long)]
    synthetic: bool,
}

#[derive(Args)]
struct DataArgs {
    #[command(flatten)]
    source: Source,
    /// Seed for synthetic generation.
    #[arg(long, default_value_t = 7)]
    synth_seed: u64,
    /// Reject predictor values above 1.
    #[arg(long)]
    assume_normalized: bool,
}

#[derive(Args)]
struct SplitOptions {
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    /// Clusters for the clustering split.
    #[arg(long, default_value_t = 10)]
    n_clusters: usize,
    /// Distance aggregation for the dissimilarity split: mean or min.
    #[arg(long, default_value = "mean")]
    aggregation: Aggregation,
    /// Test rows chosen by distance to the training set before greedy growth.
    #[arg(long, default_value_t = 1)]
    dissim_seed_size: usize,
}

impl SplitOptions {
    fn config(&self, strategy: Strategy, seed: u64) -> SplitConfig {
        SplitConfig {
            n_train: self.n_train,
            n_test: self.n_test,
            seed,
            strategy,
            aggregation: self.aggregation,
            n_clusters: self.n_clusters,
            dissim_seed_size: self.dissim_seed_size,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Experiment settings as JSON; flags given on the command line take precedence.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Master seed; repeat i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    n_clusters: Option<usize>,
    /// Strategies to run (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    /// Learners to fit (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    learner: Vec<Learner>,
    #[arg(long)]
    aggregation: Option<Aggregation>,
    #[arg(long)]
    dissim_seed_size: Option<usize>,
    /// Also write pca_<strategy>.csv for the first repeat of each strategy.
    #[arg(long)]
    pca: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    options: SplitOptions,
    #[arg(long)]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat index recorded in the output.
    #[arg(long, default_value_t = 0)]
    repeat: usize,
    /// Output JSON (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    options: SplitOptions,
    /// Split JSON written by `splitlab split`.
    #[arg(long, value_name = "JSON", conflicts_with = "strategy")]
    split: Option<PathBuf>,
    /// Generate splits with this strategy instead of reading one.
    #[arg(long, required_unless_present = "split")]
    strategy: Option<Strategy>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Master seed for generated splits; repeat i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PcaArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Split JSON; rows are tagged train, test or unused. Without it every row is tagged all.
    #[arg(long, value_name = "JSON")]
    split: Option<PathBuf>,
    /// Also write the fitted model as JSON.
    #[arg(long, value_name = "JSON")]
    model_out: Option<PathBuf>,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Layout file (default: the built-in 19-capture layout).
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output CSV.
    #[arg(long, short, required_unless_present = "write_config")]
    out: Option<PathBuf>,
    /// Write the layout in use as JSON, e.g. as a starting point for edits.
    #[arg(long, value_name = "JSON")]
    write_config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Stage(&'static str, anyhow::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Stage(stage, e) => write!(f, "{stage} failed: {e:#}"),
        }
    }
}

trait AtStage<T> {
    fn at(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Stage(stage, e.into()))
    }
}

fn existing(path: &Path) -> Result<&Path, Failure> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Failure::Usage(format!("no such file: {}", path.display())))
    }
}

fn read_text(path: &Path, stage: &'static str) -> Result<String, Failure> {
    fs::read_to_string(existing(path)?).at(stage)
}

fn read_json<T: serde::de::DeserializeOwned>(
    path: &Path,
    stage: &'static str,
) -> Result<T, Failure> {
    let text = read_text(path, stage)?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        .at(stage)
}

fn load(data: &DataArgs) -> Result<Dataset, Failure> {
    let src = &data.source;
    let dataset = if let Some(path) = &src.input {
        let file = File::open(existing(path)?).at("ingest")?;
        let opts = IngestOptions {
            assume_normalized: data.assume_normalized,
        };
        parse_dataset(io::BufReader::new(file), opts)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
            .at("ingest")?
    } else {
        let layout = match &src.synth_config {
            Some(path) => read_json(path, "synth")?,
            None => SynthConfig::default_layout(),
        };
        generate_synthetic(&layout, data.synth_seed).at("synth")?
    };
    info!(
        "{} rows ({} Botnet, {} Normal), {} captures",
        dataset.len(),
        dataset.count(splitlab::ClassLabel::Botnet),
        dataset.count(splitlab::ClassLabel::Normal),
        dataset.groups().len()
    );
    Ok(dataset)
}

/// Writes through `f` to `path`, or to stdout when `path` is `None`.
fn emit(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).at("write")?;
            }
            let mut w = BufWriter::new(File::create(p).at("write")?);
            f(&mut w).at("write")?;
            w.flush().at("write")
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w).at("write")
        }
    }
}

fn write_pca(
    dataset: &Dataset,
    pair: Option<&SplitPair>,
    w: &mut dyn Write,
) -> Result<splitlab::PcaModel, Failure> {
    let x = dataset.predictors();
    let model = pca_fit(&x).at("pca")?;
    let coords = pca_project(&model, &x).at("pca")?;
    let mut side = vec![if pair.is_some() { "unused" } else { "all" }; dataset.len()];
    if let Some(p) = pair {
        p.check(dataset.len()).at("pca")?;
        p.train_indices.iter().for_each(|&i| side[i] = "train");
        p.test_indices.iter().for_each(|&i| side[i] = "test");
    }
    let indices: Vec<usize> = (0..dataset.len()).collect();
    write_pca_csv(w, dataset, &indices, &coords, &side).at("pca")?;
    Ok(model)
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut c: ExperimentConfig = match &args.config {
        Some(path) => read_json(path, "config")?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.repeats {
        c.repeats = v;
    }
    if let Some(v) = args.n_train {
        c.n_train = v;
    }
    if let Some(v) = args.n_test {
        c.n_test = v;
    }
    if let Some(v) = args.n_clusters {
        c.n_clusters = v;
    }
    if let Some(v) = args.aggregation {
        c.aggregation = v;
    }
    if let Some(v) = args.dissim_seed_size {
        c.dissim_seed_size = v;
    }
    if !args.strategy.is_empty() {
        c.strategies = dedup(&args.strategy);
    }
    if !args.learner.is_empty() {
        c.learners = dedup(&args.learner);
    }
    Ok(c)
}

fn dedup<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn print_summary(report: &splitlab::ExperimentReport) {
    let fmt = |s: Option<splitlab::harness::Stat>| {
        s.map_or_else(|| "      NA".to_string(), |s| format!("{:>8.3}", s.median))
    };
    println!(
        "{:<14} {:<18} {:>8} {:>8} {:>8} {:>8}",
        "strategy", "learner", "BA", "BA iqr", "sens", "spec"
    );
    for c in &report.summary {
        let get = |m: &str| c.metrics.get(m).copied();
        println!(
            "{:<14} {:<18} {} {} {} {}",
            c.strategy.as_str(),
            c.learner.as_str(),
            fmt(get("balanced_accuracy")),
            get("balanced_accuracy")
                .map_or_else(|| "      NA".to_string(), |s| format!("{:>8.3}", s.iqr)),
            fmt(get("sensitivity")),
            fmt(get("specificity")),
        );
    }
    for s in &report.similarity {
        println!(
            "similarity {:<14} mean {:.3} sd {:.3}",
            s.strategy.as_str(),
            s.report.mean,
            s.report.std_dev
        );
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let config = experiment_config(&args)?;
    let dataset = load(&args.data)?;
    config
        .check_preconditions(&dataset)
        .at("precondition check")?;
    let report = run_experiment(&dataset, &config).at("experiment")?;
    report.write_to_dir(&args.out).at("write")?;
    if args.pca {
        for &s in &config.strategies {
            let pair = split(&dataset, &config.split_config(s, 0), 0).at("split")?;
            let path = args.out.join(format!("pca_{s}.csv"));
            emit(Some(&path), |w| {
                write_pca(&dataset, Some(&pair), w)
                    .map(|_| ())
                    .map_err(|e| anyhow::anyhow!("{e}"))
            })?;
        }
    }
    let failed = report.rows.iter().filter(|r| !r.is_ok()).count();
    print_summary(&report);
    if failed > 0 {
        eprintln!(
            "{failed} of {} rows failed; see report.csv",
            report.rows.len()
        );
    }
    info!("wrote reports to {}", args.out.display());
    Ok(())
}

fn split_cmd(args: SplitArgs) -> Result<(), Failure> {
    let dataset = load(&args.data)?;
    let config = args.options.config(args.strategy, args.seed);
    let pair = split(&dataset, &config, args.repeat).at("split")?;
    let json = pair.to_json().at("split")?;
    emit(args.out.as_deref(), |w| Ok(writeln!(w, "{json}")?))
}

fn diagnose(args: DiagnoseArgs) -> Result<(), Failure> {
    let dataset = load(&args.data)?;
    let pairs: Vec<SplitPair> = match (&args.split, args.strategy) {
        (Some(path), _) => {
            let text = read_text(path, "diagnose")?;
            vec![SplitPair::from_json(&text).at("diagnose")?]
        }
        (None, Some(strategy)) => (0..args.repeats)
            .map(|r| {
                let config = args
                    .options
                    .config(strategy, args.seed.wrapping_add(r as u64));
                split(&dataset, &config, r).at("split")
            })
            .collect::<Result<_, _>>()?,
        (None, None) => {
            return Err(Failure::Usage(
                "either --split or --strategy is required".into(),
            ))
        }
    };
    let mut fractions = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        pair.check(dataset.len()).at("diagnose")?;
        let train = dataset.predictors_of(&pair.train_indices);
        let test = dataset.predictors_of(&pair.test_indices);
        fractions.push(similarity_diagnostic(&train, &test, pair.seed).at("diagnose")?);
    }
    let report = SimilarityReport::from_fractions(fractions).at("diagnose")?;
    let json = serde_json::to_string_pretty(&report).at("diagnose")?;
    emit(args.out.as_deref(), |w| Ok(writeln!(w, "{json}")?))
}

fn pca(args: PcaArgs) -> Result<(), Failure> {
    let dataset = load(&args.data)?;
    let pair = match &args.split {
        Some(path) => Some(SplitPair::from_json(&read_text(path, "pca")?).at("pca")?),
        None => None,
    };
    let mut model = None;
    emit(args.out.as_deref(), |w| {
        model = Some(write_pca(&dataset, pair.as_ref(), w).map_err(|e| anyhow::anyhow!("{e}"))?);
        Ok(())
    })?;
    let model = model.expect("written above");
    info!(
        "explained variance {:.3}, {:.3}",
        model.explained_variance_ratio[0], model.explained_variance_ratio[1]
    );
    if let Some(path) = &args.model_out {
        let json = serde_json::to_string_pretty(&model).at("pca")?;
        emit(Some(path), |w| Ok(writeln!(w, "{json}")?))?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let layout = match &args.config {
        Some(path) => read_json(path, "synth")?,
        None => SynthConfig::default_layout(),
    };
    layout.validate().at("synth")?;
    if let Some(path) = &args.write_config {
        let json = serde_json::to_string_pretty(&layout).at("synth")?;
        emit(Some(path), |w| Ok(writeln!(w, "{json}")?))?;
    }
    if let Some(out) = &args.out {
        let dataset = generate_synthetic(&layout, args.seed).at("synth")?;
        emit(Some(out), |w| Ok(dataset.write_csv(w)?))?;
        info!("wrote {} rows to {}", dataset.len(), out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("splitlab: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("splitlab: cannot start thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }

    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Split(a) => split_cmd(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Pca(a) => pca(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Failure::Usage(_)) => {
            eprintln!("splitlab: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("splitlab: {e}");
            ExitCode::FAILURE
        }
    }
}
