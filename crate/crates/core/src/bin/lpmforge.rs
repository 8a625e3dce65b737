use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lpmforge::chaotic::{filter_chaotic, FilterVariant, Smoothing};
use lpmforge::gap::{parse_duration, ExtractionStrategy, GapConstraint};
use lpmforge::log::{parse_csv, parse_xes, write_csv, CsvMapping, EventLog};
use lpmforge::miner::{MinerConfig, Pruning};
use lpmforge::projections::{default_entropy_threshold, discover, ProjectionMethod, DEFAULT_INFLATION, DEFAULT_MRIG_THRESHOLD};
use lpmforge::quality::{ndcg_at_k, recall_at_k, Evaluation, RankingWeights};
use lpmforge::run::{execute, log_digest, RunConfig, RunManifest, RunRecord, RunStore, SCHEMA};
use lpmforge::selection::{nets_of, score_set, select, LpmSetScore, SelectionStrategy};
use lpmforge::{Error, Result};

#[derive(Parser)]
#[command(name = "lpmforge", version, about = "Local process model mining")]
struct Cli {
    /// Size of the worker pool; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine and rank local process models.
    Mine(MineArgs),
    /// Remove chaotic activities one at a time.
    FilterChaotic(FilterArgs),
    /// Compute activity projection sets.
    Project(ProjectArgs),
    /// Select a non-redundant subset of a run's patterns.
    Select(SelectArgs),
    /// Compare a ranking with an ideal ranking.
    Eval(EvalArgs),
    /// Serve stored runs over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct LogArgs {
    /// Event log (.xes, .csv or .json).
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = "case")]
    case: String,
    #[arg(long, default_value = "activity")]
    activity: String,
    #[arg(long, default_value = "timestamp")]
    time: String,
    /// CSV has no timestamp column.
    #[arg(long)]
    no_time: bool,
}

impl LogArgs {
    fn load(&self) -> Result<EventLog> {
        let bytes = fs::read(&self.log)?;
        match self.log.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("xes") => parse_xes(&bytes),
            Some("json") => Ok(serde_json::from_slice(&bytes)?),
            _ => parse_csv(
                &bytes,
                &CsvMapping {
                    case: self.case.clone(),
                    activity: self.activity.clone(),
                    timestamp: (!self.no_time).then(|| self.time.clone()),
                },
            ),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PruningArg {
    Bound,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapStrategyArg {
    Dynamic,
    Static,
    Cached,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ProjectionArg {
    Markov,
    Entropy,
    Mrig,
    None,
}

#[derive(Args)]
struct ProjectionFlags {
    #[arg(long, default_value_t = DEFAULT_INFLATION)]
    inflation: f64,
    /// Defaults to 2·log2(n+1) for n activities.
    #[arg(long)]
    entropy_threshold: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MRIG_THRESHOLD)]
    mrig_threshold: f64,
}

impl ProjectionFlags {
    fn method(&self, p: ProjectionArg) -> Option<ProjectionMethod> {
        match p {
            ProjectionArg::Markov => Some(ProjectionMethod::Markov(self.inflation)),
            ProjectionArg::Entropy => Some(ProjectionMethod::Entropy(self.entropy_threshold)),
            ProjectionArg::Mrig => Some(ProjectionMethod::Mrig(self.mrig_threshold)),
            ProjectionArg::None => None,
        }
    }
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    log: LogArgs,
    #[arg(long, default_value_t = 1)]
    min_support: usize,
    #[arg(long, default_value_t = 0.0)]
    min_determinism: f64,
    /// Expansion rounds; patterns grow to at most this many leaves plus one.
    #[arg(long, default_value_t = 3)]
    max_iterations: usize,
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    #[arg(long, value_enum, default_value = "bound")]
    pruning: PruningArg,
    /// Maximum number of events between consecutive instance events.
    #[arg(long, conflicts_with = "time_gap")]
    event_gap: Option<usize>,
    /// Maximum time between consecutive instance events, e.g. `2m`.
    #[arg(long)]
    time_gap: Option<String>,
    #[arg(long, value_enum, default_value = "cached")]
    gap_strategy: GapStrategyArg,
    /// Weights of support, confidence, language fit, determinism and coverage.
    #[arg(long, num_args = 5, value_names = ["S", "C", "L", "D", "COV"])]
    weights: Option<Vec<f64>>,
    /// Support squash constant; the number of traces by default.
    #[arg(long)]
    squash: Option<f64>,
    #[arg(long, default_value_t = lpmforge::miner::DEFAULT_MAX_ACTIVITIES)]
    max_activities: usize,
    #[arg(long, value_enum, default_value = "none")]
    projection: ProjectionArg,
    #[command(flatten)]
    projection_flags: ProjectionFlags,
    /// Directory receiving `<id>.json` and `<id>.manifest.json`.
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Direct,
    Indirect,
    LeastFrequent,
    MostFrequent,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    log: LogArgs,
    #[arg(long, value_enum, default_value = "direct")]
    variant: VariantArg,
    /// Seed of the random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Laplace smoothing with alpha = 1 / number of activities.
    #[arg(long, value_enum, default_value = "off")]
    smoothing: OnOff,
    /// Number of activities to keep.
    #[arg(long, default_value_t = 2)]
    keep: usize,
    /// Report destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Writes the filtered log as CSV.
    #[arg(long)]
    filtered_log: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    log: LogArgs,
    #[arg(long, value_enum, default_value = "markov")]
    method: ProjectionArg,
    #[command(flatten)]
    projection_flags: ProjectionFlags,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Alignment,
    Greedy,
    GreedyFscore,
    Diversity,
}

#[derive(Args)]
struct SelectArgs {
    /// Run file written by `mine`.
    #[arg(long)]
    run: PathBuf,
    #[command(flatten)]
    log: LogArgs,
    #[arg(long, value_enum, default_value = "alignment")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0.5)]
    diversity_threshold: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Run file or JSON array of ranked patterns.
    #[arg(long)]
    ranking: PathBuf,
    #[arg(long)]
    ideal: PathBuf,
    #[arg(long, num_args = 1.., default_values_t = [5, 10, 20])]
    k: Vec<usize>,
}

#[derive(Args)]
struct ServeArgs {
    /// Directory of run files.
    #[arg(long, default_value = "runs")]
    data: PathBuf,
    #[arg(long, default_value_t = lpmforge::service::DEFAULT_PORT)]
    port: u16,
}

fn write_json(value: &impl Serialize, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_mine(a: &MineArgs) -> Result<()> {
    let started = Instant::now();
    let started_at = chrono::Utc::now().to_rfc3339();
    let log = a.log.load()?;
    let gap = match (&a.event_gap, &a.time_gap) {
        (Some(g), _) => Some(GapConstraint::Event(*g)),
        (None, Some(d)) => Some(GapConstraint::Time(parse_duration(d)?)),
        (None, None) => None,
    };
    let mut weights = RankingWeights { c: a.squash, ..RankingWeights::default() };
    if let Some(w) = &a.weights {
        (weights.support, weights.confidence, weights.language_fit, weights.determinism, weights.coverage) =
            (w[0], w[1], w[2], w[3], w[4]);
    }
    if let Ok(b) = std::env::var("LPMFORGE_BUDGET") {
        weights.budget = b.trim().parse().map_err(|_| Error::Config(format!("LPMFORGE_BUDGET: not a count: {b:?}")))?;
    }
    let miner = MinerConfig {
        min_support: a.min_support,
        min_determinism: a.min_determinism,
        max_iterations: a.max_iterations,
        top_k: a.top_k,
        weights,
        gap,
        gap_strategy: match a.gap_strategy {
            GapStrategyArg::Dynamic => ExtractionStrategy::Dynamic,
            GapStrategyArg::Static => ExtractionStrategy::Static,
            GapStrategyArg::Cached => ExtractionStrategy::CachedDynamic,
        },
        max_activities: a.max_activities,
        pruning: match a.pruning {
            PruningArg::Bound => Pruning::Bound,
            PruningArg::Monotone => Pruning::Monotone,
        },
        ..MinerConfig::default()
    };
    let config = RunConfig { miner, projection: a.projection_flags.method(a.projection) };
    let done = execute(&log, config)?;
    let mut store = RunStore::open(&a.out_dir)?;
    let run_path = store.path_of(&done.record.id).expect("directory store");
    let manifest_path = a.out_dir.join(format!("{}.manifest.json", done.record.id));
    let manifest = RunManifest {
        schema: SCHEMA,
        id: done.record.id.clone(),
        log_digest: done.record.log_digest.clone(),
        log_path: Some(a.log.log.display().to_string()),
        config: done.record.config.clone(),
        rounds: done.rounds,
        qualifying: done.qualifying,
        projection_sets: done.record.projection.clone(),
        started_at,
        wall_time_ms: started.elapsed().as_millis(),
        outputs: vec![run_path.display().to_string(), manifest_path.display().to_string()],
    };
    let patterns = done.record.ranking.len();
    store.insert(done.record)?;
    write_json(&manifest, Some(&manifest_path))?;
    println!("{} patterns -> {}", patterns, run_path.display());
    Ok(())
}

fn cmd_filter(a: &FilterArgs) -> Result<()> {
    let log = a.log.load()?;
    let variant = match a.variant {
        VariantArg::Direct => FilterVariant::Direct,
        VariantArg::Indirect => FilterVariant::Indirect,
        VariantArg::LeastFrequent => FilterVariant::LeastFrequentFirst,
        VariantArg::MostFrequent => FilterVariant::MostFrequentFirst,
        VariantArg::Random => FilterVariant::Random(a.seed),
    };
    let smoothing = match a.smoothing {
        OnOff::On => Smoothing::Auto,
        OnOff::Off => Smoothing::Off,
    };
    let report = filter_chaotic(&log, variant, smoothing, a.keep)?;
    if let Some(p) = &a.filtered_log {
        fs::write(p, write_csv(report.logs.last().unwrap_or(&log)))?;
    }
    write_json(&serde_json::json!({ "schema": SCHEMA, "report": report }), a.output.as_deref())
}

fn cmd_project(a: &ProjectArgs) -> Result<()> {
    let log = a.log.load()?;
    let method = a
        .projection_flags
        .method(a.method)
        .ok_or_else(|| Error::InvalidArgument("choose a projection method".into()))?;
    let sets = discover(&log, method)?;
    let threshold = match method {
        ProjectionMethod::Entropy(None) => Some(default_entropy_threshold(log.alphabet().len())),
        _ => None,
    };
    write_json(
        &serde_json::json!({ "schema": SCHEMA, "method": method, "entropy_threshold": threshold, "projections": sets }),
        a.output.as_deref(),
    )
}

#[derive(Serialize)]
struct Selected {
    index: usize,
    tree: String,
}

#[derive(Serialize)]
struct SelectionReport {
    schema: u32,
    run: String,
    strategy: SelectionStrategy,
    selected: Vec<Selected>,
    score: LpmSetScore,
}

fn cmd_select(a: &SelectArgs) -> Result<()> {
    let run: RunRecord = serde_json::from_slice(&fs::read(&a.run)?)?;
    let log = a.log.load()?;
    if log_digest(&log) != run.log_digest {
        return Err(Error::InvalidArgument(format!("log {} is not the log of run {}", a.log.log.display(), run.id)));
    }
    let strategy = match a.strategy {
        StrategyArg::Alignment => SelectionStrategy::Alignment,
        StrategyArg::Greedy => SelectionStrategy::Greedy,
        StrategyArg::GreedyFscore => SelectionStrategy::GreedyFscore,
        StrategyArg::Diversity => SelectionStrategy::Diversity,
    };
    let trees: Vec<_> = run.ranking.iter().map(|e| e.tree.clone()).collect();
    let chosen = select(&log, &trees, strategy, a.diversity_threshold)?;
    let picked: Vec<_> = chosen.iter().map(|&i| trees[i].clone()).collect();
    let score = score_set(&log, &nets_of(&picked))?;
    let selected = chosen.iter().map(|&i| Selected { index: i, tree: trees[i].to_string() }).collect();
    write_json(&SelectionReport { schema: SCHEMA, run: run.id, strategy, selected, score }, a.output.as_deref())
}

fn load_ranking(path: &Path) -> Result<Vec<Evaluation>> {
    let value: serde_json::Value = serde_json::from_slice(&fs::read(path)?)?;
    if value.is_array() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(serde_json::from_value::<RunRecord>(value)?.ranking)
    }
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let ranking = load_ranking(&a.ranking)?;
    let ideal = load_ranking(&a.ideal)?;
    let trees = |r: &[Evaluation]| r.iter().map(|e| e.tree.clone()).collect::<Vec<_>>();
    let scores = |r: &[Evaluation]| r.iter().map(|e| e.quality.aggregate).collect::<Vec<_>>();
    println!("{:>6} {:>10} {:>10}", "k", "recall", "ndcg");
    for &k in &a.k {
        let recall = recall_at_k(&trees(&ranking), &trees(&ideal), k)?;
        let ndcg = ndcg_at_k(&scores(&ranking), &scores(&ideal), k)?;
        println!("{k:>6} {recall:>10.4} {ndcg:>10.4}");
    }
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let store = RunStore::open(&a.data)?;
    eprintln!("serving {} runs from {} on port {}", store.len(), a.data.display(), a.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(lpmforge::service::serve(store, a.port))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::FilterChaotic(a) => cmd_filter(a),
        Command::Project(a) => cmd_project(a),
        Command::Select(a) => cmd_select(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } }));
            ExitCode::from(e.code() as u8)
        }
    }
}
