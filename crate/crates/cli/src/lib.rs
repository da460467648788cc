//! The `ssdlab` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
//! failure. Diagnostics go to stderr; data goes to the named output files
//! or stdout.

pub mod figures;
pub mod replay;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use ssdlab_core::egta::{
    check_ssd_inequalities, classify_matrix, estimate_payoffs, read_payoff_report,
    write_payoff_report, EgtaError, EmpiricalPayoffMatrix, Manifest, PlayoutSpec, StopRule,
    Thresholds, Tolerance,
};
use ssdlab_core::games::EpisodeLog;
use ssdlab_core::harness::{
    read_metrics, run_episode, sweep, train, write_metrics, Environment, ExperimentConfig,
    HarnessError, Mode, SweepSpec,
};
use ssdlab_core::learner::{load_policy, GreedyPolicy};

use figures::{emit_figure_data, FigureKind, ResultsTable};

#[derive(Debug, Parser)]
#[command(name = "ssdlab", version, about = "Sequential social dilemma laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train two independent learners from a config file.
    Train(TrainArgs),
    /// Run every cell of a parameter sweep.
    Sweep(SweepArgs),
    /// Estimate and classify the payoff matrix of a policy population.
    Egta(EgtaArgs),
    /// Classify a 2x2 matrix game given its four payoffs.
    Classify(ClassifyArgs),
    /// Print an episode as ASCII frames.
    Replay(ReplayArgs),
    /// Check an experiment config or sweep spec without running it.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Metrics CSV; overrides the config and defaults to stdout.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep spec to run.
    #[arg(long, required_unless_present = "from_metrics")]
    pub spec: Option<PathBuf>,
    /// Reuse an existing metrics file instead of running.
    #[arg(long, conflicts_with = "spec")]
    pub from_metrics: Option<PathBuf>,
    /// Merged metrics CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long, value_enum)]
    pub figure: Option<FigureKind>,
    #[arg(long, requires = "figure")]
    pub figure_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EgtaArgs {
    /// Policy pool manifest.
    #[arg(long, required_unless_present = "from_report", requires = "config")]
    pub manifest: Option<PathBuf>,
    /// Experiment config describing the game to play.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Existing payoff reports to summarise instead of estimating.
    #[arg(long, num_args = 1.., conflicts_with = "manifest")]
    pub from_report: Vec<PathBuf>,
    /// Payoff report CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha_c: Option<f64>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    /// Relabel manifest entries by the quartiles of their metrics.
    #[arg(long)]
    pub relabel: bool,
    #[arg(long, default_value_t = 1)]
    pub episodes_per_draw: usize,
    /// Absolute standard-error tolerance; defaults to 1% of the largest cell.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Maximum playouts per pairing.
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Estimation seed; the config seed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub figure: Option<FigureKind>,
    #[arg(long, requires = "figure")]
    pub figure_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Episode log (JSON) to replay.
    #[arg(long, required_unless_present = "checkpoints")]
    pub log: Option<PathBuf>,
    /// Two checkpoints to play greedily against each other.
    #[arg(long, num_args = 2, value_names = ["AGENT1", "AGENT2"], conflicts_with = "log")]
    pub checkpoints: Vec<PathBuf>,
    /// Map override (path or builtin name).
    #[arg(long)]
    pub map: Option<String>,
    /// World seed for checkpoint play; the config seed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frames to play from checkpoints; the episode length when omitted.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Also write the played episode as a JSON log.
    #[arg(long)]
    pub save_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<EgtaError> for CliError {
    fn from(e: EgtaError) -> Self {
        match e {
            EgtaError::Harness(h) => h.into(),
            EgtaError::InvalidThresholds { .. }
            | EgtaError::EmptyPool(_)
            | EgtaError::OverlappingPools(_)
            | EgtaError::Manifest { .. }
            | EgtaError::Report(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ssdlab: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command, writing its data output to `out`.
pub fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Train(a) => cmd_train(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Egta(a) => cmd_egta(a, out),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Replay(a) => cmd_replay(a, out),
        Command::ValidateConfig(a) => cmd_validate(a, out),
    }
}

fn write_to(path: Option<&Path>, data: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(runtime)?;
            }
            fs::write(p, data).map_err(runtime)
        }
        None => out.write_all(data).map_err(runtime),
    }
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    // written here rather than by the trainer so stdout can be the default
    let from_config = cfg.metrics_path.take().map(|p| cfg.resolve(&p));
    if let Some(d) = a.checkpoint_dir {
        cfg.checkpoint_dir = Some(std::path::absolute(&d).map_err(runtime)?);
    }
    let outcome = train(&cfg)?;
    let mut buf = Vec::new();
    write_metrics(&outcome.metrics, &mut buf)?;
    let target = a.metrics_out.or(from_config);
    write_to(target.as_deref(), &buf, out)?;
    eprintln!(
        "trained {} frames over {} episodes",
        outcome.frames, outcome.episodes
    );
    Ok(())
}

fn emit(
    table: &ResultsTable,
    kind: Option<FigureKind>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(kind) = kind {
        let data = emit_figure_data(table, kind).map_err(runtime)?;
        write_to(path, data.as_bytes(), out)?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let records = if let Some(m) = &a.from_metrics {
        let f = fs::File::open(m).map_err(|e| config(format!("{}: {e}", m.display())))?;
        read_metrics(f).map_err(config)?
    } else {
        let path = a.spec.as_ref().expect("clap enforces spec or from_metrics");
        let spec = SweepSpec::load(path)?;
        let res = sweep(&spec, a.parallelism.max(1))?;
        for f in &res.failures {
            eprintln!("cell {} seed {} failed: {}", f.cell_id, f.seed, f.error);
        }
        let mut buf = Vec::new();
        write_metrics(&res.rows, &mut buf)?;
        // stdout carries the figure when one is requested without a path
        if a.out.is_some() || a.figure.is_none() || a.figure_out.is_some() {
            write_to(a.out.as_deref(), &buf, out)?;
        }
        if !res.failures.is_empty() {
            return Err(runtime(format!("{} runs failed", res.failures.len())));
        }
        read_metrics(buf.as_slice())?
    };
    emit(
        &ResultsTable::Metrics(records),
        a.figure,
        a.figure_out.as_deref(),
        out,
    )
}

fn cmd_egta(a: EgtaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !a.from_report.is_empty() {
        let mut ms = Vec::new();
        for p in &a.from_report {
            let f = fs::File::open(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
            ms.push(read_payoff_report(f)?);
        }
        let kind = a.figure.unwrap_or(FigureKind::Scatter);
        return emit(&ResultsTable::Payoffs(ms), Some(kind), a.figure_out.as_deref(), out);
    }
    let cfg_path = a.config.as_ref().expect("clap requires config with manifest");
    let cfg = ExperimentConfig::load(cfg_path)?;
    let manifest_path = a.manifest.as_ref().expect("clap enforces manifest or from_report");
    let mut manifest = Manifest::load(manifest_path)?;
    let thresholds = match (a.alpha_c, a.alpha_d) {
        (Some(c), Some(d)) => Some(Thresholds::new(c, d)?),
        (None, None) if a.relabel => {
            let metrics: Vec<f64> = manifest.entries.iter().map(|e| e.metric).collect();
            Some(Thresholds::from_quartiles(&metrics)?)
        }
        (None, None) => None,
        _ => return Err(CliError::Usage("--alpha-c and --alpha-d go together".into())),
    };
    if let Some(t) = thresholds {
        let items = manifest
            .entries
            .iter()
            .map(|e| (e.path.clone(), e.metric))
            .collect();
        manifest = Manifest::labelled(t, items);
        eprintln!("thresholds alpha_c={} alpha_d={}", t.alpha_c, t.alpha_d);
    }
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let pools = manifest.into_pools(base).map_err(|e| match e {
        EgtaError::Learner(l) => config(l),
        other => other.into(),
    })?;
    let env = Environment::new(cfg.rules(), cfg.load_map()?, cfg.seed)?;
    let play = PlayoutSpec {
        episodes_per_draw: a.episodes_per_draw.max(1),
        episode_length: cfg.episode_length,
        epsilon: a.epsilon,
    };
    let stop = StopRule {
        tolerance: a
            .tolerance
            .map_or(StopRule::default().tolerance, Tolerance::Absolute),
        max_episodes_per_cell: a.budget,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(cfg.seed));
    let est = estimate_payoffs(
        (&pools.cooperators, &pools.defectors),
        &env,
        &play,
        &stop,
        &mut rng,
    )?;
    if est.budget_exhausted {
        eprintln!("warning: budget exhausted before the cells converged");
    }
    let mut buf = Vec::new();
    write_payoff_report(&est.matrix, est.budget_exhausted, &mut buf)?;
    if a.out.is_some() || a.figure.is_none() || a.figure_out.is_some() {
        write_to(a.out.as_deref(), &buf, out)?;
    }
    emit(
        &ResultsTable::Payoffs(vec![est.matrix]),
        a.figure,
        a.figure_out.as_deref(),
        out,
    )
}

fn cmd_classify(a: ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let m = EmpiricalPayoffMatrix::exact(a.r, a.p, a.s, a.t);
    let class = classify_matrix(&m);
    let mut line = format!("{class} greed={} fear={}", m.greed(), m.fear());
    let failed = check_ssd_inequalities(&m).failed();
    if !failed.is_empty() {
        let f: Vec<String> = failed.iter().map(u8::to_string).collect();
        line.push_str(&format!(" failed={}", f.join(",")));
    }
    writeln!(out, "{line}").map_err(runtime)
}

fn cmd_replay(a: ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if a.map.is_some() {
        cfg.map = a.map.clone();
    }
    let map = cfg.load_map()?;
    let seed = a.seed.unwrap_or(cfg.seed);
    let env = Environment::new(cfg.rules(), map, seed)?;
    let log = match &a.log {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
            let log: EpisodeLog = serde_json::from_str(&text).map_err(config)?;
            log
        }
        None => {
            let mut nets = Vec::new();
            for p in &a.checkpoints {
                let ck = load_policy(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
                nets.push(GreedyPolicy::new(Arc::new(ck.net)));
            }
            let [mut p0, mut p1]: [GreedyPolicy; 2] =
                nets.try_into().expect("clap enforces two checkpoints");
            let mut e = env.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_episode(
                &mut e,
                [&mut p0, &mut p1],
                Mode::Eval { epsilon: 0.0 },
                a.frames.unwrap_or(cfg.episode_length),
                &mut rng,
            )?
        }
    };
    if let Some(p) = &a.save_log {
        let json = serde_json::to_string(&log).map_err(runtime)?;
        write_to(Some(p), json.as_bytes(), out)?;
    }
    let frames = replay::replay_log(&env, &log)?;
    for f in frames {
        out.write_all(f.as_bytes()).map_err(runtime)?;
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.path)
        .map_err(|e| config(format!("{}: {e}", a.path.display())))?;
    let value: toml::Table = text.parse().map_err(config)?;
    if value.contains_key("seeds_per_cell") {
        let spec = SweepSpec::load(&a.path)?;
        for cell in spec.cells() {
            for k in 0..spec.seeds_per_cell {
                spec.cell_config(&cell, k)?;
            }
        }
        writeln!(out, "ok: sweep with {} cells", spec.cells().len()).map_err(runtime)
    } else {
        ExperimentConfig::load(&a.path)?;
        writeln!(out, "ok").map_err(runtime)
    }
}
