//! The `mspmf` command line.
//!
//! Settings come from three layers, later ones winning: built-in defaults,
//! an optional `--config` TOML file, then command-line flags. Relative paths
//! inside the config file are resolved against the config file's directory.
//!
//! Exit codes: 0 success, 1 usage, configuration or input error, 2 training
//! diverged. `compare` also exits 1 when the two modes disagree beyond the
//! tolerance.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::Problem;
use crate::distributed::{run_distributed, transfer_report};
use crate::eval::synth::{generate, SynthConfig};
use crate::eval::{evaluate, split, EvaluationReport, SplitSpec, TrainMode};
use crate::hyper::Hyperparams;
use crate::io::{load_dataset, write_atomic, write_dataset};
use crate::objective::ModelState;
use crate::train::{train_centralized, Termination, TrainTrace};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DIVERGED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mspmf", version, about = "Multi-source matrix factorization: training, evaluation and traffic reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic dataset (ratings, sources, manifest).
    Generate(GenerateArgs),
    /// Write the train/test partitions used by `evaluate`.
    Split(SplitArgs),
    /// Train once on the whole dataset and write factors and trace.
    Train(TrainArgs),
    /// Repeated split/train/predict with RMSE, buckets and baselines.
    Evaluate(EvaluateArgs),
    /// Train in both modes and report how far apart the results are.
    Compare(CompareArgs),
    /// Raw-data shipping versus latent-vector exchange, in bytes.
    TransferReport(TransferArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Central,
    Distributed,
}

impl From<ModeArg> for TrainMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Central => TrainMode::Central,
            ModeArg::Distributed => TrainMode::Distributed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with `manifest`, `mode`, `out`, `[hyper]`, `[split]`, `[generate]`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub lambda_u: Option<f64>,
    #[arg(long)]
    pub lambda_v: Option<f64>,
    /// Source reconstruction weight for every source.
    #[arg(long)]
    pub lambda_s: Option<f64>,
    /// Attribute-factor regularizer for every source.
    #[arg(long)]
    pub lambda_z: Option<f64>,
    /// Seed for factor initialization.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SplitFlags {
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub user_sources: Option<usize>,
    #[arg(long)]
    pub item_sources: Option<usize>,
    #[arg(long)]
    pub attributes: Option<usize>,
    #[arg(long)]
    pub source_density: Option<f64>,
    #[arg(long)]
    pub source_only_entities: Option<usize>,
    /// Draw sources independently of the rating factors.
    #[arg(long)]
    pub noise_sources: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub split: SplitFlags,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub split: SplitFlags,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long, default_value_t = 0)]
    pub shared_users: u64,
    #[arg(long, default_value_t = 0)]
    pub shared_items: u64,
    #[arg(long, default_value_t = 10)]
    pub k: u64,
    #[arg(long, default_value_t = 100)]
    pub iterations: u64,
    /// Entries in the raw source matrices that would otherwise be shipped.
    #[arg(long)]
    pub nnz: u64,
}

/// Contents of a `--config` file. Every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub manifest: Option<PathBuf>,
    pub mode: Option<TrainMode>,
    pub out: Option<PathBuf>,
    pub hyper: Hyperparams,
    pub split: SplitSpec,
    pub generate: SynthConfig,
}

impl ConfigFile {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ConfigFile = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.manifest = cfg.manifest.map(|p| base.join(p));
        cfg.out = cfg.out.map(|p| base.join(p));
        Ok(cfg)
    }

    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(ConfigFile::default()), ConfigFile::read)
    }
}

/// Everything a training or evaluation command needs, after merging layers.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub hyper: Hyperparams,
    pub split: SplitSpec,
    pub mode: TrainMode,
    pub out: Option<PathBuf>,
}

impl HyperArgs {
    pub fn apply(&self, h: &mut Hyperparams) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { h.$field = v; } )* };
        }
        set!(k, alpha, epsilon, max_iters, lambda_u, lambda_v, seed);
        if let Some(s) = self.lambda_s {
            h.source_default.s = s;
            h.user_sources.iter_mut().chain(h.item_sources.iter_mut()).for_each(|l| l.s = s);
        }
        if let Some(z) = self.lambda_z {
            h.source_default.z = z;
            h.user_sources.iter_mut().chain(h.item_sources.iter_mut()).for_each(|l| l.z = z);
        }
    }
}

impl SplitFlags {
    pub fn apply(&self, s: &mut SplitSpec) {
        if let Some(v) = self.train_fraction {
            s.train_fraction = v;
        }
        if let Some(v) = self.repetitions {
            s.repetitions = v;
        }
        if let Some(v) = self.split_seed {
            s.seed = v;
        }
    }
}

fn resolve(
    common: &CommonArgs,
    hyper: &HyperArgs,
    split: &SplitFlags,
    mode: Option<ModeArg>,
) -> anyhow::Result<RunConfig> {
    let cfg = ConfigFile::load(common.config.as_deref())?;
    let manifest = common
        .manifest
        .clone()
        .or(cfg.manifest)
        .context("no dataset manifest given (use --manifest or `manifest` in the config file)")?;
    let mut h = cfg.hyper;
    hyper.apply(&mut h);
    h.validate()?;
    let mut s = cfg.split;
    split.apply(&mut s);
    s.validate()?;
    Ok(RunConfig {
        manifest,
        hyper: h,
        split: s,
        mode: mode.map(TrainMode::from).or(cfg.mode).unwrap_or_default(),
        out: common.out.clone().or(cfg.out),
    })
}

fn require_out(out: &Option<PathBuf>) -> anyhow::Result<&Path> {
    let dir = out.as_deref().context("no output directory given (use --out or `out` in the config file)")?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn load_problem(manifest: &Path) -> anyhow::Result<Problem> {
    let data = load_dataset(manifest)?;
    Ok(Problem::new(data.ratings, data.sources)?)
}

fn write_factors(dir: &Path, state: &ModelState) -> anyhow::Result<()> {
    for (name, f) in state.named_factors() {
        write_atomic(&dir.join(format!("{name}.tsv")), f.to_tsv().as_bytes())?;
    }
    Ok(())
}

fn exit_for(termination: Termination) -> u8 {
    match termination {
        Termination::Diverged => EXIT_DIVERGED,
        _ => EXIT_OK,
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<u8> {
    let file = ConfigFile::load(args.common.config.as_deref())?;
    let mut cfg = file.generate;
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => { $( if let Some(v) = args.$flag { cfg.$field = v; } )* };
    }
    set!(users => users, items => items, rank => rank, density => density, noise => noise,
        user_sources => user_sources, item_sources => item_sources, attributes => attributes_per_source,
        source_density => source_density, source_only_entities => source_only_entities, seed => seed);
    if args.noise_sources {
        cfg.informative = false;
    }
    let out = args.common.out.clone().or(file.out);
    let dir = require_out(&out)?;
    let data = generate(&cfg)?;
    let manifest = write_dataset(dir, &data.ratings, &data.sources)?;
    println!(
        "wrote {} ratings and {} sources to {}",
        data.ratings.ratings.nnz(),
        data.sources.len(),
        manifest.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_split(args: &SplitArgs) -> anyhow::Result<u8> {
    let run = resolve(&args.common, &HyperArgs::default(), &args.split, None)?;
    let dir = require_out(&run.out)?;
    let data = load_dataset(&run.manifest)?;
    for s in split(&data.ratings, &run.split)? {
        let rep = dir.join(format!("rep_{}", s.repetition));
        write_dataset(&rep.join("train"), &s.train, &data.sources)?;
        write_atomic(&rep.join("test.tsv"), s.test.ratings.to_triples().as_bytes())?;
        println!(
            "rep_{}: {} train, {} test",
            s.repetition,
            s.train.ratings.nnz(),
            s.test.ratings.nnz()
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_train(args: &TrainArgs) -> anyhow::Result<u8> {
    let run = resolve(&args.common, &args.hyper, &SplitFlags::default(), args.mode)?;
    let dir = require_out(&run.out)?.to_path_buf();
    let problem = load_problem(&run.manifest)?;
    let trace: TrainTrace = match run.mode {
        TrainMode::Central => {
            let (state, trace) = train_centralized(&problem, &run.hyper)?;
            write_factors(&dir, &state)?;
            trace
        }
        TrainMode::Distributed => {
            let r = run_distributed(&problem, &run.hyper)?;
            write_factors(&dir, &r.state)?;
            write_atomic(&dir.join("ledger.tsv"), r.ledger.to_tsv().as_bytes())?;
            println!("bytes exchanged: {}", r.ledger.total());
            r.trace
        }
    };
    write_atomic(&dir.join("trace.tsv"), trace.to_tsv().as_bytes())?;
    println!(
        "{}: {} iterations, final loss {:.6e}",
        trace.termination.as_str(),
        trace.records.len(),
        trace.final_loss()
    );
    if trace.termination == Termination::Diverged {
        eprintln!("error: training diverged (non-finite loss)");
    }
    Ok(exit_for(trace.termination))
}

/// Tab-separated summary: one row per repetition, then the mean.
pub fn report_tsv(report: &EvaluationReport) -> String {
    let mut out = String::from("repetition\ttest_size\trmse\tuser_mean_rmse\titem_mean_rmse\titerations\ttermination\n");
    for r in &report.repetitions {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.repetition, r.test_size, r.rmse, r.user_mean_rmse, r.item_mean_rmse, r.iterations, r.termination
        ));
    }
    out.push_str(&format!(
        "mean\t\t{}\t{}\t{}\t\t\n",
        report.mean_rmse, report.mean_user_mean_rmse, report.mean_item_mean_rmse
    ));
    out
}

/// `axis\tbucket\tcount\trmse`, with an empty rmse for empty buckets.
pub fn buckets_tsv(report: &EvaluationReport) -> String {
    let mut out = String::from("axis\tbucket\tcount\trmse\n");
    for (axis, b) in [("user", &report.user_buckets), ("item", &report.item_buckets)] {
        for s in &b.buckets {
            let rmse = s.rmse.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{axis}\t{}\t{}\t{rmse}\n", s.label, s.count));
        }
    }
    out
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<u8> {
    let run = resolve(&args.common, &args.hyper, &args.split, args.mode)?;
    let dir = require_out(&run.out)?.to_path_buf();
    let problem = load_problem(&run.manifest)?;
    let report = evaluate(&problem, &run.split, &run.hyper, run.mode)?;
    write_atomic(&dir.join("report.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    write_atomic(&dir.join("report.tsv"), report_tsv(&report).as_bytes())?;
    write_atomic(&dir.join("buckets.tsv"), buckets_tsv(&report).as_bytes())?;
    println!(
        "rmse {:.4}  user-mean {:.4}  item-mean {:.4}",
        report.mean_rmse, report.mean_user_mean_rmse, report.mean_item_mean_rmse
    );
    if report.diverged() {
        eprintln!("error: training diverged in at least one repetition");
        return Ok(EXIT_DIVERGED);
    }
    Ok(EXIT_OK)
}

pub fn cmd_compare(args: &CompareArgs) -> anyhow::Result<u8> {
    let run = resolve(&args.common, &args.hyper, &SplitFlags::default(), None)?;
    let problem = load_problem(&run.manifest)?;
    let (central, central_trace) = train_centralized(&problem, &run.hyper)?;
    let dist = run_distributed(&problem, &run.hyper)?;
    let factor_diff = central.max_abs_diff(&dist.state);
    let (a, b) = (central_trace.losses(), dist.trace.losses());
    if a.len() != b.len() {
        println!("iterations: central {} distributed {}", a.len(), b.len());
        return Ok(EXIT_USAGE);
    }
    let loss_diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    println!("iterations\t{}", a.len());
    println!("max_abs_factor_diff\t{factor_diff:e}");
    println!("max_rel_loss_diff\t{loss_diff:e}");
    println!("bytes_exchanged\t{}", dist.ledger.total());
    if factor_diff <= args.tolerance && loss_diff <= args.tolerance {
        println!("equivalent within {:e}", args.tolerance);
        Ok(exit_for(central_trace.termination))
    } else {
        println!("NOT equivalent within {:e}", args.tolerance);
        Ok(EXIT_USAGE)
    }
}

pub fn cmd_transfer_report(args: &TransferArgs) -> anyhow::Result<u8> {
    if args.nnz == 0 {
        bail!("--nnz must be positive");
    }
    print!(
        "{}",
        transfer_report(args.shared_users, args.shared_items, args.k, args.iterations, args.nnz)
    );
    Ok(EXIT_OK)
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::TransferReport(a) => cmd_transfer_report(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
