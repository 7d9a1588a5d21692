//! `keyspot` command line: dataset generation, training, evaluation and
//! plotting for the synthetic keypoint-detection pipeline.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure.

mod chart;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use image::Rgb;

use keyspot_core::config::RunConfig;
use keyspot_core::detector::{self, Checkpoint, PairSource, TrainOutput};
use keyspot_core::error::Error as CoreError;
use keyspot_core::evalbench::{self, MetricsReport};
use keyspot_core::io::{self, Manifest, ManifestEntry};
use keyspot_core::sampler::sample_keypoints;
use keyspot_core::scenegen::{self, TwoViewPair};
use keyspot_core::targets::{StrengthSchedule, TopkScope, ViewSide};

#[derive(Parser)]
#[command(name = "keyspot", version, about = "Synthetic keypoint detector pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (train/test pair directories + manifest).
    Gen(GenArgs),
    /// Train a detector on a generated dataset.
    Train(TrainArgs),
    /// Evaluate checkpoints on the test split.
    Eval(EvalArgs),
    /// Render metric curves or keypoint overlays as PNG files.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopkScopeArg {
    PerPair,
    PerBatch,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverageModeArg {
    GaussianMvs,
    Uniform,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Constant,
    LinearDecay,
}

/// Configuration source shared by all commands: an optional TOML file plus
/// flag overrides mirroring the config keys.
#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    // scene / pairs
    #[arg(long)]
    image_size: Option<usize>,
    #[arg(long)]
    tracks: Option<usize>,
    #[arg(long)]
    min_overlap: Option<f64>,

    // training
    #[arg(long)]
    pairs_total: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr_decoder: Option<f64>,
    #[arg(long)]
    lr_encoder: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    checkpoint_count: Option<usize>,

    // targets
    #[arg(long)]
    nms_window: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    topk_scope: Option<TopkScopeArg>,
    #[arg(long)]
    prior_strength: Option<f64>,
    #[arg(long)]
    strength_schedule: Option<ScheduleArg>,

    // losses
    #[arg(long)]
    coverage_mode: Option<CoverageModeArg>,
    #[arg(long)]
    coverage_weight: Option<f64>,

    // augmentation
    #[arg(long)]
    aug_rot: Option<bool>,
    #[arg(long)]
    aug_flip: Option<bool>,

    // sampler / eval
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    epsilon_px: Option<f64>,
    #[arg(long)]
    ransac_threshold_px: Option<f64>,

    /// Baseline reproduction bundle: nms_window=1, per-batch top-k, no
    /// augmentation.
    #[arg(long)]
    v1_compat: bool,
}

impl ConfigArgs {
    fn build(&self) -> anyhow::Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_toml(
                &fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
            )
            .map_err(usage)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.image_size {
            config.scene.image_size = v;
            config.scene.focal = v as f64;
            config.train.train_resolution = v;
        }
        if let Some(v) = self.tracks {
            config.scene.tracks = v;
        }
        if let Some(v) = self.min_overlap {
            config.pairs.min_overlap = v;
        }
        if let Some(v) = self.pairs_total {
            config.train.pairs_total = v;
        }
        if let Some(v) = self.batch_size {
            config.train.batch_size = v;
        }
        if let Some(v) = self.lr_decoder {
            config.train.lr_decoder = v;
        }
        if let Some(v) = self.lr_encoder {
            config.train.lr_encoder = v;
        }
        if let Some(v) = self.seed {
            config.train.seed = v;
        }
        if let Some(v) = self.checkpoint_count {
            config.train.checkpoint_count = v;
        }
        if let Some(v) = self.nms_window {
            config.train.target.nms_window = v;
        }
        if let Some(v) = self.k {
            config.train.target.k = v;
        }
        if let Some(v) = self.topk_scope {
            config.train.target.topk_scope = match v {
                TopkScopeArg::PerPair => TopkScope::PerPair,
                TopkScopeArg::PerBatch => TopkScope::PerBatch,
            };
        }
        if let Some(v) = self.prior_strength {
            config.train.target.prior_strength = v;
        }
        if let Some(v) = self.strength_schedule {
            config.train.target.strength_schedule = match v {
                ScheduleArg::Constant => StrengthSchedule::Constant,
                ScheduleArg::LinearDecay => StrengthSchedule::LinearDecay,
            };
        }
        if let Some(v) = self.coverage_mode {
            config.train.loss.coverage_mode = match v {
                CoverageModeArg::GaussianMvs => keyspot_core::losses::CoverageMode::GaussianMvs,
                CoverageModeArg::Uniform => keyspot_core::losses::CoverageMode::Uniform,
                CoverageModeArg::Off => keyspot_core::losses::CoverageMode::Off,
            };
        }
        if let Some(v) = self.coverage_weight {
            config.train.loss.coverage_weight = v;
        }
        if let Some(v) = self.aug_rot {
            config.train.aug_rot = v;
        }
        if let Some(v) = self.aug_flip {
            config.train.aug_flip = v;
        }
        if let Some(v) = self.alpha {
            config.sample.alpha = v;
        }
        if let Some(v) = self.budget {
            config.sample.budget = v;
        }
        if let Some(v) = self.epsilon_px {
            config.eval.epsilon_px = v;
        }
        if let Some(v) = self.ransac_threshold_px {
            config.eval.ransac.threshold_px = v;
        }
        if self.v1_compat {
            config.train.apply_v1_compat();
        }
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output dataset directory (default: `$KEYSPOT_OUT/dataset`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    train_pairs: usize,
    #[arg(long, default_value_t = 5)]
    test_pairs: usize,
    /// First scene seed of the train partition.
    #[arg(long, default_value_t = 0)]
    train_seed_start: u64,
    /// First scene seed of the test partition.
    #[arg(long, default_value_t = 1_000_000)]
    test_seed_start: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Dataset directory produced by `gen`.
    #[arg(long)]
    dataset: PathBuf,
    /// Run output directory (default: `$KEYSPOT_OUT/run`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Checkpoint files or a directory containing them.
    #[arg(long, required = true, num_args = 1..)]
    checkpoints: Vec<PathBuf>,
    /// Dataset directory; the test split is used.
    #[arg(long)]
    dataset: PathBuf,
    /// Report output directory (default: `$KEYSPOT_OUT/eval`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate even if the checkpoints carry different config hashes.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum PlotCommand {
    /// Repeatability-vs-step and AUC@10-vs-step on shared axes.
    Curves {
        /// Report JSON files or a directory of them.
        #[arg(long, required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A pair image with the top-N detected keypoints drawn.
    Overlay {
        /// Pair directory from `gen`.
        #[arg(long)]
        pair: PathBuf,
        /// Checkpoint to detect with; omitted = smoothed track prior.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        top: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct PlotArgs {
    #[command(subcommand)]
    command: PlotCommand,
}

/// Marker for usage-level failures (exit 1 instead of 2).
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

fn usage(err: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(err.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Plot(args) => match args.command {
            PlotCommand::Curves { reports, out } => cmd_plot_curves(&reports, out),
            PlotCommand::Overlay {
                pair,
                checkpoint,
                top,
                out,
                config,
            } => cmd_plot_overlay(&pair, checkpoint.as_deref(), top, out, &config),
        },
    }
}

fn out_dir(flag: Option<PathBuf>, default_leaf: &str) -> PathBuf {
    flag.unwrap_or_else(|| io::default_output_root().join(default_leaf))
}

fn generate_pair(config: &RunConfig, seed: u64) -> anyhow::Result<TwoViewPair> {
    for salt in 0..8u64 {
        let scene = scenegen::generate_scene(&config.scene, seed ^ (salt << 56))?;
        match scenegen::sample_pair(&scene, &config.pairs, seed.wrapping_add(salt)) {
            Ok(pair) => return Ok(pair),
            Err(CoreError::SamplingExhausted { .. }) | Err(CoreError::EmptyPrior) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    bail!("no valid pair found for seed {seed}")
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let config = args.config.build()?;
    let train_range = args.train_seed_start..args.train_seed_start + args.train_pairs as u64;
    let test_range = args.test_seed_start..args.test_seed_start + args.test_pairs as u64;
    if train_range.start < test_range.end && test_range.start < train_range.end {
        return Err(usage(format!(
            "train seeds {train_range:?} overlap test seeds {test_range:?}; pick disjoint ranges"
        )));
    }
    let dir = out_dir(args.out, "dataset");
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new(config.hash());
    for (split, range) in [("train", train_range), ("test", test_range)] {
        for seed in range {
            let pair = generate_pair(&config, seed)?;
            let name = format!("{split}_{seed:07}");
            io::save_pair(&dir.join(&name), &pair)?;
            let entry = ManifestEntry {
                name,
                seed,
                overlap: pair.overlap,
            };
            if split == "train" {
                manifest.train.push(entry);
            } else {
                manifest.test.push(entry);
            }
        }
    }
    manifest.save(&dir.join("manifest.json"))?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    println!(
        "wrote {} train + {} test pairs to {} (manifest hash {})",
        manifest.train.len(),
        manifest.test.len(),
        dir.display(),
        &manifest.hash()[..12]
    );
    Ok(())
}

/// Pair source backed by the pair directories of a dataset split.
struct DiskDataset {
    dirs: Vec<PathBuf>,
}

impl DiskDataset {
    fn open(dataset: &Path, entries: &[ManifestEntry]) -> Self {
        Self {
            dirs: entries.iter().map(|e| dataset.join(&e.name)).collect(),
        }
    }

    fn load_all(&self) -> anyhow::Result<Vec<TwoViewPair>> {
        self.dirs
            .iter()
            .map(|d| io::load_pair(d).map_err(Into::into))
            .collect()
    }
}

impl PairSource for DiskDataset {
    fn num_pairs(&self) -> usize {
        self.dirs.len()
    }

    fn pair(&self, idx: usize) -> keyspot_core::error::Result<TwoViewPair> {
        io::load_pair(&self.dirs[idx])
    }
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let config = args.config.build()?;
    let manifest = Manifest::load(&args.dataset.join("manifest.json"))?;
    let dataset = DiskDataset::open(&args.dataset, &manifest.train);
    if dataset.num_pairs() == 0 {
        return Err(usage("dataset has no training pairs"));
    }
    let dir = out_dir(args.out, "run");
    fs::create_dir_all(&dir)?;
    let TrainOutput {
        checkpoints,
        metrics,
        skipped_pairs_total,
    } = detector::train(&config.train, &dataset)?;
    for ckpt in &checkpoints {
        io::save_checkpoint(&dir.join(format!("step_{:06}.ckpt", ckpt.step)), ckpt)?;
    }
    io::append_metrics_log(&dir.join("metrics.jsonl"), &metrics)?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    println!(
        "trained {} steps ({} checkpoints, {} skipped pairs) into {}",
        metrics.len(),
        checkpoints.len(),
        skipped_pairs_total,
        dir.display()
    );
    Ok(())
}

fn collect_files(paths: &[PathBuf], extension: &str) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            for entry in fs::read_dir(path)? {
                let p = entry?.path();
                if p.extension().and_then(|e| e.to_str()) == Some(extension) {
                    out.push(p);
                }
            }
        } else {
            out.push(path.clone());
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(usage(format!("no .{extension} files found")));
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let config = args.config.build()?;
    let files = collect_files(&args.checkpoints, "ckpt")?;
    let checkpoints: Vec<Checkpoint> = files
        .iter()
        .map(|p| io::load_checkpoint(p).map_err(Into::into))
        .collect::<anyhow::Result<_>>()?;
    let hashes: std::collections::BTreeSet<&str> = checkpoints
        .iter()
        .map(|c| c.config_hash.as_str())
        .collect();
    if hashes.len() > 1 && !args.force {
        return Err(usage(format!(
            "checkpoints carry {} different config hashes; pass --force to evaluate anyway",
            hashes.len()
        )));
    }
    let manifest = Manifest::load(&args.dataset.join("manifest.json"))?;
    if manifest.test.is_empty() {
        return Err(usage("dataset has no test pairs"));
    }
    let pairs = DiskDataset::open(&args.dataset, &manifest.test).load_all()?;
    let dir = out_dir(args.out, "eval");
    fs::create_dir_all(&dir)?;
    let mut table = String::from("step  repeatability  AUC@10    mAA\n");
    for ckpt in &checkpoints {
        let report = evalbench::evaluate_checkpoint(ckpt, &pairs, &config.sample, &config.eval)?;
        io::save_report(&dir.join(format!("report_{:06}.json", ckpt.step)), &report)?;
        writeln!(
            table,
            "{:<5} {:>13} {:>7.3} {:>6.3}",
            ckpt.step,
            report
                .repeatability
                .map_or("n/a".into(), |r| format!("{r:.4}")),
            report.auc_at(10.0).unwrap_or(f64::NAN),
            report.maa
        )
        .unwrap();
    }
    fs::write(dir.join("summary.txt"), &table)?;
    print!("{table}");
    println!("reports written to {}", dir.display());
    Ok(())
}

fn cmd_plot_curves(reports: &[PathBuf], out: Option<PathBuf>) -> anyhow::Result<()> {
    let files = collect_files(reports, "json")?;
    let mut loaded: Vec<MetricsReport> = files
        .iter()
        .map(|p| io::load_report(p).map_err(Into::into))
        .collect::<anyhow::Result<_>>()?;
    loaded.sort_by_key(|r| r.step);
    let rep = chart::Series {
        label: "repeatability".into(),
        color: Rgb([200, 60, 40]),
        points: loaded
            .iter()
            .filter_map(|r| r.repeatability.map(|v| (r.step as f64, v)))
            .collect(),
    };
    let auc = chart::Series {
        label: "AUC@10".into(),
        color: Rgb([40, 80, 200]),
        points: loaded
            .iter()
            .filter_map(|r| r.auc_at(10.0).map(|v| (r.step as f64, v)))
            .collect(),
    };
    let series = [rep, auc];
    for s in &series {
        println!(
            "series {:>13}: rgb({},{},{}), {} points",
            s.label, s.color[0], s.color[1], s.color[2],
            s.points.len()
        );
    }
    let img = chart::line_chart(&series);
    let path = out.unwrap_or_else(|| io::default_output_root().join("curves.png"));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    img.save(&path).with_context(|| path.display().to_string())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_plot_overlay(
    pair_dir: &Path,
    checkpoint: Option<&Path>,
    top: usize,
    out: Option<PathBuf>,
    config_args: &ConfigArgs,
) -> anyhow::Result<()> {
    let config = config_args.build()?;
    let pair = io::load_pair(pair_dir)?;
    let prob = match checkpoint {
        Some(path) => {
            let ckpt = io::load_checkpoint(path)?;
            keyspot_core::detector::to_prob(&ckpt.net.forward(&pair.view_a.image)?)
        }
        None => {
            let prior = keyspot_core::targets::base_prior(&pair, ViewSide::A)?;
            keyspot_core::targets::smooth(&prior, 1.0)
        }
    };
    let kps = sample_keypoints(&prob, &config.sample)?;
    let img = chart::overlay(&pair.view_a.image, &kps, top, 3);
    let path = out.unwrap_or_else(|| io::default_output_root().join("overlay.png"));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    img.save(&path).with_context(|| path.display().to_string())?;
    println!(
        "wrote {} ({} keypoints drawn)",
        path.display(),
        kps.len().min(top)
    );
    Ok(())
}
