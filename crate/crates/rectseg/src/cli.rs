//! The `rectseg` command-line interface.
//!
//! Eight subcommands cover the batch workflow: `synth` generates labeled
//! sequences (optionally with biased hypothesis maps), `train-ossvm` and
//! `train-2cssvm` learn energy weights, `rectify` cleans a single
//! hypothesis, `propagate` carries a keyframe mask through a sequence,
//! `evaluate` scores predicted masks, `cross-validate` picks the
//! edge-prior coefficient, and `theorem1` runs the numerical equivalence
//! harness between the two trainers.
//!
//! Every subcommand takes `--out <dir>` for its outputs, `--config <file>`
//! for flat `key = value` settings (command-line flags win), `--seed` for
//! all randomness, and `--threads` to cap worker threads. Beside its
//! outputs each run writes `config.txt` echoing the fully resolved
//! settings. Exit status is 0 on success, 1 when the arguments, settings,
//! or inputs are invalid (the message names the offending flag, key, or
//! file), and 2 when the run itself fails.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rectseg_core::classifiers::{
    threshold_map, ClassifierSource, DEFAULT_COMPONENTS, DEFAULT_RECLASSIFY_ROUNDS,
    DEFAULT_THRESHOLD,
};
use rectseg_core::edges::{detect_edges, detect_edges_depth, EdgeConfig, ThresholdMode,
    DEFAULT_EDGE_PERCENTILE};
use rectseg_core::evaluation::{accumulation_curve, frame_metrics, FrameMetrics};
use rectseg_core::learning::{
    cross_validate_prior, theorem1_harness, train_2cssvm_report, train_ossvm, train_ossvm_rgbd,
    LearnConfig, RawSample, TrainingSample, DEFAULT_PRIOR_GRID,
};
use rectseg_core::model::{build_edge_weights, FeatureVector, Layout, WeightVector};
use rectseg_core::pipeline::{
    propagate_per_pair, propagate_sequence, rectify_frame, Hypothesis, PipelineConfig,
    SequenceFrame,
};
use rectseg_core::synthdata::{
    generate_sequence, inject_bias, BiasSpec, ColorSpec, SceneSpec, ShapeKind,
    DEFAULT_BAND_WIDTH, DEFAULT_TEXTURE_AMPLITUDE,
};
use rectseg_core::testkit;
use rectseg_core::CoreError;

use crate::formats::{self, ConfigMap, FormatError, ManifestEntry, ManifestRow};

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, settings, or inputs; exits with status 1.
    Validation(String),
    /// The run itself failed; exits with status 2.
    Runtime(String),
}

impl CliError {
    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Input trouble is the caller's to fix: exit 1, naming the file.
fn load<T>(r: Result<T, FormatError>) -> CliResult<T> {
    r.map_err(|e| CliError::Validation(e.to_string()))
}

/// Output trouble is a run failure: exit 2.
fn store<T>(r: Result<T, FormatError>) -> CliResult<T> {
    r.map_err(|e| CliError::Runtime(e.to_string()))
}

/// Sorts numeric-model failures into the two exit classes: complaints
/// about what the caller supplied are validation errors, anything else is
/// a run failure.
fn classify_core(e: CoreError) -> CliError {
    match e {
        CoreError::MissingAsset { .. }
        | CoreError::LayoutMismatch { .. }
        | CoreError::InvalidValue { .. }
        | CoreError::InvalidScene(_)
        | CoreError::EmptyInput(_)
        | CoreError::DimensionMismatch { .. } => CliError::Validation(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "rectseg",
    version,
    about = "Segmentation rectification: learned asymmetric cleanup of hypothesis masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn energy weights from good segmentations only (closed form).
    TrainOssvm(TrainOssvmArgs),
    /// Learn energy weights by cutting planes over margin constraints.
    #[command(name = "train-2cssvm")]
    Train2cssvm(Train2cssvmArgs),
    /// Clean one hypothesis mask by energy minimization.
    Rectify(RectifyArgs),
    /// Carry the first frame's mask through a sequence.
    Propagate(PropagateArgs),
    /// Score predicted masks against ground truth.
    Evaluate(EvaluateArgs),
    /// Pick the edge-prior coefficient by k-fold cross-validation.
    CrossValidate(CrossValidateArgs),
    /// Generate a synthetic labeled sequence, optionally with biased
    /// hypothesis maps.
    Synth(SynthArgs),
    /// Numerically compare the two trainers on constructed instances.
    Theorem1(Theorem1Args),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (created if absent); `config.txt` echoing the
    /// resolved settings is written beside the outputs.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Seed for every randomized step (settings key `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread cap (settings key `run.threads`).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainOssvmArgs {
    #[command(flatten)]
    common: Common,
    /// Text file of precomputed feature rows, one whitespace-separated
    /// row per sample (11 numbers for RGB, 12 for RGB-D).
    #[arg(long, value_name = "FILE")]
    features: Option<PathBuf>,
    /// Sequence manifest to compute features from; every row needs a
    /// ground-truth mask and a probability map.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    /// Regularization strength (settings key `learning.c`).
    #[arg(long)]
    c: Option<f64>,
    /// Edge-prior coefficient (settings key `learning.prior`).
    #[arg(long)]
    prior: Option<f64>,
    /// Foreground threshold for probability maps (settings key
    /// `pipeline.threshold`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Edge-magnitude percentile (settings key `edges.percentile`).
    #[arg(long)]
    percentile: Option<f64>,
}

#[derive(Args, Debug)]
struct Train2cssvmArgs {
    #[command(flatten)]
    common: Common,
    /// Sequence manifest; every row needs a ground-truth mask and a
    /// probability map.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Regularization strength (settings key `learning.c`).
    #[arg(long)]
    c: Option<f64>,
    /// Edge-prior coefficient (settings key `learning.prior`).
    #[arg(long)]
    prior: Option<f64>,
    /// Cutting-plane round cap (settings key `learning.max_iterations`).
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Convergence threshold on the largest net violation (settings key
    /// `learning.tolerance`).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Foreground threshold for probability maps (settings key
    /// `pipeline.threshold`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Edge-magnitude percentile (settings key `edges.percentile`).
    #[arg(long)]
    percentile: Option<f64>,
}

#[derive(Args, Debug)]
struct RectifyArgs {
    #[command(flatten)]
    common: Common,
    /// Color frame (PNG).
    #[arg(long, value_name = "FILE")]
    image: PathBuf,
    /// Binary hypothesis mask (PNG); exactly one of --hypothesis/--prob.
    #[arg(long, value_name = "FILE")]
    hypothesis: Option<PathBuf>,
    /// Soft hypothesis probability map (PNG); drives the costs directly.
    #[arg(long, value_name = "FILE")]
    prob: Option<PathBuf>,
    /// Weight file, or the literal `uniform`.
    #[arg(long, value_name = "FILE|uniform")]
    weights: String,
    /// Depth map (PNG); switches to the dual-edge RGB-D energy.
    #[arg(long, value_name = "FILE")]
    depth: Option<PathBuf>,
    /// Precomputed color-edge indicator (PNG) instead of detection.
    #[arg(long, value_name = "FILE")]
    edges: Option<PathBuf>,
    /// Refit-and-reclassify rounds after rectification (settings key
    /// `pipeline.reclassify_rounds`).
    #[arg(long)]
    reclassify_rounds: Option<usize>,
    /// Foreground threshold for probability maps (settings key
    /// `pipeline.threshold`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Edge-magnitude percentile (settings key `edges.percentile`).
    #[arg(long)]
    percentile: Option<f64>,
}

#[derive(Args, Debug)]
struct PropagateArgs {
    #[command(flatten)]
    common: Common,
    /// Sequence manifest; row 0 must carry the keyframe ground truth.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Weight file, or the literal `uniform`.
    #[arg(long, value_name = "FILE|uniform")]
    weights: String,
    /// Seed every step with the previous frame's ground truth instead of
    /// the previous rectified mask (settings key `pipeline.per_pair`).
    #[arg(long)]
    per_pair: bool,
    /// Drive per-pixel costs with raw probabilities instead of the
    /// thresholded mask (settings key `pipeline.soft`).
    #[arg(long)]
    soft: bool,
    /// Take probability maps from the manifest instead of fitting the
    /// builtin color-mixture classifier (settings key
    /// `pipeline.external_prob`).
    #[arg(long)]
    external_prob: bool,
    /// Foreground threshold (settings key `pipeline.threshold`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Refit-and-reclassify rounds (settings key
    /// `pipeline.reclassify_rounds`).
    #[arg(long)]
    reclassify_rounds: Option<usize>,
    /// Mixture components per class (settings key `pipeline.components`).
    #[arg(long)]
    components: Option<usize>,
    /// Edge-magnitude percentile (settings key `edges.percentile`).
    #[arg(long)]
    percentile: Option<f64>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Sequence manifest(s) carrying ground-truth masks; repeat the flag
    /// for several sequences.
    #[arg(long, value_name = "FILE", required = true)]
    manifest: Vec<PathBuf>,
    /// Prediction directory per manifest, holding `mask_NNNN.png` files
    /// named by manifest row id (as written by `propagate`).
    #[arg(long, value_name = "DIR", required = true)]
    pred: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct CrossValidateArgs {
    #[command(flatten)]
    common: Common,
    /// One manifest per sequence; at least two.
    #[arg(long, value_name = "FILE", required = true)]
    manifest: Vec<PathBuf>,
    /// Regularization strength (settings key `learning.c`).
    #[arg(long)]
    c: Option<f64>,
    /// Fold count (settings key `learning.folds`).
    #[arg(long)]
    folds: Option<usize>,
    /// Comma-separated prior grid (settings key `learning.prior_grid`).
    #[arg(long)]
    grid: Option<String>,
    /// Foreground threshold for probability maps (settings key
    /// `pipeline.threshold`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Edge-magnitude percentile (settings key `edges.percentile`).
    #[arg(long)]
    percentile: Option<f64>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    /// Canvas width in pixels (settings key `synth.width`).
    #[arg(long)]
    width: Option<usize>,
    /// Canvas height in pixels (settings key `synth.height`).
    #[arg(long)]
    height: Option<usize>,
    /// Frame count (settings key `synth.frames`).
    #[arg(long)]
    frames: Option<usize>,
    /// Object shape: disk, rectangle, or star (settings key `synth.shape`).
    #[arg(long)]
    shape: Option<String>,
    /// Disk radius (settings key `synth.radius`).
    #[arg(long)]
    radius: Option<f64>,
    /// Rectangle half-width (settings key `synth.half_width`).
    #[arg(long)]
    half_width: Option<f64>,
    /// Rectangle half-height (settings key `synth.half_height`).
    #[arg(long)]
    half_height: Option<f64>,
    /// Star point count (settings key `synth.points`).
    #[arg(long)]
    points: Option<usize>,
    /// Star outer radius (settings key `synth.outer_radius`).
    #[arg(long)]
    outer_radius: Option<f64>,
    /// Star inner radius (settings key `synth.inner_radius`).
    #[arg(long)]
    inner_radius: Option<f64>,
    /// Starting center row (settings key `synth.start_row`).
    #[arg(long)]
    start_row: Option<f64>,
    /// Starting center column (settings key `synth.start_col`).
    #[arg(long)]
    start_col: Option<f64>,
    /// Per-frame row velocity (settings key `synth.velocity_row`).
    #[arg(long)]
    velocity_row: Option<f64>,
    /// Per-frame column velocity (settings key `synth.velocity_col`).
    #[arg(long)]
    velocity_col: Option<f64>,
    /// Per-frame rotation in radians (settings key `synth.rotation`).
    #[arg(long)]
    rotation: Option<f64>,
    /// Foreground mean color `r,g,b` in [0,1] (settings key `synth.fg`).
    #[arg(long)]
    fg: Option<String>,
    /// Background mean color `r,g,b` in [0,1] (settings key `synth.bg`).
    #[arg(long)]
    bg: Option<String>,
    /// Per-channel noise level for both classes (settings key
    /// `synth.sigma`).
    #[arg(long)]
    sigma: Option<f64>,
    /// Minimum Euclidean separation between the mean colors (settings key
    /// `synth.min_separation`).
    #[arg(long)]
    min_separation: Option<f64>,
    /// Add a smooth shared brightness texture: true/false (settings key
    /// `synth.texture`).
    #[arg(long)]
    texture: Option<bool>,
    /// Texture brightness half-range (settings key
    /// `synth.texture_amplitude`).
    #[arg(long)]
    texture_amplitude: Option<f64>,
    /// Near-boundary background-to-foreground flip probability for the
    /// biased hypothesis maps (settings key `synth.fp_rate`).
    #[arg(long)]
    fp_rate: Option<f64>,
    /// Near-boundary foreground-to-background flip probability (settings
    /// key `synth.fn_rate`).
    #[arg(long)]
    fn_rate: Option<f64>,
    /// Anywhere flip probability (settings key `synth.speckle_rate`).
    #[arg(long)]
    speckle_rate: Option<f64>,
    /// Width of the boundary band, in pixels (settings key
    /// `synth.band_width`).
    #[arg(long)]
    band_width: Option<f64>,
}

#[derive(Args, Debug)]
struct Theorem1Args {
    #[command(flatten)]
    common: Common,
    /// Random constructions to run (settings key `harness.trials`).
    #[arg(long)]
    trials: Option<usize>,
    /// Samples per construction (settings key `harness.samples`).
    #[arg(long)]
    samples: Option<usize>,
    /// Regularization strength (settings key `learning.c`).
    #[arg(long)]
    c: Option<f64>,
    /// Upper bound of the random feature entries (settings key
    /// `harness.scale`).
    #[arg(long)]
    scale: Option<f64>,
    /// Use the dual-edge RGB-D layout (settings key `harness.rgbd`).
    #[arg(long)]
    rgbd: bool,
}

// ---------------------------------------------------------------------------
// Settings resolution
// ---------------------------------------------------------------------------

/// Settings file contents plus the echo of what each run resolved.
struct Settings {
    file: ConfigMap,
    resolved: ConfigMap,
}

impl Settings {
    fn load(common: &Common) -> CliResult<Self> {
        let file = match &common.config {
            Some(path) => load(formats::read_config(path))?,
            None => ConfigMap::new(),
        };
        Ok(Self {
            file,
            resolved: ConfigMap::new(),
        })
    }

    fn parse_key<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Validation(format!("settings key {key}: unreadable value {raw:?}"))
            }),
        }
    }

    /// Flag value if given, else the settings-file value, else the
    /// default; records the winner for the config echo.
    fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: std::str::FromStr + fmt::Display + Clone,
    {
        let value = match flag {
            Some(v) => v,
            None => self.parse_key::<T>(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Like [`Settings::resolve`] for flags that are plain booleans (the
    /// flag can only switch the value on).
    fn resolve_flag(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let value = if flag {
            true
        } else {
            self.parse_key::<bool>(key)?.unwrap_or(false)
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Records a resolved value that has no settings key of its own.
    fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Writes the echo beside the outputs.
    fn write_echo(&self, out_dir: &Path) -> CliResult<()> {
        store(formats::write_config(
            &out_dir.join("config.txt"),
            &self.resolved,
        ))
    }
}

/// Creates the output directory and applies seed and thread settings.
fn prepare(common: &Common, settings: &mut Settings, command: &str) -> CliResult<u64> {
    std::fs::create_dir_all(&common.out).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", common.out.display()))
    })?;
    settings.note("run.command", command);
    let seed = settings.resolve("run.seed", common.seed, 0u64)?;
    let threads = match common.threads {
        Some(n) => Some(n),
        None => settings.parse_key::<usize>("run.threads")?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Validation(
                "--threads must be at least 1".to_string(),
            ));
        }
        settings.note("run.threads", n);
        // A pool may already exist when several runs share a process;
        // the earlier cap then stays in force.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(seed)
}

fn parse_color(which: &str, raw: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Validation(format!(
            "{which}: expected r,g,b, found {raw:?}"
        )));
    }
    let mut color = [0.0; 3];
    for (slot, part) in color.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| {
            CliError::Validation(format!("{which}: unreadable component {part:?}"))
        })?;
    }
    Ok(color)
}

fn parse_grid(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| {
                CliError::Validation(format!("prior grid: unreadable value {s:?}"))
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

fn resolve_weights(spec: &str, layout: Layout) -> CliResult<WeightVector> {
    if spec == "uniform" {
        return Ok(WeightVector::uniform(layout));
    }
    let weights = load(formats::read_weights(Path::new(spec)))?;
    if weights.layout() != layout {
        return Err(CliError::Validation(format!(
            "{spec}: weight layout is {}, but this run needs {}",
            weights.layout().tag(),
            layout.tag()
        )));
    }
    Ok(weights)
}

/// Loads a weight file and lets its layout pick the mode.
fn weights_any_layout(spec: &str, default_layout: Layout) -> CliResult<WeightVector> {
    if spec == "uniform" {
        Ok(WeightVector::uniform(default_layout))
    } else {
        load(formats::read_weights(Path::new(spec)))
    }
}

fn edge_config(percentile: f64) -> CliResult<EdgeConfig> {
    let config = EdgeConfig {
        threshold: ThresholdMode::Percentile(percentile),
    };
    config.validate().map_err(classify_core)?;
    Ok(config)
}

/// Turns manifest rows into training inputs: the hypothesis is the
/// thresholded probability map, edges come from the edge column or are
/// detected, and a depth column switches to the dual-edge layout.
fn raw_samples_from_rows(
    rows: &[ManifestRow],
    frames: &[SequenceFrame],
    threshold: f64,
    edges: &EdgeConfig,
) -> CliResult<Vec<RawSample>> {
    rows.iter()
        .zip(frames)
        .map(|(row, frame)| {
            let gt = frame.ground_truth.clone().ok_or_else(|| {
                CliError::Validation(format!(
                    "manifest row {}: missing ground-truth mask",
                    row.id
                ))
            })?;
            let prob = frame.probability.as_ref().ok_or_else(|| {
                CliError::Validation(format!(
                    "manifest row {}: missing probability map",
                    row.id
                ))
            })?;
            let hypothesis = threshold_map(prob, threshold).map_err(classify_core)?;
            let indicator = match &frame.edges {
                Some(e) => e.clone(),
                None => detect_edges(&frame.frame, edges).map_err(classify_core)?,
            };
            let field = build_edge_weights(&indicator).map_err(classify_core)?;
            match &frame.depth {
                None => RawSample::new(hypothesis, field, gt).map_err(classify_core),
                Some(depth) => {
                    let depth_indicator =
                        detect_edges_depth(depth, edges).map_err(classify_core)?;
                    let depth_field =
                        build_edge_weights(&depth_indicator).map_err(classify_core)?;
                    RawSample::new_rgbd(hypothesis, field, depth_field, gt)
                        .map_err(classify_core)
                }
            }
        })
        .collect()
}

fn ground_truth_samples(raw: &[RawSample]) -> CliResult<Vec<TrainingSample>> {
    raw.iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(TrainingSample::new(
                k,
                r.ground_truth_features().map_err(classify_core)?,
            ))
        })
        .collect()
}

fn metrics_line(frame: usize, m: &FrameMetrics) -> String {
    let boundary = match m.boundary_deviation {
        Some(b) => format!("{b:.6}"),
        None => "-".to_string(),
    };
    format!("{frame}\t{:.6}\t{:.6}\t{boundary}", m.fpr, m.fnr)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses `argv`, runs the requested subcommand, reports any failure on
/// stderr, and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::TrainOssvm(args) => cmd_train_ossvm(args),
        Command::Train2cssvm(args) => cmd_train_2cssvm(args),
        Command::Rectify(args) => cmd_rectify(args),
        Command::Propagate(args) => cmd_propagate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::CrossValidate(args) => cmd_cross_validate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Theorem1(args) => cmd_theorem1(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// train-ossvm
// ---------------------------------------------------------------------------

fn read_feature_rows(path: &Path) -> CliResult<Vec<FeatureVector>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot access {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut layout: Option<Layout> = None;
    for (index, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let entries: Vec<f64> = trimmed
            .split([' ', '\t', ','])
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| {
                    CliError::Validation(format!(
                        "{}: line {}: unreadable feature value {s:?}",
                        path.display(),
                        index + 1
                    ))
                })
            })
            .collect::<CliResult<_>>()?;
        let row_layout = match entries.len() {
            n if n == Layout::Rgb.len() => Layout::Rgb,
            n if n == Layout::Rgbd.len() => Layout::Rgbd,
            n => {
                return Err(CliError::Validation(format!(
                    "{}: line {}: expected {} or {} feature values, found {n}",
                    path.display(),
                    index + 1,
                    Layout::Rgb.len(),
                    Layout::Rgbd.len()
                )))
            }
        };
        match layout {
            None => layout = Some(row_layout),
            Some(l) if l == row_layout => {}
            Some(l) => {
                return Err(CliError::Validation(format!(
                    "{}: line {}: mixes {} and {} rows",
                    path.display(),
                    index + 1,
                    l.tag(),
                    row_layout.tag()
                )))
            }
        }
        rows.push(
            FeatureVector::from_entries(row_layout, entries).map_err(classify_core)?,
        );
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no feature rows",
            path.display()
        )));
    }
    Ok(rows)
}

fn cmd_train_ossvm(args: TrainOssvmArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "train-ossvm")?;
    let c = settings.resolve("learning.c", args.c, 1.0)?;
    let prior = settings.resolve("learning.prior", args.prior, 0.0)?;

    let samples: Vec<TrainingSample> = match (&args.features, &args.manifest) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "pass either --features or --manifest, not both".to_string(),
            ))
        }
        (Some(path), None) => {
            settings.note("input.features", path.display());
            read_feature_rows(path)?
                .into_iter()
                .enumerate()
                .map(|(k, f)| TrainingSample::new(k, f))
                .collect()
        }
        (None, Some(path)) => {
            settings.note("input.manifest", path.display());
            let threshold =
                settings.resolve("pipeline.threshold", args.threshold, DEFAULT_THRESHOLD)?;
            let percentile =
                settings.resolve("edges.percentile", args.percentile, DEFAULT_EDGE_PERCENTILE)?;
            let edges = edge_config(percentile)?;
            let rows = load(formats::read_manifest(path))?;
            let frames = load(formats::load_sequence(&rows))?;
            let raw = raw_samples_from_rows(&rows, &frames, threshold, &edges)?;
            ground_truth_samples(&raw)?
        }
        (None, None) => {
            return Err(CliError::Validation(
                "pass --features or --manifest".to_string(),
            ))
        }
    };

    let config = LearnConfig {
        c_reg: c,
        prior_weight: prior,
        ..LearnConfig::default()
    };
    let layout = samples[0].features.layout();
    let start = Instant::now();
    let weights = match layout {
        Layout::Rgb => train_ossvm(&samples, &config),
        Layout::Rgbd => train_ossvm_rgbd(&samples, &config),
    }
    .map_err(classify_core)?;
    let elapsed = start.elapsed().as_secs_f64();

    let weights_path = args.common.out.join("weights.txt");
    store(formats::write_weights(&weights_path, &weights))?;
    settings.write_echo(&args.common.out)?;
    println!(
        "trained {} weights on {} samples; wall time: {elapsed:.6} s",
        layout.tag(),
        samples.len()
    );
    println!("weights: {}", weights_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train-2cssvm
// ---------------------------------------------------------------------------

fn cmd_train_2cssvm(args: Train2cssvmArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "train-2cssvm")?;
    let defaults = LearnConfig::default();
    let c = settings.resolve("learning.c", args.c, defaults.c_reg)?;
    let prior = settings.resolve("learning.prior", args.prior, defaults.prior_weight)?;
    let max_iterations = settings.resolve(
        "learning.max_iterations",
        args.max_iterations,
        defaults.max_iterations,
    )?;
    let tolerance = settings.resolve(
        "learning.tolerance",
        args.tolerance,
        defaults.violation_tolerance,
    )?;
    let threshold =
        settings.resolve("pipeline.threshold", args.threshold, DEFAULT_THRESHOLD)?;
    let percentile =
        settings.resolve("edges.percentile", args.percentile, DEFAULT_EDGE_PERCENTILE)?;
    settings.note("input.manifest", args.manifest.display());

    let edges = edge_config(percentile)?;
    let rows = load(formats::read_manifest(&args.manifest))?;
    let frames = load(formats::load_sequence(&rows))?;
    let raw = raw_samples_from_rows(&rows, &frames, threshold, &edges)?;
    let samples = ground_truth_samples(&raw)?;

    let config = LearnConfig {
        c_reg: c,
        prior_weight: prior,
        max_iterations,
        violation_tolerance: tolerance,
        ..defaults
    };
    let start = Instant::now();
    let (weights, report) =
        train_2cssvm_report(&samples, &raw, &config).map_err(classify_core)?;
    let elapsed = start.elapsed().as_secs_f64();

    let weights_path = args.common.out.join("weights.txt");
    store(formats::write_weights(&weights_path, &weights))?;
    let mut report_text = format!(
        "iterations {}\nconverged {}\nfinal_max_violation {:.6e}\nplanes {}\nround\tobjective\tmax_violation\n",
        report.iterations, report.converged, report.final_max_violation, report.plane_count
    );
    for (i, (obj, viol)) in report
        .master_objectives
        .iter()
        .zip(&report.max_violations)
        .enumerate()
    {
        report_text.push_str(&format!("{}\t{obj:.10e}\t{viol:.10e}\n", i + 1));
    }
    write_text(&args.common.out.join("report.txt"), &report_text)?;
    settings.write_echo(&args.common.out)?;
    println!(
        "trained on {} samples in {} rounds (converged: {}); wall time: {elapsed:.6} s",
        samples.len(),
        report.iterations,
        report.converged
    );
    println!("weights: {}", weights_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// rectify
// ---------------------------------------------------------------------------

fn cmd_rectify(args: RectifyArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "rectify")?;
    let threshold =
        settings.resolve("pipeline.threshold", args.threshold, DEFAULT_THRESHOLD)?;
    let reclassify_rounds = settings.resolve(
        "pipeline.reclassify_rounds",
        args.reclassify_rounds,
        DEFAULT_RECLASSIFY_ROUNDS,
    )?;
    let percentile =
        settings.resolve("edges.percentile", args.percentile, DEFAULT_EDGE_PERCENTILE)?;
    settings.note("input.image", args.image.display());
    settings.note("input.weights", &args.weights);

    let frame = load(formats::read_rgb_frame(&args.image))?;
    let depth = match &args.depth {
        Some(path) => {
            settings.note("input.depth", path.display());
            Some(load(formats::read_depth_map(path))?)
        }
        None => None,
    };
    let layout = if depth.is_some() {
        Layout::Rgbd
    } else {
        Layout::Rgb
    };
    let weights = resolve_weights(&args.weights, layout)?;

    let hypothesis = match (&args.hypothesis, &args.prob) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "pass either --hypothesis or --prob, not both".to_string(),
            ))
        }
        (Some(path), None) => {
            settings.note("input.hypothesis", path.display());
            Hypothesis::Binary(load(formats::read_mask(path))?)
        }
        (None, Some(path)) => {
            settings.note("input.prob", path.display());
            Hypothesis::Soft(load(formats::read_probability_map(path))?)
        }
        (None, None) => {
            return Err(CliError::Validation(
                "pass --hypothesis or --prob".to_string(),
            ))
        }
    };
    let precomputed = match &args.edges {
        Some(path) => {
            settings.note("input.edges", path.display());
            Some(load(formats::read_edge_indicator(path))?)
        }
        None => None,
    };

    let mut config = PipelineConfig::new(weights);
    config.probability_threshold = threshold;
    config.reclassify_rounds = reclassify_rounds;
    config.soft_hypothesis = matches!(hypothesis, Hypothesis::Soft(_));
    config.edges = edge_config(percentile)?;
    config.validate().map_err(classify_core)?;

    let rectified = rectify_frame(
        &frame,
        depth.as_ref(),
        &hypothesis,
        &config,
        precomputed.as_ref(),
    )
    .map_err(classify_core)?;

    let out_path = args.common.out.join("rectified.png");
    store(formats::write_mask(&out_path, &rectified))?;
    settings.write_echo(&args.common.out)?;
    println!(
        "rectified {} ({} foreground pixels)",
        out_path.display(),
        rectified.foreground_count()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// propagate
// ---------------------------------------------------------------------------

fn cmd_propagate(args: PropagateArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "propagate")?;
    let threshold =
        settings.resolve("pipeline.threshold", args.threshold, DEFAULT_THRESHOLD)?;
    let reclassify_rounds = settings.resolve(
        "pipeline.reclassify_rounds",
        args.reclassify_rounds,
        DEFAULT_RECLASSIFY_ROUNDS,
    )?;
    let components =
        settings.resolve("pipeline.components", args.components, DEFAULT_COMPONENTS)?;
    let percentile =
        settings.resolve("edges.percentile", args.percentile, DEFAULT_EDGE_PERCENTILE)?;
    let per_pair = settings.resolve_flag("pipeline.per_pair", args.per_pair)?;
    let soft = settings.resolve_flag("pipeline.soft", args.soft)?;
    let external_prob = settings.resolve_flag("pipeline.external_prob", args.external_prob)?;
    settings.note("input.manifest", args.manifest.display());
    settings.note("input.weights", &args.weights);

    let rows = load(formats::read_manifest(&args.manifest))?;
    let frames = load(formats::load_sequence(&rows))?;
    let keyframe = frames[0].ground_truth.clone().ok_or_else(|| {
        CliError::Validation(format!(
            "manifest row {}: missing ground-truth mask for the keyframe",
            rows[0].id
        ))
    })?;

    let weights = weights_any_layout(&args.weights, Layout::Rgb)?;
    let mut config = PipelineConfig::new(weights);
    config.probability_threshold = threshold;
    config.reclassify_rounds = reclassify_rounds;
    config.soft_hypothesis = soft;
    config.edges = edge_config(percentile)?;
    config.classifier = if external_prob {
        if reclassify_rounds > 0 {
            eprintln!(
                "note: reclassification is skipped when probability maps come from files"
            );
        }
        ClassifierSource::ExternalMap
    } else {
        ClassifierSource::BuiltinMixture { components }
    };
    config.validate().map_err(classify_core)?;

    let result = if per_pair {
        propagate_per_pair(&frames, &keyframe, &config)
    } else {
        propagate_sequence(&frames, &keyframe, &config)
    }
    .map_err(classify_core)?;

    let mut metrics_text = String::from("frame\tfpr\tfnr\tboundary_deviation\n");
    let mut any_metrics = false;
    for record in &result.records {
        let row_id = rows[record.frame_index].id;
        let mask_path = args.common.out.join(format!("mask_{row_id:04}.png"));
        store(formats::write_mask(&mask_path, &record.rectified))?;
        if let Some(m) = &record.metrics {
            metrics_text.push_str(&metrics_line(row_id, m));
            metrics_text.push('\n');
            any_metrics = true;
            println!(
                "frame {row_id}: fpr {:.6} fnr {:.6} boundary {}",
                m.fpr,
                m.fnr,
                m.boundary_deviation
                    .map(|b| format!("{b:.4}"))
                    .unwrap_or_else(|| "-".to_string())
            );
        } else {
            println!("frame {row_id}: no ground truth, metrics skipped");
        }
    }
    if any_metrics {
        write_text(&args.common.out.join("metrics.tsv"), &metrics_text)?;
    }
    settings.write_echo(&args.common.out)?;
    println!(
        "propagated {} frames into {}",
        result.records.len(),
        args.common.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "evaluate")?;
    if args.manifest.len() != args.pred.len() {
        return Err(CliError::Validation(format!(
            "{} manifests but {} prediction directories; pass one --pred per --manifest",
            args.manifest.len(),
            args.pred.len()
        )));
    }
    for (i, (m, p)) in args.manifest.iter().zip(&args.pred).enumerate() {
        settings.note(&format!("input.manifest.{i}"), m.display());
        settings.note(&format!("input.pred.{i}"), p.display());
    }

    let mut metrics_text = String::from("sequence\tframe\tfpr\tfnr\tboundary_deviation\n");
    let mut series: Vec<Vec<f64>> = Vec::new();
    let mut evaluated = 0usize;
    for (seq_index, (manifest, pred_dir)) in args.manifest.iter().zip(&args.pred).enumerate() {
        let rows = load(formats::read_manifest(manifest))?;
        let mut deviations: Vec<f64> = Vec::new();
        let mut tail_closed = false;
        for row in &rows {
            let pred_path = pred_dir.join(format!("mask_{:04}.png", row.id));
            if !pred_path.exists() {
                continue;
            }
            let gt_path = row.gt.as_ref().ok_or_else(|| {
                CliError::Validation(format!(
                    "{}: row {}: prediction exists but ground truth is missing",
                    manifest.display(),
                    row.id
                ))
            })?;
            let pred = load(formats::read_mask(&pred_path))?;
            let gt = load(formats::read_mask(gt_path))?;
            let m = frame_metrics(&pred, &gt).map_err(classify_core)?;
            metrics_text.push_str(&format!("{seq_index}\t{}\n", metrics_line(row.id, &m)));
            evaluated += 1;
            // The trend table needs offsets aligned from the keyframe, so
            // a frame without a defined boundary distance ends this
            // sequence's series instead of shifting later offsets.
            match m.boundary_deviation {
                Some(b) if !tail_closed => deviations.push(b),
                _ => tail_closed = true,
            }
        }
        series.push(deviations);
    }
    if evaluated == 0 {
        return Err(CliError::Validation(
            "no prediction masks matched any manifest row".to_string(),
        ));
    }

    let curve = accumulation_curve(&series).map_err(classify_core)?;
    let curve_text = curve.to_tsv();
    write_text(&args.common.out.join("metrics.tsv"), &metrics_text)?;
    write_text(&args.common.out.join("curve.tsv"), &curve_text)?;
    settings.write_echo(&args.common.out)?;
    println!("evaluated {evaluated} frames across {} sequences", series.len());
    print!("{curve_text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// cross-validate
// ---------------------------------------------------------------------------

fn cmd_cross_validate(args: CrossValidateArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    prepare(&args.common, &mut settings, "cross-validate")?;
    let defaults = LearnConfig::default();
    let c = settings.resolve("learning.c", args.c, defaults.c_reg)?;
    let folds = settings.resolve("learning.folds", args.folds, 5usize)?;
    let threshold =
        settings.resolve("pipeline.threshold", args.threshold, DEFAULT_THRESHOLD)?;
    let percentile =
        settings.resolve("edges.percentile", args.percentile, DEFAULT_EDGE_PERCENTILE)?;
    let grid = match &args.grid {
        Some(raw) => parse_grid(raw)?,
        None => match settings.file.get("learning.prior_grid") {
            Some(raw) => parse_grid(raw)?,
            None => DEFAULT_PRIOR_GRID.to_vec(),
        },
    };
    settings.note(
        "learning.prior_grid",
        grid.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    if args.manifest.len() < 2 {
        return Err(CliError::Validation(
            "cross-validation needs at least two --manifest sequences".to_string(),
        ));
    }

    let edges = edge_config(percentile)?;
    let mut dataset: Vec<Vec<RawSample>> = Vec::new();
    for (i, manifest) in args.manifest.iter().enumerate() {
        settings.note(&format!("input.manifest.{i}"), manifest.display());
        let rows = load(formats::read_manifest(manifest))?;
        let frames = load(formats::load_sequence(&rows))?;
        dataset.push(raw_samples_from_rows(&rows, &frames, threshold, &edges)?);
    }

    let config = LearnConfig {
        c_reg: c,
        ..defaults
    };
    let report =
        cross_validate_prior(&dataset, &grid, folds, &config).map_err(classify_core)?;
    if report.folds_reduced {
        eprintln!(
            "note: fold count reduced to {} (only {} sequences)",
            report.folds_used,
            dataset.len()
        );
    }

    let mut table = String::from("prior\tmean_error\tfold_errors\n");
    for row in &report.rows {
        let folds_text = row
            .fold_errors
            .iter()
            .map(|e| format!("{e:.6}"))
            .collect::<Vec<_>>()
            .join(";");
        table.push_str(&format!(
            "{:.3}\t{:.6}\t{folds_text}\n",
            row.prior, row.mean_error
        ));
    }
    write_text(&args.common.out.join("report.tsv"), &table)?;
    settings.write_echo(&args.common.out)?;
    print!("{table}");
    println!(
        "selected prior: {:.3} ({} folds)",
        report.selected_prior, report.folds_used
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    let seed = prepare(&args.common, &mut settings, "synth")?;
    let width = settings.resolve("synth.width", args.width, 64usize)?;
    let height = settings.resolve("synth.height", args.height, 64usize)?;
    let frames_n = settings.resolve("synth.frames", args.frames, 8usize)?;
    let shape_name = settings.resolve("synth.shape", args.shape, "disk".to_string())?;
    let start_row = settings.resolve("synth.start_row", args.start_row, 24.0)?;
    let start_col = settings.resolve("synth.start_col", args.start_col, 24.0)?;
    let velocity_row = settings.resolve("synth.velocity_row", args.velocity_row, 1.0)?;
    let velocity_col = settings.resolve("synth.velocity_col", args.velocity_col, 0.8)?;
    let rotation = settings.resolve("synth.rotation", args.rotation, 0.0)?;
    let fg = parse_color(
        "synth.fg",
        &settings.resolve("synth.fg", args.fg, "0.85,0.15,0.15".to_string())?,
    )?;
    let bg = parse_color(
        "synth.bg",
        &settings.resolve("synth.bg", args.bg, "0.15,0.25,0.8".to_string())?,
    )?;
    let sigma = settings.resolve("synth.sigma", args.sigma, 0.02)?;
    let min_separation = settings.resolve("synth.min_separation", args.min_separation, 0.1)?;
    let texture = settings.resolve("synth.texture", args.texture, false)?;
    let texture_amplitude = settings.resolve(
        "synth.texture_amplitude",
        args.texture_amplitude,
        DEFAULT_TEXTURE_AMPLITUDE,
    )?;
    let fp_rate = settings.resolve("synth.fp_rate", args.fp_rate, 0.0)?;
    let fn_rate = settings.resolve("synth.fn_rate", args.fn_rate, 0.0)?;
    let speckle_rate = settings.resolve("synth.speckle_rate", args.speckle_rate, 0.0)?;
    let band_width = settings.resolve("synth.band_width", args.band_width, DEFAULT_BAND_WIDTH)?;

    let shape = match shape_name.as_str() {
        "disk" => ShapeKind::Disk {
            radius: settings.resolve("synth.radius", args.radius, 12.0)?,
        },
        "rectangle" => ShapeKind::Rectangle {
            half_width: settings.resolve("synth.half_width", args.half_width, 10.0)?,
            half_height: settings.resolve("synth.half_height", args.half_height, 7.0)?,
        },
        "star" => ShapeKind::StarPolygon {
            points: settings.resolve("synth.points", args.points, 5usize)?,
            outer_radius: settings.resolve("synth.outer_radius", args.outer_radius, 14.0)?,
            inner_radius: settings.resolve("synth.inner_radius", args.inner_radius, 6.0)?,
        },
        other => {
            return Err(CliError::Validation(format!(
                "synth.shape: expected disk, rectangle, or star, found {other:?}"
            )))
        }
    };

    let scene = SceneSpec {
        width,
        height,
        shape,
        start: (start_row, start_col),
        velocity: (velocity_row, velocity_col),
        rotation_per_frame: rotation,
        foreground: ColorSpec {
            mean: fg,
            sigma,
        },
        background: ColorSpec {
            mean: bg,
            sigma,
        },
        min_color_separation: min_separation,
        texture,
        texture_amplitude,
        frames: frames_n,
        seed,
    };
    let rendered = generate_sequence(&scene).map_err(classify_core)?;

    let biased = fp_rate > 0.0 || fn_rate > 0.0 || speckle_rate > 0.0;
    let frames_dir = args.common.out.join("frames");
    let gt_dir = args.common.out.join("gt");
    std::fs::create_dir_all(&frames_dir)
        .and_then(|_| std::fs::create_dir_all(&gt_dir))
        .map_err(|e| CliError::Runtime(format!("cannot create output folders: {e}")))?;
    let prob_dir = args.common.out.join("prob");
    if biased {
        std::fs::create_dir_all(&prob_dir)
            .map_err(|e| CliError::Runtime(format!("cannot create output folders: {e}")))?;
    }

    let mut entries = Vec::new();
    for (t, frame) in rendered.iter().enumerate() {
        let image_rel = format!("frames/{t:04}.png");
        let gt_rel = format!("gt/{t:04}.png");
        store(formats::write_rgb_frame(
            &args.common.out.join(&image_rel),
            &frame.frame,
        ))?;
        store(formats::write_mask(
            &args.common.out.join(&gt_rel),
            &frame.ground_truth,
        ))?;
        let prob_rel = if biased {
            let bias = BiasSpec {
                fp_rate,
                fn_rate,
                band_width,
                speckle_rate,
                seed: seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(t as u64),
            };
            let hypothesis = inject_bias(&frame.ground_truth, &bias).map_err(classify_core)?;
            let rel = format!("prob/{t:04}.png");
            store(formats::write_probability_map(
                &args.common.out.join(&rel),
                &hypothesis.to_probability_map(),
            ))?;
            Some(rel)
        } else {
            None
        };
        entries.push(ManifestEntry {
            id: t,
            image: image_rel,
            gt: Some(gt_rel),
            prob: prob_rel,
            ..Default::default()
        });
    }
    let manifest_path = args.common.out.join("manifest.tsv");
    store(formats::write_manifest(&manifest_path, &entries))?;
    settings.write_echo(&args.common.out)?;
    println!(
        "wrote {} frames to {} (manifest: {})",
        rendered.len(),
        args.common.out.display(),
        manifest_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// theorem1
// ---------------------------------------------------------------------------

fn cmd_theorem1(args: Theorem1Args) -> CliResult<()> {
    let mut settings = Settings::load(&args.common)?;
    let seed = prepare(&args.common, &mut settings, "theorem1")?;
    let trials = settings.resolve("harness.trials", args.trials, 1usize)?;
    let samples_n = settings.resolve("harness.samples", args.samples, 20usize)?;
    let c = settings.resolve("learning.c", args.c, 1.0)?;
    let scale = settings.resolve("harness.scale", args.scale, 0.5)?;
    let rgbd = settings.resolve_flag("harness.rgbd", args.rgbd)?;
    if trials == 0 || samples_n == 0 {
        return Err(CliError::Validation(
            "harness.trials and harness.samples must be at least 1".to_string(),
        ));
    }
    if !(scale.is_finite() && scale > 0.0 && scale <= 1.0) {
        return Err(CliError::Validation(format!(
            "harness.scale must lie in (0, 1], found {scale}"
        )));
    }
    let layout = if rgbd { Layout::Rgbd } else { Layout::Rgb };

    let config = LearnConfig {
        c_reg: c,
        prior_weight: 0.0,
        ..LearnConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report_text = String::from("trial\tweight_gap\tobjective_gap\n");
    let mut max_weight_gap = 0.0f64;
    let mut max_objective_gap = 0.0f64;
    for trial in 0..trials {
        let samples: Vec<TrainingSample> = (0..samples_n)
            .map(|k| TrainingSample::new(k, testkit::random_features(&mut rng, layout, scale)))
            .collect();
        let constants: Vec<f64> = (0..samples_n).map(|_| rng.gen::<f64>()).collect();
        let report = theorem1_harness(&samples, &constants, &config).map_err(classify_core)?;
        report_text.push_str(&format!(
            "{trial}\t{:.6e}\t{:.6e}\n",
            report.weight_gap_inf, report.objective_gap_error
        ));
        max_weight_gap = max_weight_gap.max(report.weight_gap_inf);
        max_objective_gap = max_objective_gap.max(report.objective_gap_error);
    }
    write_text(&args.common.out.join("report.tsv"), &report_text)?;
    settings.write_echo(&args.common.out)?;
    println!(
        "{trials} constructions, {} layout: max weight gap {max_weight_gap:.6e}, max objective gap {max_objective_gap:.6e}",
        layout.tag()
    );
    Ok(())
}
