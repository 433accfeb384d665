//! `sift-bench`: detect, match, deform, and evaluate.
//!
//! Exit codes: 0 on success, 1 on runtime failures (missing or unreadable
//! files, undecodable data), 2 on usage errors (bad flags, malformed specs,
//! inconsistent configuration). Expected errors print a one-line message,
//! never a stack trace.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sift_bench::{
    detect_quantized, export_report, load_corpus, run_eval, EvalMode, EvalOptions, FeatureStore,
    ThresholdGrid,
};
use sift_core::{
    detect_and_describe, load_image, load_keypoints, match_descriptors, save_keypoints,
    save_matches, write_pgm, Deformation, DetectorParams, GrayImage64, Keypoint64, PyramidParams,
};

const DEFORM_GRAMMAR: &str = "\
Deformation specs:
  rot:<theta>        rotate by <theta> degrees counter-clockwise; the canvas
                     grows to the bounding box of the rotated image
  scale:<alpha>      resize by factor <alpha> > 0 (both dimensions rounded)
  fisheye:<beta>     radial fish-eye of strength <beta> >= 0; 0 is identity,
                     the center and corners stay fixed
  blur:<L>[@<angle>] linear motion blur averaging <L> >= 1 samples along
                     <angle> degrees (default 0)

Angles accept any real value and are normalized into [0, 360).";

#[derive(Parser)]
#[command(
    name = "sift-bench",
    version,
    about = "SIFT keypoint detection, matching, and robustness benchmarks",
    after_help = DEFORM_GRAMMAR
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect keypoints in an image and print how many were found
    #[command(after_help = DEFORM_GRAMMAR)]
    Detect(DetectArgs),
    /// Match two images or two keypoint files and print the matching rate
    #[command(after_help = DEFORM_GRAMMAR)]
    Match(MatchArgs),
    /// Apply a parametric deformation to an image
    #[command(after_help = DEFORM_GRAMMAR)]
    Deform(DeformArgs),
    /// Evaluate matching rates over an image corpus
    #[command(after_help = DEFORM_GRAMMAR)]
    Eval(EvalArgs),
}

/// Detector configuration shared by commands that run detection.
#[derive(Args)]
struct DetectorFlags {
    /// Scales per octave of the Gaussian pyramid
    #[arg(long, default_value_t = 3)]
    octave_scales: usize,
    /// Base blur of each octave
    #[arg(long, default_value_t = 1.6)]
    sigma0: f64,
    /// Blur assumed already present in the input image
    #[arg(long, default_value_t = 0.5)]
    input_blur: f64,
    /// Upsample the input 2x before the first octave
    #[arg(long)]
    doubling: bool,
    /// Minimum refined |DoG| response
    #[arg(long, default_value_t = 0.03)]
    contrast: f64,
    /// Principal-curvature ratio bound of the edge test
    #[arg(long, default_value_t = 10.0)]
    edge_ratio: f64,
}

impl DetectorFlags {
    fn to_params(&self) -> DetectorParams {
        DetectorParams {
            pyramid: PyramidParams {
                octave_scales: self.octave_scales,
                sigma0: self.sigma0,
                assumed_input_blur: self.input_blur,
                initial_doubling: self.doubling,
                ..PyramidParams::default()
            },
            contrast_threshold: self.contrast,
            edge_ratio: self.edge_ratio,
            ..DetectorParams::default()
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input image (PGM or PNG)
    image: PathBuf,
    /// Write the detected keypoints to this file
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
struct MatchArgs {
    /// First input: an image, or a .kp keypoint file
    input_a: PathBuf,
    /// Second input, of the same kind as the first
    input_b: PathBuf,
    /// Nearest-neighbor distance ratio in (0, 1]
    #[arg(long, default_value_t = 0.8)]
    ratio: f64,
    /// Write the accepted matches to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeformArgs {
    /// Input image (PGM or PNG)
    image: PathBuf,
    /// Deformation to apply (see the grammar below)
    #[arg(long)]
    spec: String,
    /// Output PGM path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Match every pair of distinct corpus images
    Fp,
    /// Match each image against a deformed copy of itself
    Tp,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of corpus images (.pgm / .png)
    #[arg(long)]
    corpus: PathBuf,
    /// Experiment to run
    #[arg(long, value_enum)]
    mode: Mode,
    /// Deformation for tp mode (see the grammar below)
    #[arg(long)]
    spec: Option<String>,
    /// Rate thresholds as start:step:end
    #[arg(long, default_value = "0:0.02:1")]
    grid: String,
    /// Report output directory
    #[arg(long)]
    out: PathBuf,
    /// Nearest-neighbor distance ratio in (0, 1]
    #[arg(long, default_value_t = 0.8)]
    ratio: f64,
    /// Evaluation worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Also render curve.svg and dphi.svg
    #[arg(long)]
    plot: bool,
}

/// An expected failure, carrying which exit-code class it belongs to.
enum Failure {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

/// Flag-level problems: exit 2.
fn usage<T>(r: sift_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

/// Processing problems with otherwise valid flags: exit 1.
fn runtime<T>(r: sift_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Runtime(e.to_string()))
}

fn check_ratio(ratio: f64) -> CmdResult {
    if ratio.is_finite() && ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--ratio must lie in (0, 1], got {ratio}"
        )))
    }
}

fn cmd_detect(args: &DetectArgs) -> CmdResult {
    let params = args.detector.to_params();
    usage(params.validate())?;
    let image: GrayImage64 = runtime(load_image(&args.image))?;
    let keypoints = runtime(detect_and_describe(&image, &params))?;
    if let Some(out) = &args.out {
        runtime(save_keypoints(out, &keypoints))?;
    }
    println!("keypoints={}", keypoints.len());
    Ok(())
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum InputKind {
    Image,
    KeypointFile,
}

fn input_kind(path: &Path) -> InputKind {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("kp") => InputKind::KeypointFile,
        _ => InputKind::Image,
    }
}

fn cmd_match(args: &MatchArgs) -> CmdResult {
    check_ratio(args.ratio)?;
    let kind_a = input_kind(&args.input_a);
    let kind_b = input_kind(&args.input_b);
    if kind_a != kind_b {
        return Err(Failure::Usage(format!(
            "cannot mix image and keypoint-file inputs ({} vs {})",
            args.input_a.display(),
            args.input_b.display()
        )));
    }
    let load = |path: &Path| -> Result<Vec<Keypoint64>, Failure> {
        match kind_a {
            InputKind::KeypointFile => runtime(load_keypoints(path)),
            InputKind::Image => {
                let image: GrayImage64 = runtime(load_image(path))?;
                // Quantize through the keypoint file format so matching from
                // images equals matching from files written by `detect`.
                runtime(detect_quantized(&image, &DetectorParams::default()))
            }
        }
    };
    let kps_a = load(&args.input_a)?;
    let kps_b = load(&args.input_b)?;
    let result = match_descriptors(&kps_a, &kps_b, args.ratio);
    if let Some(out) = &args.out {
        runtime(save_matches(out, &result))?;
    }
    println!("r={:.6}", result.rate);
    Ok(())
}

fn cmd_deform(args: &DeformArgs) -> CmdResult {
    let deformation: Deformation = usage(args.spec.parse())?;
    let image: GrayImage64 = runtime(load_image(&args.image))?;
    let deformed = usage(deformation.apply(&image))?;
    runtime(write_pgm(&args.out, &deformed))?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> CmdResult {
    check_ratio(args.ratio)?;
    let grid: ThresholdGrid = usage(args.grid.parse())?;
    let mode = match args.mode {
        Mode::Fp => EvalMode::FalsePositive,
        Mode::Tp => EvalMode::TruePositive,
    };
    let deformation = match (&args.spec, mode) {
        (Some(spec), EvalMode::TruePositive) => Some(usage(spec.parse::<Deformation>())?),
        (None, EvalMode::FalsePositive) => None,
        (Some(_), EvalMode::FalsePositive) => {
            return Err(Failure::Usage(
                "--spec only applies to --mode tp".into(),
            ))
        }
        (None, EvalMode::TruePositive) => {
            return Err(Failure::Usage(
                "--mode tp requires a deformation via --spec".into(),
            ))
        }
    };
    let jobs = match args.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let corpus = usage(load_corpus(&args.corpus))?;
    let store = runtime(FeatureStore::with_disk_cache(
        DetectorParams::default(),
        args.out.join("cache"),
    ))?;
    let opts = EvalOptions {
        ratio: args.ratio,
        grid,
        jobs,
    };
    let report = usage(run_eval(
        &corpus,
        mode,
        deformation.as_ref(),
        &store,
        &opts,
    ))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    runtime(export_report(&report, &args.out, args.plot))?;
    println!("{}", report.summary_line());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Match(args) => cmd_match(args),
        Command::Deform(args) => cmd_deform(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
