use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use facekit::config::{Config, ConfigError};
use facekit::eval::{evaluate, EvalError, EvalMode, EvalOptions, Occlusion, ProbeManifest};
use facekit::fusion::{identify, FusionError, MatchOptions};
use facekit::gallery::{Gallery, GalleryError};
use facekit::image::{load_gray, GrayImage, ImageError};
use facekit::landmarks::LandmarkSet;
use facekit::pipeline::{extract_features, pose_of};
use facekit::ComponentKind;

#[derive(Parser)]
#[command(
    name = "facekit",
    version,
    about = "Pose-adaptive component-based face identification"
)]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add one capture of a subject to a gallery (created if missing).
    Enroll {
        #[arg(long)]
        gallery: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        landmarks: PathBuf,
        #[arg(long)]
        subject: String,
    },
    /// Rank enrolled subjects against a probe capture.
    Identify {
        #[arg(long)]
        gallery: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        landmarks: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        topk: u32,
        /// Flag results scoring below this as rejected.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Print pitch, yaw, roll and pose bucket of a landmark file.
    Pose {
        #[arg(long)]
        landmarks: PathBuf,
    },
    /// Rank-1 identification rates over a probe manifest.
    Evaluate {
        #[arg(long)]
        gallery: PathBuf,
        /// CSV with header image,landmarks,subject.
        #[arg(long)]
        probes: PathBuf,
        #[arg(long, value_enum, default_value_t = Occlude::None)]
        occlude: Occlude,
        /// Fraction of image rows masked by --occlude.
        #[arg(long, default_value_t = 0.5)]
        occlude_fraction: f64,
        /// Also report single-component rates.
        #[arg(long)]
        ablate: bool,
        /// Match on the whole-face descriptor only.
        #[arg(long)]
        holistic: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Occlude {
    None,
    Top,
    Bottom,
}

enum Failure {
    Usage(String),
    Validation(String),
    Io(String),
    NoCandidates(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
            Failure::NoCandidates(_) => 4,
        }
    }

    fn report(&self) -> String {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Validation(m) => ("validation", m),
            Failure::Io(m) => ("io", m),
            Failure::NoCandidates(m) => ("no_candidates", m),
        };
        serde_json::json!({"error": kind, "message": message}).to_string()
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            ConfigError::BadConfig { .. } => Failure::Validation(e.to_string()),
        }
    }
}

impl From<ImageError> for Failure {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<GalleryError> for Failure {
    fn from(e: GalleryError) -> Self {
        match e {
            GalleryError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<FusionError> for Failure {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::NoCandidates(_) => Failure::NoCandidates(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn read_landmarks(path: &Path) -> Result<LandmarkSet, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    LandmarkSet::parse(&bytes).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn read_capture(image: &Path, landmarks: &Path) -> Result<(GrayImage, LandmarkSet), Failure> {
    let ls = read_landmarks(landmarks)?;
    Ok((load_gray(image)?, ls))
}

fn two_decimals(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

#[derive(Serialize)]
struct EnrollOutput<'a> {
    subject: &'a str,
    pose: &'a str,
    components: Vec<&'static str>,
    entries: usize,
}

#[derive(Serialize)]
struct IdentifyLine<'a> {
    rank: usize,
    subject: &'a str,
    score: f64,
    pose: &'a str,
    components: BTreeMap<&'static str, f64>,
    rejected: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Enroll {
            gallery,
            image,
            landmarks,
            subject,
        } => {
            if subject.is_empty() {
                return Err(Failure::Usage("--subject must not be empty".into()));
            }
            let mut store = if gallery.exists() {
                Gallery::load(&gallery)?
            } else {
                Gallery::for_config(&cfg)
            };
            let (img, ls) = read_capture(&image, &landmarks)?;
            let entry = store.enroll(&subject, &image.display().to_string(), &img, &ls, &cfg)?;
            let pose = entry.pose.name();
            let components = entry.descriptors.keys().map(|k| k.name()).collect();
            let out = EnrollOutput {
                subject: &subject,
                pose,
                components,
                entries: store.len(),
            };
            let line = serde_json::to_string(&out).expect("serializes");
            store.save(&gallery)?;
            println!("{line}");
        }
        Command::Identify {
            gallery,
            image,
            landmarks,
            topk,
            tau,
        } => {
            let store = Gallery::load(&gallery)?;
            let (img, ls) = read_capture(&image, &landmarks)?;
            let features = extract_features(&img, &ls, &cfg)
                .map_err(|e| Failure::Validation(e.to_string()))?;
            let reject_tau = tau.unwrap_or(cfg.reject_tau);
            if !(0.0..=1.0).contains(&reject_tau) {
                return Err(Failure::Usage(format!("--tau {reject_tau} not in [0, 1]")));
            }
            let opts = MatchOptions {
                top_k: topk as usize,
                reject_tau,
            };
            let results = identify(&features, &store, cfg.weights(features.bucket), &opts)?;
            for (i, r) in results.iter().enumerate() {
                let line = IdentifyLine {
                    rank: i + 1,
                    subject: &r.subject_id,
                    score: r.score,
                    pose: r.pose.name(),
                    components: r
                        .component_scores
                        .iter()
                        .map(|(k, &s): (&ComponentKind, &f64)| (k.name(), s))
                        .collect(),
                    rejected: r.rejected,
                };
                println!("{}", serde_json::to_string(&line).expect("serializes"));
            }
        }
        Command::Pose { landmarks } => {
            let ls = read_landmarks(&landmarks)?;
            let (a, bucket) = pose_of(&ls, &cfg).map_err(|e| Failure::Validation(e.to_string()))?;
            println!(
                "{{\"pitch\":{},\"yaw\":{},\"roll\":{},\"bucket\":\"{}\"}}",
                two_decimals(a.pitch),
                two_decimals(a.yaw),
                two_decimals(a.roll),
                bucket
            );
        }
        Command::Evaluate {
            gallery,
            probes,
            occlude,
            occlude_fraction,
            ablate,
            holistic,
        } => {
            if !(0.0..=1.0).contains(&occlude_fraction) {
                return Err(Failure::Usage(format!(
                    "--occlude-fraction {occlude_fraction} not in [0, 1]"
                )));
            }
            let store = Gallery::load(&gallery)?;
            let manifest = ProbeManifest::load(&probes)?;
            let opts = EvalOptions {
                mode: if holistic {
                    EvalMode::Holistic
                } else {
                    EvalMode::Fused
                },
                occlusion: match occlude {
                    Occlude::None => Occlusion::None,
                    Occlude::Top => Occlusion::Top(occlude_fraction),
                    Occlude::Bottom => Occlusion::Bottom(occlude_fraction),
                },
                ablate,
            };
            let report = evaluate(&store, &manifest, &cfg, &opts)?;
            print!("{}", report.to_table());
            println!();
            println!("{}", report.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", Failure::Usage(e.render().to_string()).report());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
