//! Rank-1 evaluation over a probe manifest, with optional occlusion,
//! face-only matching and per-component ablation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::Config;
use crate::fusion::{identify, FusionError, FusionWeights, MatchOptions};
use crate::gallery::Gallery;
use crate::image::{load_gray, GrayImage, ImageError};
use crate::landmarks::{LandmarkError, LandmarkSet};
use crate::pipeline::{extract_features, PipelineError, ProbeFeatures};
use crate::pose::PoseBucket;
use crate::ComponentKind;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },
    #[error("bad probe manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Landmarks { path: String, source: LandmarkError },
    #[error("{path}: {source}")]
    Image { path: String, source: ImageError },
    #[error("{path}: {source}")]
    Pipeline { path: String, source: PipelineError },
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRow {
    pub image: PathBuf,
    pub landmarks: PathBuf,
    pub subject: String,
}

/// CSV with header `image,landmarks,subject`. Relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProbeManifest {
    pub rows: Vec<ProbeRow>,
}

impl ProbeManifest {
    pub fn parse(bytes: &[u8], base_dir: &Path) -> Result<ProbeManifest, EvalError> {
        let bad = |m: String| EvalError::Manifest(m);
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["image", "landmarks", "subject"] {
            return Err(bad(format!(
                "header must be `image,landmarks,subject`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let (image, landmarks, subject) = (field(0), field(1), field(2));
            if image.is_empty() || landmarks.is_empty() || subject.is_empty() {
                return Err(bad(format!("row {} has an empty field", line + 1)));
            }
            rows.push(ProbeRow {
                image: base_dir.join(image),
                landmarks: base_dir.join(landmarks),
                subject: subject.to_string(),
            });
        }
        Ok(ProbeManifest { rows })
    }

    pub fn load(path: &Path) -> Result<ProbeManifest, EvalError> {
        let bytes = std::fs::read(path).map_err(|e| EvalError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        ProbeManifest::parse(&bytes, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Synthetic occluder: zero a horizontal band of the image before any
/// component is cropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occlusion {
    None,
    /// Top fraction of the rows, as sunglasses would.
    Top(f64),
    /// Bottom fraction of the rows, as a scarf would.
    Bottom(f64),
}

impl Occlusion {
    pub fn apply(&self, img: &mut GrayImage) {
        let h = img.height();
        let rows = |f: f64| ((f.clamp(0.0, 1.0) * h as f64).round() as usize).min(h);
        match *self {
            Occlusion::None => {}
            Occlusion::Top(f) => img.zero_rows(0, rows(f)),
            Occlusion::Bottom(f) => img.zero_rows(h - rows(f), h),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Occlusion::None => "none".into(),
            Occlusion::Top(f) => format!("top:{f}"),
            Occlusion::Bottom(f) => format!("bottom:{f}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Pose-dependent weights from the configuration.
    Fused,
    /// All weight on the whole-face descriptor.
    Holistic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub mode: EvalMode,
    pub occlusion: Occlusion,
    pub ablate: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mode: EvalMode::Fused,
            occlusion: Occlusion::None,
            ablate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub condition: String,
    pub probes: usize,
    pub correct: usize,
    /// Percent with one decimal; `None` when there were no probes.
    pub rate: Option<f64>,
}

impl EvalRow {
    fn new(condition: impl Into<String>, probes: usize, correct: usize) -> Self {
        let rate = (probes > 0).then(|| (1000.0 * correct as f64 / probes as f64).round() / 10.0);
        EvalRow {
            condition: condition.into(),
            probes,
            correct,
            rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub occlusion: String,
    /// One row per pose bucket that had probes, then `overall`.
    pub rows: Vec<EvalRow>,
    /// Single-component, fused and face-only rows when ablation was requested.
    pub components: Vec<EvalRow>,
}

impl EvalReport {
    pub fn overall(&self) -> &EvalRow {
        self.rows.last().expect("report always has an overall row")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let section = |out: &mut String, title: &str, rows: &[EvalRow]| {
            let _ = writeln!(
                out,
                "{title:<18} {:>7} {:>8} {:>7}",
                "probes", "correct", "rate"
            );
            for r in rows {
                let rate = r.rate.map_or("-".to_string(), |v| format!("{v:.1}%"));
                let _ = writeln!(
                    out,
                    "{:<18} {:>7} {:>8} {:>7}",
                    r.condition, r.probes, r.correct, rate
                );
            }
        };
        let _ = writeln!(
            out,
            "mode: {}  occlusion: {}",
            match self.mode {
                EvalMode::Fused => "fused",
                EvalMode::Holistic => "holistic",
            },
            self.occlusion
        );
        section(&mut out, "pose", &self.rows);
        if !self.components.is_empty() {
            out.push('\n');
            section(&mut out, "feature", &self.components);
        }
        out
    }
}

/// A probe ready for matching, with its ground-truth subject.
pub struct LabeledProbe {
    pub features: ProbeFeatures,
    pub subject: String,
}

/// Loads, occludes and featurizes every manifest row (in parallel; output
/// keeps manifest order).
pub fn prepare_probes(
    manifest: &ProbeManifest,
    cfg: &Config,
    occlusion: Occlusion,
) -> Result<Vec<LabeledProbe>, EvalError> {
    manifest
        .rows
        .par_iter()
        .map(|row| {
            let lm_path = row.landmarks.display().to_string();
            let img_path = row.image.display().to_string();
            let lm_bytes = std::fs::read(&row.landmarks).map_err(|e| EvalError::Io {
                path: lm_path.clone(),
                reason: e.to_string(),
            })?;
            let ls = LandmarkSet::parse(&lm_bytes).map_err(|source| EvalError::Landmarks {
                path: lm_path,
                source,
            })?;
            let mut img = load_gray(&row.image).map_err(|source| match source {
                ImageError::Io { source, .. } => EvalError::Io {
                    path: img_path.clone(),
                    reason: source.to_string(),
                },
                source => EvalError::Image {
                    path: img_path.clone(),
                    source,
                },
            })?;
            occlusion.apply(&mut img);
            let features =
                extract_features(&img, &ls, cfg).map_err(|source| EvalError::Pipeline {
                    path: img_path,
                    source,
                })?;
            Ok(LabeledProbe {
                features,
                subject: row.subject.clone(),
            })
        })
        .collect()
}

/// Whether the top-ranked subject under `weights` is the true one. An empty
/// partition counts as a miss.
fn rank1_correct(
    probe: &LabeledProbe,
    gallery: &Gallery,
    weights: &FusionWeights,
) -> Result<bool, EvalError> {
    let opts = MatchOptions {
        top_k: 1,
        reject_tau: 0.0,
    };
    match identify(&probe.features, gallery, weights, &opts) {
        Ok(results) => Ok(results
            .first()
            .is_some_and(|r| r.subject_id == probe.subject)),
        Err(FusionError::NoCandidates(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

fn weights_for(mode: EvalMode, bucket: PoseBucket, cfg: &Config) -> FusionWeights {
    match mode {
        EvalMode::Fused => *cfg.weights(bucket),
        EvalMode::Holistic => FusionWeights::single(ComponentKind::Face),
    }
}

/// Rank-1 rates for already-featurized probes.
pub fn evaluate_probes(
    gallery: &Gallery,
    probes: &[LabeledProbe],
    cfg: &Config,
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let outcomes: Vec<bool> = probes
        .par_iter()
        .map(|p| rank1_correct(p, gallery, &weights_for(opts.mode, p.features.bucket, cfg)))
        .collect::<Result<_, _>>()?;

    let mut per_bucket: BTreeMap<PoseBucket, (usize, usize)> = BTreeMap::new();
    for (p, &ok) in probes.iter().zip(&outcomes) {
        let slot = per_bucket.entry(p.features.bucket).or_default();
        slot.0 += 1;
        slot.1 += usize::from(ok);
    }
    let mut rows: Vec<EvalRow> = per_bucket
        .iter()
        .map(|(b, &(n, c))| EvalRow::new(b.name(), n, c))
        .collect();
    rows.push(EvalRow::new(
        "overall",
        probes.len(),
        outcomes.iter().filter(|&&ok| ok).count(),
    ));

    let mut components = Vec::new();
    if opts.ablate {
        for kind in ComponentKind::ALL {
            let usable: Vec<&LabeledProbe> = probes
                .iter()
                .filter(|p| p.features.bucket.is_active(kind))
                .collect();
            let weights = FusionWeights::single(kind);
            let correct = usable
                .par_iter()
                .map(|p| rank1_correct(p, gallery, &weights))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|&ok| ok)
                .count();
            components.push(EvalRow::new(kind.name(), usable.len(), correct));
        }
        for (label, mode) in [("fused", EvalMode::Fused), ("holistic", EvalMode::Holistic)] {
            let correct = probes
                .par_iter()
                .map(|p| rank1_correct(p, gallery, &weights_for(mode, p.features.bucket, cfg)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|&ok| ok)
                .count();
            components.push(EvalRow::new(label, probes.len(), correct));
        }
    }

    Ok(EvalReport {
        mode: opts.mode,
        occlusion: opts.occlusion.label(),
        rows,
        components,
    })
}

pub fn evaluate(
    gallery: &Gallery,
    manifest: &ProbeManifest,
    cfg: &Config,
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let probes = prepare_probes(manifest, cfg, opts.occlusion)?;
    evaluate_probes(gallery, &probes, cfg, opts)
}
