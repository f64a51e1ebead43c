//! Per-component similarity, weighted-sum fusion and ranked identification.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gallery::{Gallery, GalleryEntry};
use crate::lbp::LbpDescriptor;
use crate::pipeline::ProbeFeatures;
use crate::pose::PoseBucket;
use crate::ComponentKind;

/// Denominator guard for empty bins in [`chi_square`].
pub const CHI_SQUARE_EPS: f64 = 1e-12;

/// Allowed deviation of the active weight sum from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Single-component recognition rates (percent) used to derive the
/// default weights: face, left eye, right eye, nose, mouth-chin, forehead.
const COMPONENT_RATES: [f64; 6] = [85.0, 60.0, 61.0, 65.0, 70.0, 72.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("histogram lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("descriptors are not comparable: {0}")]
    DescriptorMismatch(String),
    #[error("no score for weighted component {0}")]
    MissingScore(ComponentKind),
    #[error("invalid fusion weights: {0}")]
    InvalidWeights(String),
    #[error("probe lacks a descriptor for weighted component {0}")]
    MissingProbeComponent(ComponentKind),
    #[error("no enrolled entries in the {0} partition")]
    NoCandidates(PoseBucket),
    #[error("configuration fingerprint {probe} does not match gallery {gallery}")]
    ConfigMismatch { probe: String, gallery: String },
}

/// Chi-square histogram distance `sum (a - b)^2 / (a + b + eps)`.
pub fn chi_square(h1: &[f64], h2: &[f64]) -> Result<f64, FusionError> {
    if h1.len() != h2.len() {
        return Err(FusionError::LengthMismatch(h1.len(), h2.len()));
    }
    Ok(h1
        .iter()
        .zip(h2)
        .map(|(&a, &b)| {
            let d = a - b;
            if d == 0.0 {
                0.0
            } else {
                d * d / (a + b + CHI_SQUARE_EPS)
            }
        })
        .sum())
}

/// Similarity `1 / (1 + chi_square)` in (0, 1].
pub fn component_score(probe: &LbpDescriptor, gallery: &LbpDescriptor) -> Result<f64, FusionError> {
    if probe.kind() != gallery.kind() || probe.grid() != gallery.grid() {
        return Err(FusionError::DescriptorMismatch(format!(
            "{} {:?} vs {} {:?}",
            probe.kind(),
            probe.grid(),
            gallery.kind(),
            gallery.grid()
        )));
    }
    Ok(1.0 / (1.0 + chi_square(probe.values(), gallery.values())?))
}

/// Convex per-component weights for one pose bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    weights: [f64; 6],
}

impl FusionWeights {
    /// Checks every weight is in [0, 1], components hidden by `bucket` have
    /// weight 0 and the active weights sum to 1.
    pub fn new(bucket: PoseBucket, weights: [f64; 6]) -> Result<Self, FusionError> {
        let mut sum = 0.0;
        for kind in ComponentKind::ALL {
            let w = weights[kind.index()];
            if !(0.0..=1.0).contains(&w) {
                return Err(FusionError::InvalidWeights(format!(
                    "{kind} weight {w} outside [0, 1]"
                )));
            }
            if !bucket.is_active(kind) && w != 0.0 {
                return Err(FusionError::InvalidWeights(format!(
                    "{kind} is not used in the {bucket} pose but has weight {w}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(FusionError::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(FusionWeights { weights })
    }

    pub fn from_map(
        bucket: PoseBucket,
        map: &BTreeMap<ComponentKind, f64>,
    ) -> Result<Self, FusionError> {
        let mut weights = [0.0; 6];
        for (kind, &w) in map {
            weights[kind.index()] = w;
        }
        Self::new(bucket, weights)
    }

    /// All weight on one component.
    pub fn single(kind: ComponentKind) -> Self {
        let mut weights = [0.0; 6];
        weights[kind.index()] = 1.0;
        FusionWeights { weights }
    }

    pub fn get(&self, kind: ComponentKind) -> f64 {
        self.weights[kind.index()]
    }

    pub fn check_for(&self, bucket: PoseBucket) -> Result<(), FusionError> {
        Self::new(bucket, self.weights).map(|_| ())
    }

    /// Components with nonzero weight.
    pub fn weighted(&self) -> impl Iterator<Item = (ComponentKind, f64)> + '_ {
        ComponentKind::ALL
            .into_iter()
            .map(|k| (k, self.weights[k.index()]))
            .filter(|&(_, w)| w > 0.0)
    }
}

/// Component recognition rates restricted to the bucket's active
/// components, renormalized to sum to 1.
pub fn default_weights(bucket: PoseBucket) -> FusionWeights {
    let mut weights = [0.0; 6];
    let total: f64 = ComponentKind::ALL
        .into_iter()
        .filter(|&k| bucket.is_active(k))
        .map(|k| COMPONENT_RATES[k.index()])
        .sum();
    for kind in ComponentKind::ALL
        .into_iter()
        .filter(|&k| bucket.is_active(k))
    {
        weights[kind.index()] = COMPONENT_RATES[kind.index()] / total;
    }
    FusionWeights { weights }
}

/// Weighted sum `S = sum w_i s_i` over components with nonzero weight.
pub fn fuse(
    scores: &BTreeMap<ComponentKind, f64>,
    weights: &FusionWeights,
) -> Result<f64, FusionError> {
    let mut total = 0.0;
    for (kind, w) in weights.weighted() {
        let s = scores.get(&kind).ok_or(FusionError::MissingScore(kind))?;
        total += w * s;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions {
    pub top_k: usize,
    /// Results scoring below this are flagged as rejected; 0 disables.
    pub reject_tau: f64,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            top_k: 5,
            reject_tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub subject_id: String,
    pub score: f64,
    pub component_scores: BTreeMap<ComponentKind, f64>,
    pub pose: PoseBucket,
    /// Position of the best-matching entry within its partition.
    pub entry_index: usize,
    pub source_ref: String,
    pub rejected: bool,
}

pub fn identify(
    probe: &ProbeFeatures,
    gallery: &Gallery,
    weights: &FusionWeights,
    opts: &MatchOptions,
) -> Result<Vec<MatchResult>, FusionError> {
    identify_observed(probe, gallery, weights, opts, &|_| {})
}

/// [`identify`] with a callback invoked once for every gallery entry that
/// gets scored.
pub fn identify_observed(
    probe: &ProbeFeatures,
    gallery: &Gallery,
    weights: &FusionWeights,
    opts: &MatchOptions,
    on_visit: &(dyn Fn(&GalleryEntry) + Sync),
) -> Result<Vec<MatchResult>, FusionError> {
    if probe.fingerprint != gallery.config_fingerprint {
        return Err(FusionError::ConfigMismatch {
            probe: probe.fingerprint.clone(),
            gallery: gallery.config_fingerprint.clone(),
        });
    }
    weights.check_for(probe.bucket)?;
    for (kind, _) in weights.weighted() {
        if !probe.descriptors.contains_key(&kind) {
            return Err(FusionError::MissingProbeComponent(kind));
        }
    }
    let entries = gallery.partition_for(probe.bucket);
    if entries.is_empty() {
        return Err(FusionError::NoCandidates(probe.bucket));
    }

    let scored: Vec<(f64, BTreeMap<ComponentKind, f64>)> = entries
        .par_iter()
        .map(|entry| {
            on_visit(entry);
            let mut scores = BTreeMap::new();
            for (kind, _) in weights.weighted() {
                let enrolled = entry
                    .descriptors
                    .get(&kind)
                    .ok_or(FusionError::MissingScore(kind))?;
                scores.insert(kind, component_score(&probe.descriptors[&kind], enrolled)?);
            }
            let fused = fuse(&scores, weights)?.min(1.0);
            Ok((fused, scores))
        })
        .collect::<Result<_, FusionError>>()?;

    // Best entry per subject; the earliest entry wins exact ties.
    let mut best: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, entry) in entries.iter().enumerate() {
        best.entry(entry.subject_id.as_str())
            .and_modify(|b| {
                if scored[i].0 > scored[*b].0 {
                    *b = i;
                }
            })
            .or_insert(i);
    }

    let mut results: Vec<MatchResult> = best
        .into_values()
        .map(|i| {
            let (score, ref scores) = scored[i];
            MatchResult {
                subject_id: entries[i].subject_id.clone(),
                score,
                component_scores: scores.clone(),
                pose: probe.bucket,
                entry_index: i,
                source_ref: entries[i].source_ref.clone(),
                rejected: score < opts.reject_tau,
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.subject_id.cmp(&b.subject_id))
    });
    results.truncate(opts.top_k);
    Ok(results)
}
