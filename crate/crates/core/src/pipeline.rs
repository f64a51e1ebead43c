//! Image + landmarks to pose and per-component descriptors.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::Config;
use crate::geometry::{component_box, extract_roi, GeometryError};
use crate::image::GrayImage;
use crate::landmarks::LandmarkSet;
use crate::lbp::{descriptor, lbp_image, LbpDescriptor, LbpError};
use crate::pose::{
    active_components, bucket_pose, estimate_pose, CoincidentPoints, PoseAngles, PoseBucket,
};
use crate::preprocess::{preprocess_component, PreprocessError};
use crate::ComponentKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),
    #[error("image is {image_w}x{image_h} but landmarks were taken on {lm_w}x{lm_h}")]
    SizeMismatch {
        image_w: usize,
        image_h: usize,
        lm_w: u32,
        lm_h: u32,
    },
    #[error(transparent)]
    Pose(#[from] CoincidentPoints),
    #[error("{kind}: {source}")]
    Geometry {
        kind: ComponentKind,
        source: GeometryError,
    },
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Lbp(#[from] LbpError),
}

/// Everything extracted from one capture.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFeatures {
    pub angles: PoseAngles,
    pub bucket: PoseBucket,
    /// One descriptor per component active in `bucket`.
    pub descriptors: BTreeMap<ComponentKind, LbpDescriptor>,
    /// Fingerprint of the configuration the descriptors were built under.
    pub fingerprint: String,
}

/// Crop, resize, normalize and describe one component.
pub fn component_descriptor(
    img: &GrayImage,
    ls: &LandmarkSet,
    kind: ComponentKind,
    cfg: &Config,
) -> Result<LbpDescriptor, PipelineError> {
    let bbox = component_box(ls, kind, &cfg.margins)
        .map_err(|source| PipelineError::Geometry { kind, source })?;
    let roi = extract_roi(img, &bbox).map_err(|source| PipelineError::Geometry { kind, source })?;
    let normalized = preprocess_component(&roi, kind, &cfg.preprocess)?;
    let codes = lbp_image(&normalized)?;
    Ok(descriptor(&codes, kind, cfg.grid(kind))?)
}

pub fn pose_of(ls: &LandmarkSet, cfg: &Config) -> Result<(PoseAngles, PoseBucket), PipelineError> {
    let angles = estimate_pose(ls, cfg.pose_signs)?;
    Ok((angles, bucket_pose(&angles, cfg.pose_threshold)))
}

/// Pose, bucket and the descriptors of every component the bucket uses.
pub fn extract_features(
    img: &GrayImage,
    ls: &LandmarkSet,
    cfg: &Config,
) -> Result<ProbeFeatures, PipelineError> {
    let report = ls.validate();
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(PipelineError::InvalidLandmarks(msgs.join("; ")));
    }
    if (img.width(), img.height()) != (ls.width as usize, ls.height as usize) {
        return Err(PipelineError::SizeMismatch {
            image_w: img.width(),
            image_h: img.height(),
            lm_w: ls.width,
            lm_h: ls.height,
        });
    }
    let (angles, bucket) = pose_of(ls, cfg)?;
    let mut descriptors = BTreeMap::new();
    for kind in active_components(bucket) {
        descriptors.insert(kind, component_descriptor(img, ls, kind, cfg)?);
    }
    Ok(ProbeFeatures {
        angles,
        bucket,
        descriptors,
        fingerprint: cfg.fingerprint(),
    })
}
