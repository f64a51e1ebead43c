//! Pose-adaptive, component-based face identification.
//!
//! The pipeline takes a grayscale image plus a 21-point landmark file,
//! estimates head pose, crops the facial components that are visible in
//! that pose, normalizes their illumination, describes each one with
//! regional LBP histograms and matches them against the pose-specific
//! partition of an enrolled gallery by weighted score fusion.

pub mod config;
pub mod eval;
pub mod fusion;
pub mod gallery;
pub mod geometry;
pub mod image;
pub mod landmarks;
pub mod lbp;
pub mod pipeline;
pub mod pose;
pub mod preprocess;
pub mod synth;

mod component;

pub use crate::component::ComponentKind;
pub use crate::config::Config;
pub use crate::fusion::{FusionWeights, MatchOptions, MatchResult};
pub use crate::gallery::{Gallery, GalleryEntry};
pub use crate::image::{GrayImage, RealImage};
pub use crate::landmarks::{FacePointId, Landmark, LandmarkSet};
pub use crate::lbp::LbpDescriptor;
pub use crate::pose::{PoseAngles, PoseBucket};
