//! Toolkit configuration file.
//!
//! All keys are optional; omitted ones take the defaults below.
//!
//! ```json
//! {
//!   "pose": {"threshold_degrees": 25, "flip_yaw": false, "flip_pitch": false},
//!   "preprocess": {"sigma1": 2.0, "sigma2": 8.0, "eps": 1e-6},
//!   "geometry": {"eye_breadth_scale": 1.5, "nose_length_scale": 0.5,
//!                "nose_breadth_scale": 1.4, "forehead_breadth_scale": 2.0, "face_pad": 0.05},
//!   "features": {"grid": {"face": [8, 8], "nose": [3, 3]}},
//!   "fusion": {"weights": {"left": {"face": 0.5, "nose": 0.5}}},
//!   "matcher": {"reject_tau": 0.0}
//! }
//! ```
//!
//! A bucket listed under `fusion.weights` replaces that bucket's defaults
//! entirely; components it omits get weight 0.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fusion::{default_weights, FusionWeights};
use crate::geometry::MarginConfig;
use crate::lbp::NEIGHBOR_ORDER_TAG;
use crate::pose::{PoseBucket, PoseSigns};
use crate::preprocess::PreprocessConfig;
use crate::ComponentKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("bad config value for `{key}`: {reason}")]
    BadConfig { key: String, reason: String },
    #[error("cannot read config `{path}`: {reason}")]
    Io { path: String, reason: String },
}

fn bad(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub pose_threshold: f64,
    pub pose_signs: PoseSigns,
    pub preprocess: PreprocessConfig,
    pub margins: MarginConfig,
    grids: [(usize, usize); 6],
    weights: [FusionWeights; 5],
    pub reject_tau: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            pose_threshold: 25.0,
            pose_signs: PoseSigns::default(),
            preprocess: PreprocessConfig::default(),
            margins: MarginConfig::default(),
            grids: ComponentKind::ALL.map(ComponentKind::default_grid),
            weights: PoseBucket::ALL.map(default_weights),
            reject_tau: 0.0,
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    pose: RawPose,
    #[serde(default)]
    preprocess: PreprocessConfig,
    #[serde(default)]
    geometry: MarginConfig,
    #[serde(default)]
    features: RawFeatures,
    #[serde(default)]
    fusion: RawFusion,
    #[serde(default)]
    matcher: RawMatcher,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPose {
    threshold_degrees: f64,
    flip_yaw: bool,
    flip_pitch: bool,
}

impl Default for RawPose {
    fn default() -> Self {
        RawPose {
            threshold_degrees: 25.0,
            flip_yaw: false,
            flip_pitch: false,
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFeatures {
    #[serde(default)]
    grid: BTreeMap<ComponentKind, (usize, usize)>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFusion {
    #[serde(default)]
    weights: BTreeMap<PoseBucket, BTreeMap<ComponentKind, f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMatcher {
    #[serde(default)]
    reject_tau: f64,
}

impl Config {
    /// Parses and validates a JSON configuration.
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Config, ConfigError> {
        let raw: RawConfig =
            serde_json::from_slice(bytes).map_err(|e| bad("<document>", e.to_string()))?;
        let mut cfg = Config::default();

        let t = raw.pose.threshold_degrees;
        if !(t > 0.0 && t < 90.0) {
            return Err(bad("pose.threshold_degrees", format!("{t} not in (0, 90)")));
        }
        cfg.pose_threshold = t;
        cfg.pose_signs = PoseSigns {
            flip_yaw: raw.pose.flip_yaw,
            flip_pitch: raw.pose.flip_pitch,
        };

        raw.preprocess
            .check()
            .map_err(|e| bad("preprocess", e.to_string()))?;
        cfg.preprocess = raw.preprocess;

        let m = raw.geometry;
        for (key, v) in [
            ("geometry.eye_breadth_scale", m.eye_breadth_scale),
            ("geometry.nose_length_scale", m.nose_length_scale),
            ("geometry.nose_breadth_scale", m.nose_breadth_scale),
            ("geometry.forehead_breadth_scale", m.forehead_breadth_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("{v} must be positive")));
            }
        }
        if !(m.face_pad >= 0.0 && m.face_pad < 1.0) {
            return Err(bad(
                "geometry.face_pad",
                format!("{} not in [0, 1)", m.face_pad),
            ));
        }
        cfg.margins = m;

        for (kind, (rows, cols)) in raw.features.grid {
            let (w, h) = kind.target_size();
            let (cw, ch) = (w - 2, h - 2);
            if rows == 0 || cols == 0 || rows > ch || cols > cw {
                return Err(bad(
                    format!("features.grid.{kind}"),
                    format!("[{rows}, {cols}] must lie within [1..={ch}, 1..={cw}]"),
                ));
            }
            cfg.grids[kind.index()] = (rows, cols);
        }

        for (bucket, map) in raw.fusion.weights {
            cfg.weights[bucket as usize] = FusionWeights::from_map(bucket, &map)
                .map_err(|e| bad(format!("fusion.weights.{bucket}"), e.to_string()))?;
        }

        let tau = raw.matcher.reject_tau;
        if !(0.0..=1.0).contains(&tau) {
            return Err(bad("matcher.reject_tau", format!("{tau} not in [0, 1]")));
        }
        cfg.reject_tau = tau;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let bytes = std::fs::read(p).map_err(|e| ConfigError::Io {
                    path: p.display().to_string(),
                    reason: e.to_string(),
                })?;
                Config::from_json_bytes(&bytes)
            }
        }
    }

    /// `(rows, cols)` of the histogram grid for `kind`.
    pub fn grid(&self, kind: ComponentKind) -> (usize, usize) {
        self.grids[kind.index()]
    }

    pub fn weights(&self, bucket: PoseBucket) -> &FusionWeights {
        &self.weights[bucket as usize]
    }

    /// Hash of every setting that changes descriptor values. Galleries and
    /// probes built under different fingerprints cannot be compared.
    pub fn fingerprint(&self) -> String {
        let mut text = String::new();
        text.push_str(NEIGHBOR_ORDER_TAG);
        let p = &self.preprocess;
        text.push_str(&format!("|pre:{:?},{:?},{:?}", p.sigma1, p.sigma2, p.eps));
        let m = &self.margins;
        text.push_str(&format!(
            "|geo:{:?},{:?},{:?},{:?},{:?}",
            m.eye_breadth_scale,
            m.nose_length_scale,
            m.nose_breadth_scale,
            m.forehead_breadth_scale,
            m.face_pad
        ));
        for kind in ComponentKind::ALL {
            let (w, h) = kind.target_size();
            let (r, c) = self.grid(kind);
            text.push_str(&format!("|{kind}:{w}x{h}:{r}x{c}"));
        }
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_key(json: &str) -> String {
        match Config::from_json_bytes(json.as_bytes()) {
            Err(ConfigError::BadConfig { key, .. }) => key,
            other => panic!("expected BadConfig, got {other:?}"),
        }
    }

    #[test]
    fn absent_file_gives_defaults() {
        let cfg = Config::load(None).unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.pose_threshold, 25.0);
        assert_eq!(cfg.preprocess.sigma1, 2.0);
        assert_eq!(cfg.preprocess.sigma2, 8.0);
        assert_eq!(cfg.grid(ComponentKind::Face), (8, 8));
        assert_eq!(cfg.grid(ComponentKind::Nose), (3, 3));
        assert_eq!(cfg.reject_tau, 0.0);
        assert_eq!(Config::from_json_bytes(b"{}").unwrap(), cfg);
    }

    #[test]
    fn sigma_order_enforced() {
        assert_eq!(
            err_key(r#"{"preprocess": {"sigma1": 8, "sigma2": 8}}"#),
            "preprocess"
        );
        assert_eq!(err_key(r#"{"preprocess": {"sigma1": 9}}"#), "preprocess");
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert_eq!(
            err_key(r#"{"fusion": {"weights": {"frontal": {"face": 0.5, "nose": 0.4}}}}"#),
            "fusion.weights.frontal"
        );
        assert_eq!(
            err_key(r#"{"fusion": {"weights": {"left": {"face": 0.5, "right_eye": 0.5}}}}"#),
            "fusion.weights.left"
        );
        let cfg = Config::from_json_bytes(
            br#"{"fusion": {"weights": {"left": {"face": 0.25, "nose": 0.75}}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.weights(PoseBucket::Left).get(ComponentKind::Nose), 0.75);
        assert_eq!(
            cfg.weights(PoseBucket::Left).get(ComponentKind::LeftEye),
            0.0
        );
        assert_eq!(
            cfg.weights(PoseBucket::Frontal),
            &default_weights(PoseBucket::Frontal)
        );
    }

    #[test]
    fn grid_bounds() {
        assert_eq!(
            err_key(r#"{"features": {"grid": {"left_eye": [17, 3]}}}"#),
            "features.grid.left_eye"
        );
        assert_eq!(
            err_key(r#"{"features": {"grid": {"face": [0, 3]}}}"#),
            "features.grid.face"
        );
        let cfg =
            Config::from_json_bytes(br#"{"features": {"grid": {"left_eye": [16, 25]}}}"#).unwrap();
        assert_eq!(cfg.grid(ComponentKind::LeftEye), (16, 25));
    }

    #[test]
    fn other_rejections() {
        assert_eq!(
            err_key(r#"{"pose": {"threshold_degrees": 0}}"#),
            "pose.threshold_degrees"
        );
        assert_eq!(
            err_key(r#"{"matcher": {"reject_tau": 2}}"#),
            "matcher.reject_tau"
        );
        assert_eq!(
            err_key(r#"{"geometry": {"face_pad": -0.1}}"#),
            "geometry.face_pad"
        );
        assert_eq!(err_key(r#"{"posе": {}}"#), "<document>");
        assert_eq!(err_key("not json"), "<document>");
    }

    #[test]
    fn fingerprint_tracks_descriptor_settings() {
        let base = Config::default().fingerprint();
        assert_eq!(base, Config::default().fingerprint());
        assert_eq!(base.len(), 64);
        let sig = Config::from_json_bytes(br#"{"preprocess": {"sigma1": 1.5}}"#).unwrap();
        assert_ne!(sig.fingerprint(), base);
        let grid = Config::from_json_bytes(br#"{"features": {"grid": {"nose": [2, 2]}}}"#).unwrap();
        assert_ne!(grid.fingerprint(), base);
        // Pose and matcher settings do not change descriptors.
        let pose = Config::from_json_bytes(
            br#"{"pose": {"threshold_degrees": 20}, "matcher": {"reject_tau": 0.3}}"#,
        )
        .unwrap();
        assert_eq!(pose.fingerprint(), base);
    }
}
