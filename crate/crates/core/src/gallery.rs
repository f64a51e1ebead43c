//! Pose-partitioned store of enrolled descriptors and its JSON file format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::image::GrayImage;
use crate::landmarks::LandmarkSet;
use crate::lbp::LbpDescriptor;
use crate::pipeline::{extract_features, PipelineError};
use crate::pose::{active_components, PoseBucket};
use crate::ComponentKind;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("gallery I/O on `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("corrupt gallery: {0}")]
    CorruptGallery(String),
    #[error("unsupported gallery format version {0}")]
    UnsupportedVersion(u64),
    #[error("configuration fingerprint {config} does not match gallery {gallery}")]
    ConfigMismatch { config: String, gallery: String },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// One enrolled capture.
#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub subject_id: String,
    pub pose: PoseBucket,
    pub source_ref: String,
    /// Keys are exactly the components active in `pose`.
    pub descriptors: BTreeMap<ComponentKind, LbpDescriptor>,
}

impl GalleryEntry {
    fn check(&self) -> Result<(), String> {
        if self.subject_id.is_empty() {
            return Err("empty subject id".into());
        }
        let keys: Vec<ComponentKind> = self.descriptors.keys().copied().collect();
        if keys != active_components(self.pose) {
            return Err(format!(
                "{} entry for `{}` has components {:?}",
                self.pose, self.subject_id, keys
            ));
        }
        if let Some((k, d)) = self.descriptors.iter().find(|(k, d)| d.kind() != **k) {
            return Err(format!("descriptor under {k} has kind {}", d.kind()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    pub format_version: u64,
    pub config_fingerprint: String,
    partitions: [Vec<GalleryEntry>; 5],
}

impl Gallery {
    pub fn new(config_fingerprint: impl Into<String>) -> Self {
        Gallery {
            format_version: FORMAT_VERSION,
            config_fingerprint: config_fingerprint.into(),
            partitions: Default::default(),
        }
    }

    pub fn for_config(cfg: &Config) -> Self {
        Gallery::new(cfg.fingerprint())
    }

    pub fn partition_for(&self, bucket: PoseBucket) -> &[GalleryEntry] {
        &self.partitions[bucket as usize]
    }

    pub fn len(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> impl Iterator<Item = &GalleryEntry> {
        self.partitions.iter().flatten()
    }

    /// Appends a prebuilt entry to its pose partition.
    pub fn add_entry(&mut self, entry: GalleryEntry) -> Result<(), GalleryError> {
        entry.check().map_err(GalleryError::InvalidEntry)?;
        self.partitions[entry.pose as usize].push(entry);
        Ok(())
    }

    /// Runs the full extraction pipeline on one capture and files the
    /// result under its estimated pose. The gallery is unchanged on error.
    pub fn enroll(
        &mut self,
        subject_id: &str,
        source_ref: &str,
        img: &GrayImage,
        ls: &LandmarkSet,
        cfg: &Config,
    ) -> Result<&GalleryEntry, GalleryError> {
        let fingerprint = cfg.fingerprint();
        if fingerprint != self.config_fingerprint {
            return Err(GalleryError::ConfigMismatch {
                config: fingerprint,
                gallery: self.config_fingerprint.clone(),
            });
        }
        let features = extract_features(img, ls, cfg)?;
        let pose = features.bucket;
        self.add_entry(GalleryEntry {
            subject_id: subject_id.to_string(),
            pose,
            source_ref: source_ref.to_string(),
            descriptors: features.descriptors,
        })?;
        Ok(self.partitions[pose as usize].last().expect("just pushed"))
    }

    pub fn to_json(&self) -> String {
        let raw = RawGallery {
            format_version: self.format_version,
            config_fingerprint: self.config_fingerprint.clone(),
            partitions: PoseBucket::ALL
                .into_iter()
                .map(|b| {
                    (
                        b,
                        self.partition_for(b).iter().map(RawEntry::from).collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("gallery serializes")
    }

    /// Parses and validates a gallery document.
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Gallery, GalleryError> {
        let corrupt = |e: &dyn std::fmt::Display| GalleryError::CorruptGallery(e.to_string());
        let doc: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| corrupt(&e))?;
        let version = doc
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| GalleryError::CorruptGallery("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(GalleryError::UnsupportedVersion(version));
        }
        let raw: RawGallery = serde_json::from_value(doc).map_err(|e| corrupt(&e))?;
        if raw.config_fingerprint.is_empty() {
            return Err(GalleryError::CorruptGallery(
                "empty config_fingerprint".into(),
            ));
        }

        let mut gallery = Gallery::new(raw.config_fingerprint);
        let mut grids: BTreeMap<ComponentKind, (usize, usize)> = BTreeMap::new();
        for (pose, entries) in raw.partitions {
            for re in entries {
                let mut descriptors = BTreeMap::new();
                for (kind, rd) in re.descriptors {
                    if *grids.entry(kind).or_insert(rd.grid) != rd.grid {
                        return Err(GalleryError::CorruptGallery(format!(
                            "{kind} descriptors use more than one grid"
                        )));
                    }
                    let d = LbpDescriptor::from_values(kind, rd.grid, rd.values)
                        .map_err(|e| GalleryError::CorruptGallery(format!("{kind}: {e}")))?;
                    descriptors.insert(kind, d);
                }
                gallery
                    .add_entry(GalleryEntry {
                        subject_id: re.subject_id,
                        pose,
                        source_ref: re.source_ref,
                        descriptors,
                    })
                    .map_err(|e| GalleryError::CorruptGallery(e.to_string()))?;
            }
        }
        Ok(gallery)
    }

    /// Writes via a sibling temporary file and a rename.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GalleryError> {
        let path = path.as_ref();
        let io = |source| GalleryError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        std::fs::write(&tmp, self.to_json()).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Gallery, GalleryError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| GalleryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Gallery::from_json_bytes(&bytes)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGallery {
    format_version: u64,
    config_fingerprint: String,
    #[serde(default)]
    partitions: BTreeMap<PoseBucket, Vec<RawEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    subject_id: String,
    #[serde(default)]
    source_ref: String,
    descriptors: BTreeMap<ComponentKind, RawDescriptor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    grid: (usize, usize),
    values: Vec<f64>,
}

impl From<&GalleryEntry> for RawEntry {
    fn from(e: &GalleryEntry) -> Self {
        RawEntry {
            subject_id: e.subject_id.clone(),
            source_ref: e.source_ref.clone(),
            descriptors: e
                .descriptors
                .iter()
                .map(|(&k, d)| {
                    (
                        k,
                        RawDescriptor {
                            grid: d.grid(),
                            values: d.values().to_vec(),
                        },
                    )
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn descriptors_for(pose: PoseBucket, bin: usize) -> BTreeMap<ComponentKind, LbpDescriptor> {
        active_components(pose)
            .into_iter()
            .map(|k| {
                let mut v = vec![0.0; 256];
                v[bin] = 1.0;
                (k, LbpDescriptor::from_values(k, (1, 1), v).unwrap())
            })
            .collect()
    }

    fn entry(subject: &str, pose: PoseBucket) -> GalleryEntry {
        GalleryEntry {
            subject_id: subject.into(),
            pose,
            source_ref: format!("{subject}.png"),
            descriptors: descriptors_for(pose, subject.len()),
        }
    }

    #[test]
    fn partitions() {
        let mut g = Gallery::new("fp");
        assert!(g.partition_for(PoseBucket::Up).is_empty());
        for s in ["a", "b", "c"] {
            g.add_entry(entry(s, PoseBucket::Frontal)).unwrap();
        }
        g.add_entry(entry("d", PoseBucket::Left)).unwrap();
        g.add_entry(entry("e", PoseBucket::Left)).unwrap();
        let frontal: Vec<_> = g
            .partition_for(PoseBucket::Frontal)
            .iter()
            .map(|e| e.subject_id.as_str())
            .collect();
        assert_eq!(frontal, ["a", "b", "c"]);
        assert_eq!(g.partition_for(PoseBucket::Left).len(), 2);
        assert!(g.partition_for(PoseBucket::Up).is_empty());
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn entry_keys_must_match_pose() {
        let mut g = Gallery::new("fp");
        let mut e = entry("a", PoseBucket::Left);
        e.pose = PoseBucket::Frontal;
        assert!(matches!(g.add_entry(e), Err(GalleryError::InvalidEntry(_))));
        assert!(g.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let mut g = Gallery::new("fp");
        g.add_entry(entry("a", PoseBucket::Down)).unwrap();
        g.add_entry(entry("bb", PoseBucket::Right)).unwrap();
        let back = Gallery::from_json_bytes(g.to_json().as_bytes()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_documents() {
        let mut g = Gallery::new("fp");
        g.add_entry(entry("a", PoseBucket::Frontal)).unwrap();
        let text = g.to_json();

        let truncated = &text.as_bytes()[..text.len() / 2];
        assert!(matches!(
            Gallery::from_json_bytes(truncated),
            Err(GalleryError::CorruptGallery(_))
        ));

        let v99 = text.replace("\"format_version\":1", "\"format_version\":99");
        assert!(matches!(
            Gallery::from_json_bytes(v99.as_bytes()),
            Err(GalleryError::UnsupportedVersion(99))
        ));

        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let moved = doc["partitions"]["frontal"].take();
        doc["partitions"]["left"] = moved;
        let wrong_pose = doc.to_string();
        assert!(matches!(
            Gallery::from_json_bytes(wrong_pose.as_bytes()),
            Err(GalleryError::CorruptGallery(_))
        ));

        let bad_hist = text.replacen("1.0", "0.5", 1);
        assert!(matches!(
            Gallery::from_json_bytes(bad_hist.as_bytes()),
            Err(GalleryError::CorruptGallery(_))
        ));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        let mut g = Gallery::new("fp");
        g.add_entry(entry("a", PoseBucket::Up)).unwrap();
        g.save(&path).unwrap();
        assert_eq!(Gallery::load(&path).unwrap(), g);
        assert!(matches!(
            Gallery::load(dir.path().join("missing.json")),
            Err(GalleryError::Io { .. })
        ));
    }
}
