#![allow(dead_code)]

use std::collections::BTreeMap;

use facekit::gallery::{Gallery, GalleryEntry};
use facekit::image::{GrayImage, RealImage};
use facekit::lbp::{LbpDescriptor, BINS};
use facekit::pose::active_components;
use facekit::synth::{render, CaptureParams, Subject};
use facekit::{ComponentKind, Config, LandmarkSet, PoseBucket};
use rand::Rng;

pub fn random_real(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> RealImage {
    RealImage::from_fn(w, h, |_, _| rng.gen_range(lo..hi))
}

pub fn random_gray(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen())
}

/// Random normalized histograms, one 256-bin slice per region.
pub fn random_descriptor(
    rng: &mut impl Rng,
    kind: ComponentKind,
    grid: (usize, usize),
) -> LbpDescriptor {
    let mut values = Vec::with_capacity(grid.0 * grid.1 * BINS);
    for _ in 0..grid.0 * grid.1 {
        let raw: Vec<f64> = (0..BINS)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        values.extend(raw.iter().map(|v| v / total));
    }
    LbpDescriptor::from_values(kind, grid, values).unwrap()
}

pub fn random_entry(
    rng: &mut impl Rng,
    cfg: &Config,
    subject: &str,
    pose: PoseBucket,
) -> GalleryEntry {
    let descriptors: BTreeMap<ComponentKind, LbpDescriptor> = active_components(pose)
        .into_iter()
        .map(|k| (k, random_descriptor(rng, k, cfg.grid(k))))
        .collect();
    GalleryEntry {
        subject_id: subject.to_string(),
        pose,
        source_ref: format!("{subject}-{}.png", rng.gen::<u32>()),
        descriptors,
    }
}

pub fn random_gallery(rng: &mut impl Rng, cfg: &Config, entries: usize) -> Gallery {
    let mut g = Gallery::for_config(cfg);
    for _ in 0..entries {
        let pose = PoseBucket::ALL[rng.gen_range(0..5)];
        let subject = format!("s{}", rng.gen_range(0..8));
        g.add_entry(random_entry(rng, cfg, &subject, pose)).unwrap();
    }
    g
}

/// Synthetic capture of subject `subject_seed` under nuisance `capture_seed`.
pub fn capture(subject_seed: u64, capture_seed: u64, yaw: Option<f64>) -> (GrayImage, LandmarkSet) {
    let mut params = CaptureParams::random(capture_seed);
    if let Some(yaw) = yaw {
        params = params.with_pose(yaw, 0.0);
    }
    render(
        &Subject::new(subject_seed),
        &params,
        &format!("s{subject_seed}-c{capture_seed}.png"),
    )
}
