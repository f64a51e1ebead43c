//! Component regions of interest built from landmark distances.
//!
//! Every box is described by its top-right vertex `P`, a horizontal length
//! `l` and a vertical breadth `b`; it covers `[p_x - l, p_x] x [p_y, p_y + b]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::GrayImage;
use crate::landmarks::{FacePointId as Pt, LandmarkSet};
use crate::ComponentKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate {kind} box (l = {l}, b = {b})")]
    DegenerateBox { kind: ComponentKind, l: f64, b: f64 },
    #[error("box lies entirely outside the image")]
    EmptyIntersection,
}

pub fn euclidean_2d(p1: (f64, f64), p2: (f64, f64)) -> f64 {
    (p1.0 - p2.0).hypot(p1.1 - p2.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub p_x: f64,
    pub p_y: f64,
    pub l: f64,
    pub b: f64,
}

impl BoundingBox {
    /// Vertices in order P, top-left, bottom-left, bottom-right.
    pub fn vertices(&self) -> [(f64, f64); 4] {
        [
            (self.p_x, self.p_y),
            (self.p_x - self.l, self.p_y),
            (self.p_x - self.l, self.p_y + self.b),
            (self.p_x, self.p_y + self.b),
        ]
    }

    pub fn left(&self) -> f64 {
        self.p_x - self.l
    }

    pub fn bottom(&self) -> f64 {
        self.p_y + self.b
    }
}

/// Scale factors for the components whose extent is not a plain landmark
/// distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarginConfig {
    /// Eye breadth as a multiple of the eyebrow-top to lower-eyelid distance.
    pub eye_breadth_scale: f64,
    /// Nose length as a multiple of the cheek-to-cheek distance.
    pub nose_length_scale: f64,
    /// Nose breadth as a multiple of the brow-midpoint to nose-tip distance.
    pub nose_breadth_scale: f64,
    /// Forehead breadth as a multiple of the forehead to brow-midpoint distance.
    pub forehead_breadth_scale: f64,
    /// Fractional padding on each side of the face hull.
    pub face_pad: f64,
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig {
            eye_breadth_scale: 1.5,
            nose_length_scale: 0.5,
            nose_breadth_scale: 1.4,
            forehead_breadth_scale: 2.0,
            face_pad: 0.05,
        }
    }
}

pub fn component_box(
    ls: &LandmarkSet,
    kind: ComponentKind,
    margins: &MarginConfig,
) -> Result<BoundingBox, GeometryError> {
    let px = |id: Pt| ls[id].pixel();
    let dist = |a: Pt, b: Pt| euclidean_2d(px(a), px(b));

    let bbox = match kind {
        ComponentKind::MouthChin => BoundingBox {
            p_x: px(Pt::OutsideRightCornerMouth).0,
            p_y: px(Pt::TopDipUpperLip).1,
            l: dist(Pt::OutsideLeftCornerMouth, Pt::OutsideRightCornerMouth),
            b: dist(Pt::TopDipUpperLip, Pt::BottomChin),
        },
        ComponentKind::LeftEye => BoundingBox {
            p_x: px(Pt::RightOfLeftEyebrow).0,
            p_y: px(Pt::MidTopLeftEyebrow).1,
            l: dist(Pt::LeftOfLeftEyebrow, Pt::RightOfLeftEyebrow),
            b: margins.eye_breadth_scale
                * dist(Pt::MidTopLeftEyebrow, Pt::UnderMidBottomLeftEyelid),
        },
        ComponentKind::RightEye => BoundingBox {
            p_x: px(Pt::RightOfRightEyebrow).0,
            p_y: px(Pt::MidTopRightEyebrow).1,
            l: dist(Pt::LeftOfRightEyebrow, Pt::RightOfRightEyebrow),
            b: margins.eye_breadth_scale
                * dist(Pt::MidTopRightEyebrow, Pt::UnderMidBottomRightEyelid),
        },
        ComponentKind::Nose => {
            let l = margins.nose_length_scale * dist(Pt::MidLeftCheek, Pt::MidRightCheek);
            BoundingBox {
                p_x: px(Pt::NoseTip).0 + l / 2.0,
                p_y: px(Pt::MidpointBetweenEyebrows).1,
                l,
                b: margins.nose_breadth_scale * dist(Pt::MidpointBetweenEyebrows, Pt::NoseTip),
            }
        }
        ComponentKind::ForeheadEyebrow => BoundingBox {
            p_x: px(Pt::RightOfRightEyebrow).0,
            p_y: px(Pt::MiddleForehead).1,
            l: dist(Pt::LeftOfLeftEyebrow, Pt::RightOfRightEyebrow),
            b: margins.forehead_breadth_scale
                * dist(Pt::MiddleForehead, Pt::MidpointBetweenEyebrows),
        },
        ComponentKind::Face => {
            let (min_x, max_x) = ls
                .iter()
                .map(|(_, lm)| lm.px)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
            // The hull's vertical extent is clipped to skull..chin.
            let top = px(Pt::TopSkull).1;
            let bottom = px(Pt::BottomChin).1;
            let (w, h) = (max_x - min_x, bottom - top);
            let (pad_x, pad_y) = (margins.face_pad * w, margins.face_pad * h);
            BoundingBox {
                p_x: max_x + pad_x,
                p_y: top - pad_y,
                l: w + 2.0 * pad_x,
                b: h + 2.0 * pad_y,
            }
        }
    };

    // NaN fails both comparisons, so check positivity directly.
    if !(bbox.l > 0.0 && bbox.b > 0.0) || !bbox.p_x.is_finite() || !bbox.p_y.is_finite() {
        return Err(GeometryError::DegenerateBox {
            kind,
            l: bbox.l,
            b: bbox.b,
        });
    }
    Ok(bbox)
}

/// Integer pixel rectangle `[x0, x1) x [y0, y1)` covered by `bbox` inside a
/// `width x height` raster. Edges are rounded to the nearest integer and the
/// result is at least one pixel in each direction.
pub fn clip_box(
    bbox: &BoundingBox,
    width: usize,
    height: usize,
) -> Result<(usize, usize, usize, usize), GeometryError> {
    let (w, h) = (width as f64, height as f64);
    if bbox.left() >= w || bbox.p_x <= 0.0 || bbox.p_y >= h || bbox.bottom() <= 0.0 {
        return Err(GeometryError::EmptyIntersection);
    }
    let span = |lo: f64, hi: f64, limit: usize| {
        let lo = (lo.round().max(0.0) as usize).min(limit - 1);
        let hi = (hi.round().max(0.0) as usize).min(limit).max(lo + 1);
        (lo, hi)
    };
    let (x0, x1) = span(bbox.left(), bbox.p_x, width);
    let (y0, y1) = span(bbox.p_y, bbox.bottom(), height);
    Ok((x0, y0, x1, y1))
}

/// Copies the part of `img` inside `bbox`.
pub fn extract_roi(img: &GrayImage, bbox: &BoundingBox) -> Result<GrayImage, GeometryError> {
    let (x0, y0, x1, y1) = clip_box(bbox, img.width(), img.height())?;
    Ok(img.crop(x0, y0, x1 - x0, y1 - y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::Landmark;

    fn flat_set(width: u32, height: u32) -> LandmarkSet {
        let points = [Landmark {
            px: 100.0,
            py: 100.0,
            x: 0.0,
            y: 0.0,
            z: 1.0,
        }; 21];
        LandmarkSet::new("t", width, height, points)
    }

    fn place(ls: &mut LandmarkSet, id: Pt, px: f64, py: f64) {
        let lm = ls.get_mut(id);
        lm.px = px;
        lm.py = py;
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_2d((0.0, 0.0), (3.0, 4.0)), 5.0);
        assert_eq!(euclidean_2d((7.0, 9.0), (7.0, 9.0)), 0.0);
        assert_eq!(euclidean_2d((10.0, 20.0), (46.0, 20.0)), 36.0);
    }

    #[test]
    fn mouth_chin_box() {
        let mut ls = flat_set(300, 300);
        place(&mut ls, Pt::OutsideLeftCornerMouth, 100.0, 200.0);
        place(&mut ls, Pt::OutsideRightCornerMouth, 136.0, 200.0);
        place(&mut ls, Pt::TopDipUpperLip, 118.0, 195.0);
        place(&mut ls, Pt::BottomChin, 118.0, 225.0);
        let b = component_box(&ls, ComponentKind::MouthChin, &MarginConfig::default()).unwrap();
        assert_eq!(
            b,
            BoundingBox {
                p_x: 136.0,
                p_y: 195.0,
                l: 36.0,
                b: 30.0
            }
        );
        assert_eq!(
            b.vertices(),
            [
                (136.0, 195.0),
                (100.0, 195.0),
                (100.0, 225.0),
                (136.0, 225.0)
            ]
        );
    }

    #[test]
    fn coincident_l_pair_is_degenerate() {
        // All points coincide in flat_set, so every kind collapses.
        let ls = flat_set(300, 300);
        for kind in ComponentKind::ALL {
            assert!(matches!(
                component_box(&ls, kind, &MarginConfig::default()),
                Err(GeometryError::DegenerateBox { .. })
            ));
        }
    }

    #[test]
    fn face_hull_with_padding() {
        let mut ls = flat_set(300, 300);
        place(&mut ls, Pt::MidLeftCheek, 50.0, 110.0);
        place(&mut ls, Pt::MidRightCheek, 150.0, 110.0);
        place(&mut ls, Pt::TopSkull, 100.0, 40.0);
        place(&mut ls, Pt::BottomChin, 100.0, 180.0);
        let b = component_box(&ls, ComponentKind::Face, &MarginConfig::default()).unwrap();
        assert!((b.left() - 45.0).abs() < 1e-9);
        assert!((b.p_x - 155.0).abs() < 1e-9);
        assert!((b.p_y - 33.0).abs() < 1e-9);
        assert!((b.bottom() - 187.0).abs() < 1e-9);
    }

    #[test]
    fn roi_inside_image() {
        let img = GrayImage::from_fn(100, 100, |x, y| (x + y) as u8);
        let b = BoundingBox {
            p_x: 60.0,
            p_y: 20.0,
            l: 20.0,
            b: 30.0,
        };
        let roi = extract_roi(&img, &b).unwrap();
        assert_eq!((roi.width(), roi.height()), (20, 30));
        assert_eq!(roi.get(0, 0), img.get(40, 20));
        assert_eq!(roi.get(19, 29), img.get(59, 49));
    }

    #[test]
    fn roi_clipped_at_right_edge() {
        let img = GrayImage::from_fn(100, 100, |x, _| x as u8);
        let b = BoundingBox {
            p_x: 110.0,
            p_y: 0.0,
            l: 30.0,
            b: 10.0,
        };
        let roi = extract_roi(&img, &b).unwrap();
        assert_eq!((roi.width(), roi.height()), (20, 10));
        assert_eq!(roi.get(19, 0), 99);
    }

    #[test]
    fn roi_outside_is_empty() {
        let img = GrayImage::from_fn(100, 100, |_, _| 0);
        let b = BoundingBox {
            p_x: 140.0,
            p_y: 0.0,
            l: 20.0,
            b: 10.0,
        };
        assert_eq!(extract_roi(&img, &b), Err(GeometryError::EmptyIntersection));
        let above = BoundingBox {
            p_x: 50.0,
            p_y: -30.0,
            l: 20.0,
            b: 10.0,
        };
        assert_eq!(
            extract_roi(&img, &above),
            Err(GeometryError::EmptyIntersection)
        );
    }

    #[test]
    fn sliver_box_yields_one_pixel() {
        let img = GrayImage::from_fn(10, 10, |x, y| (10 * y + x) as u8);
        let b = BoundingBox {
            p_x: 5.2,
            p_y: 3.1,
            l: 0.3,
            b: 0.2,
        };
        let roi = extract_roi(&img, &b).unwrap();
        assert_eq!((roi.width(), roi.height()), (1, 1));
    }
}
