//! The 21 facial feature points and their JSON file format.
//!
//! A landmark file looks like
//!
//! ```json
//! {"image": "s01_c0.png", "width": 160, "height": 200,
//!  "points": {"nose_tip": {"px": 80.0, "py": 110.0, "x": 0.0, "y": -0.01, "z": 0.78}, ...}}
//! ```
//!
//! with every one of the 21 names present exactly once. Pixel coordinates
//! live in the half-open raster `[0, width) x [0, height)`; camera-space
//! coordinates are meters with Z pointing away from the sensor, so `z > 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

macro_rules! face_points {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Identity of one facial feature point.
        ///
        /// "Left" and "right" are the subject's anatomical sides as labeled
        /// by whatever produced the landmark file.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum FacePointId {
            $($variant),*
        }

        impl FacePointId {
            /// All points in canonical order.
            pub const ALL: [FacePointId; 21] = [$(FacePointId::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(FacePointId::$variant => $name),*
                }
            }
        }
    };
}

face_points! {
    MidTopLeftEyebrow => "mid_top_left_eyebrow",
    UnderMidBottomLeftEyelid => "under_mid_bottom_left_eyelid",
    RightOfLeftEyebrow => "right_of_left_eyebrow",
    LeftOfLeftEyebrow => "left_of_left_eyebrow",
    MidTopRightEyebrow => "mid_top_right_eyebrow",
    UnderMidBottomRightEyelid => "under_mid_bottom_right_eyelid",
    RightOfRightEyebrow => "right_of_right_eyebrow",
    LeftOfRightEyebrow => "left_of_right_eyebrow",
    NoseTip => "nose_tip",
    MidpointBetweenEyebrows => "midpoint_between_eyebrows",
    LeftCornerMouth => "left_corner_mouth",
    RightCornerMouth => "right_corner_mouth",
    OutsideLeftCornerMouth => "outside_left_corner_mouth",
    OutsideRightCornerMouth => "outside_right_corner_mouth",
    TopDipUpperLip => "top_dip_upper_lip",
    BottomChin => "bottom_chin",
    TopSkull => "top_skull",
    TopRightForehead => "top_right_forehead",
    MiddleForehead => "middle_forehead",
    MidRightCheek => "mid_right_cheek",
    MidLeftCheek => "mid_left_cheek",
}

impl FacePointId {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FacePointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FacePointId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        FacePointId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(())
    }
}

/// One feature point: pixel position plus camera-space position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Landmark {
    pub px: f64,
    pub py: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Landmark {
    pub fn pixel(&self) -> (f64, f64) {
        (self.px, self.py)
    }

    pub fn camera(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LandmarkError {
    #[error("malformed landmark file: {0}")]
    MalformedJson(String),
    #[error("missing point `{0}`")]
    MissingPoint(String),
    #[error("point `{0}` appears more than once")]
    DuplicatePoint(String),
    #[error("unknown point name `{0}`")]
    UnknownPoint(String),
    #[error("point `{name}` violates {rule}")]
    OutOfRange { name: String, rule: Rule },
}

/// A bound a landmark must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Finite,
    PxNonNegative,
    PxBelowWidth,
    PyNonNegative,
    PyBelowHeight,
    DepthPositive,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Finite => "finite coordinates",
            Rule::PxNonNegative => "px >= 0",
            Rule::PxBelowWidth => "px < width",
            Rule::PyNonNegative => "py >= 0",
            Rule::PyBelowHeight => "py < height",
            Rule::DepthPositive => "z > 0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub point: FacePointId,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.point, self.rule)
    }
}

/// Outcome of [`LandmarkSet::validate`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A complete set of the 21 feature points for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub image_ref: String,
    pub width: u32,
    pub height: u32,
    points: [Landmark; 21],
}

impl LandmarkSet {
    /// Assembles a set from points given in [`FacePointId::ALL`] order.
    /// Bounds are not checked here; see [`LandmarkSet::validate`].
    pub fn new(
        image_ref: impl Into<String>,
        width: u32,
        height: u32,
        points: [Landmark; 21],
    ) -> Self {
        LandmarkSet {
            image_ref: image_ref.into(),
            width,
            height,
            points,
        }
    }

    pub fn get(&self, id: FacePointId) -> &Landmark {
        &self.points[id.index()]
    }

    pub fn get_mut(&mut self, id: FacePointId) -> &mut Landmark {
        &mut self.points[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (FacePointId, &Landmark)> {
        FacePointId::ALL.into_iter().zip(self.points.iter())
    }

    pub fn validate(&self) -> ValidationReport {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let mut violations = Vec::new();
        for (point, lm) in self.iter() {
            let mut fail = |rule| violations.push(Violation { point, rule });
            if ![lm.px, lm.py, lm.x, lm.y, lm.z]
                .iter()
                .all(|v| v.is_finite())
            {
                fail(Rule::Finite);
                continue;
            }
            if lm.px < 0.0 {
                fail(Rule::PxNonNegative);
            }
            if lm.px >= w {
                fail(Rule::PxBelowWidth);
            }
            if lm.py < 0.0 {
                fail(Rule::PyNonNegative);
            }
            if lm.py >= h {
                fail(Rule::PyBelowHeight);
            }
            if lm.z <= 0.0 {
                fail(Rule::DepthPositive);
            }
        }
        ValidationReport { violations }
    }

    /// Parses and validates a landmark file.
    pub fn parse(bytes: &[u8]) -> Result<LandmarkSet, LandmarkError> {
        let raw: RawFile = serde_json::from_slice(bytes)
            .map_err(|e| LandmarkError::MalformedJson(e.to_string()))?;
        if raw.width == 0 || raw.height == 0 {
            return Err(LandmarkError::MalformedJson(
                "width and height must be positive".into(),
            ));
        }
        let mut slots: [Option<Landmark>; 21] = [None; 21];
        for (name, lm) in raw.points.0 {
            let id: FacePointId = name
                .parse()
                .map_err(|_| LandmarkError::UnknownPoint(name.clone()))?;
            if slots[id.index()].replace(lm).is_some() {
                return Err(LandmarkError::DuplicatePoint(name));
            }
        }
        let mut points = [Landmark {
            px: 0.0,
            py: 0.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }; 21];
        for id in FacePointId::ALL {
            points[id.index()] =
                slots[id.index()].ok_or_else(|| LandmarkError::MissingPoint(id.name().into()))?;
        }
        let set = LandmarkSet::new(raw.image, raw.width, raw.height, points);
        if let Some(v) = set.validate().violations.first() {
            return Err(LandmarkError::OutOfRange {
                name: v.point.name().into(),
                rule: v.rule,
            });
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        let points: BTreeMap<&str, &Landmark> =
            self.iter().map(|(id, lm)| (id.name(), lm)).collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "image": self.image_ref,
            "width": self.width,
            "height": self.height,
            "points": points,
        }))
        .expect("landmark values serialize")
    }
}

impl Index<FacePointId> for LandmarkSet {
    type Output = Landmark;

    fn index(&self, id: FacePointId) -> &Landmark {
        self.get(id)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    image: String,
    width: u32,
    height: u32,
    points: RawPoints,
}

/// Map entries in document order, duplicates preserved.
struct RawPoints(Vec<(String, Landmark)>);

impl<'de> Deserialize<'de> for RawPoints {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = RawPoints;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object of named points")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawPoints, A::Error> {
                let mut entries = Vec::with_capacity(21);
                while let Some(entry) = map.next_entry::<String, Landmark>()? {
                    if entries.len() > 64 {
                        return Err(de::Error::custom("too many points"));
                    }
                    entries.push(entry);
                }
                Ok(RawPoints(entries))
            }
        }

        d.deserialize_map(EntriesVisitor)
    }
}
