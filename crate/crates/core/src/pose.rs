//! Head pose from 3D landmarks and the five-way pose classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{FacePointId as Pt, LandmarkSet};
use crate::ComponentKind;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("coincident points {first} and {second}")]
pub struct CoincidentPoints {
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

/// Pitch, yaw and roll in degrees, each within [-90, 90].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseAngles {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseBucket {
    Frontal,
    Left,
    Right,
    Up,
    Down,
}

impl PoseBucket {
    pub const ALL: [PoseBucket; 5] = [
        PoseBucket::Frontal,
        PoseBucket::Left,
        PoseBucket::Right,
        PoseBucket::Up,
        PoseBucket::Down,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PoseBucket::Frontal => "frontal",
            PoseBucket::Left => "left",
            PoseBucket::Right => "right",
            PoseBucket::Up => "up",
            PoseBucket::Down => "down",
        }
    }

    /// The one component this pose hides, if any.
    fn excluded(self) -> Option<ComponentKind> {
        match self {
            PoseBucket::Frontal => None,
            PoseBucket::Left => Some(ComponentKind::RightEye),
            PoseBucket::Right => Some(ComponentKind::LeftEye),
            PoseBucket::Up => Some(ComponentKind::ForeheadEyebrow),
            PoseBucket::Down => Some(ComponentKind::MouthChin),
        }
    }

    pub fn is_active(self, kind: ComponentKind) -> bool {
        self.excluded() != Some(kind)
    }
}

impl fmt::Display for PoseBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoseBucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PoseBucket::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown pose bucket `{s}`"))
    }
}

/// Components collected for `bucket`, in [`ComponentKind::ALL`] order.
pub fn active_components(bucket: PoseBucket) -> Vec<ComponentKind> {
    ComponentKind::ALL
        .into_iter()
        .filter(|&k| bucket.is_active(k))
        .collect()
}

/// Signed angle in degrees between the line `p1 - p2` and the plane
/// normal to `axis`: `asin((a1 - a2) / |p1 - p2|)`.
///
/// This is the angle to the axis minus 90 degrees with its sign fixed by
/// point order, so swapping the points negates it.
pub fn signed_axis_angle(p1: [f64; 3], p2: [f64; 3], axis: Axis) -> Option<f64> {
    let d = [p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]];
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let along = match axis {
        Axis::X => d[0],
        Axis::Z => d[2],
    };
    Some((along / norm).clamp(-1.0, 1.0).asin().to_degrees())
}

/// Sign flips for sensors whose axes are mirrored relative to the subject.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoseSigns {
    pub flip_yaw: bool,
    pub flip_pitch: bool,
}

pub fn estimate_pose(ls: &LandmarkSet, signs: PoseSigns) -> Result<PoseAngles, CoincidentPoints> {
    let angle = |a: Pt, b: Pt, axis| {
        signed_axis_angle(ls[a].camera(), ls[b].camera(), axis).ok_or_else(|| CoincidentPoints {
            first: a.name().into(),
            second: b.name().into(),
        })
    };
    let pitch = angle(Pt::MiddleForehead, Pt::BottomChin, Axis::Z)?;
    let roll = angle(Pt::MiddleForehead, Pt::BottomChin, Axis::X)?;
    let yaw = angle(Pt::MidRightCheek, Pt::MidLeftCheek, Axis::Z)?;
    let flip = |v: f64, on: bool| if on { -v } else { v };
    Ok(PoseAngles {
        pitch: flip(pitch, signs.flip_pitch),
        yaw: flip(yaw, signs.flip_yaw),
        roll,
    })
}

/// Classifies a pose. Yaw takes precedence over pitch; both bounds are
/// strict, so an angle equal to the threshold stays frontal.
pub fn bucket_pose(angles: &PoseAngles, threshold: f64) -> PoseBucket {
    let bucket = if angles.yaw > threshold {
        PoseBucket::Right
    } else if angles.yaw < -threshold {
        PoseBucket::Left
    } else if angles.pitch > threshold {
        PoseBucket::Up
    } else if angles.pitch < -threshold {
        PoseBucket::Down
    } else {
        PoseBucket::Frontal
    };
    if bucket == PoseBucket::Frontal && angles.roll.abs() > threshold {
        log::warn!(
            "roll {:.1} exceeds +/-{threshold}; no roll partition exists, classifying as frontal",
            angles.roll
        );
    }
    bucket
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn axis_angle_examples() {
        assert_eq!(
            signed_axis_angle([0.0, 0.1, 1.0], [0.0, -0.1, 1.0], Axis::Z),
            Some(0.0)
        );
        let a = signed_axis_angle([0.05, 0.0, 1.0], [-0.05, 0.0, 1.1], Axis::Z).unwrap();
        assert!(close(a, -45.0), "{a}");
        assert_eq!(
            signed_axis_angle([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], Axis::X),
            None
        );
        let par = signed_axis_angle([0.0, 0.0, 2.0], [0.0, 0.0, 1.0], Axis::Z).unwrap();
        assert!(close(par, 90.0));
    }

    #[test]
    fn bucket_examples() {
        let b = |pitch, yaw, roll| bucket_pose(&PoseAngles { pitch, yaw, roll }, 25.0);
        assert_eq!(b(0.0, 0.0, 0.0), PoseBucket::Frontal);
        assert_eq!(b(0.0, 30.0, 0.0), PoseBucket::Right);
        assert_eq!(b(0.0, -30.0, 0.0), PoseBucket::Left);
        assert_eq!(b(30.0, 0.0, 0.0), PoseBucket::Up);
        assert_eq!(b(-30.0, 0.0, 0.0), PoseBucket::Down);
        assert_eq!(b(30.0, 30.0, 0.0), PoseBucket::Right);
        assert_eq!(b(0.0, 25.0, 0.0), PoseBucket::Frontal);
        assert_eq!(b(0.0, 0.0, 40.0), PoseBucket::Frontal);
    }

    #[test]
    fn active_sets() {
        assert_eq!(
            active_components(PoseBucket::Frontal),
            ComponentKind::ALL.to_vec()
        );
        let without = |k| {
            ComponentKind::ALL
                .into_iter()
                .filter(|&c| c != k)
                .collect::<Vec<_>>()
        };
        assert_eq!(
            active_components(PoseBucket::Left),
            without(ComponentKind::RightEye)
        );
        assert_eq!(
            active_components(PoseBucket::Right),
            without(ComponentKind::LeftEye)
        );
        assert_eq!(
            active_components(PoseBucket::Up),
            without(ComponentKind::ForeheadEyebrow)
        );
        assert_eq!(
            active_components(PoseBucket::Down),
            without(ComponentKind::MouthChin)
        );
    }

    #[test]
    fn bucket_names_round_trip() {
        for b in PoseBucket::ALL {
            assert_eq!(b.name().parse::<PoseBucket>().unwrap(), b);
        }
    }
}
