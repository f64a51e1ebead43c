use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A facial region matched independently of the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Face,
    LeftEye,
    RightEye,
    Nose,
    MouthChin,
    ForeheadEyebrow,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::Face,
        ComponentKind::LeftEye,
        ComponentKind::RightEye,
        ComponentKind::Nose,
        ComponentKind::MouthChin,
        ComponentKind::ForeheadEyebrow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Face => "face",
            ComponentKind::LeftEye => "left_eye",
            ComponentKind::RightEye => "right_eye",
            ComponentKind::Nose => "nose",
            ComponentKind::MouthChin => "mouth_chin",
            ComponentKind::ForeheadEyebrow => "forehead_eyebrow",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Fixed training size `(width, height)` every crop of this kind is
    /// resized to before normalization.
    pub fn target_size(self) -> (usize, usize) {
        match self {
            ComponentKind::Face => (92, 112),
            ComponentKind::LeftEye | ComponentKind::RightEye => (27, 18),
            ComponentKind::Nose => (24, 38),
            ComponentKind::MouthChin => (34, 40),
            ComponentKind::ForeheadEyebrow => (50, 42),
        }
    }

    /// Default LBP histogram grid as `(rows, cols)`.
    pub fn default_grid(self) -> (usize, usize) {
        match self {
            ComponentKind::Face => (8, 8),
            _ => (3, 3),
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComponentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown component `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in ComponentKind::ALL {
            assert_eq!(kind.name().parse::<ComponentKind>().unwrap(), kind);
            assert_eq!(ComponentKind::ALL[kind.index()], kind);
        }
        assert!("eye".parse::<ComponentKind>().is_err());
    }

    #[test]
    fn fixed_sizes() {
        assert_eq!(ComponentKind::Face.target_size(), (92, 112));
        assert_eq!(ComponentKind::LeftEye.target_size(), (27, 18));
        assert_eq!(ComponentKind::RightEye.target_size(), (27, 18));
        assert_eq!(ComponentKind::Nose.target_size(), (24, 38));
        assert_eq!(ComponentKind::MouthChin.target_size(), (34, 40));
        assert_eq!(ComponentKind::ForeheadEyebrow.target_size(), (50, 42));
    }
}
