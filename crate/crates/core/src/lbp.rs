//! 3x3 local binary patterns and regional histogram descriptors.
//!
//! Bit `n` of a code is set when neighbor `n` is greater than or equal to
//! the center. Neighbors are numbered clockwise starting at the top-left:
//!
//! ```text
//! 0 1 2
//! 7 c 3
//! 6 5 4
//! ```

use thiserror::Error;

use crate::image::{GrayImage, RealImage};
use crate::ComponentKind;

pub const BINS: usize = 256;

/// Tag identifying the neighbor order above; part of the gallery fingerprint.
pub const NEIGHBOR_ORDER_TAG: &str = "lbp8r1-tl-clockwise-ge";

/// `(dx, dy)` of neighbor `n` relative to the center.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LbpError {
    #[error("image is {width}x{height}; LBP needs at least 3x3")]
    TooSmall { width: usize, height: usize },
    #[error("grid {rows}x{cols} does not fit a {width}x{height} code image")]
    BadGrid {
        rows: usize,
        cols: usize,
        width: usize,
        height: usize,
    },
    #[error("descriptor has {actual} values, expected {expected}")]
    BadLength { expected: usize, actual: usize },
    #[error("histogram slice {region} is not a normalized histogram")]
    BadSlice { region: usize },
}

/// Code of a 3x3 patch given row-major, center at index 4.
pub fn lbp_code(patch: &[f64; 9]) -> u8 {
    let center = patch[4];
    NEIGHBOR_OFFSETS
        .iter()
        .enumerate()
        .fold(0u8, |code, (n, &(dx, dy))| {
            let v = patch[((1 + dy) * 3 + (1 + dx)) as usize];
            if v >= center {
                code | (1 << n)
            } else {
                code
            }
        })
}

/// LBP codes of all interior pixels; the output is two pixels smaller in
/// each dimension.
pub fn lbp_image(img: &RealImage) -> Result<GrayImage, LbpError> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(LbpError::TooSmall {
            width: w,
            height: h,
        });
    }
    Ok(GrayImage::from_fn(w - 2, h - 2, |x, y| {
        let (cx, cy) = (x + 1, y + 1);
        let center = img.get(cx, cy);
        NEIGHBOR_OFFSETS
            .iter()
            .enumerate()
            .fold(0u8, |code, (n, &(dx, dy))| {
                let v = img.get((cx as isize + dx) as usize, (cy as isize + dy) as usize);
                if v >= center {
                    code | (1 << n)
                } else {
                    code
                }
            })
    }))
}

/// Start offsets of `parts` near-equal spans over `len`; the last span
/// absorbs the remainder.
fn spans(len: usize, parts: usize) -> impl Iterator<Item = (usize, usize)> {
    let base = len / parts;
    (0..parts).map(move |i| {
        let start = i * base;
        let end = if i + 1 == parts { len } else { start + base };
        (start, end)
    })
}

/// Concatenated per-region histograms of an LBP code image.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpDescriptor {
    kind: ComponentKind,
    grid: (usize, usize),
    values: Vec<f64>,
}

impl LbpDescriptor {
    /// Builds a descriptor from stored values, checking the length and that
    /// each 256-bin slice is non-negative and sums to 1 (or is all zero).
    pub fn from_values(
        kind: ComponentKind,
        grid: (usize, usize),
        values: Vec<f64>,
    ) -> Result<Self, LbpError> {
        let expected = grid.0 * grid.1 * BINS;
        if grid.0 == 0 || grid.1 == 0 || values.len() != expected {
            return Err(LbpError::BadLength {
                expected,
                actual: values.len(),
            });
        }
        for (region, slice) in values.chunks(BINS).enumerate() {
            let ok_entries = slice
                .iter()
                .all(|v| v.is_finite() && (0.0..=1.0).contains(v));
            let sum: f64 = slice.iter().sum();
            if !ok_entries || !((sum - 1.0).abs() <= 1e-9 || sum == 0.0) {
                return Err(LbpError::BadSlice { region });
            }
        }
        Ok(LbpDescriptor { kind, grid, values })
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    /// `(rows, cols)`.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn region(&self, row: usize, col: usize) -> &[f64] {
        let i = row * self.grid.1 + col;
        &self.values[i * BINS..(i + 1) * BINS]
    }
}

/// Splits `codes` into a `rows x cols` grid and concatenates each region's
/// normalized 256-bin histogram in row-major region order.
pub fn descriptor(
    codes: &GrayImage,
    kind: ComponentKind,
    grid: (usize, usize),
) -> Result<LbpDescriptor, LbpError> {
    let (rows, cols) = grid;
    let (w, h) = (codes.width(), codes.height());
    if rows == 0 || cols == 0 || rows > h || cols > w {
        return Err(LbpError::BadGrid {
            rows,
            cols,
            width: w,
            height: h,
        });
    }
    let mut values = vec![0.0; rows * cols * BINS];
    let mut counts = [0u32; BINS];
    for (r, (y0, y1)) in spans(h, rows).enumerate() {
        for (c, (x0, x1)) in spans(w, cols).enumerate() {
            counts.fill(0);
            for y in y0..y1 {
                for &code in &codes.pixels()[y * w + x0..y * w + x1] {
                    counts[code as usize] += 1;
                }
            }
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            let offset = (r * cols + c) * BINS;
            for (dst, &count) in values[offset..offset + BINS].iter_mut().zip(&counts) {
                *dst = f64::from(count) / n;
            }
        }
    }
    Ok(LbpDescriptor { kind, grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds a patch from a center and neighbors listed in bit order.
    fn patch(center: f64, n: [f64; 8]) -> [f64; 9] {
        [n[0], n[1], n[2], n[7], center, n[3], n[6], n[5], n[4]]
    }

    #[test]
    fn code_examples() {
        assert_eq!(lbp_code(&[3.0; 9]), 255);
        assert_eq!(
            lbp_code(&patch(9.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])),
            0
        );
        assert_eq!(
            lbp_code(&patch(5.0, [6.0, 5.0, 2.0, 1.0, 7.0, 3.0, 5.0, 8.0])),
            211
        );
        // Only the top-left neighbor reaches the center.
        assert_eq!(
            lbp_code(&patch(5.0, [5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])),
            1
        );
        // Only the left neighbor: highest bit.
        assert_eq!(
            lbp_code(&patch(5.0, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 9.0])),
            128
        );
    }

    #[test]
    fn image_shapes() {
        let img = RealImage::from_fn(3, 3, |x, y| (x + 3 * y) as f64);
        let codes = lbp_image(&img).unwrap();
        assert_eq!((codes.width(), codes.height()), (1, 1));
        let mut p = [0.0; 9];
        p.copy_from_slice(img.values());
        assert_eq!(codes.get(0, 0), lbp_code(&p));

        let flat = lbp_image(&RealImage::filled(6, 5, 1.5)).unwrap();
        assert_eq!((flat.width(), flat.height()), (4, 3));
        assert!(flat.pixels().iter().all(|&c| c == 255));

        assert_eq!(
            lbp_image(&RealImage::filled(2, 9, 0.0)),
            Err(LbpError::TooSmall {
                width: 2,
                height: 9
            })
        );
    }

    #[test]
    fn single_region_is_global_histogram() {
        let codes = GrayImage::new(3, 2, vec![1, 1, 2, 7, 7, 7]).unwrap();
        let d = descriptor(&codes, ComponentKind::Nose, (1, 1)).unwrap();
        assert_eq!(d.values().len(), 256);
        assert_eq!(d.values()[1], 2.0 / 6.0);
        assert_eq!(d.values()[2], 1.0 / 6.0);
        assert_eq!(d.values()[7], 3.0 / 6.0);
    }

    #[test]
    fn four_by_four_with_two_by_two_grid() {
        #[rustfmt::skip]
        let codes = GrayImage::new(4, 4, vec![
            0, 0, 9, 8,
            0, 1, 9, 9,
            5, 5, 3, 3,
            5, 6, 3, 255,
        ]).unwrap();
        let d = descriptor(&codes, ComponentKind::Face, (2, 2)).unwrap();
        assert_eq!(d.region(0, 0)[0], 0.75);
        assert_eq!(d.region(0, 0)[1], 0.25);
        assert_eq!(d.region(0, 1)[9], 0.75);
        assert_eq!(d.region(0, 1)[8], 0.25);
        assert_eq!(d.region(1, 0)[5], 0.75);
        assert_eq!(d.region(1, 0)[6], 0.25);
        assert_eq!(d.region(1, 1)[3], 0.75);
        assert_eq!(d.region(1, 1)[255], 0.25);
    }

    #[test]
    fn remainder_goes_to_last_region() {
        let codes = GrayImage::from_fn(5, 1, |x, _| x as u8);
        let d = descriptor(&codes, ComponentKind::Nose, (1, 2)).unwrap();
        // Regions cover x in [0, 2) and [2, 5).
        assert_eq!(d.region(0, 0)[0], 0.5);
        assert_eq!(d.region(0, 0)[1], 0.5);
        assert_eq!(d.region(0, 1)[2], 1.0 / 3.0);
        assert_eq!(d.region(0, 1)[4], 1.0 / 3.0);
    }

    #[test]
    fn bad_grids() {
        let codes = GrayImage::from_fn(4, 3, |_, _| 0);
        for grid in [(0, 1), (1, 0), (4, 1), (1, 5)] {
            assert!(matches!(
                descriptor(&codes, ComponentKind::Face, grid),
                Err(LbpError::BadGrid { .. })
            ));
        }
    }

    #[test]
    fn from_values_checks_slices() {
        let mut v = vec![0.0; 512];
        v[0] = 1.0;
        assert!(LbpDescriptor::from_values(ComponentKind::Nose, (1, 2), v.clone()).is_ok());
        assert!(matches!(
            LbpDescriptor::from_values(ComponentKind::Nose, (1, 1), v.clone()),
            Err(LbpError::BadLength { .. })
        ));
        v[300] = 0.5;
        assert_eq!(
            LbpDescriptor::from_values(ComponentKind::Nose, (1, 2), v),
            Err(LbpError::BadSlice { region: 1 })
        );
    }
}
