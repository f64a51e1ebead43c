//! Illumination correction and size standardization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{GrayImage, RealImage};
use crate::ComponentKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("need 0 < sigma1 < sigma2, got sigma1 = {sigma1}, sigma2 = {sigma2}")]
    InvalidSigmas { sigma1: f64, sigma2: f64 },
    #[error("eps must be finite and >= 0, got {0}")]
    InvalidEps(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    /// Width of the Gaussian that estimates the local mean.
    pub sigma1: f64,
    /// Width of the Gaussian that estimates the local variance.
    pub sigma2: f64,
    pub eps: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            sigma1: 2.0,
            sigma2: 8.0,
            eps: 1e-6,
        }
    }
}

impl PreprocessConfig {
    pub fn check(&self) -> Result<(), PreprocessError> {
        check_params(self.sigma1, self.sigma2, self.eps)
    }
}

fn check_params(sigma1: f64, sigma2: f64, eps: f64) -> Result<(), PreprocessError> {
    // Written so that NaN fails.
    if !(sigma1 > 0.0 && sigma1 < sigma2 && sigma2.is_finite()) {
        return Err(PreprocessError::InvalidSigmas { sigma1, sigma2 });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(PreprocessError::InvalidEps(eps));
    }
    Ok(())
}

/// Unit-sum sampled Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with edge replication.
///
/// Panics if `sigma` is not a positive finite number.
pub fn gaussian_blur(img: &RealImage, sigma: f64) -> RealImage {
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());

    // Accumulated as offsets from the center sample, so a constant
    // neighbourhood reproduces its value exactly.
    let horizontal = RealImage::from_fn(w, h, |x, y| {
        let c = img.get(x, y);
        c + kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * (img.get_clamped(x as isize + i as isize - r, y as isize) - c))
            .sum::<f64>()
    });
    RealImage::from_fn(w, h, |x, y| {
        let c = horizontal.get(x, y);
        c + kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * (horizontal.get_clamped(x as isize, y as isize + i as isize - r) - c))
            .sum::<f64>()
    })
}

/// `(I - mu) / (sigma + eps)` with `mu` the `sigma1` Gaussian mean of `I`
/// and `sigma` the square root of the `sigma2` Gaussian mean of `(I - mu)^2`.
pub fn local_normalize(
    img: &RealImage,
    sigma1: f64,
    sigma2: f64,
    eps: f64,
) -> Result<RealImage, PreprocessError> {
    check_params(sigma1, sigma2, eps)?;
    let mean = gaussian_blur(img, sigma1);
    let centered = RealImage::from_fn(img.width(), img.height(), |x, y| {
        img.get(x, y) - mean.get(x, y)
    });
    let variance = gaussian_blur(&centered.map(|v| v * v), sigma2);
    Ok(RealImage::from_fn(img.width(), img.height(), |x, y| {
        let c = centered.get(x, y);
        // A constant neighbourhood gives exactly zero regardless of eps.
        if c == 0.0 {
            0.0
        } else {
            c / (variance.get(x, y).max(0.0).sqrt() + eps)
        }
    }))
}

pub fn local_normalize_gray(
    img: &GrayImage,
    sigma1: f64,
    sigma2: f64,
    eps: f64,
) -> Result<RealImage, PreprocessError> {
    local_normalize(&img.to_real(), sigma1, sigma2, eps)
}

/// Bilinear resize with corner-aligned sampling: output corners sample the
/// input corners exactly. A target dimension of 1 samples the source center.
pub fn resize_bilinear(img: &RealImage, width: usize, height: usize) -> RealImage {
    assert!(
        width > 0 && height > 0,
        "target dimensions must be positive"
    );
    let (sw, sh) = (img.width(), img.height());
    if (sw, sh) == (width, height) {
        return img.clone();
    }
    let scale = |src: usize, dst: usize| {
        if dst == 1 {
            (0.0, (src - 1) as f64 / 2.0)
        } else {
            ((src - 1) as f64 / (dst - 1) as f64, 0.0)
        }
    };
    let (sx, ox) = scale(sw, width);
    let (sy, oy) = scale(sh, height);
    RealImage::from_fn(width, height, |x, y| {
        let fx = x as f64 * sx + ox;
        let fy = y as f64 * sy + oy;
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(sw - 1), (y0 + 1).min(sh - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let top = img.get(x0, y0) * (1.0 - tx) + img.get(x1, y0) * tx;
        let bottom = img.get(x0, y1) * (1.0 - tx) + img.get(x1, y1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}

pub fn resize_gray(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    resize_bilinear(&img.to_real(), width, height).to_gray()
}

/// Resize to the kind's fixed size, then local normalization.
///
/// The resized image stays real-valued; nothing is requantized.
pub fn preprocess_component(
    roi: &GrayImage,
    kind: ComponentKind,
    cfg: &PreprocessConfig,
) -> Result<RealImage, PreprocessError> {
    let (w, h) = kind.target_size();
    let resized = resize_bilinear(&roi.to_real(), w, h);
    local_normalize(&resized, cfg.sigma1, cfg.sigma2, cfg.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        for sigma in [0.5, 1.0, 2.0, 8.0] {
            let k = gaussian_kernel(sigma);
            assert_eq!(k.len(), 2 * (3.0 * sigma).ceil() as usize + 1);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..k.len() {
                assert_eq!(k[i], k[k.len() - 1 - i]);
            }
        }
    }

    #[test]
    fn blur_keeps_constants() {
        let img = RealImage::filled(9, 7, 42.5);
        for sigma in [0.7, 1.0, 3.0] {
            let out = gaussian_blur(&img, sigma);
            assert!(out.values().iter().all(|&v| v == 42.5));
        }
    }

    #[test]
    fn impulse_spreads_to_unit_mass() {
        let img = RealImage::from_fn(21, 21, |x, y| if (x, y) == (10, 10) { 1.0 } else { 0.0 });
        let out = gaussian_blur(&img, 1.0);
        let total: f64 = out.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let k = gaussian_kernel(1.0);
        assert!((out.get(10, 10) - k[3] * k[3]).abs() < 1e-12);
        assert!((out.get(11, 10) - k[4] * k[3]).abs() < 1e-12);
    }

    #[test]
    fn normalize_constant_is_zero() {
        let img = GrayImage::from_fn(16, 16, |_, _| 77);
        let out = local_normalize_gray(&img, 2.0, 8.0, 1e-6).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_rejects_bad_sigmas() {
        let img = RealImage::filled(4, 4, 1.0);
        for (s1, s2) in [
            (2.0, 2.0),
            (3.0, 2.0),
            (0.0, 1.0),
            (-1.0, 2.0),
            (f64::NAN, 2.0),
        ] {
            assert!(matches!(
                local_normalize(&img, s1, s2, 1e-6),
                Err(PreprocessError::InvalidSigmas { .. })
            ));
        }
        assert_eq!(
            local_normalize(&img, 1.0, 2.0, -1.0),
            Err(PreprocessError::InvalidEps(-1.0))
        );
    }

    #[test]
    fn resize_examples() {
        let img = RealImage::new(2, 2, vec![0.0, 100.0, 0.0, 100.0]).unwrap();
        let out = resize_bilinear(&img, 3, 2);
        assert_eq!(out.values(), &[0.0, 50.0, 100.0, 0.0, 50.0, 100.0]);

        let src = RealImage::from_fn(5, 4, |x, y| (x * 7 + y) as f64);
        assert_eq!(resize_bilinear(&src, 5, 4), src);

        let flat = RealImage::filled(7, 3, 9.0);
        let big = resize_bilinear(&flat, 13, 11);
        assert!(big.values().iter().all(|&v| (v - 9.0).abs() < 1e-12));
        let tiny = resize_bilinear(&flat, 1, 1);
        assert_eq!(tiny.values(), &[9.0]);
    }

    #[test]
    fn component_sizes_after_preprocessing() {
        let roi = GrayImage::from_fn(31, 17, |x, y| ((x * 13 + y * 7) % 251) as u8);
        let cfg = PreprocessConfig::default();
        let face = preprocess_component(&roi, ComponentKind::Face, &cfg).unwrap();
        assert_eq!((face.width(), face.height()), (92, 112));
        let nose = preprocess_component(&roi, ComponentKind::Nose, &cfg).unwrap();
        assert_eq!((nose.width(), nose.height()), (24, 38));

        let flat = GrayImage::from_fn(10, 10, |_, _| 200);
        let z = preprocess_component(&flat, ComponentKind::MouthChin, &cfg).unwrap();
        assert_eq!((z.width(), z.height()), (34, 40));
        assert!(z.values().iter().all(|&v| v == 0.0));
    }
}
