//! Row-major raster types and 8-bit image file I/O.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel buffer has {actual} values, expected {width}x{height}")]
    DimensionMismatch {
        width: usize,
        height: usize,
        actual: usize,
    },
    #[error("image dimensions must be positive")]
    Empty,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("unsupported pixel format {0}; expected 8-bit gray or color")]
    UnsupportedFormat(String),
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        if pixels.len() != width * height {
            return Err(ImageError::DimensionMismatch {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn to_real(&self) -> RealImage {
        RealImage {
            width: self.width,
            height: self.height,
            values: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }

    /// Copies the rectangle `[x0, x0 + w) x [y0, y0 + h)`.
    ///
    /// Panics if the rectangle is empty or leaves the image.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage {
        assert!(w > 0 && h > 0 && x0 + w <= self.width && y0 + h <= self.height);
        let mut pixels = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x0 + w]);
        }
        GrayImage {
            width: w,
            height: h,
            pixels,
        }
    }

    /// Sets whole rows `[y0, y1)` to zero intensity.
    pub fn zero_rows(&mut self, y0: usize, y1: usize) {
        let y1 = y1.min(self.height);
        if y0 < y1 {
            self.pixels[y0 * self.width..y1 * self.width].fill(0);
        }
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        let buf = ::image::GrayImage::from_raw(
            self.width as u32,
            self.height as u32,
            self.pixels.clone(),
        )
        .expect("buffer length matches dimensions");
        buf.save_with_format(path, ::image::ImageFormat::Png)
            .map_err(|e| match e {
                ::image::ImageError::IoError(source) => ImageError::Io {
                    path: path.display().to_string(),
                    source,
                },
                other => ImageError::Decode(other.to_string()),
            })
    }
}

/// Real-valued raster, row-major. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RealImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        if values.len() != width * height {
            return Err(ImageError::DimensionMismatch {
                width,
                height,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite(i));
        }
        Ok(RealImage {
            width,
            height,
            values,
        })
    }

    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        RealImage {
            width,
            height,
            values,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealImage {
        RealImage {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rounds and saturates to 8 bits.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .values
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }
}

/// Decodes PNG or PGM bytes into an 8-bit grayscale image.
///
/// Color input is reduced to luma with 0.299 R + 0.587 G + 0.114 B.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    use ::image::DynamicImage;

    let decoded =
        ::image::load_from_memory(bytes).map_err(|e| ImageError::Decode(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0], p.0[1], p.0[2]))
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(ImageError::UnsupportedFormat(format!(
                "{:?}",
                other.color()
            )))
        }
    };
    GrayImage::new(width, height, pixels)
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_gray(&bytes)
}

fn luma601(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            GrayImage::new(3, 2, vec![0; 5]),
            Err(ImageError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            GrayImage::new(0, 2, vec![]),
            Err(ImageError::Empty)
        ));
        assert!(matches!(
            RealImage::new(1, 2, vec![0.0, f64::NAN]),
            Err(ImageError::NonFinite(1))
        ));
    }

    #[test]
    fn crop_copies_source_pixels() {
        let img = GrayImage::from_fn(5, 4, |x, y| (10 * y + x) as u8);
        let c = img.crop(1, 2, 3, 2);
        assert_eq!(c.pixels(), &[21, 22, 23, 31, 32, 33]);
    }

    #[test]
    fn pgm_decodes() {
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 2, 3, 4, 255]);
        let img = decode_gray(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.pixels(), &[0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn png_round_trip_and_color_luma() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 30 + y) as u8);
        let path = dir.path().join("a.png");
        img.save_png(&path).unwrap();
        assert_eq!(load_gray(&path).unwrap(), img);

        let rgb = ::image::RgbImage::from_pixel(2, 1, ::image::Rgb([200, 100, 50]));
        let cpath = dir.path().join("c.png");
        rgb.save(&cpath).unwrap();
        let gray = load_gray(&cpath).unwrap();
        // 0.299*200 + 0.587*100 + 0.114*50 = 124.2
        assert_eq!(gray.pixels(), &[124, 124]);
    }

    #[test]
    fn garbage_is_a_decode_error() {
        assert!(matches!(
            decode_gray(b"not an image"),
            Err(ImageError::Decode(_))
        ));
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            load_gray("/nonexistent/x.png"),
            Err(ImageError::Io { .. })
        ));
    }
}
