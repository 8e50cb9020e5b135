//! 8-bit RGB rasters and the fixed per-image preprocessing chain:
//! median filter, luma histogram equalization, bilinear resize, then
//! flattening to `[0, 1]` features.

mod contrast;
mod filter;
mod ppm;
mod resize;

use std::path::Path;

pub use contrast::{equalize_contrast, luma, luma_mapping};
pub use filter::median_filter;
pub use ppm::{decode_ppm, encode_ppm};
pub use resize::resize_bilinear;

use crate::{Error, Result};

/// Row-major, channel-interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::Argument(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, rgb.repeat(width * height))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, pixels)
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

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub(crate) fn channel(&self, x: usize, y: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * 3 + c]
    }
}

/// Flattened image rescaled by 1/255; every value lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PreprocessConfig {
    /// Side of the square output image.
    pub target_size: usize,
    /// 1 means a 3x3 window; 0 disables the filter.
    pub median_radius: usize,
    pub equalize: bool,
}

impl PreprocessConfig {
    pub const MIN_TARGET_SIZE: usize = 8;

    pub fn new(target_size: usize) -> Self {
        Self {
            target_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_size < Self::MIN_TARGET_SIZE {
            return Err(Error::Argument(format!(
                "target size must be at least {}, got {}",
                Self::MIN_TARGET_SIZE,
                self.target_size
            )));
        }
        Ok(())
    }

    /// Length of the feature vectors this configuration produces.
    pub fn feature_dim(&self) -> usize {
        3 * self.target_size * self.target_size
    }
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_size: 64,
            median_radius: 1,
            equalize: true,
        }
    }
}

pub fn to_feature_vector(img: &Image) -> FeatureVector {
    FeatureVector(img.pixels.iter().map(|&v| f64::from(v) / 255.0).collect())
}

/// median filter -> equalize -> resize -> flatten.
pub fn preprocess(img: &Image, cfg: &PreprocessConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let filtered = if cfg.median_radius > 0 {
        median_filter(img, cfg.median_radius)
    } else {
        img.clone()
    };
    let equalized = if cfg.equalize {
        equalize_contrast(&filtered)
    } else {
        filtered
    };
    let resized = resize_bilinear(&equalized, cfg.target_size, cfg.target_size)?;
    Ok(to_feature_vector(&resized))
}

/// Decodes PPM (P6) with the bit-exact decoder and anything else (JPEG, PNG)
/// through the `image` crate.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(b"P6") {
        return decode_ppm(bytes);
    }
    let decoded = image::load_from_memory(bytes)
        .map_err(|e| Error::Format(format!("cannot decode image: {e}")))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    Image::new(w as usize, h as usize, decoded.into_raw())
}

pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_image(&bytes)
}
