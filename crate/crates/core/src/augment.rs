//! Seeded, on-demand affine augmentation: rotation, shift, shear, zoom and
//! horizontal flip with nearest-pixel fill.
//!
//! Every variant is derived from `(seed, image index, variant index)` alone,
//! so a single variant can be regenerated without producing the ones before
//! it, and a full stream never holds more than one source image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imageproc::Image;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillMode {
    /// Out-of-grid source coordinates clamp to the nearest edge pixel.
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Degrees; angle drawn from `[-r, r]`.
    pub rotation_range: f64,
    /// Fraction of the width.
    pub width_shift_range: f64,
    /// Fraction of the height.
    pub height_shift_range: f64,
    /// Radians of x-shear.
    pub shear_range: f64,
    /// Zoom factor drawn from `[1 - z, 1 + z]`.
    pub zoom_range: f64,
    pub horizontal_flip: bool,
    pub fill_mode: FillMode,
    pub variants_per_image: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            rotation_range: 40.0,
            width_shift_range: 0.2,
            height_shift_range: 0.2,
            shear_range: 0.2,
            zoom_range: 0.2,
            horizontal_flip: true,
            fill_mode: FillMode::Nearest,
            variants_per_image: 10,
        }
    }
}

impl AugmentConfig {
    /// All ranges zero and flipping off: every variant equals its source.
    pub fn identity(variants_per_image: usize) -> Self {
        Self {
            rotation_range: 0.0,
            width_shift_range: 0.0,
            height_shift_range: 0.0,
            shear_range: 0.0,
            zoom_range: 0.0,
            horizontal_flip: false,
            fill_mode: FillMode::Nearest,
            variants_per_image,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("rotation_range", self.rotation_range),
            ("width_shift_range", self.width_shift_range),
            ("height_shift_range", self.height_shift_range),
            ("shear_range", self.shear_range),
            ("zoom_range", self.zoom_range),
        ];
        for (name, v) in ranges {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.zoom_range >= 1.0 {
            return Err(Error::Argument(format!(
                "zoom_range must be below 1, got {}",
                self.zoom_range
            )));
        }
        if self.variants_per_image == 0 {
            return Err(Error::Argument("variants_per_image must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    /// Degrees.
    pub angle: f64,
    /// Pixels.
    pub dx: f64,
    /// Pixels.
    pub dy: f64,
    /// Radians.
    pub shear: f64,
    pub zoom: f64,
    pub flip: bool,
}

impl AugmentParams {
    pub const IDENTITY: Self = Self {
        angle: 0.0,
        dx: 0.0,
        dy: 0.0,
        shear: 0.0,
        zoom: 1.0,
        flip: false,
    };
}

/// ChaCha8 keyed by `seed`, on stream `(image << 32) | variant`.
pub fn variant_rng(seed: u64, image_index: usize, variant_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((image_index as u64) << 32) | (variant_index as u64 & 0xffff_ffff));
    rng
}

/// Draws one parameter set. Six uniforms are always consumed, in the order
/// angle, dx, dy, shear, zoom, flip, whatever the configured ranges.
pub fn sample_params<R: Rng + ?Sized>(cfg: &AugmentConfig, width: usize, height: usize, rng: &mut R) -> AugmentParams {
    let mut symmetric = |r: f64| {
        let u: f64 = rng.gen();
        r * (2.0 * u - 1.0)
    };
    let angle = symmetric(cfg.rotation_range);
    let dx = symmetric(cfg.width_shift_range * width as f64);
    let dy = symmetric(cfg.height_shift_range * height as f64);
    let shear = symmetric(cfg.shear_range);
    let zoom = 1.0 + symmetric(cfg.zoom_range);
    let coin: f64 = rng.gen();
    AugmentParams {
        angle,
        dx,
        dy,
        shear,
        zoom,
        flip: cfg.horizontal_flip && coin < 0.5,
    }
}

/// 2x3 affine map in (x, y) pixel coordinates, y pointing down.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine([[f64; 3]; 2]);

impl Affine {
    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        (
            m[0][0] * x + m[0][1] * y + m[0][2],
            m[1][0] * x + m[1][1] * y + m[1][2],
        )
    }

    fn inverse(&self) -> Affine {
        let [[a, b, tx], [c, d, ty]] = self.0;
        let det = a * d - b * c;
        let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
        Affine([
            [ia, ib, -(ia * tx + ib * ty)],
            [ic, id, -(ic * tx + id * ty)],
        ])
    }
}

/// Forward map `p -> T(d) · T(c) · R · Sh · Z · T(-c) · p`, flip excluded.
fn forward_transform(p: &AugmentParams, width: usize, height: usize) -> Affine {
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let (sin, cos) = p.angle.to_radians().sin_cos();
    let rot = [[cos, sin], [-sin, cos]];
    let sh = p.shear.tan();
    // R · Sh · Z with Sh = [[1, tan s], [0, 1]] and Z = z I
    let lin = [
        [rot[0][0] * p.zoom, (rot[0][0] * sh + rot[0][1]) * p.zoom],
        [rot[1][0] * p.zoom, (rot[1][0] * sh + rot[1][1]) * p.zoom],
    ];
    let tx = cx - (lin[0][0] * cx + lin[0][1] * cy) + p.dx;
    let ty = cy - (lin[1][0] * cx + lin[1][1] * cy) + p.dy;
    Affine([[lin[0][0], lin[0][1], tx], [lin[1][0], lin[1][1], ty]])
}

/// Resamples `img` under the composite transform by inverse mapping with
/// nearest-neighbour lookup. The horizontal mirror is applied last.
pub fn apply_affine(img: &Image, p: &AugmentParams) -> Image {
    if *p == AugmentParams::IDENTITY {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let inv = forward_transform(p, w, h).inverse();
    let mut pixels = Vec::with_capacity(img.pixels().len());
    for y in 0..h {
        for x in 0..w {
            let ux = if p.flip { w - 1 - x } else { x };
            let (sx, sy) = inv.apply(ux as f64, y as f64);
            let sx = nearest(sx, w);
            let sy = nearest(sy, h);
            pixels.extend_from_slice(&img.pixel(sx, sy));
        }
    }
    Image::new(w, h, pixels).expect("dimensions unchanged")
}

fn nearest(v: f64, n: usize) -> usize {
    let r = (v + 0.5).floor();
    if r.is_nan() || r <= 0.0 {
        0
    } else {
        (r as usize).min(n - 1)
    }
}

/// Variant `variant_index` of source image `image_index`.
pub fn augment_variant(img: &Image, cfg: &AugmentConfig, seed: u64, image_index: usize, variant_index: usize) -> Image {
    let mut rng = variant_rng(seed, image_index, variant_index);
    let p = sample_params(cfg, img.width(), img.height(), &mut rng);
    apply_affine(img, &p)
}

/// All variants of one source image, computed in parallel and returned in
/// variant order.
pub fn augment_all_variants(img: &Image, cfg: &AugmentConfig, seed: u64, image_index: usize) -> Vec<Image> {
    (0..cfg.variants_per_image)
        .into_par_iter()
        .map(|v| augment_variant(img, cfg, seed, image_index, v))
        .collect()
}

/// Random-access supply of source images.
pub trait ImageSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn load(&self, index: usize) -> Result<Image>;
}

impl ImageSource for [Image] {
    fn len(&self) -> usize {
        <[Image]>::len(self)
    }

    fn load(&self, index: usize) -> Result<Image> {
        self.get(index)
            .cloned()
            .ok_or_else(|| Error::Argument(format!("no image {index}")))
    }
}

impl ImageSource for Vec<Image> {
    fn len(&self) -> usize {
        <[Image]>::len(self)
    }

    fn load(&self, index: usize) -> Result<Image> {
        self.as_slice().load(index)
    }
}

/// Lazily loads each image through a closure; nothing is decoded until asked.
pub struct FnSource<F> {
    len: usize,
    load: F,
}

impl<F: Fn(usize) -> Result<Image>> FnSource<F> {
    pub fn new(len: usize, load: F) -> Self {
        Self { len, load }
    }
}

impl<F: Fn(usize) -> Result<Image>> ImageSource for FnSource<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn load(&self, index: usize) -> Result<Image> {
        (self.load)(index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub image_index: usize,
    pub variant_index: usize,
    pub image: Image,
}

/// Iterator over every variant of every source image, image-major.
///
/// Only the current source image is resident. Load failures surface as
/// [`Error::Source`] carrying the offending index, after which that image's
/// variants are skipped.
pub struct AugmentStream<'a, S: ?Sized> {
    source: &'a S,
    cfg: AugmentConfig,
    seed: u64,
    position: usize,
    current: Option<(usize, Image)>,
}

pub fn augment_stream<'a, S: ImageSource + ?Sized>(source: &'a S, cfg: &AugmentConfig, seed: u64) -> Result<AugmentStream<'a, S>> {
    cfg.validate()?;
    Ok(AugmentStream {
        source,
        cfg: cfg.clone(),
        seed,
        position: 0,
        current: None,
    })
}

impl<S: ImageSource + ?Sized> AugmentStream<'_, S> {
    fn total(&self) -> usize {
        self.source.len() * self.cfg.variants_per_image
    }
}

impl<S: ImageSource + ?Sized> Iterator for AugmentStream<'_, S> {
    type Item = Result<Augmented>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.position >= self.total() {
            return None;
        }
        let per = self.cfg.variants_per_image;
        let (image_index, variant_index) = (self.position / per, self.position % per);
        if self.current.as_ref().map(|(i, _)| *i) != Some(image_index) {
            match self.source.load(image_index) {
                Ok(img) => self.current = Some((image_index, img)),
                Err(e) => {
                    self.current = None;
                    self.position = (image_index + 1) * per;
                    return Some(Err(Error::Source {
                        index: image_index,
                        source: Box::new(e),
                    }));
                }
            }
        }
        let (_, img) = self.current.as_ref().expect("loaded above");
        let image = augment_variant(img, &self.cfg, self.seed, image_index, variant_index);
        self.position += 1;
        Some(Ok(Augmented {
            image_index,
            variant_index,
            image,
        }))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total() - self.position;
        (0, Some(left))
    }
}
