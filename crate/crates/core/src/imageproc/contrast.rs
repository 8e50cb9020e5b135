use super::Image;

/// BT.601 luma with integer weights, rounded half up.
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

/// Histogram-equalization lookup table for the luma values of `img`.
///
/// `v' = round((cdf(v) - cdf_min) / (N - cdf_min) * 255)`. When a single luma
/// value is occupied the denominator vanishes and the table is the identity.
pub fn luma_mapping(img: &Image) -> [u8; 256] {
    let mut hist = [0u64; 256];
    for px in img.pixels().chunks_exact(3) {
        hist[luma([px[0], px[1], px[2]]) as usize] += 1;
    }
    let n = (img.width() * img.height()) as u64;
    let mut cdf = [0u64; 256];
    let mut running = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        running += h;
        *c = running;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    let mut table = [0u8; 256];
    for (v, slot) in table.iter_mut().enumerate() {
        *slot = if n == cdf_min {
            v as u8
        } else {
            let num = cdf[v].saturating_sub(cdf_min) as f64;
            let mapped = num / (n - cdf_min) as f64 * 255.0;
            (mapped + 0.5).floor().clamp(0.0, 255.0) as u8
        };
    }
    table
}

/// Equalizes luma and carries the change back to RGB as a per-pixel gain
/// `v' / max(v, 1)`, so hue is left alone.
pub fn equalize_contrast(img: &Image) -> Image {
    let table = luma_mapping(img);
    let mut pixels = Vec::with_capacity(img.pixels().len());
    for px in img.pixels().chunks_exact(3) {
        let v = luma([px[0], px[1], px[2]]);
        let gain = f64::from(table[v as usize]) / f64::from(v.max(1));
        for &c in px {
            pixels.push((f64::from(c) * gain + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    Image::new(img.width(), img.height(), pixels).expect("dimensions unchanged")
}
