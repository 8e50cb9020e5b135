use super::Image;
use crate::{Error, Result};

/// Bilinear resampling with pixel-center alignment.
///
/// Output pixel `i` samples source coordinate `(i + 0.5) * src/dst - 0.5`,
/// clamped to the source grid; blended channels are rounded half up.
pub fn resize_bilinear(img: &Image, width: usize, height: usize) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::Argument(format!(
            "resize target must be positive, got {width}x{height}"
        )));
    }
    let xs = axis_samples(img.width(), width);
    let ys = axis_samples(img.height(), height);
    let mut pixels = Vec::with_capacity(width * height * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let p00 = f64::from(img.channel(x0, y0, c));
                let p01 = f64::from(img.channel(x1, y0, c));
                let p10 = f64::from(img.channel(x0, y1, c));
                let p11 = f64::from(img.channel(x1, y1, c));
                let top = (1.0 - fx) * p00 + fx * p01;
                let bottom = (1.0 - fx) * p10 + fx * p11;
                let v = (1.0 - fy) * top + fy * bottom;
                pixels.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(width, height, pixels)
}

/// Per output index: the two neighbouring source indices and the weight of the second.
fn axis_samples(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}
