//! Binary portable pixmap (P6) with maxval 255.

use super::Image;
use crate::{Error, Result};

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image> {
    if !bytes.starts_with(b"P6") {
        return Err(Error::Format("missing P6 magic".into()));
    }
    let mut pos = 2;
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(Error::Format("no whitespace after maxval".into())),
        None => return Err(Error::Truncated("header ends before the raster".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::Unsupported(format!("maxval {maxval}, only 255 is supported")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| Error::Format(format!("dimensions {width}x{height} overflow")))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::Truncated(format!(
            "raster has {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after the raster",
            payload.len() - expected
        )));
    }
    Image::new(width, height, payload.to_vec())
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    // whitespace and '#' comments may precede each header field
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return match bytes.get(*pos) {
            None => Err(Error::Truncated(format!("header ends before {what}"))),
            Some(_) => Err(Error::Format(format!("expected {what}"))),
        };
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("{what} out of range")))
}
