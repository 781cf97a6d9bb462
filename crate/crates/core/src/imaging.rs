//! Image loading and size normalization.
//!
//! Everything downstream works on [`GrayImage`]: a row-major grid of `f64`
//! intensities in `[0, 1]`. Binary PGM (`P5`) is parsed directly so that
//! arbitrary `maxval` scaling is exact; PNG goes through the `image` crate.

use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};

/// Luma weights applied to RGB inputs.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Default normalized side length.
pub const DEFAULT_SIDE: usize = 32;

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Build an image from row-major pixels. Fails on zero dimensions, a
    /// length mismatch, or intensities outside `[0, 1]`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::InvalidParameter(format!(
                "intensity {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Build an image by evaluating `f(x, y)` at every pixel, clamping into `[0, 1]`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                pixels.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Self {
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

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }
}

/// Load a PGM (`P5`) or PNG file as a [`GrayImage`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decode an in-memory PGM or PNG, dispatching on the leading magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else {
        let head: String = bytes
            .iter()
            .take(4)
            .map(|b| if b.is_ascii_graphic() { *b as char } else { '.' })
            .collect();
        Err(Error::UnsupportedFormat(format!(
            "unrecognized header {head:?} (expected PGM P5 or PNG)"
        )))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in header.iter_mut() {
        // whitespace and '#' comments may separate header fields
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Decode("truncated PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode("bad PGM header number".into()))?;
    }
    let [width, height, maxval] = header;
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Decode("missing whitespace after PGM maxval".into()));
    }
    pos += 1;
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Decode(format!("PGM maxval {maxval} out of range")));
    }
    let n = width * height;
    let wide = maxval > 255;
    let need = if wide { 2 * n } else { n };
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Decode("truncated PGM raster".into()))?;
    let scale = maxval as f64;
    let pixels = if wide {
        data.chunks_exact(2)
            .map(|c| (u16::from_be_bytes([c[0], c[1]]) as f64 / scale).min(1.0))
            .collect()
    } else {
        data.iter().map(|&b| (b as f64 / scale).min(1.0)).collect()
    };
    GrayImage::new(width, height, pixels)
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let luma = |r: f64, g: f64, b: f64| {
        LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    };
    let pixels: Vec<f64> = match &img {
        DynamicImage::ImageLuma8(g) => g.as_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(_) => img
            .to_luma8()
            .as_raw()
            .iter()
            .map(|&v| v as f64 / 255.0)
            .collect(),
        DynamicImage::ImageLuma16(g) => g
            .as_raw()
            .iter()
            .map(|&v| v as f64 / 65535.0)
            .collect(),
        DynamicImage::ImageLumaA16(_) => img
            .to_luma16()
            .as_raw()
            .iter()
            .map(|&v| v as f64 / 65535.0)
            .collect(),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .as_raw()
            .chunks_exact(3)
            .map(|c| luma(c[0] as f64, c[1] as f64, c[2] as f64) / 65535.0)
            .collect(),
        _ => img
            .to_rgb8()
            .as_raw()
            .chunks_exact(3)
            .map(|c| luma(c[0] as f64 / 255.0, c[1] as f64 / 255.0, c[2] as f64 / 255.0))
            .collect(),
    };
    let pixels = pixels.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    GrayImage::new(width, height, pixels)
}

/// Resize to `rows × cols` with bilinear interpolation (pixel-center
/// aligned). Both sides must be powers of two. Images already at the target
/// size are returned unchanged.
pub fn normalize(image: &GrayImage, rows: usize, cols: usize) -> Result<GrayImage> {
    for side in [rows, cols] {
        if !side.is_power_of_two() || side < 2 {
            return Err(Error::NotPowerOfTwo(side));
        }
    }
    if image.width == cols && image.height == rows {
        return Ok(image.clone());
    }
    let sx = image.width as f64 / cols as f64;
    let sy = image.height as f64 / rows as f64;
    let max_x = (image.width - 1) as f64;
    let max_y = (image.height - 1) as f64;
    let mut pixels = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(image.height - 1);
        let wy = fy - y0 as f64;
        for x in 0..cols {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(image.width - 1);
            let wx = fx - x0 as f64;
            let top = image.get(x0, y0) * (1.0 - wx) + image.get(x1, y0) * wx;
            let bottom = image.get(x0, y1) * (1.0 - wx) + image.get(x1, y1) * wx;
            let v = top * (1.0 - wy) + bottom * wy;
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    Ok(GrayImage {
        width: cols,
        height: rows,
        pixels,
    })
}

/// Encode an image as binary PGM with 8-bit depth.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.pixels.iter().map(|p| (p * 255.0).round() as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(width: usize, height: usize, maxval: usize, data: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
        v.extend_from_slice(data);
        v
    }

    #[test]
    fn pgm_scales_by_maxval() {
        let img = decode_image(&pgm(2, 2, 255, &[0, 255, 255, 0])).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0, 1.0, 0.0]);

        let img = decode_image(&pgm(2, 1, 100, &[50, 100])).unwrap();
        assert_eq!(img.pixels(), &[0.5, 1.0]);
    }

    #[test]
    fn pgm_with_comment_and_16_bit() {
        let mut bytes = b"P5\n# scanner output\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x00, 0x00]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.pixels(), &[1.0, 0.0]);
    }

    #[test]
    fn truncated_pgm_is_rejected() {
        assert!(matches!(
            decode_image(&pgm(4, 4, 255, &[1, 2, 3])),
            Err(Error::Decode(_))
        ));
        assert!(matches!(
            decode_image(&pgm(0, 4, 255, &[])),
            Err(Error::EmptyImage)
        ));
    }

    #[test]
    fn red_png_pixel_uses_luma() {
        let mut buf = Vec::new();
        let rgb = image::RgbImage::from_raw(3, 1, vec![255, 0, 0, 0, 255, 0, 0, 0, 255]).unwrap();
        rgb.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        let img = decode_image(&buf).unwrap();
        assert_eq!((img.width(), img.height()), (3, 1));
        assert!((img.pixels()[0] - 0.299).abs() < 1e-12);
        assert!((img.pixels()[1] - 0.587).abs() < 1e-12);
        assert!((img.pixels()[2] - 0.114).abs() < 1e-12);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_image("/definitely/not/here.pgm").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!(matches!(
            decode_image(b"GIF89a..."),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn normalize_identity_is_bit_exact() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x * 31 + y * 17) % 101) as f64 / 100.0);
        assert_eq!(normalize(&img, 32, 32).unwrap(), img);
    }

    #[test]
    fn normalize_constant_stays_constant() {
        for (w, h) in [(7, 13), (64, 64), (3, 100), (1, 1)] {
            let img = GrayImage::from_fn(w, h, |_, _| 0.7);
            let out = normalize(&img, 32, 32).unwrap();
            assert_eq!((out.width(), out.height()), (32, 32));
            assert!(out.pixels().iter().all(|p| (p - 0.7).abs() < 1e-12));
        }
    }

    #[test]
    fn normalize_checkerboard_preserves_mean() {
        let img = GrayImage::from_fn(64, 64, |x, y| ((x + y) % 2) as f64);
        let out = normalize(&img, 32, 32).unwrap();
        // brute-force mean of both grids
        let mut acc_in = 0.0;
        for y in 0..64 {
            for x in 0..64 {
                acc_in += img.get(x, y);
            }
        }
        let mut acc_out = 0.0;
        for y in 0..32 {
            for x in 0..32 {
                acc_out += out.get(x, y);
            }
        }
        assert!((acc_in / 4096.0 - acc_out / 1024.0).abs() < 1e-6);
    }

    #[test]
    fn normalize_rejects_bad_sides() {
        let img = GrayImage::from_fn(8, 8, |_, _| 0.5);
        assert!(matches!(normalize(&img, 30, 30), Err(Error::NotPowerOfTwo(30))));
        assert!(matches!(normalize(&img, 0, 0), Err(Error::NotPowerOfTwo(0))));
    }

    #[test]
    fn new_rejects_out_of_range() {
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(matches!(GrayImage::new(0, 1, vec![]), Err(Error::EmptyImage)));
    }

    #[test]
    fn pgm_roundtrip_through_encoder() {
        let img = GrayImage::from_fn(5, 3, |x, y| ((x + 5 * y) * 17 % 256) as f64 / 255.0);
        let back = decode_image(&encode_pgm(&img)).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
