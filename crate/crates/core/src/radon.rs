//! Discrete Radon projections and Radon barcodes.
//!
//! Pixel centers are placed at `(x - (w-1)/2, y - (h-1)/2)` and each pixel is
//! accumulated into the nearest unit-width bin of `ρ = x cos θ + y sin θ`.
//! Bins span exactly the range of `ρ` over the pixel centers at that angle,
//! so at θ = 0 the raw projection is the list of column sums and at θ = 90°
//! the list of row sums.

use std::f64::consts::PI;

use crate::barcode::{binarize_nonzero_median, Bits};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Projection count and resampled length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadonConfig {
    pub n_angles: usize,
    pub bins: usize,
}

impl RadonConfig {
    pub const DEFAULT_BINS: usize = 128;

    pub fn new(n_angles: usize, bins: usize) -> Self {
        Self { n_angles, bins }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angles == 0 || self.bins == 0 {
            return Err(Error::InvalidParameter(format!(
                "radon config needs n_angles >= 1 and bins >= 1, got {}x{}",
                self.n_angles, self.bins
            )));
        }
        Ok(())
    }

    /// Projection angles `k π / n_angles`.
    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_angles).map(|k| k as f64 * PI / self.n_angles as f64)
    }

    pub fn code_len(&self) -> usize {
        self.n_angles * self.bins
    }
}

/// Raw nearest-bin projection at angle `theta` (radians).
pub fn project(image: &GrayImage, theta: f64) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (sin_t, cos_t) = theta.sin_cos();
    let rho = |x: f64, y: f64| (x - cx) * cos_t + (y - cy) * sin_t;

    let corners = [
        rho(0.0, 0.0),
        rho((w - 1) as f64, 0.0),
        rho(0.0, (h - 1) as f64),
        rho((w - 1) as f64, (h - 1) as f64),
    ];
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let len = (hi - lo).round() as usize + 1;

    let mut out = vec![0.0; len];
    for y in 0..h {
        for x in 0..w {
            let bin = (rho(x as f64, y as f64) - lo).round() as usize;
            out[bin.min(len - 1)] += image.get(x, y);
        }
    }
    out
}

/// Linearly resample `values` to `bins` samples spanning the same range,
/// rescaled so the sample sum equals the sum of `values`.
pub fn resample(values: &[f64], bins: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 || bins == 0 {
        return vec![0.0; bins];
    }
    let mut out: Vec<f64> = (0..bins)
        .map(|k| {
            if n == 1 {
                return values[0];
            }
            let pos = if bins == 1 {
                (n - 1) as f64 / 2.0
            } else {
                k as f64 * (n - 1) as f64 / (bins - 1) as f64
            };
            let i = (pos.floor() as usize).min(n - 2);
            let frac = pos - i as f64;
            values[i] * (1.0 - frac) + values[i + 1] * frac
        })
        .collect();
    let target: f64 = values.iter().sum();
    let current: f64 = out.iter().sum();
    if current != 0.0 && target != 0.0 {
        let scale = target / current;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    out
}

/// All projections at the configured angles, each resampled to `bins`.
pub fn radon_projections(image: &GrayImage, config: &RadonConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    Ok(config
        .angles()
        .map(|theta| resample(&project(image, theta), config.bins))
        .collect())
}

/// Concatenate the non-zero-median fragments of every projection, in angle order.
pub fn radon_bits(image: &GrayImage, config: &RadonConfig) -> Result<Bits> {
    let mut bits = Bits::new();
    for projection in radon_projections(image, config)? {
        bits.extend(binarize_nonzero_median(&projection).iter());
    }
    Ok(bits)
}
