//! Complex Gabor kernels, filter banks and "same"-size convolution.
//!
//! A kernel sample at integer offset `(x, y)` from the window center is
//!
//! ```text
//! G(x, y) = f² / (π γ η) · exp(-(x'² + γ y'²) / (2σ²)) · exp(j (2π f x' + φ))
//! x' =  x cos θ + y sin θ
//! y' = -x sin θ + y cos θ
//! ```
//!
//! where `x` runs along columns and `y` along rows.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Parameters of a single Gabor kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Modulation frequency in cycles per pixel.
    pub frequency: f64,
    /// Orientation of the normal to the stripes, radians.
    pub theta: f64,
    /// Phase offset, radians.
    pub phi: f64,
    /// Standard deviation of the Gaussian envelope, pixels.
    pub sigma: f64,
    /// Spatial aspect ratio.
    pub gamma: f64,
    /// Aspect parameter in the amplitude normalization.
    pub eta_aspect: f64,
    /// Window rows (odd).
    pub rows: usize,
    /// Window columns (odd).
    pub cols: usize,
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("frequency", self.frequency),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("eta_aspect", self.eta_aspect),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !self.theta.is_finite() || !self.phi.is_finite() {
            return Err(Error::InvalidParameter("theta and phi must be finite".into()));
        }
        if self.rows.is_multiple_of(2) || self.cols.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window {}x{} must have odd sides",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Complex filter window, row-major, centered at `(rows / 2, cols / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl GaborKernel {
    /// Wrap raw window values. Sides must be odd.
    pub fn from_values(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self> {
        if rows.is_multiple_of(2) || cols.is_multiple_of(2) || values.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "kernel {rows}x{cols} with {} values",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Half-widths `(row_radius, col_radius)`.
    pub fn radius(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }

    /// Value at signed offset `(x, y)` from the center (`x` column, `y` row).
    pub fn at(&self, x: isize, y: isize) -> Complex64 {
        let (ry, rx) = self.radius();
        let row = (y + ry as isize) as usize;
        let col = (x + rx as isize) as usize;
        self.values[row * self.cols + col]
    }
}

/// Sample the kernel formula above over the integer window described by `params`.
pub fn make_kernel(params: &GaborParams) -> Result<GaborKernel> {
    params.validate()?;
    let GaborParams {
        frequency: f,
        theta,
        phi,
        sigma,
        gamma,
        eta_aspect,
        rows,
        cols,
    } = *params;
    let (sin_t, cos_t) = theta.sin_cos();
    let amplitude = f * f / (PI * gamma * eta_aspect);
    let two_sigma_sq = 2.0 * sigma * sigma;
    let (ry, rx) = ((rows / 2) as isize, (cols / 2) as isize);

    let mut values = Vec::with_capacity(rows * cols);
    for y in -ry..=ry {
        for x in -rx..=rx {
            let (xf, yf) = (x as f64, y as f64);
            let xr = xf * cos_t + yf * sin_t;
            let yr = -xf * sin_t + yf * cos_t;
            let envelope = (-(xr * xr + gamma * yr * yr) / two_sigma_sq).exp();
            let carrier = Complex64::from_polar(1.0, 2.0 * PI * f * xr + phi);
            values.push(carrier * (amplitude * envelope));
        }
    }
    Ok(GaborKernel { rows, cols, values })
}

/// Configuration of a `GFB(u, v, s, t)` filter bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborBankConfig {
    /// Number of scales.
    pub scales: usize,
    /// Number of orientations.
    pub orientations: usize,
    /// Window rows `s`.
    pub rows: usize,
    /// Window columns `t`.
    pub cols: usize,
    /// Frequency of the finest scale, cycles per pixel.
    pub f_max: f64,
    /// Product `σ · f` shared by all scales.
    pub sigma_f: f64,
    pub gamma: f64,
    pub eta_aspect: f64,
    pub phi: f64,
}

impl GaborBankConfig {
    pub const DEFAULT_F_MAX: f64 = 0.25;
    pub const DEFAULT_SIGMA_F: f64 = 0.56;

    /// A bank with the default shared parameters.
    pub fn new(scales: usize, orientations: usize, rows: usize, cols: usize) -> Self {
        Self {
            scales,
            orientations,
            rows,
            cols,
            f_max: Self::DEFAULT_F_MAX,
            sigma_f: Self::DEFAULT_SIGMA_F,
            gamma: 1.0,
            eta_aspect: 1.0,
            phi: 0.0,
        }
    }

    /// Number of filters `u × v`.
    pub fn len(&self) -> usize {
        self.scales * self.orientations
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequency of scale `a`: `f_max / √2^a`.
    pub fn frequency(&self, scale: usize) -> f64 {
        self.f_max / SQRT_2.powi(scale as i32)
    }

    /// Orientation of index `b`: `b π / v`.
    pub fn theta(&self, orientation: usize) -> f64 {
        orientation as f64 * PI / self.orientations as f64
    }

    /// Parameters of the kernel at bank position `scale * v + orientation`.
    pub fn params(&self, scale: usize, orientation: usize) -> GaborParams {
        let frequency = self.frequency(scale);
        GaborParams {
            frequency,
            theta: self.theta(orientation),
            phi: self.phi,
            sigma: self.sigma_f / frequency,
            gamma: self.gamma,
            eta_aspect: self.eta_aspect,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.orientations == 0 {
            return Err(Error::InvalidParameter(format!(
                "bank needs u >= 1 and v >= 1, got u={} v={}",
                self.scales, self.orientations
            )));
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0)
            || !(self.sigma_f.is_finite() && self.sigma_f > 0.0)
        {
            return Err(Error::InvalidParameter(
                "f_max and sigma_f must be positive".into(),
            ));
        }
        self.params(0, 0).validate()
    }
}

/// Build all `u × v` kernels, scale-major (`index = a · v + b`).
pub fn make_bank(config: &GaborBankConfig) -> Result<Vec<GaborKernel>> {
    config.validate()?;
    let mut bank = Vec::with_capacity(config.len());
    for a in 0..config.scales {
        for b in 0..config.orientations {
            bank.push(make_kernel(&config.params(a, b))?);
        }
    }
    Ok(bank)
}

/// Complex filter response with the dimensions of the filtered image.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Complex64>,
}

impl ResponseMap {
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.values[y * self.width + x]
    }
}

/// Real-valued 2-D map (magnitudes, projections reshaped, ...), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl RealMap {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Response at a single output pixel with zero padding outside the image.
#[inline]
fn response_at(image: &GrayImage, kernel: &GaborKernel, x: usize, y: usize) -> Complex64 {
    let (w, h) = (image.width() as isize, image.height() as isize);
    let (ry, rx) = kernel.radius();
    let (ry, rx) = (ry as isize, rx as isize);
    let (x, y) = (x as isize, y as isize);
    // offsets (dx, dy) with 0 <= x - dx < w and 0 <= y - dy < h
    let dx_lo = (x - w + 1).max(-rx);
    let dx_hi = x.min(rx);
    let dy_lo = (y - h + 1).max(-ry);
    let dy_hi = y.min(ry);
    let pixels = image.pixels();
    let kvals = kernel.values();
    let kcols = kernel.cols();

    let mut acc = Complex64::new(0.0, 0.0);
    for dy in dy_lo..=dy_hi {
        let img_row = ((y - dy) * w) as usize;
        let k_row = ((dy + ry) as usize) * kcols;
        for dx in dx_lo..=dx_hi {
            let p = pixels[img_row + (x - dx) as usize];
            acc += kvals[k_row + (dx + rx) as usize] * p;
        }
    }
    acc
}

/// "Same" convolution with zero padding: `ψ(x,y) = Σ I(x−s, y−t) · G(s,t)`.
pub fn convolve(image: &GrayImage, kernel: &GaborKernel) -> ResponseMap {
    let (width, height) = (image.width(), image.height());
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            values.push(response_at(image, kernel, x, y));
        }
    }
    ResponseMap {
        width,
        height,
        values,
    }
}

/// Convolution evaluated only on the decimation lattice (`x = 0, step_x, ...`,
/// `y = 0, step_y, ...`). Equals `convolve` followed by strided decimation.
pub fn convolve_strided(
    image: &GrayImage,
    kernel: &GaborKernel,
    step_x: usize,
    step_y: usize,
) -> Vec<Complex64> {
    let step_x = step_x.max(1);
    let step_y = step_y.max(1);
    let mut out = Vec::with_capacity(image.width().div_ceil(step_x) * image.height().div_ceil(step_y));
    for y in (0..image.height()).step_by(step_y) {
        for x in (0..image.width()).step_by(step_x) {
            out.push(response_at(image, kernel, x, y));
        }
    }
    out
}

/// Elementwise complex modulus.
pub fn magnitude(response: &ResponseMap) -> RealMap {
    RealMap {
        width: response.width,
        height: response.height,
        values: response.values.iter().map(|c| c.norm()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(theta: f64, rows: usize, cols: usize) -> GaborParams {
        GaborParams {
            frequency: 0.2,
            theta,
            phi: 0.0,
            sigma: 2.5,
            gamma: 0.7,
            eta_aspect: 1.3,
            rows,
            cols,
        }
    }

    #[test]
    fn center_value_is_one_over_pi() {
        let k = make_kernel(&GaborParams {
            frequency: 1.0,
            theta: 0.0,
            phi: 0.0,
            sigma: 1.0,
            gamma: 1.0,
            eta_aspect: 1.0,
            rows: 5,
            cols: 5,
        })
        .unwrap();
        let c = k.at(0, 0);
        assert!((c.re - 1.0 / PI).abs() < 1e-12);
        assert!(c.im.abs() < 1e-12);
    }

    #[test]
    fn parity_with_zero_phase() {
        let k = make_kernel(&params(0.4, 7, 9)).unwrap();
        for y in -3..=3isize {
            for x in -4..=4isize {
                let (a, b) = (k.at(x, y), k.at(-x, -y));
                assert!((a.re - b.re).abs() < 1e-12);
                assert!((a.im + b.im).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quarter_turn_maps_coordinates() {
        let k0 = make_kernel(&params(0.0, 9, 9)).unwrap();
        let k90 = make_kernel(&params(PI / 2.0, 9, 9)).unwrap();
        for y in -4..=4isize {
            for x in -4..=4isize {
                assert!((k90.at(x, y) - k0.at(y, -x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_kernels_are_rejected() {
        assert!(make_kernel(&params(0.0, 4, 5)).is_err());
        assert!(make_kernel(&params(0.0, 5, 6)).is_err());
        let mut p = params(0.0, 5, 5);
        p.sigma = 0.0;
        assert!(make_kernel(&p).is_err());
        p.sigma = 1.0;
        p.frequency = -0.1;
        assert!(make_kernel(&p).is_err());
    }

    #[test]
    fn bank_schedule() {
        let bank = make_bank(&GaborBankConfig::new(1, 1, 5, 5)).unwrap();
        assert_eq!(bank.len(), 1);
        let single = make_kernel(&GaborBankConfig::new(1, 1, 5, 5).params(0, 0)).unwrap();
        assert_eq!(bank[0], single);
        assert_eq!(GaborBankConfig::new(1, 1, 5, 5).params(0, 0).frequency, 0.25);
        assert_eq!(GaborBankConfig::new(1, 1, 5, 5).params(0, 0).theta, 0.0);

        assert_eq!(make_bank(&GaborBankConfig::new(5, 8, 23, 23)).unwrap().len(), 40);

        let mut cfg = GaborBankConfig::new(2, 4, 5, 5);
        cfg.f_max = 0.4;
        for b in 0..4 {
            assert!((cfg.params(1, b).frequency - 0.282_842_712_474_619).abs() < 1e-12);
            assert!((cfg.params(1, b).theta - b as f64 * PI / 4.0).abs() < 1e-15);
        }
        // scale-major ordering: index a * v + b
        let bank = make_bank(&cfg).unwrap();
        assert_eq!(bank[5], make_kernel(&cfg.params(1, 1)).unwrap());
    }

    #[test]
    fn bank_rejects_zero_sizes_and_even_windows() {
        assert!(make_bank(&GaborBankConfig::new(0, 8, 23, 23)).is_err());
        assert!(make_bank(&GaborBankConfig::new(5, 0, 23, 23)).is_err());
        assert!(make_bank(&GaborBankConfig::new(5, 8, 22, 22)).is_err());
    }

    #[test]
    fn impulse_response_reproduces_kernel() {
        let k = make_kernel(&params(0.3, 5, 7)).unwrap();
        let mut px = vec![0.0; 11 * 11];
        px[5 * 11 + 5] = 1.0;
        let img = GrayImage::new(11, 11, px).unwrap();
        let r = convolve(&img, &k);
        for dy in -2..=2isize {
            for dx in -3..=3isize {
                let got = r.get((5 + dx) as usize, (5 + dy) as usize);
                assert!((got - k.at(dx, dy)).norm() < 1e-15);
            }
        }
        // nothing outside the kernel support
        assert_eq!(r.get(0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_image_gives_zero_response() {
        let k = make_kernel(&params(1.0, 5, 5)).unwrap();
        let img = GrayImage::from_fn(8, 6, |_, _| 0.0);
        let r = convolve(&img, &k);
        assert_eq!((r.width, r.height), (8, 6));
        assert!(r.values.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn window_larger_than_image_is_allowed() {
        let k = make_kernel(&params(0.3, 23, 23)).unwrap();
        let img = GrayImage::from_fn(8, 8, |x, y| ((x + y) % 3) as f64 / 2.0);
        let r = convolve(&img, &k);
        assert_eq!(r.values.len(), 64);
        assert!(r.values.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    }

    #[test]
    fn strided_matches_full_then_decimated() {
        let k = make_kernel(&params(0.7, 7, 7)).unwrap();
        let img = GrayImage::from_fn(16, 12, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0);
        let full = convolve(&img, &k);
        let strided = convolve_strided(&img, &k, 4, 3);
        let mut expected = Vec::new();
        for y in (0..12).step_by(3) {
            for x in (0..16).step_by(4) {
                expected.push(full.get(x, y));
            }
        }
        assert_eq!(strided, expected);
    }

    #[test]
    fn magnitude_basics() {
        let r = ResponseMap {
            width: 3,
            height: 1,
            values: vec![
                Complex64::new(3.0, 4.0),
                Complex64::new(-2.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        };
        let m = magnitude(&r);
        assert_eq!(m.values, vec![5.0, 2.0, 0.5]);

        let rotated = ResponseMap {
            values: r.values.iter().map(|c| c * Complex64::from_polar(1.0, 1.234)).collect(),
            ..r.clone()
        };
        for (a, b) in magnitude(&rotated).values.iter().zip(&m.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
