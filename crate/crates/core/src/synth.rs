//! Synthetic texture data for demos and end-to-end checks.
//!
//! Each class is a sinusoidal grating with a fixed orientation and
//! frequency; samples differ by a random phase and additive Gaussian noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::barcode::{Barcode, BarcodeKind, Bits};
use crate::imaging::GrayImage;

/// Texture class: stripe orientation (radians) and frequency (cycles/pixel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingClass {
    pub theta: f64,
    pub frequency: f64,
}

/// `0.5 + amplitude · cos(2π f (x cos θ + y sin θ) + phase)`, plus noise, clamped to `[0, 1]`.
pub fn grating(
    side: usize,
    class: GratingClass,
    amplitude: f64,
    phase: f64,
    noise_sigma: f64,
    rng: &mut impl Rng,
) -> GrayImage {
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    let (sin_t, cos_t) = class.theta.sin_cos();
    GrayImage::from_fn(side, side, |x, y| {
        let along = x as f64 * cos_t + y as f64 * sin_t;
        0.5 + amplitude * (2.0 * PI * class.frequency * along + phase).cos() + noise.sample(rng)
    })
}

/// Labelled sample in a synthetic dataset.
#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub class: usize,
    pub image: GrayImage,
}

/// Parameters of the grating benchmark.
#[derive(Debug, Clone)]
pub struct GratingDataset {
    pub classes: Vec<GratingClass>,
    pub per_class: usize,
    pub side: usize,
    pub amplitude: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GratingDataset {
    /// 4 orientations × 2 frequencies, 25 samples per class, noise σ = 0.05.
    pub fn standard() -> Self {
        let mut classes = Vec::new();
        for frequency in [0.125, 0.25] {
            for k in 0..4 {
                classes.push(GratingClass {
                    theta: k as f64 * PI / 4.0,
                    frequency,
                });
            }
        }
        Self {
            classes,
            per_class: 25,
            side: 32,
            amplitude: 0.4,
            noise_sigma: 0.05,
            seed: 0x6b_6172_6263,
        }
    }

    /// Samples ordered class-major.
    pub fn generate(&self) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.classes.len() * self.per_class);
        for (c, class) in self.classes.iter().enumerate() {
            for n in 0..self.per_class {
                let phase = rng.random_range(0.0..2.0 * PI);
                out.push(Sample {
                    id: format!("c{c}_{n:03}"),
                    class: c,
                    image: grating(self.side, *class, self.amplitude, phase, self.noise_sigma, &mut rng),
                });
            }
        }
        out
    }
}

/// Split class-major samples into the first `train_per_class` of each class and the rest.
pub fn split_per_class(samples: Vec<Sample>, train_per_class: usize) -> (Vec<Sample>, Vec<Sample>) {
    let mut seen = std::collections::HashMap::new();
    samples.into_iter().partition(|s| {
        let n = seen.entry(s.class).or_insert(0usize);
        *n += 1;
        *n <= train_per_class
    })
}

/// Uniformly random barcode, the chance-level baseline.
pub fn random_barcode(len: usize, tag: &str, rng: &mut impl Rng) -> Barcode {
    let bits: Bits = (0..len).map(|_| rng.random::<bool>()).collect();
    Barcode::new(BarcodeKind::Gabor, tag, bits)
}
