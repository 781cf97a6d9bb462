//! Descriptor configurations, their textual tags, and the two encoders.
//!
//! A tag fully determines the encoder, so an index file can re-create the
//! descriptor that built it. Default-valued parameters are omitted:
//!
//! ```text
//! GBC(5,8,23,23)
//! GBC(5,8,23,23;fmax=0.3,d=2x2,block)
//! RBC(4,128)
//! RBC(8,128;n=64)
//! ```

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::barcode::{binarize_median, downsample, Barcode, BarcodeKind, Bits, DownsampleMode, DownsampleSpec};
use crate::error::{Error, Result};
use crate::gabor::{convolve, convolve_strided, magnitude, make_bank, GaborBankConfig, GaborKernel};
use crate::imaging::{normalize, GrayImage, DEFAULT_SIDE};
use crate::radon::{radon_bits, RadonConfig};

/// Gabor barcode parameters: filter bank, downsampling, and normalized side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborDescriptor {
    pub bank: GaborBankConfig,
    pub downsample: DownsampleSpec,
    pub side: usize,
}

/// Radon barcode parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadonDescriptor {
    pub radon: RadonConfig,
    pub side: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Descriptor {
    Gabor(GaborDescriptor),
    Radon(RadonDescriptor),
}

impl Descriptor {
    /// `GBC(u,v,s,t)` with default shared parameters, `d1 = d2 = 4` and 32×32 images.
    pub fn gabor(scales: usize, orientations: usize, rows: usize, cols: usize) -> Self {
        Descriptor::Gabor(GaborDescriptor {
            bank: GaborBankConfig::new(scales, orientations, rows, cols),
            downsample: DownsampleSpec::default(),
            side: DEFAULT_SIDE,
        })
    }

    /// `RBC` with `n_angles` projections of `bins` samples on 32×32 images.
    pub fn radon(n_angles: usize, bins: usize) -> Self {
        Descriptor::Radon(RadonDescriptor {
            radon: RadonConfig::new(n_angles, bins),
            side: DEFAULT_SIDE,
        })
    }

    pub fn kind(&self) -> BarcodeKind {
        match self {
            Descriptor::Gabor(_) => BarcodeKind::Gabor,
            Descriptor::Radon(_) => BarcodeKind::Radon,
        }
    }

    pub fn side(&self) -> usize {
        match self {
            Descriptor::Gabor(g) => g.side,
            Descriptor::Radon(r) => r.side,
        }
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }

    /// Barcode length in bits.
    pub fn code_len(&self) -> usize {
        match self {
            Descriptor::Gabor(g) => g.code_len(),
            Descriptor::Radon(r) => r.radon.code_len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.side().is_power_of_two() || self.side() < 2 {
            return Err(Error::NotPowerOfTwo(self.side()));
        }
        match self {
            Descriptor::Gabor(g) => {
                g.bank.validate()?;
                g.downsample.check(g.side, g.side)
            }
            Descriptor::Radon(r) => r.radon.validate(),
        }
    }

    /// Prepare a reusable encoder (builds the filter bank once).
    pub fn encoder(&self) -> Result<Encoder> {
        self.validate()?;
        let bank = match self {
            Descriptor::Gabor(g) => make_bank(&g.bank)?,
            Descriptor::Radon(_) => Vec::new(),
        };
        Ok(Encoder {
            descriptor: *self,
            tag: self.tag(),
            bank,
        })
    }

    /// Normalize `image` and encode it. For many images prefer [`Descriptor::encoder`].
    pub fn encode(&self, image: &GrayImage) -> Result<Barcode> {
        self.encoder()?.encode(image)
    }
}

impl GaborDescriptor {
    pub fn code_len(&self) -> usize {
        self.downsample.output_len(self.side, self.side) * self.bank.len()
    }
}

/// A descriptor with its filter bank materialized.
#[derive(Debug, Clone)]
pub struct Encoder {
    descriptor: Descriptor,
    tag: String,
    bank: Vec<GaborKernel>,
}

impl Encoder {
    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Normalize to the descriptor's side and encode.
    pub fn encode(&self, image: &GrayImage) -> Result<Barcode> {
        let side = self.descriptor.side();
        let image = normalize(image, side, side)?;
        let bits = match &self.descriptor {
            Descriptor::Gabor(g) => gabor_bits(&image, &self.bank, &g.downsample)?,
            Descriptor::Radon(r) => radon_bits(&image, &r.radon)?,
        };
        Ok(Barcode::new(self.descriptor.kind(), self.tag.clone(), bits))
    }

    /// Encode a batch on the current rayon pool; output order follows input order.
    pub fn encode_batch(&self, images: &[GrayImage]) -> Result<Vec<Barcode>> {
        images.par_iter().map(|img| self.encode(img)).collect()
    }
}

/// Magnitude → downsample → median threshold for each kernel, concatenated in bank order.
pub fn gabor_bits(image: &GrayImage, bank: &[GaborKernel], spec: &DownsampleSpec) -> Result<Bits> {
    spec.check(image.height(), image.width())?;
    let mut bits = Bits::new();
    for kernel in bank {
        let features = match spec.mode {
            DownsampleMode::Decimate => convolve_strided(image, kernel, spec.d1, spec.d2)
                .iter()
                .map(|c| c.norm())
                .collect(),
            DownsampleMode::BlockMean => downsample(&magnitude(&convolve(image, kernel)), spec)?,
        };
        bits.extend(binarize_median(&features)?.iter());
    }
    Ok(bits)
}

/// Gabor barcode of an already-normalized image.
pub fn gbc(image: &GrayImage, bank: &GaborBankConfig, spec: &DownsampleSpec) -> Result<Barcode> {
    let descriptor = Descriptor::Gabor(GaborDescriptor {
        bank: *bank,
        downsample: *spec,
        side: image.width(),
    });
    let kernels = make_bank(bank)?;
    let bits = gabor_bits(image, &kernels, spec)?;
    Ok(Barcode::new(BarcodeKind::Gabor, descriptor.tag(), bits))
}

/// Radon barcode of an already-normalized image.
pub fn rbc(image: &GrayImage, config: &RadonConfig) -> Result<Barcode> {
    let descriptor = Descriptor::Radon(RadonDescriptor {
        radon: *config,
        side: image.width(),
    });
    Ok(Barcode::new(
        BarcodeKind::Radon,
        descriptor.tag(),
        radon_bits(image, config)?,
    ))
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut extras: Vec<String> = Vec::new();
        match self {
            Descriptor::Gabor(g) => {
                let b = &g.bank;
                let defaults = GaborBankConfig::new(b.scales, b.orientations, b.rows, b.cols);
                if b.f_max != defaults.f_max {
                    extras.push(format!("fmax={}", b.f_max));
                }
                if b.sigma_f != defaults.sigma_f {
                    extras.push(format!("sf={}", b.sigma_f));
                }
                if b.gamma != defaults.gamma {
                    extras.push(format!("gamma={}", b.gamma));
                }
                if b.eta_aspect != defaults.eta_aspect {
                    extras.push(format!("eta={}", b.eta_aspect));
                }
                if b.phi != defaults.phi {
                    extras.push(format!("phi={}", b.phi));
                }
                if (g.downsample.d1, g.downsample.d2) != (4, 4) {
                    extras.push(format!("d={}x{}", g.downsample.d1, g.downsample.d2));
                }
                if g.downsample.mode == DownsampleMode::BlockMean {
                    extras.push("block".into());
                }
                if g.side != DEFAULT_SIDE {
                    extras.push(format!("n={}", g.side));
                }
                write!(f, "GBC({},{},{},{}", b.scales, b.orientations, b.rows, b.cols)?;
            }
            Descriptor::Radon(r) => {
                if r.side != DEFAULT_SIDE {
                    extras.push(format!("n={}", r.side));
                }
                write!(f, "RBC({},{}", r.radon.n_angles, r.radon.bins)?;
            }
        }
        if !extras.is_empty() {
            write!(f, ";{}", extras.join(","))?;
        }
        f.write_str(")")
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        let bad = || Error::BadConfigTag(tag.to_string());
        let (prefix, rest) = tag.split_at_checked(3).ok_or_else(bad)?;
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (head, extras) = match body.split_once(';') {
            Some((h, e)) => (h, Some(e)),
            None => (body, None),
        };
        let nums: Vec<usize> = head
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let extras: Vec<(&str, Option<&str>)> = extras
            .map(|e| {
                e.split(',')
                    .map(|kv| match kv.split_once('=') {
                        Some((k, v)) => (k.trim(), Some(v.trim())),
                        None => (kv.trim(), None),
                    })
                    .collect()
            })
            .unwrap_or_default();
        let float = |v: Option<&str>| -> Result<f64> {
            v.and_then(|v| v.parse().ok()).ok_or_else(bad)
        };
        let int = |v: Option<&str>| -> Result<usize> {
            v.and_then(|v| v.parse().ok()).ok_or_else(bad)
        };

        let descriptor = match (prefix, nums.as_slice()) {
            ("GBC", &[u, v, s, t]) => {
                let mut g = GaborDescriptor {
                    bank: GaborBankConfig::new(u, v, s, t),
                    downsample: DownsampleSpec::default(),
                    side: DEFAULT_SIDE,
                };
                for (key, value) in extras {
                    match key {
                        "fmax" => g.bank.f_max = float(value)?,
                        "sf" => g.bank.sigma_f = float(value)?,
                        "gamma" => g.bank.gamma = float(value)?,
                        "eta" => g.bank.eta_aspect = float(value)?,
                        "phi" => g.bank.phi = float(value)?,
                        "n" => g.side = int(value)?,
                        "block" if value.is_none() => g.downsample.mode = DownsampleMode::BlockMean,
                        "d" => {
                            let (d1, d2) = value.and_then(|v| v.split_once('x')).ok_or_else(bad)?;
                            g.downsample.d1 = int(Some(d1))?;
                            g.downsample.d2 = int(Some(d2))?;
                        }
                        _ => return Err(bad()),
                    }
                }
                Descriptor::Gabor(g)
            }
            ("RBC", &[n_angles, bins]) => {
                let mut r = RadonDescriptor {
                    radon: RadonConfig::new(n_angles, bins),
                    side: DEFAULT_SIDE,
                };
                for (key, value) in extras {
                    match key {
                        "n" => r.side = int(value)?,
                        _ => return Err(bad()),
                    }
                }
                Descriptor::Radon(r)
            }
            _ => return Err(bad()),
        };
        Ok(descriptor)
    }
}
