//! Packed bit strings, downsampling and median thresholding.

use std::fmt;

use crate::error::{Error, Result};
use crate::gabor::RealMap;

/// Bit vector packed 64 bits per word, little-endian within each word.
/// Bits past `len` in the last word are always zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Rebuild from packed words. Fails if the word count is wrong or the
    /// padding bits are set.
    pub fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != len.div_ceil(64) {
            return Err(Error::Corrupt(format!(
                "{} words for {len} bits",
                words.len()
            )));
        }
        if !len.is_multiple_of(64) {
            let tail = words[words.len() - 1] >> (len % 64);
            if tail != 0 {
                return Err(Error::Corrupt("non-zero padding bits".into()));
            }
        }
        Ok(Self { words, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn push(&mut self, bit: bool) {
        let (w, b) = (self.len / 64, self.len % 64);
        if b == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1 << b;
        }
        self.len += 1;
    }

    pub fn extend<I: IntoIterator<Item = bool>>(&mut self, bits: I) {
        for bit in bits {
            self.push(bit);
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Popcount of `self XOR other`.
    pub fn hamming(&self, other: &Bits) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(hamming_words(&self.words, &other.words))
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = Bits::new();
        bits.extend(iter);
        bits
    }
}

#[inline]
pub(crate) fn hamming_words(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BarcodeKind {
    Gabor,
    Radon,
}

impl BarcodeKind {
    pub fn prefix(self) -> &'static str {
        match self {
            BarcodeKind::Gabor => "GBC",
            BarcodeKind::Radon => "RBC",
        }
    }
}

/// A bit string together with the descriptor that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Barcode {
    pub kind: BarcodeKind,
    pub config_tag: String,
    pub bits: Bits,
}

impl Barcode {
    pub fn new(kind: BarcodeKind, config_tag: impl Into<String>, bits: Bits) -> Self {
        Self {
            kind,
            config_tag: config_tag.into(),
            bits,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `config_tag:0110...`
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.config_tag.len() + 1 + self.len());
        s.push_str(&self.config_tag);
        s.push(':');
        s.extend(self.bits.iter().map(|b| if b { '1' } else { '0' }));
        s
    }

    /// Parse the `config_tag:bits` text form. The kind is taken from the tag prefix.
    pub fn from_text(text: &str) -> Result<Self> {
        let (tag, bits) = text
            .trim_end()
            .rsplit_once(':')
            .ok_or_else(|| Error::BadConfigTag(text.chars().take(40).collect()))?;
        let kind = if tag.starts_with("GBC") {
            BarcodeKind::Gabor
        } else if tag.starts_with("RBC") {
            BarcodeKind::Radon
        } else {
            return Err(Error::BadConfigTag(tag.to_string()));
        };
        let bits = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Bits>>()?;
        Ok(Self::new(kind, tag, bits))
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DownsampleMode {
    /// Keep every `d`-th sample starting at index 0.
    #[default]
    Decimate,
    /// Average each `d2 × d1` block.
    BlockMean,
}

/// Column factor `d1` and row factor `d2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DownsampleSpec {
    pub d1: usize,
    pub d2: usize,
    pub mode: DownsampleMode,
}

impl DownsampleSpec {
    pub fn new(d1: usize, d2: usize) -> Self {
        Self {
            d1,
            d2,
            mode: DownsampleMode::Decimate,
        }
    }

    pub fn block_mean(mut self) -> Self {
        self.mode = DownsampleMode::BlockMean;
        self
    }

    /// Check that `rows × cols` maps are divisible by the factors.
    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 || !rows.is_multiple_of(self.d2) || !cols.is_multiple_of(self.d1) {
            return Err(Error::Indivisible {
                rows,
                cols,
                d1: self.d1,
                d2: self.d2,
            });
        }
        Ok(())
    }

    /// Output vector length for a `rows × cols` map.
    pub fn output_len(&self, rows: usize, cols: usize) -> usize {
        (rows / self.d2) * (cols / self.d1)
    }
}

impl Default for DownsampleSpec {
    fn default() -> Self {
        Self::new(4, 4)
    }
}

/// Reduce a map by `d2` rows and `d1` columns and flatten row-major.
pub fn downsample(map: &RealMap, spec: &DownsampleSpec) -> Result<Vec<f64>> {
    spec.check(map.height, map.width)?;
    let (d1, d2) = (spec.d1, spec.d2);
    let mut out = Vec::with_capacity(spec.output_len(map.height, map.width));
    match spec.mode {
        DownsampleMode::Decimate => {
            for y in (0..map.height).step_by(d2) {
                for x in (0..map.width).step_by(d1) {
                    out.push(map.get(x, y));
                }
            }
        }
        DownsampleMode::BlockMean => {
            let area = (d1 * d2) as f64;
            for by in (0..map.height).step_by(d2) {
                for bx in (0..map.width).step_by(d1) {
                    let mut acc = 0.0;
                    for y in by..by + d2 {
                        for x in bx..bx + d1 {
                            acc += map.get(x, y);
                        }
                    }
                    out.push(acc / area);
                }
            }
        }
    }
    Ok(out)
}

/// Median with the even-length convention (mean of the two middle order statistics).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        // midpoint written this way cannot overflow to infinity
        sorted[n / 2 - 1] + (sorted[n / 2] - sorted[n / 2 - 1]) / 2.0
    })
}

/// `bit_i = values_i >= median(values)`.
pub fn binarize_median(values: &[f64]) -> Result<Bits> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite feature {bad}")));
    }
    let threshold = median(values)?;
    Ok(values.iter().map(|&v| v >= threshold).collect())
}

/// Threshold at the median of the non-zero entries. An all-zero (or empty)
/// vector yields all zeros.
pub fn binarize_nonzero_median(values: &[f64]) -> Bits {
    let nonzero: Vec<f64> = values.iter().copied().filter(|v| *v != 0.0).collect();
    match median(&nonzero) {
        Ok(threshold) => values.iter().map(|&v| v != 0.0 && v >= threshold).collect(),
        Err(_) => Bits::zeros(values.len()),
    }
}
