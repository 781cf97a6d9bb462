//! Exhaustive Hamming-space index over packed barcodes.
//!
//! # File format
//!
//! All integers little-endian:
//!
//! ```text
//! "GBCX"                      magic, 4 bytes
//! version                     u16 (currently 1)
//! code_length                 u32, bits per barcode
//! entry_count                 u32
//! config_tag                  u16 length + UTF-8
//! entry_count × {
//!     image_id                u16 length + UTF-8
//!     irma_code               u16 length + UTF-8, empty when unlabeled
//!     bits                    ceil(code_length / 64) × u64
//! }
//! crc32                       u32 over every preceding byte
//! ```

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::barcode::{hamming_words, Barcode, BarcodeKind, Bits};
use crate::error::{Error, Result};
use crate::irma::IrmaCode;

pub const MAGIC: &[u8; 4] = b"GBCX";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub image_id: String,
    pub barcode: Barcode,
    pub label: Option<IrmaCode>,
}

impl IndexEntry {
    pub fn new(image_id: impl Into<String>, barcode: Barcode, label: Option<IrmaCode>) -> Self {
        Self {
            image_id: image_id.into(),
            barcode,
            label,
        }
    }
}

/// One query result.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    /// Position of the entry in the index.
    pub position: usize,
    pub image_id: String,
    pub distance: usize,
    pub similarity: f64,
}

/// Normalized Hamming similarity `1 − |a XOR b| / len`.
pub fn similarity(a: &Barcode, b: &Barcode) -> Result<f64> {
    let d = a.bits.hamming(&b.bits)?;
    if a.is_empty() {
        return Err(Error::InvalidParameter("empty barcode".into()));
    }
    Ok(1.0 - d as f64 / a.len() as f64)
}

/// Immutable collection of equal-length barcodes from one descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarcodeIndex {
    config_tag: String,
    code_length: usize,
    entries: Vec<IndexEntry>,
}

impl BarcodeIndex {
    /// Validate and wrap `entries`, keeping their order.
    pub fn build(entries: Vec<IndexEntry>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyIndex)?;
        let config_tag = first.barcode.config_tag.clone();
        let code_length = first.barcode.len();
        Self::from_parts(config_tag, code_length, entries)
    }

    /// Like [`BarcodeIndex::build`] but with an explicit descriptor, so an empty index is allowed.
    pub fn from_parts(
        config_tag: impl Into<String>,
        code_length: usize,
        entries: Vec<IndexEntry>,
    ) -> Result<Self> {
        let config_tag = config_tag.into();
        if code_length == 0 {
            return Err(Error::InvalidParameter("code length must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.barcode.len() != code_length {
                return Err(Error::LengthMismatch {
                    left: code_length,
                    right: e.barcode.len(),
                });
            }
            if e.barcode.config_tag != config_tag {
                return Err(Error::ConfigMismatch {
                    index: config_tag,
                    probe: e.barcode.config_tag.clone(),
                });
            }
            if !seen.insert(e.image_id.as_str()) {
                return Err(Error::DuplicateId(e.image_id.clone()));
            }
        }
        Ok(Self {
            config_tag,
            code_length,
            entries,
        })
    }

    /// New index with `more` appended after the existing entries.
    pub fn extended(self, more: Vec<IndexEntry>) -> Result<Self> {
        let mut entries = self.entries;
        entries.extend(more);
        Self::from_parts(self.config_tag, self.code_length, entries)
    }

    pub fn config_tag(&self) -> &str {
        &self.config_tag
    }

    pub fn code_length(&self) -> usize {
        self.code_length
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_probe(&self, probe: &Barcode) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if probe.len() != self.code_length {
            return Err(Error::LengthMismatch {
                left: self.code_length,
                right: probe.len(),
            });
        }
        Ok(())
    }

    fn finish(&self, mut scored: Vec<(usize, usize)>, k: usize) -> Vec<Neighbor> {
        // (distance, position) ordering = similarity descending, insertion order on ties
        let k = k.min(scored.len());
        if k == 0 {
            return Vec::new();
        }
        if k < scored.len() {
            scored.select_nth_unstable(k - 1);
            scored.truncate(k);
        }
        scored.sort_unstable();
        scored
            .into_iter()
            .map(|(distance, position)| Neighbor {
                position,
                image_id: self.entries[position].image_id.clone(),
                distance,
                similarity: 1.0 - distance as f64 / self.code_length as f64,
            })
            .collect()
    }

    /// Top-`k` entries by similarity, scanning the whole index.
    pub fn query(&self, probe: &Barcode, k: usize) -> Result<Vec<Neighbor>> {
        self.check_probe(probe)?;
        let q = probe.bits.words();
        let scored = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (hamming_words(q, e.barcode.bits.words()), i))
            .collect();
        Ok(self.finish(scored, k))
    }

    /// Same result as [`BarcodeIndex::query`], scanned on the rayon pool.
    pub fn par_query(&self, probe: &Barcode, k: usize) -> Result<Vec<Neighbor>> {
        self.check_probe(probe)?;
        let q = probe.bits.words();
        let scored = self
            .entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| (hamming_words(q, e.barcode.bits.words()), i))
            .collect();
        Ok(self.finish(scored, k))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let words = self.code_length.div_ceil(64);
        let mut buf = Vec::with_capacity(32 + self.entries.len() * (24 + words * 8));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&u32_field(self.code_length, "code length")?.to_le_bytes());
        buf.extend_from_slice(&u32_field(self.entries.len(), "entry count")?.to_le_bytes());
        put_str(&mut buf, &self.config_tag)?;
        for e in &self.entries {
            put_str(&mut buf, &e.image_id)?;
            let label = e.label.as_ref().map(ToString::to_string).unwrap_or_default();
            put_str(&mut buf, &label)?;
            for w in e.barcode.bits.words() {
                buf.extend_from_slice(&w.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < 4 + 2 + 4 + 4 + 2 + 4 {
            return Err(Error::Corrupt("file too short".into()));
        }
        let (body, crc) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(crc.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(Error::Corrupt("checksum mismatch".into()));
        }

        let mut r = Reader { buf: body, pos: 4 };
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let code_length = r.u32()? as usize;
        let count = r.u32()? as usize;
        let config_tag = r.string()?;
        let kind = if config_tag.starts_with("GBC") {
            BarcodeKind::Gabor
        } else if config_tag.starts_with("RBC") {
            BarcodeKind::Radon
        } else {
            return Err(Error::BadConfigTag(config_tag));
        };
        let words = code_length.div_ceil(64);
        let mut entries = Vec::with_capacity(count.min(body.len() / (4 + words * 8).max(1)));
        for _ in 0..count {
            let image_id = r.string()?;
            let label = r.string()?;
            let label = if label.is_empty() {
                None
            } else {
                Some(label.parse::<IrmaCode>()?)
            };
            let packed = (0..words).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
            let bits = Bits::from_words(packed, code_length)?;
            entries.push(IndexEntry {
                image_id,
                barcode: Barcode::new(kind, config_tag.clone(), bits),
                label,
            });
        }
        if r.pos != body.len() {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes",
                body.len() - r.pos
            )));
        }
        Self::from_parts(config_tag, code_length, entries)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_bytes()?;
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        f.sync_all().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Validate and wrap entries; see [`BarcodeIndex::build`].
pub fn build_index(entries: Vec<IndexEntry>) -> Result<BarcodeIndex> {
    BarcodeIndex::build(entries)
}

pub fn save_index(index: &BarcodeIndex, path: impl AsRef<Path>) -> Result<()> {
    index.save(path)
}

pub fn load_index(path: impl AsRef<Path>) -> Result<BarcodeIndex> {
    BarcodeIndex::load(path)
}

fn u32_field(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidParameter(format!("{what} {v} exceeds u32")))
}

fn put_str(buf: &mut Vec<u8>, s: &str) -> Result<()> {
    let len = u16::try_from(s.len())
        .map_err(|_| Error::InvalidParameter(format!("string of {} bytes exceeds u16 length", s.len())))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let out = self
            .buf
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Corrupt("unexpected end of file".into()))?;
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u16()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Corrupt("invalid UTF-8 string".into()))
    }
}
