//! Binary image barcodes for content-based retrieval.
//!
//! Grayscale images are turned into compact bit strings in one of two ways:
//!
//! * **Gabor barcodes (GBC)**: a bank of `u` scales × `v` orientations of
//!   complex Gabor filters is convolved with a normalized image, each
//!   magnitude response is decimated, thresholded at its median and the
//!   fragments are concatenated.
//! * **Radon barcodes (RBC)**: projections at equispaced angles are
//!   resampled to a fixed number of bins and thresholded at the median of
//!   their non-zero values.
//!
//! Barcodes are stored bit-packed in a [`BarcodeIndex`] and searched
//! exhaustively under normalized Hamming similarity. Retrieval quality is
//! scored with the hierarchical IRMA error and the error × code-length
//! suitability measure.
//!
//! ```
//! use gabor_barcodes::{Descriptor, GrayImage};
//!
//! let image = GrayImage::from_fn(32, 32, |x, y| ((x * y) % 7) as f64 / 7.0);
//! let descriptor = Descriptor::gabor(5, 8, 23, 23);
//! let code = descriptor.encode(&image).unwrap();
//! assert_eq!(code.len(), 2560);
//! assert_eq!(descriptor.tag(), "GBC(5,8,23,23)");
//! ```

pub mod barcode;
pub mod cli;
pub mod descriptor;
pub mod error;
pub mod gabor;
pub mod imaging;
pub mod index;
pub mod irma;
pub mod manifest;
pub mod pipeline;
pub mod radon;
pub mod synth;

pub use barcode::{Barcode, BarcodeKind, Bits, DownsampleMode, DownsampleSpec};
pub use descriptor::{Descriptor, GaborDescriptor, RadonDescriptor};
pub use error::{Error, Result};
pub use gabor::{GaborBankConfig, GaborKernel, GaborParams, RealMap, ResponseMap};
pub use imaging::GrayImage;
pub use index::{BarcodeIndex, IndexEntry, Neighbor};
pub use irma::{BranchTable, EvalRecord, IrmaCode};
pub use radon::RadonConfig;
