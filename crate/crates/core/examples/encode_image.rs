//! Encode one image as a Gabor barcode and a Radon barcode.
//!
//! ```bash
//! cargo run --release -p gabor-barcodes --example encode_image -- path/to/image.png
//! ```
//!
//! Without an argument a synthetic grating is encoded.

use std::f64::consts::FRAC_PI_4;

use gabor_barcodes::imaging::load_image;
use gabor_barcodes::synth::{grating, GratingClass};
use gabor_barcodes::Descriptor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gabor_barcodes::Result<()> {
    let image = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => {
            let class = GratingClass { theta: FRAC_PI_4, frequency: 0.125 };
            grating(64, class, 0.4, 0.0, 0.02, &mut ChaCha8Rng::seed_from_u64(1))
        }
    };
    println!("input {}x{}, mean intensity {:.3}", image.width(), image.height(), image.mean());

    for descriptor in [Descriptor::gabor(5, 8, 23, 23), Descriptor::radon(4, 128)] {
        let code = descriptor.encode(&image)?;
        let text = code.to_text();
        let (tag, bits) = text.split_once(':').unwrap();
        println!(
            "{tag:<16} {:>5} bits, {:>4} ones  {}...",
            code.len(),
            code.bits.count_ones(),
            &bits[..64]
        );
    }
    Ok(())
}
