//! Radon projections of a small test pattern and the resulting barcode.
//!
//! ```bash
//! cargo run --release -p gabor-barcodes --example radon_projection
//! ```

use gabor_barcodes::radon::{project, radon_bits, radon_projections};
use gabor_barcodes::{GrayImage, RadonConfig};

fn main() -> gabor_barcodes::Result<()> {
    // bright bar in the left half of the top rows
    let image = GrayImage::from_fn(8, 8, |x, y| if x < 4 && y < 2 { 1.0 } else { 0.0 });

    for deg in [0.0f64, 45.0, 90.0, 135.0] {
        let p = project(&image, deg.to_radians());
        let cells: Vec<String> = p.iter().map(|v| format!("{v:.0}")).collect();
        println!("{deg:>5}°  raw bins {:>2}: {}", p.len(), cells.join(" "));
    }

    let config = RadonConfig::new(4, 16);
    println!();
    for (p, deg) in radon_projections(&image, &config)?.iter().zip(config.angles()) {
        println!("{:>5.0}°  mass {:.3}", deg.to_degrees(), p.iter().sum::<f64>());
    }
    let bits = radon_bits(&image, &config)?;
    let text: String = bits.iter().map(|b| if b { '1' } else { '0' }).collect();
    for (i, chunk) in text.as_bytes().chunks(config.bins).enumerate() {
        println!("projection {i}: {}", std::str::from_utf8(chunk).unwrap());
    }
    Ok(())
}
