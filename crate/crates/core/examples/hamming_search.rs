//! Exhaustive Hamming search over a bit-packed index, plus a save/load round trip.
//!
//! ```bash
//! cargo run --release -p gabor-barcodes --example hamming_search -- 100000
//! ```

use std::time::Instant;

use gabor_barcodes::synth::random_barcode;
use gabor_barcodes::{BarcodeIndex, IndexEntry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LEN: usize = 2560;
const TAG: &str = "GBC(5,8,23,23)";

fn main() -> gabor_barcodes::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let entries: Vec<IndexEntry> = (0..n)
        .map(|i| IndexEntry::new(format!("img{i:06}"), random_barcode(LEN, TAG, &mut rng), None))
        .collect();

    // probe = entry 42 with 100 bits flipped
    let mut probe = entries[42].barcode.clone();
    for i in (0..LEN).step_by(LEN / 100) {
        probe.bits.set(i, !probe.bits.get(i));
    }
    let index = BarcodeIndex::build(entries)?;

    let start = Instant::now();
    let hits = index.query(&probe, 5)?;
    let serial = start.elapsed();
    let start = Instant::now();
    assert_eq!(hits, index.par_query(&probe, 5)?);
    let parallel = start.elapsed();

    println!("{n} entries × {LEN} bits: scan {serial:.2?}, parallel scan {parallel:.2?}");
    for h in &hits {
        println!("  {:<10} distance {:>5}  similarity {:.4}", h.image_id, h.distance, h.similarity);
    }

    let path = std::env::temp_dir().join("hamming_search_example.gbcx");
    index.save(&path)?;
    let loaded = BarcodeIndex::load(&path)?;
    println!(
        "saved {} bytes to {}, reloaded {} entries, identical: {}",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        path.display(),
        loaded.len(),
        loaded.entries() == index.entries()
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}
