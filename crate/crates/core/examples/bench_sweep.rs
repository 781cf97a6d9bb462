//! Parameter sweep over Gabor barcode settings on labelled synthetic data.
//!
//! Each grating class gets its own IRMA label, so a wrong first hit costs
//! error only on the axis the classes differ in.
//!
//! ```bash
//! cargo run --release -p gabor-barcodes --example bench_sweep
//! ```

use gabor_barcodes::pipeline::{bench, format_rankings, BenchGrid, LabeledImage, TableSource};
use gabor_barcodes::synth::{split_per_class, GratingDataset, Sample};
use gabor_barcodes::{BranchTable, IrmaCode};

fn labeled(samples: Vec<Sample>) -> Vec<LabeledImage> {
    samples
        .into_iter()
        .map(|s| {
            // frequency class on the anatomical axis, orientation on the directional axis
            let code = format!("1121-1{}0-{}00-700", s.class % 4 + 1, s.class / 4 + 4);
            LabeledImage {
                image_id: s.id,
                image: s.image,
                label: Some(code.parse::<IrmaCode>().unwrap()),
            }
        })
        .collect()
}

fn main() -> gabor_barcodes::Result<()> {
    let mut dataset = GratingDataset::standard();
    dataset.noise_sigma = 0.6;
    let (train, test) = split_per_class(dataset.generate(), 20);
    let (train, test) = (labeled(train), labeled(test));

    let mut grid = BenchGrid::new(vec![1, 3, 5], vec![2, 4, 8], vec![(9, 9), (23, 23)]);
    grid.radon_angles = vec![4];
    let rows = bench(&grid, &train, &test, &BranchTable::uniform(10)?, &TableSource::Uniform(10))?;
    print!("{}", format_rankings(&rows));
    Ok(())
}
