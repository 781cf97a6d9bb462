//! Inspect a Gabor filter bank and its responses to oriented gratings.
//!
//! Prints the frequency/orientation schedule, then the mean response
//! magnitude of every kernel for a grating at 0° and at 90°. The strongest
//! kernel should share the grating's orientation.
//!
//! ```bash
//! cargo run --release -p gabor-barcodes --example filter_bank
//! ```

use std::f64::consts::FRAC_PI_2;

use gabor_barcodes::gabor::{convolve, magnitude, make_bank};
use gabor_barcodes::synth::{grating, GratingClass};
use gabor_barcodes::GaborBankConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gabor_barcodes::Result<()> {
    let config = GaborBankConfig::new(3, 4, 23, 23);
    let bank = make_bank(&config)?;

    println!("{:>5} {:>5} {:>8} {:>7} {:>7} {:>10}", "scale", "orient", "f", "theta", "sigma", "energy");
    for a in 0..config.scales {
        for b in 0..config.orientations {
            let p = config.params(a, b);
            let energy: f64 = bank[a * config.orientations + b].values().iter().map(|v| v.norm_sqr()).sum();
            println!(
                "{a:>5} {b:>6} {:>8.4} {:>6.1}° {:>7.2} {energy:>10.2e}",
                p.frequency,
                p.theta.to_degrees(),
                p.sigma
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for theta in [0.0, FRAC_PI_2] {
        let image = grating(32, GratingClass { theta, frequency: 0.25 }, 0.4, 0.0, 0.0, &mut rng);
        let means: Vec<f64> = bank
            .iter()
            .map(|k| {
                let m = magnitude(&convolve(&image, k));
                m.values.iter().sum::<f64>() / m.values.len() as f64
            })
            .collect();
        let best = (0..means.len()).max_by(|&i, &j| means[i].total_cmp(&means[j])).unwrap();
        println!(
            "\ngrating at {:>3.0}°: strongest kernel scale {} orientation {} ({:.1}°)",
            theta.to_degrees(),
            best / config.orientations,
            best % config.orientations,
            config.theta(best % config.orientations).to_degrees()
        );
        for row in means.chunks(config.orientations) {
            println!("  {}", row.iter().map(|m| format!("{m:8.4}")).collect::<String>());
        }
    }
    Ok(())
}
