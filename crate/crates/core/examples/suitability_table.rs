//! Rank methods by total error and by the length-aware suitability
//! `η = (E_max · L_max) / (E · L)`.
//!
//! ```bash
//! cargo run -p gabor-barcodes --example suitability_table
//! ```

use gabor_barcodes::irma::assign_suitability;
use gabor_barcodes::EvalRecord;

fn main() -> gabor_barcodes::Result<()> {
    let mut records = vec![
        EvalRecord::new("long descriptor", 310.0, 8192),
        EvalRecord::new("medium descriptor", 335.0, 2560),
        EvalRecord::new("short descriptor", 372.0, 512),
        EvalRecord::new("tiny descriptor", 455.0, 128),
        EvalRecord::new("random bits", 590.0, 2560),
    ];
    assign_suitability(&mut records, None, None)?;

    let mut by_error: Vec<&EvalRecord> = records.iter().collect();
    by_error.sort_by(|a, b| a.e_total.total_cmp(&b.e_total));
    let mut by_eta: Vec<&EvalRecord> = records.iter().collect();
    by_eta.sort_by(|a, b| b.eta_suitability.total_cmp(&a.eta_suitability));

    println!("{:<4}{:<20}{:>8}{:>7}   {:<4}{:<20}{:>10}", "#", "by E_total", "E", "L", "#", "by eta", "eta");
    for (i, (a, b)) in by_error.iter().zip(&by_eta).enumerate() {
        println!(
            "{:<4}{:<20}{:>8.1}{:>7}   {:<4}{:<20}{:>10.3}",
            i + 1,
            a.method_name,
            a.e_total,
            a.l_code,
            i + 1,
            b.method_name,
            b.eta_suitability
        );
    }
    Ok(())
}
