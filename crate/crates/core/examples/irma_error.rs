//! Hierarchical IRMA error for a few (query, retrieved) label pairs.
//!
//! A mismatch counts at its own position and every later position of the
//! same axis, and earlier positions weigh more.
//!
//! ```bash
//! cargo run -p gabor-barcodes --example irma_error
//! ```

use gabor_barcodes::irma::{axis_errors, pair_error, total_error, AXIS_NAMES};
use gabor_barcodes::{BranchTable, IrmaCode};

fn main() -> gabor_barcodes::Result<()> {
    let query: IrmaCode = "1121-120-200-700".parse()?;
    let candidates = [
        "1121-120-200-700",
        "1121-120-200-701",
        "1121-120-210-700",
        "1121-120-300-700",
        "1121-127-200-700",
        "1123-120-200-700",
        "2121-220-300-800",
    ];
    let table = BranchTable::uniform(10)?;

    println!("query {query}, uniform branching b = 10\n");
    println!("{:<18}{:>10}{:>13}{:>12}{:>12}{:>12}", "retrieved", "error", AXIS_NAMES[0], AXIS_NAMES[1], AXIS_NAMES[2], AXIS_NAMES[3]);
    let mut pairs = Vec::new();
    for c in candidates {
        let r: IrmaCode = c.parse()?;
        let axes = axis_errors(&query, &r, &table);
        println!(
            "{c:<18}{:>10.4}{:>13.4}{:>12.4}{:>12.4}{:>12.4}",
            pair_error(&query, &r, &table),
            axes[0],
            axes[1],
            axes[2],
            axes[3]
        );
        pairs.push((query, r));
    }
    println!("\nE_total over {} pairs: {:.4}", pairs.len(), total_error(&pairs, &table));

    let corpus: Vec<IrmaCode> = candidates.iter().map(|c| c.parse()).collect::<Result<_, _>>()?;
    let derived = BranchTable::from_corpus(&corpus)?;
    println!("\nbranch table derived from the candidate labels:\n{}", derived.to_text());
    println!("E_total with it: {:.4}", total_error(&pairs, &derived));
    Ok(())
}
