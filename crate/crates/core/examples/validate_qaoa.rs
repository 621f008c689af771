//! Top-4 agreement between the state vector and MPS for a 10-qubit QAOA
//! circuit as the bond dimension is lowered.

use qcsim::bench::{validate_topk, ValidationConfig};
use qcsim::circuit::build_qaoa;

fn main() -> qcsim::Result<()> {
    let seed = 36;
    let circuit = build_qaoa(10, seed)?;
    let cfg = ValidationConfig::new(4, 100_000, vec![64, 32, 16, 15, 14, 13, 12, 8], seed);
    let report = validate_topk(&circuit, &cfg)?;
    print!("{}", report.to_table());
    match report.first_failing_max_bond() {
        Some(chi) => println!("first chi losing a reference state: {chi}"),
        None => println!("all bond dimensions preserved the top 4"),
    }
    for row in &report.rows {
        println!("chi={:3}  discarded weight {:.3e}", row.max_bond, row.cumulative_discarded_weight);
    }
    Ok(())
}
