//! Counterfeit-coin search: mid-circuit measurement plus a classically
//! conditioned gate. Both backends should agree on the outcome distribution.

use qcsim::circuit::{build_counterfeit_coin, metrics};
use qcsim::mps::{self, MpsOptions};
use qcsim::sampling::total_variation_distance;
use qcsim::sv::{self, SvOptions};
use qcsim::TruncationConfig;

fn main() -> qcsim::Result<()> {
    let circuit = build_counterfeit_coin(6, 2)?;
    let m = metrics(&circuit);
    println!("{} gates, {} two-qubit, mid-circuit measurement: {}", m.total_gates, m.two_qubit_gates, circuit.has_mid_circuit_measurement());

    let shots = 50_000;
    let a = sv::sample(&circuit, shots, 1, &SvOptions::default())?;
    let (b, _) = mps::sample(&circuit, shots, TruncationConfig::default(), 2, &MpsOptions::default())?;

    let mut top: Vec<_> = a.histogram.iter().collect();
    top.sort_by(|x, y| y.1.cmp(x.1));
    for (bits, count) in top.iter().take(5) {
        println!("{bits}  sv {count:6}  mps {:6}", b.count(bits));
    }
    println!("TVD = {:.4}", total_variation_distance(&a.frequencies(), &b.frequencies()));
    Ok(())
}
