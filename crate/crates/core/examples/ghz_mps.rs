//! GHZ state on 90 qubits with the MPS backend and default truncation.
//!
//! ```bash
//! cargo run --release --example ghz_mps -- 90
//! ```

use qcsim::circuit::build_ghz;
use qcsim::mps::{self, MpsOptions};
use qcsim::TruncationConfig;

fn main() -> qcsim::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(90);
    let circuit = build_ghz(n)?;
    let (result, stats) = mps::sample(&circuit, 1024, TruncationConfig::default(), 7, &MpsOptions::default())?;

    for (bits, count) in &result.histogram {
        println!("{}…{}  {count}", &bits[..4], &bits[bits.len() - 4..]);
    }
    println!("max bond reached: {}", stats.max_bond_reached);
    println!("svd calls: {}, discarded weight: {:e}", stats.svd_calls, stats.cumulative_discarded_weight);

    let state = mps::final_state(&circuit, TruncationConfig::default())?;
    let p = state.param_count();
    println!("parameters: {} (bound {})", p.exact, p.bound);
    Ok(())
}
