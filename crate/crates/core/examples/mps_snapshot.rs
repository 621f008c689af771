//! Save an MPS to JSON and load it back.

use qcsim::circuit::build_qaoa;
use qcsim::mps;
use qcsim::{MpsState, TruncationConfig};

fn main() -> qcsim::Result<()> {
    let state = mps::final_state(&build_qaoa(12, 3)?, TruncationConfig::new(8, 1e-5, 1e-5)?)?;
    println!("bonds {:?}, discarded {:.3e}", state.bond_dims(), state.stats().cumulative_discarded_weight);

    let json = state.to_json()?;
    println!("{} bytes of JSON", json.len());
    let back = MpsState::from_json(&json)?;
    assert_eq!(back.bond_dims(), state.bond_dims());
    println!("norm after reload: {:.12}", back.norm_sqr());
    Ok(())
}
