//! Memory needed by each backend, checked against a 96 GiB budget.

use qcsim::bench::{estimate_memory, format_bytes};
use qcsim::{BackendKind, Precision};

fn main() -> qcsim::Result<()> {
    let budget = 96u128 << 30;
    for n in [20, 30, 33, 34, 40, 50] {
        let e = estimate_memory(BackendKind::Sv, n, Precision::Single, 1, budget)?;
        println!("sv  n={n:3}  {e}");
    }
    for n in [50, 100, 500] {
        let e = estimate_memory(BackendKind::Mps, n, Precision::Double, 64, budget)?;
        println!("mps n={n:3}  chi=64  {} values, {}", e.values, format_bytes(e.bytes));
    }
    Ok(())
}
