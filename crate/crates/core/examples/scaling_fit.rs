//! Runtime sweep of GHZ on the MPS backend and linear / power-law fits.

use qcsim::bench::{sweep, BenchConfig};
use qcsim::circuit::{CircuitKind, CircuitSpec};
use qcsim::BackendKind;

fn main() {
    let bc = BenchConfig {
        repetitions: 5,
        ..BenchConfig::new(BackendKind::Mps)
    };
    let ns: Vec<usize> = (10..=90).step_by(10).collect();
    let res = sweep(&CircuitSpec::new(CircuitKind::Ghz, 10, 0), &ns, &bc, true, false);

    for r in &res.records {
        println!("n={:3}  median {:.4}s  ±{:.4}", r.n_qubits, r.timing.median_s, r.timing.stddev_s);
    }
    if let (Some(lin), Some(pow)) = (&res.linear_fit, &res.power_fit) {
        println!("linear: {:?}  R² {:.4}", lin.coefficients, lin.r_squared);
        println!("power:  {:?}  R² {:.4}", pow.coefficients, pow.r_squared);
    }
    println!("selected: {:?}", res.selected_model);
}
