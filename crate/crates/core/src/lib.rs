//! Quantum circuit simulation with an exact state-vector backend and an
//! approximate matrix-product-state backend, plus a benchmark and validation
//! harness.
//!
//! Qubit 0 is the least significant bit of a basis-state index. Histogram
//! keys are bitstrings printed with qubit `n-1` first.
//!
//! ```
//! use qcsim::{build_ghz, mps, TruncationConfig};
//!
//! let circuit = build_ghz(30).unwrap();
//! let (result, stats) = mps::sample(&circuit, 256, TruncationConfig::default(), 7, &Default::default()).unwrap();
//! assert_eq!(stats.max_bond_reached, 2);
//! assert!(result.histogram.keys().all(|k| k == &"0".repeat(30) || k == &"1".repeat(30)));
//! ```

pub mod bench;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod mps;
pub mod sampling;
pub mod sv;
pub mod tensor;

pub use bench::{BackendKind, MemoryGuard, Precision};
pub use circuit::{
    build_counterfeit_coin, build_ghz, build_qaoa, build_qft, build_quantum_volume, emit_qasm,
    metrics, parse_qasm_subset, Circuit, CircuitKind, CircuitMetrics, CircuitSpec, Condition, Gate,
    GateKind, Op,
};
pub use error::{Error, Result};
pub use mps::{MpsState, MpsStats};
pub use sampling::SampleResult;
pub use sv::StateVector;
pub use tensor::{ComplexTensor, TruncationConfig, C64};
