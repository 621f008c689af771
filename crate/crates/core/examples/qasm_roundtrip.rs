//! Parse an OpenQASM 2.0 fragment, run it, and print it back.

use qcsim::circuit::{emit_qasm, metrics, parse_qasm_subset};
use qcsim::sv;

const BELL: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
measure q[0] -> c[0];
if(c[0]==1) x q[2];
measure q[1] -> c[1];
measure q[2] -> c[2];
"#;

fn main() -> qcsim::Result<()> {
    let circuit = parse_qasm_subset(BELL)?;
    let m = metrics(&circuit);
    println!("{} qubits, {} gates, depth {}", circuit.n_qubits(), m.total_gates, m.depth);

    let text = emit_qasm(&circuit);
    print!("{text}");
    assert_eq!(emit_qasm(&parse_qasm_subset(&text)?), text);

    let r = sv::sample(&circuit, 1000, 3, &Default::default())?;
    println!("{:?}", r.histogram);
    Ok(())
}
