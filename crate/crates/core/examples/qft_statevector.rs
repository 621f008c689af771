//! QFT of a basis state on the state-vector backend. The output spectrum of a
//! basis input is flat, so every outcome shows up with probability 1/2^n.

use qcsim::bench::MemoryGuard;
use qcsim::circuit::build_qft;
use qcsim::sv::{self, SvOptions};

fn main() -> qcsim::Result<()> {
    let input = "0101";
    let circuit = build_qft(input.len(), Some(input), true)?;

    let state = sv::final_state(&circuit, &MemoryGuard::detect())?;
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("{i:04b}  {:+.4} {:+.4}i", a.re, a.im);
    }

    let r = sv::sample(&circuit, 16_000, 1, &SvOptions::default())?;
    println!("{} distinct outcomes in {} shots", r.histogram.len(), r.shots);
    Ok(())
}
