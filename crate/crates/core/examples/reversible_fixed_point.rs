//! Integer leapfrog: run forward, run backward, recover the start bit for bit.

use lattice_qd::{
    evolve, init_state, quantize, rewind, FixedKernel, InitialState, LatticeConfig, PotentialProfile, StaggeredState,
    TraceOptions,
};

fn main() -> lattice_qd::Result<()> {
    let config = LatticeConfig::with_epsilon(256, 1.0, 0.2)?;
    let potential = PotentialProfile::random(256, 0.5, 7);
    let psi = init_state(&InitialState::Gaussian { center: 128.0, width: 12.0, wavenumber: 0.3 }, &config)?;
    let kernel = FixedKernel::new(&config, &potential, 30)?;
    let start = StaggeredState::from_history(quantize(&psi.real_part(), 40)?, quantize(&psi.imag_part(), 40)?, &kernel)?;

    let steps = 10_000;
    let options = TraceOptions { record_every: 1000, snapshot_every: None };
    let (end, trace) = evolve(&start, &kernel, steps, &options)?;
    for r in trace.records() {
        println!("l={:>6}  P={:.12}", r.l, r.probability);
    }
    let back = rewind(&end, &kernel, steps)?;
    println!("recovered exactly: {}", back == start);
    Ok(())
}
