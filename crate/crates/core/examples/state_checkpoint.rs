//! Save a fixed-point state mid-run, reload it, and finish the run.
//! The result matches an uninterrupted run exactly.

use lattice_qd::io::{read_fixed_state, write_fixed_state};
use lattice_qd::{evolve, init_state, quantize, FixedKernel, InitialState, LatticeConfig, PotentialProfile, StaggeredState, TraceOptions};

fn main() -> lattice_qd::Result<()> {
    let config = LatticeConfig::with_epsilon(64, 1.0, 0.15)?;
    let potential = PotentialProfile::random(64, 0.3, 1);
    let kernel = FixedKernel::new(&config, &potential, 30)?;
    let psi = init_state(&InitialState::Point { site: 10 }, &config)?;
    let start = StaggeredState::from_history(quantize(&psi.real_part(), 32)?, quantize(&psi.imag_part(), 32)?, &kernel)?;
    let opts = TraceOptions::default();

    let (half, _) = evolve(&start, &kernel, 500, &opts)?;
    let mut bytes = Vec::new();
    write_fixed_state(&half, kernel.coef_exp(), &mut bytes)?;
    println!("checkpoint: {} bytes at l={}", bytes.len(), half.step_count());

    let (restored, coef_exp) = read_fixed_state(bytes.as_slice())?;
    let resumed_kernel = FixedKernel::new(&config, &potential, coef_exp)?;
    let (resumed, _) = evolve(&restored, &resumed_kernel, 500, &opts)?;
    let (straight, _) = evolve(&start, &kernel, 1000, &opts)?;
    println!("resumed == uninterrupted: {}", resumed == straight);
    Ok(())
}
