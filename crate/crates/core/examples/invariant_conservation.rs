//! `P_l = Σ R² + Σ I²` oscillates, while the staggered invariant stays put.

use lattice_qd::{evolve, init_state, FloatKernel, InitialState, LatticeConfig, PotentialProfile, StaggeredState, TraceOptions};

fn main() -> lattice_qd::Result<()> {
    let config = LatticeConfig::with_epsilon(128, 1.0, 0.2)?;
    let potential = PotentialProfile::harmonic(&config, 64.0, 1e-4);
    let psi = init_state(&InitialState::Gaussian { center: 48.0, width: 6.0, wavenumber: 0.8 }, &config)?;
    let kernel = FloatKernel::new(&config, &potential)?;
    let start = StaggeredState::from_history(psi.real_part(), psi.imag_part(), &kernel)?;

    let (_, trace) = evolve(&start, &kernel, 5000, &TraceOptions::default())?;
    println!("max |P_l - P_0|       = {:.3e}", trace.probability_max_deviation());
    println!("invariant rel. drift  = {:.3e}", trace.invariant_relative_drift());
    Ok(())
}
