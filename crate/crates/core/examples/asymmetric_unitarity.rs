//! The forward-time scheme is not unitary: its norm grows every step, and the
//! defect of its update matrix shrinks only linearly in τ.

use lattice_qd::asymmetric::{asymmetric_step, unitarity_deviation, AsymmetricRun};
use lattice_qd::{init_state, InitialState, LatticeConfig, PotentialProfile};

fn main() -> lattice_qd::Result<()> {
    let sites = 64;
    let potential = PotentialProfile::zeros(sites);
    println!("{:>10} {:>14} {:>14}", "tau", "column defect", "norm after 100");
    for tau in [0.02, 0.01, 0.005] {
        let config = LatticeConfig::new(sites, 1.0, tau)?;
        let report = unitarity_deviation(&config, &potential)?;
        let psi = init_state(&InitialState::Gaussian { center: 32.0, width: 4.0, wavenumber: 0.5 }, &config)?;
        let mut run = AsymmetricRun::new(config, potential.clone(), psi)?;
        for _ in 0..100 {
            run = asymmetric_step(&run);
        }
        println!("{tau:>10} {:>14.6e} {:>14.10}", report.max_column_norm_defect, run.state.norm_sqr());
    }
    Ok(())
}
