//! Closed-form momentum-space solution against direct stepping of the
//! complex centered-time scheme.

use lattice_qd::asymmetric::{asymmetric_step, AsymmetricRun};
use lattice_qd::reversible::symmetric_evolve;
use lattice_qd::spectral::{parseval_defect, spectral_evolve};
use lattice_qd::{init_state, InitialState, LatticeConfig, PotentialProfile};

fn main() -> lattice_qd::Result<()> {
    let config = LatticeConfig::with_epsilon(128, 1.0, 0.2)?;
    let potential = PotentialProfile::zeros(128);
    let psi0 = init_state(&InitialState::Gaussian { center: 64.0, width: 8.0, wavenumber: 1.0 }, &config)?;
    let psi1 = asymmetric_step(&AsymmetricRun::new(config, potential.clone(), psi0.clone())?).state;

    println!("parseval defect {:.2e}", parseval_defect(&psi0, &config)?);
    for n in [10, 100, 1000] {
        let direct = symmetric_evolve(&psi0, &psi1, &potential, &config, n)?;
        let spectral = spectral_evolve(&psi0, &psi1, &config, n)?;
        let err = direct.values.iter().zip(&spectral.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("n={n:>5}  max |direct - spectral| = {err:.3e}");
    }
    Ok(())
}
