//! Stability of the free leapfrog across ε, with the largest root modulus.

use lattice_qd::spectral::classify_stability;
use lattice_qd::LatticeConfig;

fn main() -> lattice_qd::Result<()> {
    let config = LatticeConfig::with_epsilon(64, 1.0, 0.1)?;
    for eps in [0.1, 0.2, 0.24, 0.25, 0.26, 0.3, -0.3] {
        let r = classify_stability(eps, &config);
        println!("eps={eps:>6}  {:<9} worst ka={:.4}  |v|max={:.6}", format!("{:?}", r.verdict), r.worst_ka, r.worst_root_modulus);
    }
    Ok(())
}
