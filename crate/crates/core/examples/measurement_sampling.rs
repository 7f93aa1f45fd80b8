//! Seeded, parallel measurement sampling: same seed, same counts.

use lattice_qd::grover::{grover_run, optimal_iterations, GroverMode};

fn main() -> lattice_qd::Result<()> {
    let items = 256;
    let (n, p) = optimal_iterations(items)?;
    let a = grover_run(items, 3, n, GroverMode::Reduced, 42, 200_000)?;
    let b = grover_run(items, 3, n, GroverMode::Reduced, 42, 200_000)?;
    println!("P(marked)={p:.6}  observed={:.6}", a.histogram[3] as f64 / a.shots as f64);
    println!("reproducible: {}", a.histogram == b.histogram);
    Ok(())
}
