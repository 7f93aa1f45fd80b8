//! Grover search on M items: marked probability per iteration, and the
//! √M scaling of the optimal iteration count.

use lattice_qd::grover::{grover_step, optimal_df_params, optimal_iterations, GroverState};

fn main() -> lattice_qd::Result<()> {
    let items = 1024;
    let params = optimal_df_params(items)?;
    let mut state = GroverState::uniform(items, 17)?;
    let (best, p_best) = optimal_iterations(items)?;
    for k in 1..=best {
        state = grover_step(&state, &params)?;
        if k % 5 == 0 || k == best {
            println!("k={k:>3}  P(marked)={:.6}", state.marked_probability());
        }
    }
    println!("N*={best}, success {p_best:.6}");

    for m in [64, 256, 1024, 4096, 16384] {
        let (n, _) = optimal_iterations(m)?;
        println!("M={m:>6}  N*={n:>4}  N*/sqrt(M)={:.3}", n as f64 / (m as f64).sqrt());
    }
    Ok(())
}
