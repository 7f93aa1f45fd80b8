use std::f64::consts::PI;

use lattice_qd::grover::{
    apply_df, apply_rl, grover_step, infinitesimal_step, optimal_df_params, optimal_iterations, reduced_step,
    sample_measurement, DiffusionParams, GroverState, ReducedAmplitudes,
};
use num_complex::Complex64;
use proptest::prelude::*;

type Matrix = Vec<Vec<Complex64>>;

fn dense_df(params: &DiffusionParams) -> Matrix {
    let m = params.items;
    (0..m)
        .map(|r| (0..m).map(|c| if r == c { params.x } else { params.y }).collect())
        .collect()
}

fn dense_rl(items: usize, marked: usize, v: f64) -> Matrix {
    (0..items)
        .map(|r| {
            (0..items)
                .map(|c| match (r == c, r == marked) {
                    (false, _) => Complex64::new(0.0, 0.0),
                    (true, true) => Complex64::from_polar(1.0, -v),
                    (true, false) => Complex64::new(1.0, 0.0),
                })
                .collect()
        })
        .collect()
}

fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn state_strategy(max_items: usize) -> impl Strategy<Value = GroverState> {
    (2usize..max_items).prop_flat_map(|m| {
        (
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m),
            0..m,
        )
            .prop_map(|(v, marked)| {
                let amps: Vec<Complex64> = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
                let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
                GroverState::new(amps.into_iter().map(|z| z / norm).collect(), marked).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn fast_diffusion_matches_dense(state in state_strategy(64), x in (-2.0f64..2.0, -2.0f64..2.0), y in (-2.0f64..2.0, -2.0f64..2.0)) {
        let params = DiffusionParams { x: Complex64::new(x.0, x.1), y: Complex64::new(y.0, y.1), items: state.items() };
        let fast = apply_df(&state, &params).unwrap();
        let dense = mat_vec(&dense_df(&params), &state.amplitudes);
        for (a, b) in fast.amplitudes.iter().zip(dense) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn unitary_operators_preserve_norm(state in state_strategy(4096), v in -PI..PI) {
        let before = state.norm_sqr();
        let params = optimal_df_params(state.items()).unwrap();
        prop_assert!((apply_df(&state, &params).unwrap().norm_sqr() - before).abs() <= 1e-12);
        prop_assert!((apply_rl(&state, v).norm_sqr() - before).abs() <= 1e-12);
    }

    #[test]
    fn step_commutes_with_unmarked_permutations(state in state_strategy(64), seed in any::<u64>()) {
        let items = state.items();
        let params = optimal_df_params(items).unwrap();
        // A permutation fixing the marked index.
        let mut perm: Vec<usize> = (0..items).filter(|&k| k != state.marked).collect();
        let mut s = seed;
        for k in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        perm.insert(state.marked, state.marked);
        let permute = |g: &GroverState| {
            let mut amps = g.amplitudes.clone();
            for (from, &to) in perm.iter().enumerate() {
                amps[to] = g.amplitudes[from];
            }
            GroverState::new(amps, g.marked).unwrap()
        };
        let a = grover_step(&permute(&state), &params).unwrap();
        let b = permute(&grover_step(&state, &params).unwrap());
        // The total sum is accumulated in a different order, so allow rounding.
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            prop_assert!((x - y).norm() <= 1e-15);
        }
    }

    #[test]
    fn reduced_recursion_reproduces_full_iteration(items in 2usize..2048, marked_frac in 0.0f64..1.0) {
        let marked = ((items as f64 * marked_frac) as usize).min(items - 1);
        let params = optimal_df_params(items).unwrap();
        let (n_star, _) = optimal_iterations(items).unwrap();
        let mut full = GroverState::uniform(items, marked).unwrap();
        let mut reduced = ReducedAmplitudes::initial(items);
        for _ in 0..=2 * n_star {
            let expect = reduced.to_state(marked).unwrap();
            for (a, b) in full.amplitudes.iter().zip(&expect.amplitudes) {
                prop_assert!((a - b).norm() <= 1e-10);
            }
            let r = &reduced;
            prop_assert!((r.marked * r.marked / items as f64 + (items as f64 - 1.0) * r.unmarked * r.unmarked / items as f64 - 1.0).abs() <= 1e-10);
            full = grover_step(&full, &params).unwrap();
            reduced = reduced_step(&reduced);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_complete(state in state_strategy(32), seed in any::<u64>(), shots in 1u64..200_000) {
        let a = sample_measurement(&state, seed, shots).unwrap();
        prop_assert_eq!(a.iter().sum::<u64>(), shots);
        prop_assert_eq!(&a, &sample_measurement(&state, seed, shots).unwrap());
        for (k, &count) in a.iter().enumerate() {
            if state.amplitudes[k].norm_sqr() == 0.0 {
                prop_assert_eq!(count, 0);
            }
        }
    }
}

#[test]
fn reduced_recursion_matches_dense_products() {
    for items in [2usize, 4, 8, 16] {
        let params = optimal_df_params(items).unwrap();
        let step = {
            let d = dense_df(&params);
            let r = dense_rl(items, 1, PI);
            (0..items)
                .map(|i| (0..items).map(|j| (0..items).map(|k| d[i][k] * r[k][j]).sum()).collect())
                .collect::<Matrix>()
        };
        let mut dense = GroverState::uniform(items, 1).unwrap().amplitudes;
        let mut reduced = ReducedAmplitudes::initial(items);
        for _ in 0..10 {
            dense = mat_vec(&step, &dense);
            reduced = reduced_step(&reduced);
            let expect = reduced.to_state(1).unwrap();
            for (a, b) in dense.iter().zip(&expect.amplitudes) {
                assert!((a - b).norm() <= 1e-12, "M={items}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn query_count_doubles_when_items_quadruple() {
    for k in 4..=10 {
        let (small, _) = optimal_iterations(1 << k).unwrap();
        let (large, _) = optimal_iterations(1 << (k + 2)).unwrap();
        let ratio = large as f64 / small as f64;
        assert!((1.8..=2.2).contains(&ratio), "M=2^{k}: {small} -> {large}");
    }
}

#[test]
fn quarter_turn_is_near_best_well_depth() {
    const ITEMS: usize = 64;
    const EPS: f64 = 1e-4;
    let start = GroverState::uniform(ITEMS, 5).unwrap();
    let grid = 20_000;
    let best = (0..=grid)
        .map(|k| PI * k as f64 / grid as f64)
        .max_by(|&a, &b| {
            let pa = infinitesimal_step(&start, EPS, a).marked_probability();
            let pb = infinitesimal_step(&start, EPS, b).marked_probability();
            pa.total_cmp(&pb)
        })
        .unwrap();
    let d = (ITEMS as f64 - 1.0) * EPS;
    assert!((best - PI / 2.0).abs() <= 2.0 * d, "best depth {best}, d = {d}");
    assert!(best > PI / 2.0);
}

#[test]
fn sampling_frequencies_follow_probabilities() {
    let amps = [0.1f64, 0.2, 0.3, 0.4].map(|p| Complex64::new(p.sqrt(), 0.0));
    let state = GroverState::new(amps.to_vec(), 0).unwrap();
    let shots = 400_000u64;
    let hist = sample_measurement(&state, 11, shots).unwrap();
    for (k, p) in [0.1, 0.2, 0.3, 0.4].iter().enumerate() {
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        assert!((hist[k] as f64 - shots as f64 * p).abs() <= 5.0 * sigma, "{hist:?}");
    }
}
