//! Grover search reached from the discretized Schrödinger equation.
//!
//! The lattice update is split into a diffusion `D` and a diagonal rotation
//! `R`. Making the hopping global (every site couples to every other) and the
//! potential a single well at the marked site gives the infinitesimal step
//! `D_L(ε) R_L`. Promoting `D_L` to the exactly unitary
//! `D_F(x, y)` (diagonal `x`, off-diagonal `y`) with the largest real hopping
//! `y_M = 2/M`, `x_M = −1 + 2/M` and using the phase flip `R_L(π)` yields the
//! Grover iteration, which needs `O(√M)` queries.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Shots drawn per RNG stream; shard `k` uses ChaCha8 stream `k`.
pub const SHOTS_PER_SHARD: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GroverState {
    pub amplitudes: Vec<Complex64>,
    pub marked: usize,
}

impl GroverState {
    pub fn new(amplitudes: Vec<Complex64>, marked: usize) -> Result<Self> {
        if marked >= amplitudes.len() {
            return Err(Error::Parameter(format!(
                "marked index {marked} outside {} items",
                amplitudes.len()
            )));
        }
        Ok(Self { amplitudes, marked })
    }

    /// Equal superposition `1/√M` over all items.
    pub fn uniform(items: usize, marked: usize) -> Result<Self> {
        if items < 2 {
            return Err(Error::Parameter(format!("need at least 2 items, got {items}")));
        }
        let amp = Complex64::new(1.0 / (items as f64).sqrt(), 0.0);
        Self::new(vec![amp; items], marked)
    }

    pub fn items(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|z| z.norm_sqr()))
    }

    pub fn marked_probability(&self) -> f64 {
        self.amplitudes[self.marked].norm_sqr()
    }
}

/// Marked and common-unmarked amplitudes, both scaled by `√M`: the marked
/// item has amplitude `C/√M`, every other item `c/√M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedAmplitudes {
    pub marked: f64,
    pub unmarked: f64,
    pub items: usize,
}

impl ReducedAmplitudes {
    pub fn initial(items: usize) -> Self {
        Self {
            marked: 1.0,
            unmarked: 1.0,
            items,
        }
    }

    /// `C²/M + (M−1)c²/M`; equals 1 exactly for a normalized state.
    pub fn norm_sqr(&self) -> f64 {
        let m = self.items as f64;
        (self.marked * self.marked + (m - 1.0) * self.unmarked * self.unmarked) / m
    }

    pub fn marked_probability(&self) -> f64 {
        self.marked * self.marked / self.items as f64
    }

    /// Expands to the full amplitude vector.
    pub fn to_state(&self, marked: usize) -> Result<GroverState> {
        let scale = 1.0 / (self.items as f64).sqrt();
        let mut amps = vec![Complex64::new(self.unmarked * scale, 0.0); self.items];
        if marked >= self.items {
            return Err(Error::Parameter(format!("marked index {marked} outside {} items", self.items)));
        }
        amps[marked] = Complex64::new(self.marked * scale, 0.0);
        GroverState::new(amps, marked)
    }
}

/// Parameters of `D_F(x, y)`: `x` on the diagonal, `y` everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub x: Complex64,
    pub y: Complex64,
    pub items: usize,
}

impl DiffusionParams {
    /// Global infinitesimal diffusion `D_L(ε)`: `x = 1 − (M−1)iε`, `y = iε`.
    /// Unitary only to first order in `Mε`.
    pub fn infinitesimal(items: usize, epsilon: f64) -> Self {
        Self {
            x: Complex64::new(1.0, -((items - 1) as f64) * epsilon),
            y: Complex64::new(0.0, epsilon),
            items,
        }
    }

    pub fn identity(items: usize) -> Self {
        Self {
            x: Complex64::new(1.0, 0.0),
            y: Complex64::new(0.0, 0.0),
            items,
        }
    }
}

/// `x_M = −1 + 2/M`, `y_M = 2/M`.
pub fn optimal_df_params(items: usize) -> Result<DiffusionParams> {
    if items < 2 {
        return Err(Error::Parameter(format!("need at least 2 items, got {items}")));
    }
    let y = 2.0 / items as f64;
    Ok(DiffusionParams {
        x: Complex64::new(-1.0 + y, 0.0),
        y: Complex64::new(y, 0.0),
        items,
    })
}

/// Residuals of the two unitarity conditions on `D_F(x, y)`:
/// `| |x|² + (M−1)|y|² − 1 |` and `| xy* + x*y + (M−2)|y|² |`.
pub fn check_unitarity_constraints(params: &DiffusionParams) -> (f64, f64) {
    let m = params.items as f64;
    let (x, y) = (params.x, params.y);
    let r1 = (x.norm_sqr() + (m - 1.0) * y.norm_sqr() - 1.0).abs();
    let r2 = (x * y.conj() + x.conj() * y + (m - 2.0) * y.norm_sqr()).norm();
    (r1, r2)
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Localized rotation `R_L(v)`: the marked amplitude picks up `e^{−iv}`.
pub fn apply_rl(state: &GroverState, v: f64) -> GroverState {
    let mut out = state.clone();
    out.amplitudes[state.marked] *= Complex64::from_polar(1.0, -v);
    out
}

/// `out_m = x in_m + y Σ_{j≠m} in_j`, in `O(M)` via the total sum.
pub fn apply_df(state: &GroverState, params: &DiffusionParams) -> Result<GroverState> {
    if params.items != state.items() {
        return Err(Error::Length {
            expected: params.items,
            actual: state.items(),
        });
    }
    // The total feeds every output amplitude, so its rounding error would
    // otherwise show up as a norm drift of order M·u per step.
    let total = Complex64::new(
        compensated_sum(state.amplitudes.iter().map(|a| a.re)),
        compensated_sum(state.amplitudes.iter().map(|a| a.im)),
    );
    let diag = params.x - params.y;
    let shared = params.y * total;
    Ok(GroverState {
        amplitudes: state.amplitudes.iter().map(|a| diag * a + shared).collect(),
        marked: state.marked,
    })
}

/// `D_L(ε)` after a well of depth `depth` at the marked item, i.e. `R_L(−depth)`:
/// the marked amplitude is multiplied by `e^{+i·depth}` before diffusing.
/// `depth = π/2` turns a real amplitude into `iC/√M`, the phase at which the
/// first-order hopping into the marked item is largest.
pub fn infinitesimal_step(state: &GroverState, epsilon: f64, depth: f64) -> GroverState {
    let rotated = apply_rl(state, -depth);
    apply_df(&rotated, &DiffusionParams::infinitesimal(state.items(), epsilon))
        .expect("parameters built from the state's own size")
}

/// One Grover iteration `D_F(params) R_L(π)`.
pub fn grover_step(state: &GroverState, params: &DiffusionParams) -> Result<GroverState> {
    apply_df(&apply_rl(state, PI), params)
}

/// The Grover iteration restricted to the uniform-start subspace:
///
/// `C' = (1 − 2/M) C + 2(M−1)/M · c`,  `c' = (1 − 2/M) c − (2/M) C`.
pub fn reduced_step(amps: &ReducedAmplitudes) -> ReducedAmplitudes {
    let m = amps.items as f64;
    let keep = 1.0 - 2.0 / m;
    ReducedAmplitudes {
        marked: keep * amps.marked + 2.0 * (m - 1.0) / m * amps.unmarked,
        unmarked: keep * amps.unmarked - 2.0 / m * amps.marked,
        items: amps.items,
    }
}

/// First iteration count at which the marked probability peaks, scanning the
/// reduced recursion from the uniform start, with that probability.
pub fn optimal_iterations(items: usize) -> Result<(u64, f64)> {
    if items < 2 {
        return Err(Error::Parameter(format!("need at least 2 items, got {items}")));
    }
    let mut amps = ReducedAmplitudes::initial(items);
    let mut best = amps.marked_probability();
    let mut n = 0;
    loop {
        let next = reduced_step(&amps);
        let p = next.marked_probability();
        if p < best {
            return Ok((n, best));
        }
        amps = next;
        best = p;
        n += 1;
    }
}

/// Draws `shots` measurement outcomes with probabilities `|amp_m|² / Σ|amp|²`.
///
/// Shots are split into shards of [`SHOTS_PER_SHARD`]; shard `k` draws from
/// ChaCha8 seeded with `seed` on stream `k`, so the histogram depends only on
/// `(seed, shots)` and not on thread scheduling.
pub fn sample_measurement(state: &GroverState, seed: u64, shots: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let weights: Vec<f64> = state.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let norm: f64 = weights.iter().sum();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::State(format!("cannot sample a state with norm {norm}")));
    }
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::State(e.to_string()))?;
    let items = weights.len();
    let shards = shots.div_ceil(SHOTS_PER_SHARD);
    let partials: Vec<Vec<u64>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let count = SHOTS_PER_SHARD.min(shots - k * SHOTS_PER_SHARD);
            let mut hist = vec![0u64; items];
            for _ in 0..count {
                hist[dist.sample(&mut rng)] += 1;
            }
            hist
        })
        .collect();
    let mut hist = vec![0u64; items];
    for part in partials {
        hist.iter_mut().zip(part).for_each(|(h, p)| *h += p);
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroverMode {
    Full,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroverTrace {
    /// Marked probability after 0, 1, …, N iterations.
    pub marked_probability: Vec<f64>,
    /// Total norm `Σ|amp|²` after 0, 1, …, N iterations.
    pub norms: Vec<f64>,
    pub histogram: Vec<u64>,
    pub shots: u64,
}

/// Runs `iterations` Grover steps from the uniform state and samples the result.
pub fn grover_run(
    items: usize,
    marked: usize,
    iterations: u64,
    mode: GroverMode,
    seed: u64,
    shots: u64,
) -> Result<GroverTrace> {
    let mut marked_probability = Vec::with_capacity(iterations as usize + 1);
    let mut norms = Vec::with_capacity(iterations as usize + 1);
    let final_state = match mode {
        GroverMode::Full => {
            let params = optimal_df_params(items)?;
            let mut state = GroverState::uniform(items, marked)?;
            marked_probability.push(state.marked_probability());
            norms.push(state.norm_sqr());
            for _ in 0..iterations {
                state = grover_step(&state, &params)?;
                marked_probability.push(state.marked_probability());
                norms.push(state.norm_sqr());
            }
            state
        }
        GroverMode::Reduced => {
            // Validates items and marked up front.
            GroverState::uniform(items, marked)?;
            let mut amps = ReducedAmplitudes::initial(items);
            marked_probability.push(amps.marked_probability());
            norms.push(amps.norm_sqr());
            for _ in 0..iterations {
                amps = reduced_step(&amps);
                marked_probability.push(amps.marked_probability());
                norms.push(amps.norm_sqr());
            }
            amps.to_state(marked)?
        }
    };
    let histogram = sample_measurement(&final_state, seed, shots)?;
    Ok(GroverTrace {
        marked_probability,
        norms,
        histogram,
        shots,
    })
}
