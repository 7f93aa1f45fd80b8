//! Finite-difference quantum dynamics on a one-dimensional periodic lattice.
//!
//! * [`lattice`]: configuration (`M`, `a`, `τ`, `ε = τ/a²`), field types,
//!   initial states, float ↔ fixed-point conversion.
//! * [`asymmetric`]: the first-order forward-time scheme and its unitarity defect.
//! * [`reversible`]: the centered-time leapfrog in staggered real/imaginary
//!   form, in floating point or bit-exact integer arithmetic, with its
//!   conserved quadratic invariant.
//! * [`spectral`]: Fourier analysis of the free leapfrog: characteristic
//!   roots, closed-form mode solutions, stability classification.
//! * [`grover`]: Grover search built from global diffusion and a phase well.
//! * [`io`]: trace CSV and binary fixed-point state formats.
//!
//! Units are `ħ = 2m = 1`, so the continuum equation is
//! `i ∂_t Ψ = −∂_x² Ψ + V Ψ`.

pub mod asymmetric;
pub mod error;
pub mod grover;
pub mod io;
pub mod lattice;
pub mod reversible;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{
    dequantize, init_state, l2_norm_a, quantize, ComplexField, FixedPointField, InitialState, LatticeConfig,
    PotentialProfile, RealField,
};
pub use reversible::{
    evolve, evolve_backward, leapfrog_step, reconstruct_complex, rewind, Direction, EvolutionTrace, FixedKernel, FixedState,
    FloatKernel, FloatState, Kernel, StaggeredState, TraceOptions,
};
