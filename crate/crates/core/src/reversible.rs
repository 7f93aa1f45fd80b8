//! Exactly reversible centered-time leapfrog, in staggered real/imaginary form.
//!
//! The complex scheme
//!
//! `Ψ_{m,n+1} = Ψ_{m,n−1} + i[2ε(Ψ_{m+1,n} − 2Ψ_{m,n} + Ψ_{m−1,n}) − 2τ V_m Ψ_{m,n}]`
//!
//! couples the real part at one parity of `n` only to the imaginary part at
//! the other parity. Keeping `R` at even steps and `I` at odd steps gives
//!
//! ```text
//! R_{2l+2} = R_{2l}   − F(I_{2l+1})
//! I_{2l+3} = I_{2l+1} + F(R_{2l+2})
//! ```
//!
//! with `F(C)_m = 2ε(C_{m+1} − 2C_m + C_{m−1}) − 2τ V_m C_m`. Each half-step adds
//! a function of the *other* field, so the backward pass subtracts the very
//! same value. In fixed-point mode `F` is floored to an integer, and the
//! inversion is exact bit for bit regardless of how coarse that floor is.
//!
//! The state never stores `R` at odd steps or `I` at even steps; those
//! components are not needed by either direction.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::lattice::{
    check_field_len, dequantize, pow2, quantize_value, ComplexField, FixedPointField, LatticeConfig,
    PotentialProfile, RealField,
};

/// Default binary exponent for the quantized kernel coefficients `2ε`, `2τV_m`.
pub const DEFAULT_COEF_EXP: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Float,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A field type the staggered leapfrog can operate on.
pub trait StaggeredField: Clone + PartialEq + Send + Sync {
    const REPRESENTATION: Representation;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Errors unless `other` can be combined with `self` (length, and scale in fixed mode).
    fn check_compatible(&self, other: &Self) -> Result<()>;

    fn checked_add(&self, rhs: &Self) -> Result<Self>;

    fn checked_sub(&self, rhs: &Self) -> Result<Self>;

    /// `Σ_m x_m²` of the represented real values.
    fn sum_squares(&self) -> f64;

    /// `Σ_m x_m y_m` of the represented real values.
    fn dot(&self, other: &Self) -> f64;

    fn to_real(&self) -> RealField;

    /// Exact integer form of `dot`, with its scale exponent, when the
    /// representation allows it.
    fn exact_dot(&self, _other: &Self) -> Option<(i128, u32)> {
        None
    }
}

impl StaggeredField for RealField {
    const REPRESENTATION: Representation = Representation::Float;

    fn len(&self) -> usize {
        self.0.len()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_len(self.0.len(), other.0.len())
    }

    fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(RealField(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect()))
    }

    fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(RealField(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect()))
    }

    fn sum_squares(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(x, y)| x * y).sum()
    }

    fn to_real(&self) -> RealField {
        self.clone()
    }
}

impl StaggeredField for FixedPointField {
    const REPRESENTATION: Representation = Representation::Fixed;

    fn len(&self) -> usize {
        self.ints.len()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_len(self.ints.len(), other.ints.len())?;
        if self.scale_exp != other.scale_exp {
            return Err(Error::State(format!(
                "scale exponents differ: {} vs {}",
                self.scale_exp, other.scale_exp
            )));
        }
        Ok(())
    }

    fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let ints = self
            .ints
            .iter()
            .zip(&rhs.ints)
            .map(|(a, b)| a.checked_add(*b).ok_or_else(|| Error::Range(format!("{a} + {b} overflows"))))
            .collect::<Result<_>>()?;
        Ok(FixedPointField {
            ints,
            scale_exp: self.scale_exp,
        })
    }

    fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let ints = self
            .ints
            .iter()
            .zip(&rhs.ints)
            .map(|(a, b)| a.checked_sub(*b).ok_or_else(|| Error::Range(format!("{a} - {b} overflows"))))
            .collect::<Result<_>>()?;
        Ok(FixedPointField {
            ints,
            scale_exp: self.scale_exp,
        })
    }

    fn sum_squares(&self) -> f64 {
        self.dot(self)
    }

    fn dot(&self, other: &Self) -> f64 {
        match self.exact_dot(other) {
            Some((raw, scale)) => raw as f64 * pow2(-(scale as i32)),
            None => {
                let s = pow2(-(self.scale_exp as i32));
                self.ints
                    .iter()
                    .zip(&other.ints)
                    .map(|(&x, &y)| (x as f64 * s) * (y as f64 * s))
                    .sum()
            }
        }
    }

    fn to_real(&self) -> RealField {
        dequantize(self)
    }

    fn exact_dot(&self, other: &Self) -> Option<(i128, u32)> {
        let mut acc: i128 = 0;
        for (&x, &y) in self.ints.iter().zip(&other.ints) {
            acc = acc.checked_add((x as i128).checked_mul(y as i128)?)?;
        }
        Some((acc, 2 * self.scale_exp))
    }
}

/// The update function `F`, bound to a lattice and potential.
pub trait Kernel: Send + Sync {
    type Field: StaggeredField;

    fn sites(&self) -> usize;

    fn apply(&self, c: &Self::Field) -> Result<Self::Field>;
}

#[inline]
fn neighbours(m: usize, n: usize) -> (usize, usize) {
    let left = if m == 0 { n - 1 } else { m - 1 };
    let right = if m + 1 == n { 0 } else { m + 1 };
    (left, right)
}

/// Floating-point `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatKernel {
    two_eps: f64,
    two_tau_v: Vec<f64>,
}

impl FloatKernel {
    pub fn new(config: &LatticeConfig, potential: &PotentialProfile) -> Result<Self> {
        check_field_len(config, potential.len())?;
        let tau = config.time_step();
        Ok(Self {
            two_eps: 2.0 * config.epsilon(),
            two_tau_v: potential.values().iter().map(|v| 2.0 * tau * v).collect(),
        })
    }
}

impl Kernel for FloatKernel {
    type Field = RealField;

    fn sites(&self) -> usize {
        self.two_tau_v.len()
    }

    fn apply(&self, c: &RealField) -> Result<RealField> {
        check_len(self.sites(), c.len())?;
        let c = &c.0;
        let n = c.len();
        Ok(RealField(
            (0..n)
                .map(|m| {
                    let (l, r) = neighbours(m, n);
                    self.two_eps * (c[r] - 2.0 * c[m] + c[l]) - self.two_tau_v[m] * c[m]
                })
                .collect(),
        ))
    }
}

/// Integer `F`: coefficients `2ε` and `2τV_m` are stored as
/// `floor(coef · 2^coef_exp)`; each output is the 128-bit product floored back
/// by an arithmetic shift of `coef_exp` bits. The output keeps the input's
/// scale exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedKernel {
    coef_exp: u32,
    eps_coef: i64,
    pot_coef: Vec<i64>,
}

impl FixedKernel {
    pub fn new(config: &LatticeConfig, potential: &PotentialProfile, coef_exp: u32) -> Result<Self> {
        check_field_len(config, potential.len())?;
        let tau = config.time_step();
        let eps_coef = quantize_value(2.0 * config.epsilon(), coef_exp)?;
        let pot_coef = potential
            .values()
            .iter()
            .map(|v| quantize_value(2.0 * tau * v, coef_exp))
            .collect::<Result<_>>()?;
        Ok(Self {
            coef_exp,
            eps_coef,
            pot_coef,
        })
    }

    pub fn coef_exp(&self) -> u32 {
        self.coef_exp
    }

    /// Quantized `2ε` coefficient.
    pub fn eps_coef(&self) -> i64 {
        self.eps_coef
    }

    pub fn pot_coefs(&self) -> &[i64] {
        &self.pot_coef
    }
}

impl Kernel for FixedKernel {
    type Field = FixedPointField;

    fn sites(&self) -> usize {
        self.pot_coef.len()
    }

    fn apply(&self, c: &FixedPointField) -> Result<FixedPointField> {
        check_len(self.sites(), c.len())?;
        let x = &c.ints;
        let n = x.len();
        let overflow = |m: usize| Error::Range(format!("kernel overflow at site {m}"));
        let ints = (0..n)
            .map(|m| {
                let (l, r) = neighbours(m, n);
                let lap = x[r] as i128 - 2 * x[m] as i128 + x[l] as i128;
                let hop = (self.eps_coef as i128).checked_mul(lap).ok_or_else(|| overflow(m))?;
                let pot = (self.pot_coef[m] as i128) * (x[m] as i128);
                let prod = hop.checked_sub(pot).ok_or_else(|| overflow(m))?;
                // `>>` on a signed integer is an arithmetic shift: floor division.
                i64::try_from(prod >> self.coef_exp).map_err(|_| overflow(m))
            })
            .collect::<Result<_>>()?;
        Ok(FixedPointField {
            ints,
            scale_exp: c.scale_exp,
        })
    }
}

/// `F` evaluated in floating point.
pub fn kernel_f(c: &RealField, potential: &PotentialProfile, config: &LatticeConfig) -> Result<RealField> {
    FloatKernel::new(config, potential)?.apply(c)
}

/// `⌊F⌋` evaluated in integer arithmetic with coefficients at scale `2^coef_exp`.
pub fn kernel_f_fixed(
    c: &FixedPointField,
    potential: &PotentialProfile,
    config: &LatticeConfig,
    coef_exp: u32,
) -> Result<FixedPointField> {
    FixedKernel::new(config, potential, coef_exp)?.apply(c)
}

/// Staggered leapfrog state at step `l`: `R_{2l}`, `I_{2l+1}` and the
/// previous odd level `I_{2l−1}` (needed for the conserved quadratic form).
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState<F> {
    r_even: F,
    i_odd: F,
    i_prev: F,
    l: i64,
}

pub type FloatState = StaggeredState<RealField>;
pub type FixedState = StaggeredState<FixedPointField>;

impl<F: StaggeredField> StaggeredState<F> {
    /// Seeds from `R_0` and `I_{−1}`: `I_1 = I_{−1} + F(R_0)`.
    pub fn from_history<K: Kernel<Field = F>>(r0: F, i_minus1: F, kernel: &K) -> Result<Self> {
        r0.check_compatible(&i_minus1)?;
        check_len(kernel.sites(), r0.len())?;
        let i1 = i_minus1.checked_add(&kernel.apply(&r0)?)?;
        Ok(Self {
            r_even: r0,
            i_odd: i1,
            i_prev: i_minus1,
            l: 0,
        })
    }

    /// Seeds from `R_0` and `I_1`; the history level is `I_{−1} = I_1 − F(R_0)`.
    pub fn from_levels<K: Kernel<Field = F>>(r0: F, i1: F, kernel: &K) -> Result<Self> {
        r0.check_compatible(&i1)?;
        check_len(kernel.sites(), r0.len())?;
        let i_prev = i1.checked_sub(&kernel.apply(&r0)?)?;
        Ok(Self {
            r_even: r0,
            i_odd: i1,
            i_prev,
            l: 0,
        })
    }

    /// Reassembles a state from stored parts without consulting a kernel.
    pub fn from_parts(r_even: F, i_odd: F, i_prev: F, l: i64) -> Result<Self> {
        r_even.check_compatible(&i_odd)?;
        r_even.check_compatible(&i_prev)?;
        Ok(Self {
            r_even,
            i_odd,
            i_prev,
            l,
        })
    }

    pub fn r_even(&self) -> &F {
        &self.r_even
    }

    pub fn i_odd(&self) -> &F {
        &self.i_odd
    }

    pub fn i_prev(&self) -> &F {
        &self.i_prev
    }

    pub fn step_count(&self) -> i64 {
        self.l
    }

    pub fn sites(&self) -> usize {
        self.r_even.len()
    }

    pub fn representation(&self) -> Representation {
        F::REPRESENTATION
    }

    /// One leapfrog step in place. On error the state is left untouched.
    pub fn advance<K: Kernel<Field = F>>(&mut self, kernel: &K, direction: Direction) -> Result<()> {
        check_len(kernel.sites(), self.sites())?;
        match direction {
            Direction::Forward => {
                let r_next = self.r_even.checked_sub(&kernel.apply(&self.i_odd)?)?;
                let i_next = self.i_odd.checked_add(&kernel.apply(&r_next)?)?;
                self.i_prev = std::mem::replace(&mut self.i_odd, i_next);
                self.r_even = r_next;
                self.l += 1;
            }
            Direction::Backward => {
                let i_back = self.i_odd.checked_sub(&kernel.apply(&self.r_even)?)?;
                let r_back = self.r_even.checked_add(&kernel.apply(&i_back)?)?;
                let prev_back = i_back.checked_sub(&kernel.apply(&r_back)?)?;
                self.r_even = r_back;
                self.i_odd = i_back;
                self.i_prev = prev_back;
                self.l -= 1;
            }
        }
        Ok(())
    }

    /// `P_l = Σ R_{m,2l}² + Σ I_{m,2l+1}²`. Oscillates along an evolution.
    pub fn total_probability(&self) -> f64 {
        self.r_even.sum_squares() + self.i_odd.sum_squares()
    }

    /// `Σ R_{m,2l}² + Σ I_{m,2l+1} I_{m,2l−1}`, conserved exactly (up to float
    /// rounding) by the leapfrog when `F` is symmetric.
    pub fn staggered_invariant(&self) -> f64 {
        self.r_even.sum_squares() + self.i_odd.dot(&self.i_prev)
    }

    /// Integer forms of `(P_l, invariant)` with their common scale exponent.
    pub fn exact_quadratics(&self) -> Option<ExactQuadratics> {
        let (rr, scale) = self.r_even.exact_dot(&self.r_even)?;
        let (ii, _) = self.i_odd.exact_dot(&self.i_odd)?;
        let (ip, _) = self.i_odd.exact_dot(&self.i_prev)?;
        Some(ExactQuadratics {
            probability: rr.checked_add(ii)?,
            invariant: rr.checked_add(ip)?,
            scale_exp: scale,
        })
    }

    pub fn to_float(&self) -> FloatState {
        StaggeredState {
            r_even: self.r_even.to_real(),
            i_odd: self.i_odd.to_real(),
            i_prev: self.i_prev.to_real(),
            l: self.l,
        }
    }
}

pub fn leapfrog_step<K: Kernel>(
    state: &StaggeredState<K::Field>,
    kernel: &K,
    direction: Direction,
) -> Result<StaggeredState<K::Field>> {
    let mut next = state.clone();
    next.advance(kernel, direction)?;
    Ok(next)
}

/// `Ψ_{m,l} = R_{m,2l} + i I_{m,2l+1}`.
pub fn reconstruct_complex<F: StaggeredField>(state: &StaggeredState<F>) -> ComplexField {
    let r = state.r_even.to_real();
    let i = state.i_odd.to_real();
    ComplexField::coordinate(r.0.iter().zip(&i.0).map(|(&re, &im)| Complex64::new(re, im)).collect())
}

/// Integer-valued quadratic forms; the represented value is `raw / 2^scale_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactQuadratics {
    pub probability: i128,
    pub invariant: i128,
    pub scale_exp: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub r_even: Vec<f64>,
    pub i_odd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub l: i64,
    pub probability: f64,
    pub invariant: f64,
    pub exact: Option<ExactQuadratics>,
    pub snapshot: Option<Snapshot>,
}

impl TraceRecord {
    pub fn of<F: StaggeredField>(state: &StaggeredState<F>, snapshot: bool) -> Self {
        let snapshot = snapshot.then(|| Snapshot {
            r_even: state.r_even.to_real().0,
            i_odd: state.i_odd.to_real().0,
        });
        TraceRecord {
            l: state.l,
            probability: state.total_probability(),
            invariant: state.staggered_invariant(),
            exact: state.exact_quadratics(),
            snapshot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    /// Record every `record_every` steps (the initial state is always recorded).
    pub record_every: usize,
    /// Attach field snapshots every this many steps.
    pub snapshot_every: Option<usize>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            snapshot_every: None,
        }
    }
}

/// Append-only record of an evolution, ordered by `l`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvolutionTrace {
    records: Vec<TraceRecord>,
}

impl EvolutionTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: TraceRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.l <= last.l {
                return Err(Error::State(format!(
                    "trace records must increase in l ({} after {})",
                    record.l, last.l
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn record<F: StaggeredField>(&mut self, state: &StaggeredState<F>, snapshot: bool) -> Result<()> {
        self.push(TraceRecord::of(state, snapshot))
    }

    /// Largest `|invariant_l − invariant_0| / |invariant_0|`.
    pub fn invariant_relative_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        self.records
            .iter()
            .map(|r| (r.invariant - first.invariant).abs())
            .fold(0.0, f64::max)
            / first.invariant.abs()
    }

    /// Largest `|P_l − P_0|`.
    pub fn probability_max_deviation(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        self.records
            .iter()
            .map(|r| (r.probability - first.probability).abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `n_steps` forward steps, recording per `options`.
pub fn evolve<K: Kernel>(
    state: &StaggeredState<K::Field>,
    kernel: &K,
    n_steps: u64,
    options: &TraceOptions,
) -> Result<(StaggeredState<K::Field>, EvolutionTrace)> {
    if options.record_every == 0 || options.snapshot_every == Some(0) {
        return Err(Error::Parameter("trace cadences must be at least 1".into()));
    }
    let snap_due = |k: u64| options.snapshot_every.is_some_and(|s| k.is_multiple_of(s as u64));
    let mut current = state.clone();
    let mut trace = EvolutionTrace::new();
    trace.record(&current, snap_due(0))?;
    for k in 1..=n_steps {
        current.advance(kernel, Direction::Forward)?;
        let snap = snap_due(k);
        if k % options.record_every as u64 == 0 || snap {
            trace.record(&current, snap)?;
        }
    }
    Ok((current, trace))
}

/// Runs `n_steps` backward steps, recording per `options` with cadences
/// counted from the starting state. The trace is still ordered by ascending `l`.
pub fn evolve_backward<K: Kernel>(
    state: &StaggeredState<K::Field>,
    kernel: &K,
    n_steps: u64,
    options: &TraceOptions,
) -> Result<(StaggeredState<K::Field>, EvolutionTrace)> {
    if options.record_every == 0 || options.snapshot_every == Some(0) {
        return Err(Error::Parameter("trace cadences must be at least 1".into()));
    }
    let snap_due = |k: u64| options.snapshot_every.is_some_and(|s| k.is_multiple_of(s as u64));
    let mut current = state.clone();
    let mut records = vec![TraceRecord::of(&current, snap_due(0))];
    for k in 1..=n_steps {
        current.advance(kernel, Direction::Backward)?;
        let snap = snap_due(k);
        if k % options.record_every as u64 == 0 || snap {
            records.push(TraceRecord::of(&current, snap));
        }
    }
    let mut trace = EvolutionTrace::new();
    for record in records.into_iter().rev() {
        trace.push(record)?;
    }
    Ok((current, trace))
}

/// Runs `n_steps` backward steps without recording.
pub fn rewind<K: Kernel>(state: &StaggeredState<K::Field>, kernel: &K, n_steps: u64) -> Result<StaggeredState<K::Field>> {
    let mut current = state.clone();
    for _ in 0..n_steps {
        current.advance(kernel, Direction::Backward)?;
    }
    Ok(current)
}

/// One step of the complex centered-time scheme from `(Ψ_{n−1}, Ψ_n)` to `Ψ_{n+1}`.
pub fn symmetric_step(
    prev: &ComplexField,
    curr: &ComplexField,
    potential: &PotentialProfile,
    config: &LatticeConfig,
) -> Result<ComplexField> {
    check_field_len(config, prev.len())?;
    check_field_len(config, curr.len())?;
    check_field_len(config, potential.len())?;
    let two_eps = 2.0 * config.epsilon();
    let tau = config.time_step();
    let (p, c) = (&prev.values, &curr.values);
    let n = c.len();
    let i = Complex64::i();
    Ok(ComplexField::coordinate(
        (0..n)
            .map(|m| {
                let (l, r) = neighbours(m, n);
                p[m] + i * (two_eps * (c[r] - 2.0 * c[m] + c[l]) - 2.0 * tau * potential.0[m] * c[m])
            })
            .collect(),
    ))
}

/// `Ψ_n` of the complex centered-time scheme from initial levels `Ψ_0`, `Ψ_1`.
pub fn symmetric_evolve(
    psi0: &ComplexField,
    psi1: &ComplexField,
    potential: &PotentialProfile,
    config: &LatticeConfig,
    n: u64,
) -> Result<ComplexField> {
    check_field_len(config, psi0.len())?;
    check_field_len(config, psi1.len())?;
    if n == 0 {
        return Ok(psi0.clone());
    }
    let (mut prev, mut curr) = (psi0.clone(), psi1.clone());
    for _ in 1..n {
        let next = symmetric_step(&prev, &curr, potential, config)?;
        prev = std::mem::replace(&mut curr, next);
    }
    Ok(curr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::quantize;

    fn three_site() -> (LatticeConfig, PotentialProfile) {
        (LatticeConfig::with_epsilon(3, 1.0, 0.1).unwrap(), PotentialProfile::zeros(3))
    }

    fn assert_close(got: &RealField, want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.0.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{:?} vs {:?}", got.0, want);
        }
    }

    #[test]
    fn kernel_on_point() {
        let (config, pot) = three_site();
        let out = kernel_f(&RealField(vec![1.0, 0.0, 0.0]), &pot, &config).unwrap();
        assert_close(&out, &[-0.4, 0.2, 0.2], 1e-15);
    }

    #[test]
    fn kernel_annihilates_constants_and_zero() {
        let config = LatticeConfig::with_epsilon(5, 1.0, 0.2).unwrap();
        let out = kernel_f(&RealField(vec![0.7; 5]), &PotentialProfile::zeros(5), &config).unwrap();
        assert_close(&out, &[0.0; 5], 0.0);
        let pot = PotentialProfile::random(5, 3.0, 1);
        let out = kernel_f(&RealField::zeros(5), &pot, &config).unwrap();
        assert_close(&out, &[0.0; 5], 0.0);
    }

    #[test]
    fn fixed_kernel_floors() {
        // 2ε = 0.2 → floor(0.2·2^4) = 3 at coef_exp 4; lap of (16,0,0) = (−32,16,16).
        let (config, pot) = three_site();
        let c = FixedPointField::new(vec![16, 0, 0], 4).unwrap();
        let out = kernel_f_fixed(&c, &pot, &config, 4).unwrap();
        // 3·(−32)/16 = −6, 3·16/16 = 3
        assert_eq!(out.ints, vec![-6, 3, 3]);
        let c = FixedPointField::new(vec![-1, 0, 0], 4).unwrap();
        // 3·2/16 = 0.375 → 0; 3·(−1)/16 = −0.1875 → −1
        assert_eq!(kernel_f_fixed(&c, &pot, &config, 4).unwrap().ints, vec![0, -1, -1]);
    }

    #[test]
    fn fixed_kernel_overflow_is_reported() {
        // 2ε = 2 at coef_exp 0: site 0 sees 2·(MIN − 2·MAX) ≈ −1.5·2^65.
        let config = LatticeConfig::with_epsilon(3, 1.0, 1.0).unwrap();
        let c = FixedPointField::new(vec![i64::MAX, i64::MIN, 0], 0).unwrap();
        let err = kernel_f_fixed(&c, &PotentialProfile::zeros(3), &config, 0).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
    }

    #[test]
    fn forward_steps_by_hand() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let zero = RealField::zeros(3);
        let s0 = StaggeredState::from_parts(RealField(vec![1.0, 0.0, 0.0]), zero.clone(), zero, 0).unwrap();
        let s1 = leapfrog_step(&s0, &kernel, Direction::Forward).unwrap();
        assert_close(s1.r_even(), &[1.0, 0.0, 0.0], 1e-15);
        assert_close(s1.i_odd(), &[-0.4, 0.2, 0.2], 1e-15);
        let s2 = leapfrog_step(&s1, &kernel, Direction::Forward).unwrap();
        assert_close(s2.r_even(), &[0.76, 0.12, 0.12], 1e-15);
        assert_close(s2.i_odd(), &[-0.656, 0.328, 0.328], 1e-15);
        assert_eq!(s2.step_count(), 2);
    }

    #[test]
    fn invariant_by_hand() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let s0 = StaggeredState::from_history(RealField(vec![1.0, 0.0, 0.0]), RealField::zeros(3), &kernel).unwrap();
        assert_close(s0.i_odd(), &[-0.4, 0.2, 0.2], 1e-15);
        assert!((s0.staggered_invariant() - 1.0).abs() < 1e-15);
        let s1 = leapfrog_step(&s0, &kernel, Direction::Forward).unwrap();
        assert!((s1.r_even().sum_squares() - 0.6064).abs() < 1e-15);
        assert!((s1.i_odd().dot(s1.i_prev()) - 0.3936).abs() < 1e-15);
        assert!((s1.staggered_invariant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invariant_of_zero_state() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let s = StaggeredState::from_history(RealField::zeros(3), RealField::zeros(3), &kernel).unwrap();
        assert_eq!(s.staggered_invariant(), 0.0);
    }

    #[test]
    fn probability_examples() {
        let zero = RealField::zeros(3);
        let s = StaggeredState::from_parts(RealField(vec![1.0, 0.0, 0.0]), zero.clone(), zero.clone(), 0).unwrap();
        assert_eq!(s.total_probability(), 1.0);
        let s = StaggeredState::from_parts(RealField(vec![1.0, 0.0, 0.0]), RealField(vec![-0.4, 0.2, 0.2]), zero, 0)
            .unwrap();
        assert!((s.total_probability() - 1.24).abs() < 1e-15);
    }

    #[test]
    fn reconstruct_examples() {
        let zero = RealField::zeros(3);
        let s = StaggeredState::from_parts(RealField(vec![1.0, 0.0, 0.0]), zero.clone(), zero.clone(), 0).unwrap();
        let psi = reconstruct_complex(&s);
        assert_eq!(psi.values[0], Complex64::new(1.0, 0.0));
        let s = StaggeredState::from_parts(RealField(vec![1.0, 0.0, 0.0]), RealField(vec![-0.4, 0.2, 0.2]), zero, 0)
            .unwrap();
        let psi = reconstruct_complex(&s);
        assert_eq!(psi.values, vec![Complex64::new(1.0, -0.4), Complex64::new(0.0, 0.2), Complex64::new(0.0, 0.2)]);
    }

    #[test]
    fn quantized_reconstruction_error_bound() {
        let config = LatticeConfig::with_epsilon(16, 1.0, 0.2).unwrap();
        let pot = PotentialProfile::zeros(16);
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let r0 = RealField((0..16).map(|m| (0.4 * m as f64).sin()).collect());
        let s = StaggeredState::from_history(r0, RealField::zeros(16), &kernel).unwrap();
        let fixed = StaggeredState::from_parts(
            quantize(s.r_even(), 30).unwrap(),
            quantize(s.i_odd(), 30).unwrap(),
            quantize(s.i_prev(), 30).unwrap(),
            0,
        )
        .unwrap();
        let a = reconstruct_complex(&s);
        let b = reconstruct_complex(&fixed);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= pow2(-29));
        }
    }

    #[test]
    fn evolve_zero_steps() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let s = StaggeredState::from_history(RealField(vec![1.0, 0.0, 0.0]), RealField::zeros(3), &kernel).unwrap();
        let (out, trace) = evolve(&s, &kernel, 0, &TraceOptions::default()).unwrap();
        assert_eq!(out, s);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.records()[0].l, 0);
    }

    #[test]
    fn trace_cadence_and_snapshots() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let s = StaggeredState::from_history(RealField(vec![1.0, 0.0, 0.0]), RealField::zeros(3), &kernel).unwrap();
        let opts = TraceOptions {
            record_every: 2,
            snapshot_every: Some(3),
        };
        let (_, trace) = evolve(&s, &kernel, 6, &opts).unwrap();
        let ls: Vec<i64> = trace.records().iter().map(|r| r.l).collect();
        assert_eq!(ls, vec![0, 2, 3, 4, 6]);
        let snaps: Vec<i64> = trace.records().iter().filter(|r| r.snapshot.is_some()).map(|r| r.l).collect();
        assert_eq!(snaps, vec![0, 3, 6]);
        assert!(evolve(&s, &kernel, 1, &TraceOptions { record_every: 0, snapshot_every: None }).is_err());
    }

    #[test]
    fn trace_rejects_out_of_order_records() {
        let mut trace = EvolutionTrace::new();
        let rec = |l| TraceRecord {
            l,
            probability: 1.0,
            invariant: 1.0,
            exact: None,
            snapshot: None,
        };
        trace.push(rec(1)).unwrap();
        assert!(trace.push(rec(1)).is_err());
        trace.push(rec(2)).unwrap();
    }

    #[test]
    fn backward_trace_is_ascending() {
        let (config, pot) = three_site();
        let kernel = FloatKernel::new(&config, &pot).unwrap();
        let start = StaggeredState::from_history(RealField(vec![1.0, 0.0, 0.0]), RealField::zeros(3), &kernel).unwrap();
        let (end, trace) = evolve_backward(&start, &kernel, 4, &TraceOptions::default()).unwrap();
        assert_eq!(end.step_count(), -4);
        let ls: Vec<i64> = trace.records().iter().map(|r| r.l).collect();
        assert_eq!(ls, vec![-4, -3, -2, -1, 0]);
    }

    #[test]
    fn fixed_forward_backward_is_identity() {
        let config = LatticeConfig::with_epsilon(9, 1.0, 0.2).unwrap();
        let pot = PotentialProfile::random(9, 1.0, 11);
        let kernel = FixedKernel::new(&config, &pot, DEFAULT_COEF_EXP).unwrap();
        let r0 = FixedPointField::new((0..9).map(|m| (m as i64 - 4) * 123_456_789).collect(), 30).unwrap();
        let im1 = FixedPointField::new((0..9).map(|m| (m as i64 * 7_777_777) % 300_000_001).collect(), 30).unwrap();
        let s0 = StaggeredState::from_history(r0, im1, &kernel).unwrap();
        let s1 = leapfrog_step(&s0, &kernel, Direction::Forward).unwrap();
        assert_ne!(s1, s0);
        assert_eq!(leapfrog_step(&s1, &kernel, Direction::Backward).unwrap(), s0);
    }

    #[test]
    fn mixed_scales_are_rejected() {
        let a = FixedPointField::new(vec![1, 2, 3], 10).unwrap();
        let b = FixedPointField::new(vec![1, 2, 3], 11).unwrap();
        assert!(StaggeredState::from_parts(a.clone(), b, a, 0).is_err());
    }

    #[test]
    fn exact_quadratics_match_float_forms() {
        let s = StaggeredState::from_parts(
            FixedPointField::new(vec![4, -2, 0], 1).unwrap(),
            FixedPointField::new(vec![1, 1, 1], 1).unwrap(),
            FixedPointField::new(vec![2, 0, -1], 1).unwrap(),
            0,
        )
        .unwrap();
        let q = s.exact_quadratics().unwrap();
        assert_eq!(q, ExactQuadratics { probability: 23, invariant: 21, scale_exp: 2 });
        assert_eq!(s.total_probability(), 23.0 / 4.0);
        assert_eq!(s.staggered_invariant(), 21.0 / 4.0);
    }

    #[test]
    fn symmetric_evolve_initial_levels() {
        let (config, pot) = three_site();
        let p0 = ComplexField::coordinate(vec![Complex64::new(1.0, 0.0); 3]);
        let p1 = ComplexField::coordinate(vec![Complex64::new(0.0, 1.0); 3]);
        assert_eq!(symmetric_evolve(&p0, &p1, &pot, &config, 0).unwrap(), p0);
        assert_eq!(symmetric_evolve(&p0, &p1, &pot, &config, 1).unwrap(), p1);
    }
}
