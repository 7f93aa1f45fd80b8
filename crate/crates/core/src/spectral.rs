//! Fourier analysis of the reversible scheme on the free (`V = 0`) lattice.
//!
//! On the periodic lattice each discrete mode `k_j = 2πj/(Ma)` of the complex
//! centered-time scheme obeys the two-term recursion
//!
//! `Ψ̂_{n+1} = Ψ̂_{n−1} − 2i f Ψ̂_n`,  `f = f_ε(ka) = 4ε sin²(ka/2)`,
//!
//! whose characteristic roots are `v± = −if ± √(1 − f²)`. For `|f| < 1` both
//! roots sit on the unit circle; at `|f| = 1` they merge into a double root and
//! the mode grows linearly; for `|f| > 1` one root leaves the unit disk. Since
//! `max_k |f| = 4|ε|`, the scheme is stable exactly when `4|ε| < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{check_field_len, l2_norm_a, ComplexField, LatticeConfig, Space};

/// Momentum-space field. Normalized so that `Σ_j |Ψ̂_j|² = ‖Ψ‖²_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpectrum {
    pub values: Vec<Complex64>,
    pub config: LatticeConfig,
}

impl MomentumSpectrum {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Dimensionless `k_j a` of mode `j`.
    pub fn mode_ka(&self, j: usize) -> f64 {
        mode_ka(j, self.config.sites())
    }
}

pub fn mode_ka(j: usize, sites: usize) -> f64 {
    2.0 * PI * j as f64 / sites as f64
}

/// `Ψ̂_j = √(a/M) Σ_m e^{−2πijm/M} Ψ_m`.
pub fn dft(field: &ComplexField, config: &LatticeConfig) -> Result<MomentumSpectrum> {
    check_field_len(config, field.len())?;
    let n = config.sites();
    let mut buf = field.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = (config.spacing() / n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= norm);
    Ok(MomentumSpectrum {
        values: buf,
        config: *config,
    })
}

/// `Ψ_m = (aM)^{−1/2} Σ_j e^{2πijm/M} Ψ̂_j`.
pub fn idft(spectrum: &MomentumSpectrum) -> ComplexField {
    let n = spectrum.config.sites();
    let mut buf = spectrum.values.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let norm = 1.0 / (spectrum.config.spacing() * n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= norm);
    ComplexField {
        values: buf,
        space: Space::Coordinate,
    }
}

/// Relative Parseval defect `|‖Ψ̂‖² − ‖Ψ‖²_a| / ‖Ψ‖²_a` (absolute when the field is zero).
pub fn parseval_defect(field: &ComplexField, config: &LatticeConfig) -> Result<f64> {
    let spectrum = dft(field, config)?;
    let coord = l2_norm_a(field, config);
    let diff = (spectrum.norm_sqr() - coord).abs();
    Ok(if coord > 0.0 { diff / coord } else { diff })
}

pub fn f_epsilon(ka: f64, epsilon: f64) -> f64 {
    let s = (0.5 * ka).sin();
    4.0 * epsilon * s * s
}

/// One step of the mode recursion: `Ψ̂_{n−1} − 2i f Ψ̂_n`.
pub fn momentum_step(psi_n: Complex64, psi_nm1: Complex64, f: f64) -> Complex64 {
    psi_nm1 - Complex64::new(0.0, 2.0 * f) * psi_n
}

/// Roots of `v² + 2ifv − 1 = 0`. For `|f| > 1` both lie on the imaginary axis.
pub fn characteristic_roots(f: f64) -> (Complex64, Complex64) {
    if f.abs() <= 1.0 {
        let s = (1.0 - f * f).sqrt();
        (Complex64::new(s, -f), Complex64::new(-s, -f))
    } else {
        // v = i w with w² + 2fw + 1 = 0, w₊ w₋ = 1; take the large root
        // without cancellation and the small one from the product.
        let s = (f * f - 1.0).sqrt();
        let (w_plus, w_minus) = if f > 0.0 {
            let w_minus = -(f + s);
            (1.0 / w_minus, w_minus)
        } else {
            let w_plus = s - f;
            (w_plus, 1.0 / w_plus)
        };
        (Complex64::new(0.0, w_plus), Complex64::new(0.0, w_minus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    /// `4|ε| = 1`: the double root at `ka = π` grows linearly in `n`.
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub verdict: Verdict,
    pub worst_ka: f64,
    pub worst_root_modulus: f64,
}

/// Stability of the free leapfrog at hopping ratio `epsilon`.
///
/// The verdict follows `4|ε|` against 1. The worst mode is searched over the
/// lattice modes of `config` (only even `M` contains `ka = π`).
pub fn classify_stability(epsilon: f64, config: &LatticeConfig) -> StabilityReport {
    let sites = config.sites();
    let (worst_ka, worst_f) = (0..sites)
        .map(|j| {
            let ka = mode_ka(j, sites);
            (ka, f_epsilon(ka, epsilon))
        })
        .fold((0.0_f64, 0.0_f64), |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best });
    let (vp, vm) = characteristic_roots(worst_f);
    let bound = 4.0 * epsilon.abs();
    let verdict = if bound < 1.0 {
        Verdict::Stable
    } else if bound == 1.0 {
        Verdict::Marginal
    } else {
        Verdict::Unstable
    };
    StabilityReport {
        epsilon,
        verdict,
        worst_ka,
        worst_root_modulus: vp.norm().max(vm.norm()),
    }
}

fn i_pow(n: u64) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn real_pow(w: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => w.powi(k),
        Err(_) => {
            let mag = w.abs().powf(n as f64);
            if w < 0.0 && n % 2 == 1 {
                -mag
            } else {
                mag
            }
        }
    }
}

/// Closed-form solution `Ψ̂_n` of the mode recursion from `Ψ̂_0`, `Ψ̂_1`.
///
/// * `|f| < 1`, with `f = sin θ`:
///   `Ψ̂_n = (2 cos θ)^{−1} Σ_{s=±1} [e^{isθ} Ψ̂_0 + s Ψ̂_1] sⁿ e^{−isnθ}`
/// * `|f| = 1`, double root `v₀ = −if`: `Ψ̂_n = [(1 − n) Ψ̂_0 + i f n Ψ̂_1] v₀ⁿ`
/// * `|f| > 1`: the simple-pole residue sum
///   `Ψ̂_n = Σ_± ±[(v± + 2if) Ψ̂_0 + Ψ̂_1] v±ⁿ / (v₊ − v₋)` with imaginary roots.
pub fn closed_form(psi0: Complex64, psi1: Complex64, f: f64, n: u64) -> Complex64 {
    match n {
        0 => return psi0,
        1 => return psi1,
        _ => {}
    }
    let i = Complex64::i();
    let nf = n as f64;
    if f.abs() < 1.0 {
        let theta = f.asin();
        let cos = (1.0 - f * f).sqrt();
        let plus = (Complex64::from_polar(1.0, theta) * psi0 + psi1) * Complex64::from_polar(1.0, -nf * theta);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let minus = (Complex64::from_polar(1.0, -theta) * psi0 - psi1) * Complex64::from_polar(sign, nf * theta);
        (plus + minus) / (2.0 * cos)
    } else if f.abs() == 1.0 {
        // v₀ⁿ = (−if)ⁿ = (−f)ⁿ iⁿ with f = ±1.
        let v0_pow = if f > 0.0 && n % 2 == 1 { -i_pow(n) } else { i_pow(n) };
        ((1.0 - nf) * psi0 + i * f * nf * psi1) * v0_pow
    } else {
        let (vp, vm) = characteristic_roots(f);
        let two_if = Complex64::new(0.0, 2.0 * f);
        let vp_n = i_pow(n) * real_pow(vp.im, n);
        let vm_n = i_pow(n) * real_pow(vm.im, n);
        (((vp + two_if) * psi0 + psi1) * vp_n - ((vm + two_if) * psi0 + psi1) * vm_n) / (vp - vm)
    }
}

/// Coordinate-space solution of the free complex leapfrog at step `n`,
/// computed mode by mode from the closed form.
pub fn spectral_evolve(psi0: &ComplexField, psi1: &ComplexField, config: &LatticeConfig, n: u64) -> Result<ComplexField> {
    let s0 = dft(psi0, config)?;
    let s1 = dft(psi1, config)?;
    let eps = config.epsilon();
    let values = s0
        .values
        .iter()
        .zip(&s1.values)
        .enumerate()
        .map(|(j, (&a, &b))| closed_form(a, b, f_epsilon(s0.mode_ka(j), eps), n))
        .collect();
    Ok(idft(&MomentumSpectrum {
        values,
        config: *config,
    }))
}
