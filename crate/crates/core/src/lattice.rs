//! Lattice configuration, field containers, initial states, and the
//! float/fixed-point conversion used by the integer evolution.
//!
//! Every field lives on a one-dimensional periodic lattice of `M` sites with
//! spacing `a`; the time step is `τ` and the hopping ratio is `ε = τ/a²`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Smallest lattice on which the three-point stencil is well formed.
pub const MIN_SITES: usize = 3;

/// Largest binary scale exponent accepted for fixed-point fields.
pub const MAX_SCALE_EXP: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
}

/// Space-time discretization shared by every scheme.
///
/// `ε` is never stored; [`LatticeConfig::epsilon`] recomputes `τ/a²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    sites: usize,
    spacing: f64,
    time_step: f64,
    boundary: Boundary,
}

impl LatticeConfig {
    pub fn new(sites: usize, spacing: f64, time_step: f64) -> Result<Self> {
        if sites < MIN_SITES {
            return Err(Error::Parameter(format!(
                "lattice needs at least {MIN_SITES} sites, got {sites}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Parameter(format!("spacing must be positive, got {spacing}")));
        }
        if !(time_step.is_finite() && time_step >= 0.0) {
            return Err(Error::Parameter(format!(
                "time step must be non-negative, got {time_step}"
            )));
        }
        Ok(Self {
            sites,
            spacing,
            time_step,
            boundary: Boundary::Periodic,
        })
    }

    /// Builds a configuration from `ε` by setting `τ = ε a²`.
    pub fn with_epsilon(sites: usize, spacing: f64, epsilon: f64) -> Result<Self> {
        Self::new(sites, spacing, epsilon * spacing * spacing)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn epsilon(&self) -> f64 {
        self.time_step / (self.spacing * self.spacing)
    }

    /// Coordinate of site `m`.
    pub fn position(&self, m: usize) -> f64 {
        m as f64 * self.spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Coordinate,
    Momentum,
}

/// Complex wave function at a single time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub values: Vec<Complex64>,
    pub space: Space,
}

impl ComplexField {
    pub fn coordinate(values: Vec<Complex64>) -> Self {
        Self {
            values,
            space: Space::Coordinate,
        }
    }

    pub fn zeros(sites: usize) -> Self {
        Self::coordinate(vec![Complex64::new(0.0, 0.0); sites])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ |Ψ_m|²` without the lattice spacing.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * factor).collect(),
            space: self.space,
        }
    }

    pub fn real_part(&self) -> RealField {
        RealField(self.values.iter().map(|z| z.re).collect())
    }

    pub fn imag_part(&self) -> RealField {
        RealField(self.values.iter().map(|z| z.im).collect())
    }

    /// Cyclic shift: entry `m` of the result is entry `m - by` of `self`.
    pub fn shifted(&self, by: usize) -> Self {
        let n = self.values.len();
        let mut values = self.values.clone();
        if n > 0 {
            values.rotate_right(by % n);
        }
        Self {
            values,
            space: self.space,
        }
    }
}

/// Real-valued lattice field (one of the staggered components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealField(pub Vec<f64>);

impl RealField {
    pub fn zeros(sites: usize) -> Self {
        Self(vec![0.0; sites])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RealField {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Signed-integer field with a global binary scale: entry `m` represents
/// `ints[m] / 2^scale_exp` exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointField {
    pub ints: Vec<i64>,
    pub scale_exp: u32,
}

impl FixedPointField {
    pub fn new(ints: Vec<i64>, scale_exp: u32) -> Result<Self> {
        check_scale(scale_exp)?;
        Ok(Self { ints, scale_exp })
    }

    pub fn zeros(sites: usize, scale_exp: u32) -> Result<Self> {
        Self::new(vec![0; sites], scale_exp)
    }

    pub fn len(&self) -> usize {
        self.ints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
    }
}

/// Time-independent potential `V_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile(pub Vec<f64>);

impl PotentialProfile {
    pub fn zeros(sites: usize) -> Self {
        Self(vec![0.0; sites])
    }

    /// Uniform random values in `[0, amplitude)` from a seeded ChaCha8 stream.
    pub fn random(sites: usize, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self((0..sites).map(|_| amplitude * rng.random::<f64>()).collect())
    }

    /// `V_m = strength · (x_m - center)²`.
    pub fn harmonic(config: &LatticeConfig, center: f64, strength: f64) -> Self {
        Self(
            (0..config.sites())
                .map(|m| {
                    let d = config.position(m) - center;
                    strength * d * d
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Initial wave functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// `1/√M` on every site.
    Uniform,
    /// Basis state at one site.
    Point { site: usize },
    /// `exp(-(x - center)²/(4 width²) + i wavenumber x)`, normalized so that
    /// `l2_norm_a = 1`. `center` and `width` are in coordinate units.
    Gaussian {
        center: f64,
        width: f64,
        wavenumber: f64,
    },
}

pub fn init_state(kind: &InitialState, config: &LatticeConfig) -> Result<ComplexField> {
    let sites = config.sites();
    match *kind {
        InitialState::Uniform => {
            let amp = 1.0 / (sites as f64).sqrt();
            Ok(ComplexField::coordinate(vec![Complex64::new(amp, 0.0); sites]))
        }
        InitialState::Point { site } => {
            if site >= sites {
                return Err(Error::Parameter(format!(
                    "point site {site} outside lattice of {sites} sites"
                )));
            }
            let mut field = ComplexField::zeros(sites);
            field.values[site] = Complex64::new(1.0, 0.0);
            Ok(field)
        }
        InitialState::Gaussian {
            center,
            width,
            wavenumber,
        } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::Parameter(format!(
                    "gaussian width must be positive, got {width}"
                )));
            }
            if !center.is_finite() || !wavenumber.is_finite() {
                return Err(Error::Parameter(
                    "gaussian center and wavenumber must be finite".into(),
                ));
            }
            let values: Vec<Complex64> = (0..sites)
                .map(|m| {
                    let x = config.position(m);
                    let d = x - center;
                    Complex64::from_polar((-d * d / (4.0 * width * width)).exp(), wavenumber * x)
                })
                .collect();
            let field = ComplexField::coordinate(values);
            let norm = l2_norm_a(&field, config);
            if norm == 0.0 {
                return Err(Error::Parameter(
                    "gaussian underflows to zero on this lattice".into(),
                ));
            }
            Ok(field.scale(Complex64::new(1.0 / norm.sqrt(), 0.0)))
        }
    }
}

/// Lattice L² norm in squared form: `Σ_m |Ψ_m|² a`.
pub fn l2_norm_a(field: &ComplexField, config: &LatticeConfig) -> f64 {
    field.norm_sqr() * config.spacing()
}

/// `2^exp` for exponents in the normal `f64` range.
pub(crate) fn pow2(exp: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&exp));
    f64::from_bits(((exp + 1023) as u64) << 52)
}

fn check_scale(scale_exp: u32) -> Result<()> {
    if scale_exp > MAX_SCALE_EXP {
        return Err(Error::Parameter(format!(
            "scale exponent {scale_exp} exceeds {MAX_SCALE_EXP}"
        )));
    }
    Ok(())
}

/// Converts a single real to fixed point by `floor(value · 2^scale_exp)`.
pub fn quantize_value(value: f64, scale_exp: u32) -> Result<i64> {
    check_scale(scale_exp)?;
    // Multiplying by a power of two is exact, so the floor sees the true value.
    let scaled = (value * pow2(scale_exp as i32)).floor();
    // i64 range is [-2^63, 2^63).
    if !scaled.is_finite() || scaled < -pow2(63) || scaled >= pow2(63) {
        return Err(Error::Range(format!(
            "{value} does not fit at scale 2^{scale_exp}"
        )));
    }
    Ok(scaled as i64)
}

pub fn quantize(field: &RealField, scale_exp: u32) -> Result<FixedPointField> {
    let ints = field
        .0
        .iter()
        .map(|&v| quantize_value(v, scale_exp))
        .collect::<Result<Vec<_>>>()?;
    Ok(FixedPointField { ints, scale_exp })
}

pub fn dequantize_value(int: i64, scale_exp: u32) -> f64 {
    int as f64 * pow2(-(scale_exp as i32))
}

pub fn dequantize(fp: &FixedPointField) -> RealField {
    RealField(
        fp.ints
            .iter()
            .map(|&i| dequantize_value(i, fp.scale_exp))
            .collect(),
    )
}

pub(crate) fn check_field_len(config: &LatticeConfig, len: usize) -> Result<()> {
    check_len(config.sites(), len)
}
