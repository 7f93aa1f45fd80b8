//! First-order explicit scheme (centered space, forward time):
//!
//! `Ψ_{m,n+1} = Ψ_{m,n} + i[ε(Ψ_{m+1,n} − 2Ψ_{m,n} + Ψ_{m−1,n}) − τ V_m Ψ_{m,n}]`
//!
//! The update matrix is unitary only to `O(ε²) + O(τ²)`, so this scheme is
//! the non-reversible baseline. Floating point only.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{check_field_len, ComplexField, LatticeConfig, PotentialProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricRun {
    pub config: LatticeConfig,
    pub potential: PotentialProfile,
    pub state: ComplexField,
    pub step_index: u64,
}

impl AsymmetricRun {
    pub fn new(config: LatticeConfig, potential: PotentialProfile, state: ComplexField) -> Result<Self> {
        check_field_len(&config, potential.len())?;
        check_field_len(&config, state.len())?;
        Ok(Self {
            config,
            potential,
            state,
            step_index: 0,
        })
    }
}

pub fn asymmetric_step(run: &AsymmetricRun) -> AsymmetricRun {
    let psi = &run.state.values;
    let n = psi.len();
    let eps = run.config.epsilon();
    let tau = run.config.time_step();
    let i = Complex64::i();
    let values = (0..n)
        .map(|m| {
            let left = psi[(m + n - 1) % n];
            let right = psi[(m + 1) % n];
            let lap = right - 2.0 * psi[m] + left;
            psi[m] + i * (eps * lap - tau * run.potential.0[m] * psi[m])
        })
        .collect();
    AsymmetricRun {
        config: run.config,
        potential: run.potential.clone(),
        state: ComplexField::coordinate(values),
        step_index: run.step_index + 1,
    }
}

/// Dense `M×M` update matrix; row-major, `matrix[row][col]`.
pub fn transition_matrix(config: &LatticeConfig, potential: &PotentialProfile) -> Result<Vec<Vec<Complex64>>> {
    check_field_len(config, potential.len())?;
    let n = config.sites();
    let eps = config.epsilon();
    let tau = config.time_step();
    let hop = Complex64::new(0.0, eps);
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (m, row) in matrix.iter_mut().enumerate() {
        row[m] = Complex64::new(1.0, -potential.0[m] * tau - 2.0 * eps);
        row[(m + 1) % n] += hop;
        row[(m + n - 1) % n] += hop;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityReport {
    /// `max_j | ‖column_j‖ − 1 |`
    pub max_column_norm_defect: f64,
    /// `max_{j≠k} |⟨column_j, column_k⟩|`
    pub max_offdiag_inner_product: f64,
}

pub fn unitarity_deviation(config: &LatticeConfig, potential: &PotentialProfile) -> Result<UnitarityReport> {
    let matrix = transition_matrix(config, potential)?;
    let n = config.sites();
    let column_dot = |j: usize, k: usize| -> Complex64 {
        (0..n).map(|r| matrix[r][j].conj() * matrix[r][k]).sum()
    };
    let mut report = UnitarityReport {
        max_column_norm_defect: 0.0,
        max_offdiag_inner_product: 0.0,
    };
    for j in 0..n {
        let norm = column_dot(j, j).re.sqrt();
        report.max_column_norm_defect = report.max_column_norm_defect.max((norm - 1.0).abs());
        for k in (j + 1)..n {
            report.max_offdiag_inner_product = report.max_offdiag_inner_product.max(column_dot(j, k).norm());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{init_state, InitialState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn point_run(sites: usize, eps: f64) -> AsymmetricRun {
        let config = LatticeConfig::with_epsilon(sites, 1.0, eps).unwrap();
        let state = init_state(&InitialState::Point { site: 0 }, &config).unwrap();
        AsymmetricRun::new(config, PotentialProfile::zeros(sites), state).unwrap()
    }

    #[test]
    fn point_step() {
        let next = asymmetric_step(&point_run(3, 0.1));
        let want = [c(1.0, -0.2), c(0.0, 0.1), c(0.0, 0.1)];
        for (got, want) in next.state.values.iter().zip(want) {
            assert!((got - want).norm() < 1e-15, "{got} vs {want}");
        }
        assert_eq!(next.step_index, 1);
        assert!((next.state.norm_sqr() - 1.06).abs() < 1e-14);
    }

    #[test]
    fn uniform_is_stationary() {
        let config = LatticeConfig::with_epsilon(5, 1.0, 0.37).unwrap();
        let state = init_state(&InitialState::Uniform, &config).unwrap();
        let run = AsymmetricRun::new(config, PotentialProfile::zeros(5), state.clone()).unwrap();
        assert_eq!(asymmetric_step(&run).state, state);
    }

    #[test]
    fn column_defect_for_free_lattice() {
        let config = LatticeConfig::with_epsilon(6, 1.0, 0.1).unwrap();
        let report = unitarity_deviation(&config, &PotentialProfile::zeros(6)).unwrap();
        assert!((report.max_column_norm_defect - (1.06f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn identity_when_frozen() {
        let config = LatticeConfig::new(4, 1.0, 0.0).unwrap();
        let report = unitarity_deviation(&config, &PotentialProfile::zeros(4)).unwrap();
        assert_eq!(report.max_column_norm_defect, 0.0);
        assert_eq!(report.max_offdiag_inner_product, 0.0);
    }

    #[test]
    fn matrix_matches_stencil() {
        let config = LatticeConfig::new(7, 0.8, 0.05).unwrap();
        let potential = PotentialProfile::random(7, 2.0, 3);
        let state = ComplexField::coordinate(
            (0..7).map(|m| c((m as f64).sin(), (0.3 * m as f64).cos())).collect(),
        );
        let matrix = transition_matrix(&config, &potential).unwrap();
        let run = AsymmetricRun::new(config, potential, state.clone()).unwrap();
        let stepped = asymmetric_step(&run);
        for (r, row) in matrix.iter().enumerate() {
            let dense: Complex64 = row.iter().zip(&state.values).map(|(a, b)| a * b).sum();
            assert!((dense - stepped.state.values[r]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let config = LatticeConfig::new(4, 1.0, 0.1).unwrap();
        assert!(AsymmetricRun::new(config, PotentialProfile::zeros(3), ComplexField::zeros(4)).is_err());
    }
}
