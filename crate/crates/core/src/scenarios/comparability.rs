//! Measurement-disturbance demo on the two-particle pair.
//!
//! Measuring the z spin of the first particle turns the pair's internal
//! state into one of two product states: relative to P1+P2+M, the possible
//! internal states of P1+P2 after the measurement are |1↑⟩|2↓⟩ and
//! |1↓⟩|2↑⟩ with weights |a|² and |b|², and the original entangled state is
//! no longer among them.

use num_complex::Complex64;

use crate::dynamics::{measurement_unitary_embedded, rotated_spin_basis, MeasurementModel};
use crate::error::Result;
use crate::frames::{frame_state, possible_internal_states, PointerMap};
use crate::linalg::layout::{tensor_on_layout, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::apply_unitary;
use crate::linalg::state::StateVector;
use crate::scenarios::{check_normalized_pair, schmidt_coefficients, schmidt_pair_state, Provenance};
use crate::tol;

#[derive(Debug, Clone)]
pub struct ComparabilityResult {
    pub a: Complex64,
    pub b: Complex64,
    /// Possible internal states of P1+P2 after the measurement, relative to
    /// P1+P2+M, with their probabilities.
    pub branch_states: Vec<StateVector>,
    pub branch_probabilities: Vec<f64>,
    /// Whether the premeasurement internal state still appears among the
    /// possible internal states (true only for product inputs).
    pub premeasurement_state_still_possible: bool,
    pub provenance: Provenance,
}

/// Runs the Ŝ_z measurement on P1 of a|1↑⟩|2↓⟩ − b|1↓⟩|2↑⟩.
pub fn comparability_demo(a: Complex64, b: Complex64) -> Result<ComparabilityResult> {
    let c = schmidt_coefficients(a, b);
    check_normalized_pair(&c)?;
    let layout = CompositeLayout::new(vec![("P1", 2), ("P2", 2), ("M", 3)])?;
    let pair = schmidt_pair_state(c)?;
    let pair_set = SubsystemSet::new(vec!["P1", "P2"])?;
    let ready = StateVector::basis(3, 0);
    let psi0 = tensor_on_layout(
        &layout,
        &[(&pair_set, &pair), (&SubsystemSet::single("M"), &ready)],
    )?;

    let (up, down) = rotated_spin_basis(0.0);
    let model = MeasurementModel::new(
        SubsystemSet::single("P1"),
        vec![up, down],
        PointerMap::from_basis("M", 3, &["up", "down"])?,
    )?;
    let u = measurement_unitary_embedded(&model, &layout)?;
    let evolved = apply_unitary(&u, &psi0)?;

    let rho_pair = frame_state(&evolved, &layout, &pair_set)?;
    let ensemble = possible_internal_states(&rho_pair)?;
    let still_possible = ensemble
        .members()
        .iter()
        .any(|m| m.state.overlap_modulus(&pair) > 1.0 - tol::READOUT);

    Ok(ComparabilityResult {
        a,
        b,
        branch_states: ensemble.members().iter().map(|m| m.state.clone()).collect(),
        branch_probabilities: ensemble.members().iter().map(|m| m.probability).collect(),
        premeasurement_state_still_possible: still_possible,
        provenance: Provenance {
            isolated_reference: true,
            degeneracy_flagged: ensemble.has_degeneracy(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_amplitude_pair, rng_from_seed};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn balanced_pair_splits_into_two_product_branches() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let result = comparability_demo(c(inv, 0.0), c(inv, 0.0)).unwrap();
        assert_eq!(result.branch_states.len(), 2);
        for p in &result.branch_probabilities {
            assert!((p - 0.5).abs() < 1e-12);
        }
        // The two branches are |1↑⟩|2↓⟩ and |1↓⟩|2↑⟩ (flat indices 1 and 2).
        let expected = [StateVector::basis(4, 1), StateVector::basis(4, 2)];
        for want in &expected {
            assert!(
                result
                    .branch_states
                    .iter()
                    .any(|got| got.overlap_modulus(want) > 1.0 - 1e-12),
                "missing product branch"
            );
        }
        assert!(!result.premeasurement_state_still_possible);
        assert!(result.provenance.degeneracy_flagged);
    }

    #[test]
    fn product_input_keeps_its_internal_state() {
        let result = comparability_demo(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(result.branch_states.len(), 1);
        assert!((result.branch_probabilities[0] - 1.0).abs() < 1e-12);
        assert!(result.premeasurement_state_still_possible);
    }

    #[test]
    fn branch_probabilities_are_amplitude_moduli_squared() {
        let mut rng = rng_from_seed(31);
        for _ in 0..20 {
            let [a, b] = random_amplitude_pair(&mut rng);
            let result = comparability_demo(a, b).unwrap();
            let mut expected = [a.norm_sqr(), b.norm_sqr()];
            expected.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let got = &result.branch_probabilities;
            assert_eq!(got.len(), 2);
            assert!((got[0] - expected[0]).abs() < 1e-12);
            assert!((got[1] - expected[1]).abs() < 1e-12);
            assert!(!result.premeasurement_state_still_possible);
        }
    }
}
