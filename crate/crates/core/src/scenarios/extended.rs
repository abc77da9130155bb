//! Extended Bell experiment: two extra comparison devices record which
//! Schmidt branch each particle-device pair took.
//!
//! With recorders R1, R2 coupled to the post-measurement Schmidt-label bases
//! of P1+M1 and P2+M2, the four devices are disjoint and the joint
//! probability over (R1, R2, M1, M2) exists. It takes exactly the intuitive
//! product form — and its (M1, M2) marginal is the factorized distribution,
//! not the quantum one: recording the branch labels changes the pair
//! correlations.

use num_complex::Complex64;

use crate::correlations::{joint_distribution, marginalize, JointDistribution};
use crate::dynamics::{
    measurement_unitary, measurement_unitary_embedded, recorder_unitary, rotated_spin_basis,
    MeasurementModel,
};
use crate::error::{Error, Result};
use crate::frames::PointerMap;
use crate::linalg::layout::{embed_operator, tensor_on_layout, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::apply_unitary;
use crate::linalg::state::StateVector;
use crate::scenarios::bell::{
    closed_form, measurement_overlaps, read_device_ensemble, table_by_labels,
};
use crate::scenarios::{
    check_normalized_pair, schmidt_basis_p1, schmidt_basis_p2, schmidt_pair_state, Provenance,
};
use crate::tol;

#[derive(Debug, Clone)]
pub struct ExtendedBellResult {
    pub c: [Complex64; 2],
    pub theta1: f64,
    pub theta2: f64,
    /// Internal state of the whole six-system arrangement after all four
    /// couplings, on (P1, M1, R1, P2, M2, R2).
    pub whole_state: StateVector,
    /// Joint distribution over (R1, R2, M1, M2), label-ordered axes.
    pub table4: JointDistribution,
    /// Largest disagreement of `table4` with the closed product form
    /// |c_{l1}|² δ_{l1,l2} |⟨ξ(P1,j)|φ_{P1,l1}⟩|² |⟨ξ(P2,k)|φ_{P2,l2}⟩|².
    pub closed_form_deviation: f64,
    /// (M1, M2) marginal of `table4`.
    pub pair_marginal: JointDistribution,
    /// Largest disagreement of the pair marginal with the factorized form.
    pub factorized_deviation: f64,
    /// Largest disagreement of the (R1, R2) marginal with |c_l|² δ_{l1,l2}.
    pub schmidt_marginal_deviation: f64,
    /// Largest difference between the pair marginal and the quantum joint
    /// distribution of the plain Bell run at the same angles.
    pub quantum_difference: f64,
    pub provenance: Provenance,
}

pub fn extended_bell_run(
    c: [Complex64; 2],
    theta1: f64,
    theta2: f64,
) -> Result<ExtendedBellResult> {
    check_normalized_pair(&c)?;
    let layout = CompositeLayout::new(vec![
        ("P1", 2),
        ("M1", 3),
        ("R1", 3),
        ("P2", 2),
        ("M2", 3),
        ("R2", 3),
    ])?;
    let pair = schmidt_pair_state(c)?;
    let pair_set = SubsystemSet::new(vec!["P1", "P2"])?;
    let ready = StateVector::basis(3, 0);
    let psi0 = tensor_on_layout(
        &layout,
        &[
            (&pair_set, &pair),
            (&SubsystemSet::single("M1"), &ready),
            (&SubsystemSet::single("R1"), &ready),
            (&SubsystemSet::single("M2"), &ready),
            (&SubsystemSet::single("R2"), &ready),
        ],
    )?;

    let pointer_m1 = PointerMap::from_basis("M1", 3, &["up", "down"])?;
    let pointer_m2 = PointerMap::from_basis("M2", 3, &["up", "down"])?;
    let pointer_r1 = PointerMap::from_basis("R1", 3, &["1", "2"])?;
    let pointer_r2 = PointerMap::from_basis("R2", 3, &["1", "2"])?;

    let (xi1_up, xi1_down) = rotated_spin_basis(theta1);
    let (xi2_up, xi2_down) = rotated_spin_basis(theta2);
    let model1 = MeasurementModel::new(
        SubsystemSet::single("P1"),
        vec![xi1_up, xi1_down],
        pointer_m1.clone(),
    )?;
    let model2 = MeasurementModel::new(
        SubsystemSet::single("P2"),
        vec![xi2_up, xi2_down],
        pointer_m2.clone(),
    )?;

    // Post-measurement Schmidt-label states χ_l = U(φ_l ⊗ m0) on P_i + M_i;
    // recording them is equivalent to recording the initial internal state
    // of P_i.
    let u1_block = measurement_unitary(&model1, &layout)?;
    let u2_block = measurement_unitary(&model2, &layout)?;
    let chi = |u_block: &crate::linalg::matrix::ComplexMatrix,
               basis: &[StateVector; 2]|
     -> Result<Vec<StateVector>> {
        basis
            .iter()
            .map(|phi| apply_unitary(u_block, &phi.tensor(&ready)))
            .collect()
    };
    let chi1 = chi(&u1_block, &schmidt_basis_p1())?;
    let chi2 = chi(&u2_block, &schmidt_basis_p2())?;

    let probe1 = SubsystemSet::new(vec!["P1", "M1"])?;
    let probe2 = SubsystemSet::new(vec!["P2", "M2"])?;
    let ur1 = recorder_unitary(&probe1, &chi1, &pointer_r1, &layout)?;
    let ur2 = recorder_unitary(&probe2, &chi2, &pointer_r2, &layout)?;

    let u1 = measurement_unitary_embedded(&model1, &layout)?;
    let u2 = measurement_unitary_embedded(&model2, &layout)?;
    let ur1 = embed_operator(&ur1, &layout, &probe1.union(&SubsystemSet::single("R1")))?;
    let ur2 = embed_operator(&ur2, &layout, &probe2.union(&SubsystemSet::single("R2")))?;

    let mut evolved = apply_unitary(&u1, &psi0)?;
    evolved = apply_unitary(&u2, &evolved)?;
    evolved = apply_unitary(&ur1, &evolved)?;
    evolved = apply_unitary(&ur2, &evolved)?;

    let r1 = read_device_ensemble(&evolved, &layout, &pointer_r1)?;
    let r2 = read_device_ensemble(&evolved, &layout, &pointer_r2)?;
    let m1 = read_device_ensemble(&evolved, &layout, &pointer_m1)?;
    let m2 = read_device_ensemble(&evolved, &layout, &pointer_m2)?;

    let systems = [
        SubsystemSet::single("R1"),
        SubsystemSet::single("R2"),
        SubsystemSet::single("M1"),
        SubsystemSet::single("M2"),
    ];
    let raw = joint_distribution(
        &evolved,
        &layout,
        &systems,
        &[&r1.ensemble, &r2.ensemble, &m1.ensemble, &m2.ensemble],
    )?;
    let table4 = table_by_labels(&raw, &[&r1, &r2, &m1, &m2])?;

    // Closed product form over (l1, l2, j, k).
    let x1 = measurement_overlaps(theta1, &schmidt_basis_p1());
    let x2 = measurement_overlaps(theta2, &schmidt_basis_p2());
    let weights = [c[0].norm_sqr(), c[1].norm_sqr()];
    let mut closed_form_deviation: f64 = 0.0;
    for l1 in 0..2 {
        for l2 in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let expected = if l1 == l2 {
                        weights[l1] * x1[j][l1] * x1[j][l1] * x2[k][l2] * x2[k][l2]
                    } else {
                        0.0
                    };
                    closed_form_deviation = closed_form_deviation
                        .max((table4.prob(&[l1, l2, j, k]) - expected).abs());
                }
            }
        }
    }
    if closed_form_deviation > tol::SCENARIO_CONSISTENCY {
        return Err(Error::ConsistencyCheck {
            check: "extended joint table vs product form",
            deviation: closed_form_deviation,
            tolerance: tol::SCENARIO_CONSISTENCY,
        });
    }

    let pair_marginal = marginalize(&table4, &[2, 3])?;
    let closed = closed_form(&c, theta1, theta2);
    let mut factorized_deviation: f64 = 0.0;
    let mut quantum_difference: f64 = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            let p = pair_marginal.prob(&[j, k]);
            factorized_deviation = factorized_deviation.max((p - closed.factorized[j][k]).abs());
            quantum_difference = quantum_difference.max((p - closed.quantum[j][k]).abs());
        }
    }
    if factorized_deviation > tol::SCENARIO_CONSISTENCY {
        return Err(Error::ConsistencyCheck {
            check: "extended pair marginal vs factorized form",
            deviation: factorized_deviation,
            tolerance: tol::SCENARIO_CONSISTENCY,
        });
    }

    let schmidt_marginal = marginalize(&table4, &[0, 1])?;
    let mut schmidt_marginal_deviation: f64 = 0.0;
    for l1 in 0..2 {
        for l2 in 0..2 {
            let expected = if l1 == l2 { weights[l1] } else { 0.0 };
            schmidt_marginal_deviation =
                schmidt_marginal_deviation.max((schmidt_marginal.prob(&[l1, l2]) - expected).abs());
        }
    }

    let degeneracy_flagged = [&r1, &r2, &m1, &m2]
        .iter()
        .any(|d| d.ensemble.has_degeneracy());

    Ok(ExtendedBellResult {
        c,
        theta1,
        theta2,
        whole_state: evolved,
        table4,
        closed_form_deviation,
        pair_marginal,
        factorized_deviation,
        schmidt_marginal_deviation,
        quantum_difference,
        provenance: Provenance {
            isolated_reference: true,
            degeneracy_flagged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::singlet_coefficients;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn singlet_table_matches_product_form_and_marginals() {
        let result = extended_bell_run(singlet_coefficients(), 0.0, FRAC_PI_4).unwrap();
        assert!(result.closed_form_deviation < 1e-10);
        assert!(result.factorized_deviation < 1e-10);
        assert!(result.schmidt_marginal_deviation < 1e-10);
    }

    #[test]
    fn recording_changes_the_pair_correlations_off_the_schmidt_axes() {
        // Both settings away from the Schmidt basis: the recorded pair
        // marginal differs from the coherent quantum distribution.
        let result = extended_bell_run(singlet_coefficients(), FRAC_PI_4, FRAC_PI_2).unwrap();
        assert!(
            result.quantum_difference > 0.01,
            "difference {}",
            result.quantum_difference
        );
    }

    #[test]
    fn aligned_first_setting_makes_the_two_forms_coincide() {
        // θ1 = 0 puts ξ(P1) on the Schmidt basis; the quantum and factorized
        // distributions are then equal, so recording changes nothing.
        let result = extended_bell_run(singlet_coefficients(), 0.0, FRAC_PI_4).unwrap();
        assert!(result.quantum_difference < 1e-12);
    }

    #[test]
    fn recorders_never_leave_the_ready_complement_unpopulated() {
        // All recorder weight sits on the two outcome pointers.
        let result = extended_bell_run(singlet_coefficients(), 0.9, 2.1).unwrap();
        let total: f64 = result
            .table4
            .probabilities()
            .iter()
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_draws_satisfy_the_internal_assertions() {
        let mut rng = crate::random::rng_from_seed(41);
        for _ in 0..5 {
            let state = crate::random::random_state_vector(2, &mut rng);
            let c = [state.amplitude(0), state.amplitude(1)];
            let theta1 = rand::Rng::gen::<f64>(&mut rng) * std::f64::consts::TAU;
            let theta2 = rand::Rng::gen::<f64>(&mut rng) * std::f64::consts::TAU;
            let result = extended_bell_run(c, theta1, theta2).unwrap();
            assert!(result.closed_form_deviation <= 1e-10);
            assert!(result.factorized_deviation <= 1e-10);
        }
    }
}
