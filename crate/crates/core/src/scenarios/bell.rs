//! Bell scenario: both particles of a Schmidt pair measured along their own
//! axes, with the joint outcome statistics computed two ways.
//!
//! The quantum joint distribution (coherent sum over Schmidt terms) is
//! produced by the full pipeline — premeasurement unitaries, then the joint
//! probabilities of the device internal states — and checked against its
//! closed form. The factorized distribution (what a joint distribution over
//! particle and device states would force) is computed alongside; the two
//! differ except when a measurement is aligned with the Schmidt basis.

use num_complex::Complex64;

use crate::correlations::{joint_distribution, JointDistribution};
use crate::dynamics::{measurement_unitary_embedded, rotated_spin_basis, MeasurementModel};
use crate::error::{Error, Result};
use crate::frames::{
    frame_state, possible_internal_states, readout, InternalStateEnsemble, PointerMap, Readout,
};
use crate::linalg::layout::{tensor_on_layout, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::apply_unitary;
use crate::linalg::state::StateVector;
use crate::scenarios::{
    check_normalized_pair, schmidt_basis_p1, schmidt_basis_p2, schmidt_pair_state, Provenance,
};
use crate::tol;

/// Closed-form Bell statistics for measurement angles (θ1, θ2).
#[derive(Debug, Clone)]
pub struct BellClosedForm {
    /// P(M1, j) = Σ_l |c_l|² |⟨ξ(P1,j)|φ_{P1,l}⟩|²
    pub marginal1: [f64; 2],
    pub marginal2: [f64; 2],
    /// P(M1, j, M2, k) = |Σ_l c_l ⟨ξ(P1,j)|φ_{P1,l}⟩⟨ξ(P2,k)|φ_{P2,l}⟩|²
    pub quantum: [[f64; 2]; 2],
    /// Σ_l |c_l|² |⟨ξ(P1,j)|φ_{P1,l}⟩|² |⟨ξ(P2,k)|φ_{P2,l}⟩|²
    pub factorized: [[f64; 2]; 2],
}

/// Overlaps x[j][l] = ⟨ξ(θ, j)|φ_l⟩ of the measured basis with a Schmidt
/// basis (all real in this convention).
pub(crate) fn measurement_overlaps(theta: f64, schmidt: &[StateVector; 2]) -> [[f64; 2]; 2] {
    let (up, down) = rotated_spin_basis(theta);
    let xi = [up, down];
    let mut x = [[0.0; 2]; 2];
    for (j, row) in x.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            *slot = xi[j].inner(&schmidt[l]).re;
        }
    }
    x
}

pub fn closed_form(c: &[Complex64; 2], theta1: f64, theta2: f64) -> BellClosedForm {
    let x1 = measurement_overlaps(theta1, &schmidt_basis_p1());
    let x2 = measurement_overlaps(theta2, &schmidt_basis_p2());
    let weights = [c[0].norm_sqr(), c[1].norm_sqr()];
    let mut marginal1 = [0.0; 2];
    let mut marginal2 = [0.0; 2];
    let mut quantum = [[0.0; 2]; 2];
    let mut factorized = [[0.0; 2]; 2];
    for j in 0..2 {
        for l in 0..2 {
            marginal1[j] += weights[l] * x1[j][l] * x1[j][l];
            marginal2[j] += weights[l] * x2[j][l] * x2[j][l];
        }
        for k in 0..2 {
            let amplitude: Complex64 = (0..2).map(|l| c[l] * x1[j][l] * x2[k][l]).sum();
            quantum[j][k] = amplitude.norm_sqr();
            factorized[j][k] = (0..2)
                .map(|l| weights[l] * x1[j][l] * x1[j][l] * x2[k][l] * x2[k][l])
                .sum();
        }
    }
    BellClosedForm {
        marginal1,
        marginal2,
        quantum,
        factorized,
    }
}

/// A device ensemble whose members have been identified with outcome labels
/// by pointer readout.
pub(crate) struct LabeledEnsemble {
    pub ensemble: InternalStateEnsemble,
    /// member index → outcome label index in the pointer's order
    pub label_of_member: Vec<usize>,
    pub labels: Vec<String>,
}

impl LabeledEnsemble {
    pub fn probabilities_by_label(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.labels.len()];
        for (member, &label) in self.label_of_member.iter().enumerate() {
            out[label] = self.ensemble.members()[member].probability;
        }
        out
    }
}

/// Reads the possible internal states of a device and matches each to an
/// outcome pointer state.
pub(crate) fn read_device_ensemble(
    evolved: &StateVector,
    layout: &CompositeLayout,
    pointer: &PointerMap,
) -> Result<LabeledEnsemble> {
    let device = SubsystemSet::single(pointer.device_label());
    let rho = frame_state(evolved, layout, &device)?;
    let ensemble = possible_internal_states(&rho)?;
    let labels: Vec<String> = pointer
        .outcome_labels()
        .iter()
        .map(|l| l.to_string())
        .collect();
    let mut label_of_member = Vec::with_capacity(ensemble.len());
    for member in ensemble.members() {
        match readout(&member.state, pointer) {
            Readout::Outcome(label) => {
                let index = labels
                    .iter()
                    .position(|l| *l == label)
                    .expect("readout labels come from the pointer");
                label_of_member.push(index);
            }
            _ => {
                return Err(Error::ConsistencyCheck {
                    check: "device internal state is an outcome pointer state",
                    deviation: 1.0,
                    tolerance: tol::READOUT,
                })
            }
        }
    }
    Ok(LabeledEnsemble {
        ensemble,
        label_of_member,
        labels,
    })
}

/// Reindexes a joint table from ensemble-member order to pointer-label order
/// on every axis, filling zero rows for outcomes whose ensemble member was
/// cut off at zero probability.
pub(crate) fn table_by_labels(
    jd: &JointDistribution,
    devices: &[&LabeledEnsemble],
) -> Result<JointDistribution> {
    assert_eq!(jd.shape().len(), devices.len());
    let shape: Vec<usize> = devices.iter().map(|d| d.labels.len()).collect();
    let total: usize = shape.iter().product();
    let mut table = vec![0.0; total];
    let old_shape = jd.shape().to_vec();
    let old_total: usize = old_shape.iter().product();
    for old_flat in 0..old_total {
        let mut new_flat = 0;
        for (axis, device) in devices.iter().enumerate() {
            let stride: usize = old_shape[axis + 1..].iter().product();
            let member = (old_flat / stride) % old_shape[axis];
            new_flat = new_flat * shape[axis] + device.label_of_member[member];
        }
        table[new_flat] = jd.probabilities()[old_flat];
    }
    JointDistribution::new(
        jd.systems().to_vec(),
        devices.iter().map(|d| d.labels.clone()).collect(),
        table,
        jd.basis_ambiguous(),
    )
}

pub(crate) struct BellPipeline {
    pub layout: CompositeLayout,
    pub evolved: StateVector,
    pub pointer1: PointerMap,
    pub pointer2: PointerMap,
}

/// Builds (Σ_j c_j φ_{P1,j} φ_{P2,j}) |m0⟩|m0⟩ on (P1, M1, P2, M2) and
/// applies both premeasurement unitaries.
pub(crate) fn evolve_pair(
    c: [Complex64; 2],
    theta1: f64,
    theta2: f64,
) -> Result<BellPipeline> {
    let layout = CompositeLayout::new(vec![("P1", 2), ("M1", 3), ("P2", 2), ("M2", 3)])?;
    let pair = schmidt_pair_state(c)?;
    let pair_set = SubsystemSet::new(vec!["P1", "P2"])?;
    let ready1 = StateVector::basis(3, 0);
    let ready2 = StateVector::basis(3, 0);
    let psi0 = tensor_on_layout(
        &layout,
        &[
            (&pair_set, &pair),
            (&SubsystemSet::single("M1"), &ready1),
            (&SubsystemSet::single("M2"), &ready2),
        ],
    )?;
    let pointer1 = PointerMap::from_basis("M1", 3, &["up", "down"])?;
    let pointer2 = PointerMap::from_basis("M2", 3, &["up", "down"])?;
    let (xi1_up, xi1_down) = rotated_spin_basis(theta1);
    let (xi2_up, xi2_down) = rotated_spin_basis(theta2);
    let model1 = MeasurementModel::new(
        SubsystemSet::single("P1"),
        vec![xi1_up, xi1_down],
        pointer1.clone(),
    )?;
    let model2 = MeasurementModel::new(
        SubsystemSet::single("P2"),
        vec![xi2_up, xi2_down],
        pointer2.clone(),
    )?;
    let u1 = measurement_unitary_embedded(&model1, &layout)?;
    let u2 = measurement_unitary_embedded(&model2, &layout)?;
    let evolved = apply_unitary(&u2, &apply_unitary(&u1, &psi0)?)?;
    Ok(BellPipeline {
        layout,
        evolved,
        pointer1,
        pointer2,
    })
}

#[derive(Debug, Clone)]
pub struct BellResult {
    pub c: [Complex64; 2],
    pub theta1: f64,
    pub theta2: f64,
    /// Pipeline outcome probabilities of M1 in label order (up, down).
    pub marginal1: [f64; 2],
    /// Pipeline joint distribution of (M1, M2), label-ordered axes.
    pub joint_quantum: JointDistribution,
    /// Closed-form factorized distribution on the same axes.
    pub joint_factorized: JointDistribution,
    /// Largest disagreement between closed form and pipeline (marginal and
    /// joint entries).
    pub dual_path_deviation: f64,
    /// Max change of M1's outcome probabilities when θ2 shifts by π/3.
    pub no_signaling_deviation: f64,
    pub provenance: Provenance,
}

pub fn bell_run(c: [Complex64; 2], theta1: f64, theta2: f64) -> Result<BellResult> {
    check_normalized_pair(&c)?;
    let pipeline = evolve_pair(c, theta1, theta2)?;
    let m1 = read_device_ensemble(&pipeline.evolved, &pipeline.layout, &pipeline.pointer1)?;
    let m2 = read_device_ensemble(&pipeline.evolved, &pipeline.layout, &pipeline.pointer2)?;

    let systems = [SubsystemSet::single("M1"), SubsystemSet::single("M2")];
    let raw = joint_distribution(
        &pipeline.evolved,
        &pipeline.layout,
        &systems,
        &[&m1.ensemble, &m2.ensemble],
    )?;
    let joint_quantum = table_by_labels(&raw, &[&m1, &m2])?;

    let closed = closed_form(&c, theta1, theta2);
    let marginal_pipeline = m1.probabilities_by_label();
    let mut dual_path_deviation: f64 = 0.0;
    for j in 0..2 {
        dual_path_deviation =
            dual_path_deviation.max((marginal_pipeline[j] - closed.marginal1[j]).abs());
        for k in 0..2 {
            dual_path_deviation =
                dual_path_deviation.max((joint_quantum.prob(&[j, k]) - closed.quantum[j][k]).abs());
        }
    }
    if dual_path_deviation > tol::SCENARIO_CONSISTENCY {
        return Err(Error::ConsistencyCheck {
            check: "bell closed form vs pipeline",
            deviation: dual_path_deviation,
            tolerance: tol::SCENARIO_CONSISTENCY,
        });
    }

    // Outcome statistics of M1 with the far setting changed.
    let shifted = evolve_pair(c, theta1, theta2 + std::f64::consts::FRAC_PI_3)?;
    let m1_shifted = read_device_ensemble(&shifted.evolved, &shifted.layout, &shifted.pointer1)?;
    let shifted_marginal = m1_shifted.probabilities_by_label();
    let no_signaling_deviation = marginal_pipeline
        .iter()
        .zip(&shifted_marginal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let degeneracy_flagged = m1.ensemble.has_degeneracy() || m2.ensemble.has_degeneracy();
    let labels = vec![
        vec!["up".to_string(), "down".to_string()],
        vec!["up".to_string(), "down".to_string()],
    ];
    let joint_factorized = JointDistribution::new(
        vec!["M1".into(), "M2".into()],
        labels,
        closed.factorized.iter().flatten().copied().collect(),
        degeneracy_flagged,
    )?;

    Ok(BellResult {
        c,
        theta1,
        theta2,
        marginal1: [marginal_pipeline[0], marginal_pipeline[1]],
        joint_quantum,
        joint_factorized,
        dual_path_deviation,
        no_signaling_deviation,
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
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn singlet_at_equal_angles_is_perfectly_anticorrelated() {
        let result = bell_run(singlet_coefficients(), 0.9, 0.9).unwrap();
        assert!(result.joint_quantum.prob(&[0, 0]) < 1e-12);
        assert!(result.joint_quantum.prob(&[1, 1]) < 1e-12);
        assert!((result.joint_quantum.prob(&[0, 1]) - 0.5).abs() < 1e-12);
        assert!((result.joint_quantum.prob(&[1, 0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn schmidt_basis_measurement_reproduces_schmidt_pairing() {
        // θ = 0 on both: outcome k on M2 identifies Schmidt index via the
        // (↓, ↑) pairing, so the table is |c_j|² on the paired entries and
        // the quantum and factorized forms coincide.
        let c = [Complex64::new(0.6, 0.0), Complex64::new(-0.8, 0.0)];
        let result = bell_run(c, 0.0, 0.0).unwrap();
        assert!(result.joint_quantum.prob(&[0, 0]) < 1e-12);
        assert!(result.joint_quantum.prob(&[1, 1]) < 1e-12);
        assert!((result.joint_quantum.prob(&[0, 1]) - 0.36).abs() < 1e-12);
        assert!((result.joint_quantum.prob(&[1, 0]) - 0.64).abs() < 1e-12);
        for j in 0..2 {
            for k in 0..2 {
                assert!(
                    (result.joint_quantum.prob(&[j, k])
                        - result.joint_factorized.prob(&[j, k]))
                    .abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn single_schmidt_term_factorizes_into_marginals() {
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let result = bell_run(c, 0.7, 1.9).unwrap();
        let closed = closed_form(&c, 0.7, 1.9);
        for j in 0..2 {
            for k in 0..2 {
                let expected = closed.marginal1[j] * closed.marginal2[k];
                assert!((result.joint_quantum.prob(&[j, k]) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vanished_outcomes_fill_zero_rows() {
        // c = (1, 0) at θ1 = 0: M1 always reads "up", its ensemble has one
        // member, and the missing "down" row is zero-filled.
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let theta2 = 1.1;
        let result = bell_run(c, 0.0, theta2).unwrap();
        assert!((result.marginal1[0] - 1.0).abs() < 1e-12);
        assert!(result.marginal1[1].abs() < 1e-12);
        assert!(result.joint_quantum.prob(&[1, 0]).abs() < 1e-14);
        assert!(result.joint_quantum.prob(&[1, 1]).abs() < 1e-14);
        let half = theta2 / 2.0;
        assert!((result.joint_quantum.prob(&[0, 0]) - half.sin().powi(2)).abs() < 1e-12);
        assert!((result.joint_quantum.prob(&[0, 1]) - half.cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn marginal_of_quantum_table_matches_closed_marginal() {
        let c = [Complex64::new(0.48, 0.36), Complex64::new(0.64, -0.48)];
        let result = bell_run(c, 1.3, 2.2).unwrap();
        let closed = closed_form(&c, 1.3, 2.2);
        for j in 0..2 {
            let row: f64 =
                result.joint_quantum.prob(&[j, 0]) + result.joint_quantum.prob(&[j, 1]);
            assert!((row - closed.marginal1[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_is_independent_of_the_far_setting() {
        let result = bell_run(singlet_coefficients(), 0.4, FRAC_PI_4).unwrap();
        assert!(result.no_signaling_deviation < 1e-12);
    }

    #[test]
    fn random_draws_pass_the_internal_dual_path_assertion() {
        let mut rng = crate::random::rng_from_seed(23);
        for _ in 0..10 {
            let state = crate::random::random_state_vector(2, &mut rng);
            let c = [state.amplitude(0), state.amplitude(1)];
            let theta1 = rand::Rng::gen::<f64>(&mut rng) * std::f64::consts::TAU;
            let theta2 = rand::Rng::gen::<f64>(&mut rng) * std::f64::consts::TAU;
            let result = bell_run(c, theta1, theta2).unwrap();
            assert!(result.dual_path_deviation <= tol::SCENARIO_CONSISTENCY);
        }
    }
}
