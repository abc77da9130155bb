//! Unitary evolution of closed systems and ideal premeasurement couplings.
//!
//! A measurement is the entangling evolution |ξ_j⟩|m_0⟩ → |ξ_j⟩|m_j⟩ between
//! a measured orthonormal basis on the probe and the pointer states of a
//! device. The returned operator is completed off the ready sector with the
//! swap m_0 ↔ m_j, which is the simplest exactly-unitary extension; scenario
//! states never populate those sectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::PointerMap;
use crate::linalg::layout::{embed_operator, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::{apply_unitary, ComplexMatrix};
use crate::linalg::state::StateVector;
use crate::tol;

/// An ideal measurement: a probe, the orthonormal basis measured on it, and
/// the device pointer states recording the outcome.
///
/// Basis completeness (count = probe dimension) and the device's local
/// dimension are validated against the layout in [`measurement_unitary`].
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    probe: SubsystemSet,
    measured_basis: Vec<StateVector>,
    pointer: PointerMap,
}

impl MeasurementModel {
    pub fn new(
        probe: SubsystemSet,
        measured_basis: Vec<StateVector>,
        pointer: PointerMap,
    ) -> Result<Self> {
        if probe.is_empty() || measured_basis.is_empty() {
            return Err(Error::EmptySelection);
        }
        if measured_basis.len() != pointer.outcomes().len() {
            return Err(Error::DimensionMismatch {
                context: "outcome count vs measured basis",
                expected: measured_basis.len(),
                actual: pointer.outcomes().len(),
            });
        }
        check_orthonormal(&measured_basis)?;
        Ok(Self {
            probe,
            measured_basis,
            pointer,
        })
    }

    pub fn probe(&self) -> &SubsystemSet {
        &self.probe
    }

    pub fn measured_basis(&self) -> &[StateVector] {
        &self.measured_basis
    }

    pub fn pointer(&self) -> &PointerMap {
        &self.pointer
    }

    pub fn device_label(&self) -> &str {
        self.pointer.device_label()
    }

    /// Probe plus device, as a subsystem set.
    pub fn coupled_systems(&self) -> SubsystemSet {
        self.probe
            .union(&SubsystemSet::single(self.pointer.device_label()))
    }
}

fn check_orthonormal(states: &[StateVector]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (k, a) in states.iter().enumerate() {
        deviation = deviation.max((a.norm() - 1.0).abs());
        for b in &states[..k] {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch {
                    context: "basis state dimensions",
                    expected: b.dim(),
                    actual: a.dim(),
                });
            }
            deviation = deviation.max(a.overlap_modulus(b));
        }
    }
    if deviation > tol::ORTHONORMALITY {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// Swap permutation of the device space exchanging `ready` with the given
/// outcome pointer and fixing everything orthogonal to the pair.
fn pointer_swap(ready: &StateVector, outcome: &StateVector) -> ComplexMatrix {
    let dim = ready.dim();
    let mut swap = ComplexMatrix::identity(dim);
    let sub = |m: &mut ComplexMatrix, p: &ComplexMatrix, sign: f64| {
        for i in 0..dim {
            for j in 0..dim {
                let v = m.get(i, j) + p.get(i, j) * Complex64::new(sign, 0.0);
                m.set(i, j, v);
            }
        }
    };
    sub(&mut swap, &ready.projector(), -1.0);
    sub(&mut swap, &outcome.projector(), -1.0);
    let cross = ComplexMatrix::from_fn(dim, dim, |i, j| {
        ready.amplitude(i) * outcome.amplitude(j).conj()
            + outcome.amplitude(i) * ready.amplitude(j).conj()
    });
    sub(&mut swap, &cross, 1.0);
    swap
}

/// Couples probe states to pointer swaps: Σ_l |χ_l⟩⟨χ_l| ⊗ Π_l, padded with
/// identity-on-device over the orthogonal complement of the χ span. Built on
/// the (probe…, device) ordering; `reorder` fixes the layout order afterward.
fn couple_states_to_pointer(
    probe_states: &[StateVector],
    pointer: &PointerMap,
) -> ComplexMatrix {
    let probe_dim = probe_states[0].dim();
    let device_dim = pointer.dim();
    let mut u = ComplexMatrix::zeros(probe_dim * device_dim, probe_dim * device_dim);
    let mut span = ComplexMatrix::zeros(probe_dim, probe_dim);
    for (chi, (_, outcome)) in probe_states.iter().zip(pointer.outcomes()) {
        let swap = pointer_swap(pointer.ready(), outcome);
        u = u.add(&chi.projector().kron(&swap));
        span = span.add(&chi.projector());
    }
    let complement = ComplexMatrix::identity(probe_dim).sub(&span);
    u.add(&complement.kron(&ComplexMatrix::identity(device_dim)))
}

/// Reindexes an operator expressed on the (probe…, device) composite into the
/// layout order of the union sub-layout.
fn reorder_to_layout(
    op: ComplexMatrix,
    layout: &CompositeLayout,
    probe: &SubsystemSet,
    device: &str,
) -> Result<ComplexMatrix> {
    let union = probe.union(&SubsystemSet::single(device));
    let target = layout.sub_layout(&union)?;
    // Construction order: probe subsystems in layout order, then the device.
    let mut build_order: Vec<&str> = layout
        .labels()
        .filter(|l| probe.contains(l))
        .collect();
    build_order.push(device);
    if build_order
        .iter()
        .zip(target.labels())
        .all(|(a, b)| *a == b)
    {
        return Ok(op); // device already last in layout order
    }
    let dims = target.dims();
    let target_strides = target.strides();
    // Stride of each label inside the construction ordering.
    let build_dims: Vec<usize> = build_order
        .iter()
        .map(|l| target.dim_of(l).expect("label in target"))
        .collect();
    let mut build_strides = vec![1usize; build_order.len()];
    for k in (0..build_order.len().saturating_sub(1)).rev() {
        build_strides[k] = build_strides[k + 1] * build_dims[k + 1];
    }
    let total = target.total_dim();
    let mut map = vec![0usize; total];
    for (target_flat, slot) in map.iter_mut().enumerate() {
        let mut build_flat = 0;
        for (pos, label) in target.labels().enumerate() {
            let digit = (target_flat / target_strides[pos]) % dims[pos];
            let bpos = build_order
                .iter()
                .position(|l| *l == label)
                .expect("same label set");
            build_flat += digit * build_strides[bpos];
        }
        *slot = build_flat;
    }
    Ok(ComplexMatrix::from_fn(total, total, |i, j| {
        op.get(map[i], map[j])
    }))
}

/// The premeasurement unitary U = Σ_j |ξ_j⟩⟨ξ_j| ⊗ Π_j on probe + device,
/// expressed on their sub-layout in layout order.
///
/// Requires the measured basis to be complete (count = probe dimension) and
/// the device local dimension to be at least outcomes + 1.
pub fn measurement_unitary(
    model: &MeasurementModel,
    layout: &CompositeLayout,
) -> Result<ComplexMatrix> {
    let probe_dim = layout.sub_layout(model.probe())?.total_dim();
    if model.measured_basis().len() != probe_dim {
        return Err(Error::IncompleteBasis {
            provided: model.measured_basis().len(),
            required: probe_dim,
        });
    }
    let device_dim = layout.dim_of(model.device_label())?;
    let required = model.measured_basis().len() + 1;
    if device_dim < required {
        return Err(Error::DeviceTooSmall {
            label: model.device_label().to_string(),
            dim: device_dim,
            required,
        });
    }
    if model.pointer().dim() != device_dim {
        return Err(Error::DimensionMismatch {
            context: "pointer state dimension vs device",
            expected: device_dim,
            actual: model.pointer().dim(),
        });
    }
    if model.measured_basis()[0].dim() != probe_dim {
        return Err(Error::DimensionMismatch {
            context: "measured basis dimension vs probe",
            expected: probe_dim,
            actual: model.measured_basis()[0].dim(),
        });
    }
    let u = couple_states_to_pointer(model.measured_basis(), model.pointer());
    reorder_to_layout(u, layout, model.probe(), model.device_label())
}

/// [`measurement_unitary`] embedded into the full layout, acting as identity
/// on every subsystem outside probe + device.
pub fn measurement_unitary_embedded(
    model: &MeasurementModel,
    layout: &CompositeLayout,
) -> Result<ComplexMatrix> {
    let u = measurement_unitary(model, layout)?;
    embed_operator(&u, layout, &model.coupled_systems())
}

/// Records which of a set of orthonormal probe states holds, without
/// requiring the set to span the probe: Σ_l |χ_l⟩⟨χ_l| ⊗ Π_l plus identity on
/// the orthogonal complement. Used for comparison devices that record a
/// label, e.g. the Schmidt branch of an already-measured pair.
pub fn recorder_unitary(
    probe: &SubsystemSet,
    recorded_states: &[StateVector],
    pointer: &PointerMap,
    layout: &CompositeLayout,
) -> Result<ComplexMatrix> {
    if probe.is_empty() || recorded_states.is_empty() {
        return Err(Error::EmptySelection);
    }
    if recorded_states.len() != pointer.outcomes().len() {
        return Err(Error::DimensionMismatch {
            context: "outcome count vs recorded states",
            expected: recorded_states.len(),
            actual: pointer.outcomes().len(),
        });
    }
    check_orthonormal(recorded_states)?;
    let probe_dim = layout.sub_layout(probe)?.total_dim();
    if recorded_states[0].dim() != probe_dim {
        return Err(Error::DimensionMismatch {
            context: "recorded state dimension vs probe",
            expected: probe_dim,
            actual: recorded_states[0].dim(),
        });
    }
    let device_dim = layout.dim_of(pointer.device_label())?;
    if device_dim < recorded_states.len() + 1 {
        return Err(Error::DeviceTooSmall {
            label: pointer.device_label().to_string(),
            dim: device_dim,
            required: recorded_states.len() + 1,
        });
    }
    let u = couple_states_to_pointer(recorded_states, pointer);
    reorder_to_layout(u, layout, probe, pointer.device_label())
}

/// Unitary evolution of a closed system's internal state.
pub fn evolve_closed(psi: &StateVector, u: &ComplexMatrix) -> Result<StateVector> {
    apply_unitary(u, psi)
}

/// The two eigenstates of the spin component along the axis obtained from z
/// by a rotation at the given angle:
///   |δ,↑⟩ = cos(δ/2)|↑⟩ − sin(δ/2)|↓⟩
///   |δ,↓⟩ = sin(δ/2)|↑⟩ + cos(δ/2)|↓⟩
pub fn rotated_spin_basis(delta: f64) -> (StateVector, StateVector) {
    let (half_sin, half_cos) = (delta / 2.0).sin_cos();
    let up = StateVector::new(vec![
        Complex64::new(half_cos, 0.0),
        Complex64::new(-half_sin, 0.0),
    ])
    .expect("unit by construction");
    let down = StateVector::new(vec![
        Complex64::new(half_sin, 0.0),
        Complex64::new(half_cos, 0.0),
    ])
    .expect("unit by construction");
    (up, down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::layout::{partial_trace, tensor_on_layout};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spin_model(probe_label: &str, device_label: &str, delta: f64) -> MeasurementModel {
        let (up, down) = rotated_spin_basis(delta);
        MeasurementModel::new(
            SubsystemSet::single(probe_label),
            vec![up, down],
            PointerMap::from_basis(device_label, 3, &["up", "down"]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn spin_measurement_entangles_pointer() {
        // (α|↑⟩ + β|↓⟩)|m0⟩ → α|↑⟩|m↑⟩ + β|↓⟩|m↓⟩
        let layout = CompositeLayout::new(vec![("P", 2), ("M", 3)]).unwrap();
        let model = spin_model("P", "M", 0.0);
        let u = measurement_unitary(&model, &layout).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let particle = StateVector::new(vec![alpha, beta]).unwrap();
        let psi0 = particle.tensor(&StateVector::basis(3, 0));
        let psi = apply_unitary(&u, &psi0).unwrap();
        let mut expected = vec![c(0.0, 0.0); 6];
        expected[1] = alpha; // |↑⟩|m↑⟩
        expected[5] = beta; // |↓⟩|m↓⟩
        for (got, want) in psi.amplitudes().iter().zip(&expected) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn device_coupled_to_first_particle_only() {
        // (a|1↑⟩|2↓⟩ − b|1↓⟩|2↑⟩)|m0⟩ → a|1↑⟩|2↓⟩|m↑⟩ − b|1↓⟩|2↑⟩|m↓⟩,
        // with the device interleaved as (P1, P2, M).
        let layout = CompositeLayout::new(vec![("P1", 2), ("P2", 2), ("M", 3)]).unwrap();
        let model = spin_model("P1", "M", 0.0);
        let u = measurement_unitary_embedded(&model, &layout).unwrap();
        let (a, b) = (0.6, 0.8);
        let pair = StateVector::new(vec![c(0.0, 0.0), c(a, 0.0), c(-b, 0.0), c(0.0, 0.0)]).unwrap();
        let pair_set = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let m_set = SubsystemSet::single("M");
        let ready = StateVector::basis(3, 0);
        let psi0 = tensor_on_layout(&layout, &[(&pair_set, &pair), (&m_set, &ready)]).unwrap();
        let psi = apply_unitary(&u, &psi0).unwrap();
        // |1↑,2↓,m↑⟩ = (0·2 + 1)·3 + 1 = 4; |1↓,2↑,m↓⟩ = (1·2 + 0)·3 + 2 = 8.
        assert!((psi.amplitude(4) - c(a, 0.0)).norm() < 1e-14);
        assert!((psi.amplitude(8) - c(-b, 0.0)).norm() < 1e-14);
        let weight: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 4 && *k != 8)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(weight < 1e-28);
    }

    #[test]
    fn device_listed_before_probe_reorders_correctly() {
        // Layout (M, P): the returned unitary lives on the layout order, so
        // |m0⟩(α|↑⟩ + β|↓⟩) → α|m↑⟩|↑⟩ + β|m↓⟩|↓⟩.
        let layout = CompositeLayout::new(vec![("M", 3), ("P", 2)]).unwrap();
        let model = spin_model("P", "M", 0.0);
        let u = measurement_unitary(&model, &layout).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let particle = StateVector::new(vec![alpha, beta]).unwrap();
        let psi0 = StateVector::basis(3, 0).tensor(&particle);
        let psi = apply_unitary(&u, &psi0).unwrap();
        // |m↑⟩|↑⟩ = 1·2 + 0 = 2; |m↓⟩|↓⟩ = 2·2 + 1 = 5.
        assert!((psi.amplitude(2) - alpha).norm() < 1e-14);
        assert!((psi.amplitude(5) - beta).norm() < 1e-14);
        let rest: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 2 && *k != 5)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(rest < 1e-28);
    }

    #[test]
    fn measurement_unitary_is_unitary_for_rotated_bases() {
        let layout = CompositeLayout::new(vec![("P", 2), ("M", 3)]).unwrap();
        for k in 0..8 {
            let delta = k as f64 * PI / 4.0 + 0.1;
            let model = spin_model("P", "M", delta);
            let u = measurement_unitary(&model, &layout).unwrap();
            assert!(u.unitarity_deviation() < 1e-12, "delta = {delta}");
        }
    }

    #[test]
    fn incomplete_basis_and_small_device_are_rejected() {
        let layout = CompositeLayout::new(vec![("P", 2), ("M", 3)]).unwrap();
        let (up, _) = rotated_spin_basis(0.0);
        let model = MeasurementModel::new(
            SubsystemSet::single("P"),
            vec![up],
            PointerMap::from_basis("M", 3, &["up"]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            measurement_unitary(&model, &layout),
            Err(Error::IncompleteBasis { .. })
        ));

        let small = CompositeLayout::new(vec![("P", 2), ("M", 2)]).unwrap();
        let model = spin_model("P", "M", 0.0);
        assert!(matches!(
            measurement_unitary(&model, &small),
            Err(Error::DeviceTooSmall { .. })
        ));
    }

    #[test]
    fn distinct_branches_map_to_orthogonal_pointer_states() {
        let layout = CompositeLayout::new(vec![("P", 2), ("M", 3)]).unwrap();
        let model = spin_model("P", "M", 0.83);
        let u = measurement_unitary(&model, &layout).unwrap();
        let ready = StateVector::basis(3, 0);
        let images: Vec<StateVector> = model
            .measured_basis()
            .iter()
            .map(|xi| apply_unitary(&u, &xi.tensor(&ready)).unwrap())
            .collect();
        // ⟨ξ_0 m_?|ξ_1 m_?⟩ = 0 because the pointer branches are orthogonal.
        assert!(images[0].overlap_modulus(&images[1]) < 1e-12);
    }

    #[test]
    fn rotated_basis_limits_and_orthonormality() {
        let (up0, down0) = rotated_spin_basis(0.0);
        assert!(up0.overlap_modulus(&StateVector::basis(2, 0)) > 1.0 - 1e-15);
        assert!(down0.overlap_modulus(&StateVector::basis(2, 1)) > 1.0 - 1e-15);
        let (up_pi, down_pi) = rotated_spin_basis(PI);
        // δ = π → {−|↓⟩, |↑⟩} in the stated sign convention.
        assert!((up_pi.amplitude(1) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((down_pi.amplitude(0) - c(1.0, 0.0)).norm() < 1e-15);
        for k in 0..16 {
            let delta = k as f64 * 0.41;
            let (up, down) = rotated_spin_basis(delta);
            assert!(up.inner(&down).norm() < 1e-12);
            assert!((up.norm() - 1.0).abs() < 1e-12);
            assert!((down.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_evolution_matches_monolithic_embedding() {
        // U(P1+M1) ⊗ U(P2+M2) applied branch by branch equals the embedded
        // product on the full layout.
        let layout =
            CompositeLayout::new(vec![("P1", 2), ("M1", 3), ("P2", 2), ("M2", 3)]).unwrap();
        let m1 = spin_model("P1", "M1", 0.37);
        let m2 = spin_model("P2", "M2", 1.21);
        let u1 = measurement_unitary(&m1, &layout).unwrap();
        let u2 = measurement_unitary(&m2, &layout).unwrap();
        // Layout is ordered (P1, M1, P2, M2), so the kron of the two block
        // unitaries is the whole evolution.
        let monolithic = u1.kron(&u2);
        let e1 = measurement_unitary_embedded(&m1, &layout).unwrap();
        let e2 = measurement_unitary_embedded(&m2, &layout).unwrap();
        let sequential = e2.mul(&e1).unwrap();
        assert!(monolithic.max_abs_diff(&sequential) < 1e-12);

        let pair = StateVector::new(vec![
            c(0.0, 0.0),
            c(0.6, 0.0),
            c(-0.8, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        let pair_set = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let ready1 = StateVector::basis(3, 0);
        let ready2 = StateVector::basis(3, 0);
        let psi0 = tensor_on_layout(
            &layout,
            &[
                (&pair_set, &pair),
                (&SubsystemSet::single("M1"), &ready1),
                (&SubsystemSet::single("M2"), &ready2),
            ],
        )
        .unwrap();
        let via_mono = evolve_closed(&psi0, &monolithic).unwrap();
        let via_seq = evolve_closed(&evolve_closed(&psi0, &e1).unwrap(), &e2).unwrap();
        assert!(via_mono.overlap_modulus(&via_seq) > 1.0 - 1e-12);
    }

    #[test]
    fn pair_evolution_equals_the_per_branch_sum() {
        // Σ_j c_j U1(φ_{P1,j}|m0⟩) ⊗ U2(φ_{P2,j}|m0⟩) against the evolved
        // whole state, branch by branch.
        let layout =
            CompositeLayout::new(vec![("P1", 2), ("M1", 3), ("P2", 2), ("M2", 3)]).unwrap();
        let m1 = spin_model("P1", "M1", 0.45);
        let m2 = spin_model("P2", "M2", 1.9);
        let u1 = measurement_unitary(&m1, &layout).unwrap();
        let u2 = measurement_unitary(&m2, &layout).unwrap();
        let coefficients = [c(0.6, 0.0), c(-0.8, 0.0)];
        let phi_p1 = [StateVector::basis(2, 0), StateVector::basis(2, 1)];
        let phi_p2 = [StateVector::basis(2, 1), StateVector::basis(2, 0)];
        let ready = StateVector::basis(3, 0);

        let mut branch_sum = vec![c(0.0, 0.0); 36];
        for j in 0..2 {
            let left = apply_unitary(&u1, &phi_p1[j].tensor(&ready)).unwrap();
            let right = apply_unitary(&u2, &phi_p2[j].tensor(&ready)).unwrap();
            let product = left.tensor(&right);
            for (slot, amp) in branch_sum.iter_mut().zip(product.amplitudes()) {
                *slot += coefficients[j] * amp;
            }
        }

        let pair_terms: Vec<(Complex64, StateVector)> = (0..2)
            .map(|j| (coefficients[j], phi_p1[j].tensor(&phi_p2[j])))
            .collect();
        let pair_refs: Vec<(Complex64, &StateVector)> =
            pair_terms.iter().map(|(w, s)| (*w, s)).collect();
        let pair = StateVector::superpose(&pair_refs).unwrap();
        let pair_set = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let psi0 = tensor_on_layout(
            &layout,
            &[
                (&pair_set, &pair),
                (&SubsystemSet::single("M1"), &ready),
                (&SubsystemSet::single("M2"), &ready),
            ],
        )
        .unwrap();
        let e1 = measurement_unitary_embedded(&m1, &layout).unwrap();
        let e2 = measurement_unitary_embedded(&m2, &layout).unwrap();
        let evolved = evolve_closed(&evolve_closed(&psi0, &e1).unwrap(), &e2).unwrap();
        for (got, want) in evolved.amplitudes().iter().zip(&branch_sum) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_leaves_disjoint_subsystems_untouched() {
        let layout = CompositeLayout::new(vec![("P1", 2), ("P2", 2), ("M", 3)]).unwrap();
        let model = spin_model("P1", "M", 0.77);
        let u = measurement_unitary_embedded(&model, &layout).unwrap();
        let pair = StateVector::new(vec![c(0.0, 0.0), c(0.6, 0.0), c(-0.8, 0.0), c(0.0, 0.0)])
            .unwrap();
        let pair_set = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let psi0 = tensor_on_layout(
            &layout,
            &[(&pair_set, &pair), (&SubsystemSet::single("M"), &StateVector::basis(3, 0))],
        )
        .unwrap();
        let psi = apply_unitary(&u, &psi0).unwrap();
        let keep = SubsystemSet::single("P2");
        let before = partial_trace(&psi0.projector(), &layout, &keep).unwrap();
        let after = partial_trace(&psi.projector(), &layout, &keep).unwrap();
        assert!(before.max_abs_diff(&after) < 1e-12);
    }
}
