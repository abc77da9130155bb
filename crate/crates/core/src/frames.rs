//! Reference-frame semantics: frame-relative states, possible internal
//! states, sampling, and pointer readout.
//!
//! The internal state of a reference system `R` is a unit vector; the state
//! of `S ⊆ R` relative to `R` is the reduced density matrix computed from it.
//! When the reference system is isolated, the eigenstates of that reduced
//! matrix are the possible internal states of `S`, each realized with
//! probability equal to its eigenvalue. Isolation is not inferable from a
//! state alone, so it is tracked as a provenance flag by the scenario layer
//! rather than checked here.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::eig::{eig_hermitian, group_degenerate};
use crate::linalg::layout::{reduced_density, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::state::StateVector;
use crate::tol;

/// A frame-relative state ρ_S(R): Hermitian, unit trace, positive.
///
/// Hermiticity and trace are validated on construction; positivity is
/// asserted wherever the spectrum is actually computed
/// ([`possible_internal_states`], [`DensityOperator::min_eigenvalue`]).
#[derive(Debug, Clone)]
pub struct DensityOperator {
    layout: CompositeLayout,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(layout: CompositeLayout, matrix: ComplexMatrix) -> Result<Self> {
        let total = layout.total_dim();
        if !matrix.is_square() || matrix.rows() != total {
            return Err(Error::DimensionMismatch {
                context: "density operator",
                expected: total,
                actual: matrix.rows(),
            });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol::HERMITICITY {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: tol::HERMITICITY,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::PROBABILITY_NORM || trace.im.abs() > tol::PROBABILITY_NORM
        {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        Ok(Self { layout, matrix })
    }

    /// Projector |ψ⟩⟨ψ| of a pure internal state.
    pub fn from_pure(layout: CompositeLayout, psi: &StateVector) -> Result<Self> {
        if psi.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "pure state projector",
                expected: layout.total_dim(),
                actual: psi.dim(),
            });
        }
        Self::new(layout, psi.projector())
    }

    pub fn layout(&self) -> &CompositeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Smallest eigenvalue; used by positivity checks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = eig_hermitian(&self.matrix)?;
        Ok(*eig
            .values
            .last()
            .expect("density operators have dimension >= 2"))
    }
}

/// The state of `s` relative to the reference system described by `psi_r`.
///
/// If `s` covers the whole layout this is the projector |ψ_R⟩⟨ψ_R|; otherwise
/// it is the reduced density matrix over the complement of `s`.
pub fn frame_state(
    psi_r: &StateVector,
    layout: &CompositeLayout,
    s: &SubsystemSet,
) -> Result<DensityOperator> {
    if s.is_empty() {
        return Err(Error::EmptySelection);
    }
    let sub = layout.sub_layout(s)?;
    if sub.len() == layout.len() {
        return DensityOperator::from_pure(sub, psi_r);
    }
    let reduced = reduced_density(psi_r, layout, s)?;
    DensityOperator::new(sub, reduced)
}

/// One possible internal state with its realization probability.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub state: StateVector,
    pub probability: f64,
}

/// The possible internal states of a subsystem: eigenstates of its
/// frame-relative state with probabilities given by the eigenvalues.
///
/// Members inside a degenerate eigenvalue block are reported in a
/// deterministic basis chosen by the eigensolver, but the block is flagged:
/// within a block the eigenbasis is not physically determined.
#[derive(Debug, Clone)]
pub struct InternalStateEnsemble {
    members: Vec<EnsembleMember>,
    degenerate_blocks: Vec<Vec<usize>>,
}

impl InternalStateEnsemble {
    /// Builds an ensemble from explicit members, validating orthonormality
    /// and normalization. Degenerate blocks are derived from the
    /// probabilities.
    pub fn from_members(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySelection);
        }
        let sum: f64 = members.iter().map(|m| m.probability).sum();
        if (sum - 1.0).abs() > tol::PROBABILITY_NORM {
            return Err(Error::NotADistribution { sum });
        }
        let mut max_overlap: f64 = 0.0;
        for (k, a) in members.iter().enumerate() {
            max_overlap = max_overlap.max((a.state.norm() - 1.0).abs());
            for b in &members[..k] {
                max_overlap = max_overlap.max(a.state.overlap_modulus(&b.state));
            }
        }
        if max_overlap > tol::ORTHONORMALITY {
            return Err(Error::NotOrthonormal {
                deviation: max_overlap,
            });
        }
        let probs: Vec<f64> = members.iter().map(|m| m.probability).collect();
        let degenerate_blocks = group_degenerate(&probs, tol::DEGENERACY);
        Ok(Self {
            members,
            degenerate_blocks,
        })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn degenerate_blocks(&self) -> &[Vec<usize>] {
        &self.degenerate_blocks
    }

    pub fn has_degeneracy(&self) -> bool {
        !self.degenerate_blocks.is_empty()
    }

    pub fn in_degenerate_block(&self, index: usize) -> bool {
        self.degenerate_blocks.iter().any(|b| b.contains(&index))
    }

    /// Σ λ_j |φ_j⟩⟨φ_j| over the members.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.members[0].state.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for m in &self.members {
            acc = acc.add(
                &m.state
                    .projector()
                    .scale(num_complex::Complex64::new(m.probability, 0.0)),
            );
        }
        acc
    }
}

/// Eigen-decomposes a frame-relative state into its possible internal
/// states. Eigenvalues below [`tol::ZERO_PROBABILITY`] are dropped;
/// degenerate blocks are recomputed over the kept members.
pub fn possible_internal_states(rho: &DensityOperator) -> Result<InternalStateEnsemble> {
    let eig = eig_hermitian(rho.matrix())?;
    if let Some(&smallest) = eig.values.last() {
        if smallest < tol::POSITIVITY_FLOOR {
            return Err(Error::NotPositive { value: smallest });
        }
    }
    let mut members = Vec::new();
    let mut kept_values = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda < tol::ZERO_PROBABILITY {
            continue;
        }
        members.push(EnsembleMember {
            state: StateVector::new(eig.vector(k))?,
            probability: lambda,
        });
        kept_values.push(lambda);
    }
    if members.is_empty() {
        return Err(Error::NotADistribution { sum: 0.0 });
    }
    let degenerate_blocks = group_degenerate(&kept_values, tol::DEGENERACY);
    Ok(InternalStateEnsemble {
        members,
        degenerate_blocks,
    })
}

/// Outcome of sampling an ensemble.
#[derive(Debug, Clone)]
pub struct SampleDraw {
    pub index: usize,
    pub state: StateVector,
    /// Set when the drawn member sits in a degenerate block, where the
    /// eigenbasis (and hence the drawn state) is not physically unique.
    pub from_degenerate_block: bool,
}

/// Draws one possible internal state with its ensemble probability.
pub fn sample_internal_state<R: Rng + ?Sized>(
    ensemble: &InternalStateEnsemble,
    rng: &mut R,
) -> SampleDraw {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut index = ensemble.len() - 1;
    for (k, member) in ensemble.members().iter().enumerate() {
        acc += member.probability;
        if u < acc {
            index = k;
            break;
        }
    }
    SampleDraw {
        index,
        state: ensemble.members()[index].state.clone(),
        from_degenerate_block: ensemble.in_degenerate_block(index),
    }
}

/// Orthonormal pointer states of a measuring device: a ready state plus one
/// labeled state per outcome.
#[derive(Debug, Clone)]
pub struct PointerMap {
    device_label: String,
    ready: StateVector,
    outcomes: Vec<(String, StateVector)>,
}

impl PointerMap {
    pub fn new(
        device_label: impl Into<String>,
        ready: StateVector,
        outcomes: Vec<(String, StateVector)>,
    ) -> Result<Self> {
        let device_label = device_label.into();
        let dim = ready.dim();
        let mut all: Vec<&StateVector> = vec![&ready];
        for (k, (label, state)) in outcomes.iter().enumerate() {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "pointer state",
                    expected: dim,
                    actual: state.dim(),
                });
            }
            if outcomes[..k].iter().any(|(other, _)| other == label) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
            all.push(state);
        }
        let mut max_overlap: f64 = 0.0;
        for (k, a) in all.iter().enumerate() {
            for b in &all[..k] {
                max_overlap = max_overlap.max(a.overlap_modulus(b));
            }
        }
        if max_overlap > tol::ORTHONORMALITY {
            return Err(Error::NotOrthonormal {
                deviation: max_overlap,
            });
        }
        Ok(Self {
            device_label,
            ready,
            outcomes,
        })
    }

    /// Computational-basis pointer map: ready = |0⟩, outcome k = |k+1⟩.
    pub fn from_basis(
        device_label: impl Into<String>,
        local_dim: usize,
        outcome_labels: &[&str],
    ) -> Result<Self> {
        if local_dim < outcome_labels.len() + 1 {
            return Err(Error::DeviceTooSmall {
                label: device_label.into(),
                dim: local_dim,
                required: outcome_labels.len() + 1,
            });
        }
        let outcomes = outcome_labels
            .iter()
            .enumerate()
            .map(|(k, label)| (label.to_string(), StateVector::basis(local_dim, k + 1)))
            .collect();
        Self::new(device_label, StateVector::basis(local_dim, 0), outcomes)
    }

    pub fn device_label(&self) -> &str {
        &self.device_label
    }

    pub fn ready(&self) -> &StateVector {
        &self.ready
    }

    pub fn outcomes(&self) -> &[(String, StateVector)] {
        &self.outcomes
    }

    pub fn outcome_labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dim(&self) -> usize {
        self.ready.dim()
    }
}

/// Result of reading a device's internal state against its pointer map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Readout {
    Ready,
    Outcome(String),
    /// The device state matches no pointer state: a superposed device
    /// internal state, which cannot occur for a completed measurement.
    Unresolved,
}

/// Identifies the pointer state carried by a device's internal state.
pub fn readout(device_state: &StateVector, pointer: &PointerMap) -> Readout {
    let bar = 1.0 - tol::READOUT;
    if device_state.overlap_modulus(pointer.ready()) > bar {
        return Readout::Ready;
    }
    for (label, state) in pointer.outcomes() {
        if device_state.overlap_modulus(state) > bar {
            return Readout::Outcome(label.clone());
        }
    }
    Readout::Unresolved
}
