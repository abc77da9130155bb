//! Central numerical tolerances.
//!
//! Constructors, consistency checks and tests all read from here, so a
//! threshold cannot drift between an implementation and the code that
//! verifies it.

/// Max entry of |H − H†| for a matrix to count as Hermitian.
pub const HERMITICITY: f64 = 1e-10;

/// Max entry of |U†U − I| for a matrix to count as unitary.
pub const UNITARITY: f64 = 1e-10;

/// Allowed |norm − 1| for state vectors.
pub const STATE_NORM: f64 = 1e-10;

/// Allowed deviation of a trace or probability sum from 1.
pub const PROBABILITY_NORM: f64 = 1e-10;

/// Pairwise bound for sets of states that must be orthonormal.
pub const ORTHONORMALITY: f64 = 1e-9;

/// Eigenvalues closer than this are reported as one degenerate block.
pub const DEGENERACY: f64 = 1e-9;

/// Eigenvalues below this are treated as exact zeros when building ensembles,
/// so solver noise cannot create spurious possible internal states.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Most negative eigenvalue a density operator may carry (solver noise).
pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Joint-probability entries in [−NEGATIVE_PROBABILITY, 0) are clamped to 0.
pub const NEGATIVE_PROBABILITY: f64 = 1e-12;

/// Smallest component modulus eligible to fix an eigenvector's phase.
pub const PHASE_PIVOT: f64 = 1e-8;

/// Pointer readout requires an overlap modulus above 1 − READOUT.
pub const READOUT: f64 = 1e-8;

/// Max reconstruction error Σ λ v v† vs the input for the eigensolver.
pub const EIG_RECONSTRUCTION: f64 = 1e-9;

/// Closed-form and pipeline routes of a scenario must agree to this.
pub const SCENARIO_CONSISTENCY: f64 = 1e-10;
