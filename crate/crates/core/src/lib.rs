//! Simulator for frame-relative quantum states.
//!
//! A state is always the state of a subsystem *with respect to* a reference
//! system: the internal state of a reference system `R` is a unit vector, and
//! the state of any `S ⊆ R` relative to `R` is the reduced density matrix of
//! `S` computed from it. Eigenstates of such a reduced matrix are the possible
//! internal states of `S`, realized with probabilities equal to the
//! eigenvalues, and joint probabilities across disjoint subsystems come from
//! tracing products of eigenprojectors against the reduced state of the union.
//!
//! On top of those rules the crate builds ideal premeasurement dynamics
//! (pointer devices entangled with a measured basis) and complete
//! two-particle scenarios: a measurement-disturbance demo, the EPR conditional
//! states under a rotated measurement axis, and the Bell pair with quantum
//! and factorized joint distributions, CHSH correlators and angle scans.
//!
//! Everything is dense, `f64`-complex, and pure: values are immutable after
//! construction and safe to share across threads. The only stateful object is
//! the caller-owned random generator used for sampling.

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod random;
pub mod scenarios;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::eig::{eig_hermitian, expm_hermitian, Eigendecomposition};
pub use linalg::layout::{
    comparable, embed_operator, partial_trace, reduced_density, tensor_on_layout,
    CompositeLayout, SubsystemSet,
};
pub use linalg::matrix::{apply_unitary, ComplexMatrix};
pub use linalg::state::StateVector;

pub use frames::{
    frame_state, possible_internal_states, readout, sample_internal_state, DensityOperator,
    EnsembleMember, InternalStateEnsemble, PointerMap, Readout, SampleDraw,
};

pub use correlations::{joint_distribution, joint_probability, marginalize, JointDistribution};
pub use dynamics::{
    evolve_closed, measurement_unitary, measurement_unitary_embedded, recorder_unitary,
    rotated_spin_basis, MeasurementModel,
};
pub use scenarios::{
    bell_run, chsh, chsh_scan, comparability_demo, epr_run, extended_bell_run,
    schmidt_coefficients, schmidt_pair_state, singlet_coefficients, BellClosedForm, BellResult,
    ChshReport, ChshScanReport, ComparabilityResult, CorrelationKind, EprResult,
    ExtendedBellResult, GridSpec, Provenance, SeparabilityCheck,
};
