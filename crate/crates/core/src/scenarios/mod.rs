//! End-to-end scenario reproductions.

pub mod bell;
pub mod chsh;
pub mod comparability;
pub mod epr;
pub mod extended;

pub use bell::{bell_run, BellClosedForm, BellResult};
pub use chsh::{chsh, chsh_scan, ChshReport, ChshScanReport, CorrelationKind, GridSpec};
pub use comparability::{comparability_demo, ComparabilityResult};
pub use epr::{epr_run, EprResult, SeparabilityCheck};
pub use extended::{extended_bell_run, ExtendedBellResult};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::state::StateVector;

/// Run metadata the formalism cannot infer from states alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// The reference system was constructed isolated, as the internal-state
    /// rules require.
    pub isolated_reference: bool,
    /// Some ensemble along the way carried a degenerate block, so parts of
    /// the output rest on a basis choice the physics does not fix.
    pub degeneracy_flagged: bool,
}

/// Schmidt coefficients of the spin pair a|1↑⟩|2↓⟩ − b|1↓⟩|2↑⟩:
/// c = (a, −b) with φ_{P1} = (|↑⟩, |↓⟩) and φ_{P2} = (|↓⟩, |↑⟩).
pub fn schmidt_coefficients(a: Complex64, b: Complex64) -> [Complex64; 2] {
    [a, -b]
}

/// c = (1/√2, −1/√2), the singlet-form pair.
pub fn singlet_coefficients() -> [Complex64; 2] {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(inv, 0.0), Complex64::new(-inv, 0.0)]
}

/// Schmidt basis of particle 1: (|↑⟩, |↓⟩).
pub(crate) fn schmidt_basis_p1() -> [StateVector; 2] {
    [StateVector::basis(2, 0), StateVector::basis(2, 1)]
}

/// Schmidt basis of particle 2: (|↓⟩, |↑⟩) — index 1 pairs with P1's ↑.
pub(crate) fn schmidt_basis_p2() -> [StateVector; 2] {
    [StateVector::basis(2, 1), StateVector::basis(2, 0)]
}

/// The pair state Σ_j c_j |φ_{P1,j}⟩|φ_{P2,j}⟩ on (P1, P2).
pub fn schmidt_pair_state(c: [Complex64; 2]) -> Result<StateVector> {
    let p1 = schmidt_basis_p1();
    let p2 = schmidt_basis_p2();
    let terms: Vec<(Complex64, StateVector)> = (0..2)
        .map(|j| (c[j], p1[j].tensor(&p2[j])))
        .collect();
    let refs: Vec<(Complex64, &StateVector)> =
        terms.iter().map(|(w, s)| (*w, s)).collect();
    StateVector::superpose(&refs)
}

pub(crate) fn check_normalized_pair(c: &[Complex64; 2]) -> Result<()> {
    let sum: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let deviation = (sum - 1.0).abs();
    if deviation > crate::tol::STATE_NORM {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(())
}
