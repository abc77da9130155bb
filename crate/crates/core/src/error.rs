use thiserror::Error;

/// Errors produced by construction and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not Hermitian: max |H - H\u{2020}| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary: max |U\u{2020}U - I| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("state vector is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("value contains a non-finite entry")]
    NonFinite,

    #[error("unknown subsystem `{label}`")]
    UnknownSubsystem { label: String },

    #[error("duplicate subsystem label `{label}`")]
    DuplicateLabel { label: String },

    #[error("subsystem selection is empty")]
    EmptySelection,

    #[error(
        "systems `{first}` and `{second}` overlap; a joint probability over \
         overlapping systems cannot be defined"
    )]
    OverlappingSystems { first: String, second: String },

    #[error("operator trace is {trace:.12}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("operator has eigenvalue {value:.3e} below the positivity floor")]
    NotPositive { value: f64 },

    #[error("states are not orthonormal: deviation {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    #[error("probabilities sum to {sum:.12}, expected 1")]
    NotADistribution { sum: f64 },

    #[error("probability entry {value:.3e} is below the clamping floor")]
    NegativeProbability { value: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("measured basis has {provided} states but the probe has dimension {required}")]
    IncompleteBasis { provided: usize, required: usize },

    #[error(
        "device `{label}` has local dimension {dim}, need at least {required} \
         (ready state plus one pointer state per outcome)"
    )]
    DeviceTooSmall {
        label: String,
        dim: usize,
        required: usize,
    },

    #[error("consistency check `{check}` failed: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    ConsistencyCheck {
        check: &'static str,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
