//! Unit-norm complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::tol;

/// A pure state: a unit-norm vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within [`tol::STATE_NORM`]).
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "state vector",
                expected: 1,
                actual: 0,
            });
        }
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = norm_of(&amps);
        let deviation = (norm - 1.0).abs();
        if deviation > tol::STATE_NORM {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = norm_of(&amps);
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm < 1e-14 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        let scaled = amps.into_iter().map(|z| z / norm).collect();
        Self::new(scaled)
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Normalized linear combination Σ w_k |ψ_k⟩.
    pub fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or(Error::EmptySelection)?
            .1
            .dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (w, state) in terms {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "superposition term",
                    expected: dim,
                    actual: state.dim(),
                });
            }
            for (acc, z) in amps.iter_mut().zip(state.amplitudes()) {
                *acc += w * z;
            }
        }
        Self::normalized(amps)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩| — phase-insensitive agreement between pure states.
    pub fn overlap_modulus(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    /// Tensor product; `self` is the most significant index.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// Projector |self⟩⟨self|.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.amps[i] * self.amps[j].conj()
        })
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector {
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }
}

fn norm_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
