//! Seeded generation of random states and operators.
//!
//! Verification sweeps and the CLI both draw from fixed-seed ChaCha streams,
//! so every randomized check is reproducible bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::linalg::eig::eig_hermitian;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::state::StateVector;

pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn unit_interval<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * 2.0 - 1.0
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(unit_interval(rng), unit_interval(rng))
}

pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        if let Ok(state) = StateVector::normalized(amps) {
            return state;
        }
    }
}

/// A normalized complex pair (|a|² + |b|² = 1).
pub fn random_amplitude_pair<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 2] {
    let state = random_state_vector(2, rng);
    [state.amplitude(0), state.amplitude(1)]
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let raw = ComplexMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    raw.add(&raw.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// A random unitary: the eigenvector matrix of a random Hermitian.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let h = random_hermitian(dim, rng);
    eig_hermitian(&h)
        .expect("random Hermitian matrices diagonalize")
        .vectors
}

/// A random density matrix: G·G† normalized to unit trace.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
        let gram = g.mul(&g.adjoint()).expect("square dims");
        let trace = gram.trace().re;
        if trace > 1e-9 {
            return gram.scale(Complex64::new(1.0 / trace, 0.0));
        }
    }
}
