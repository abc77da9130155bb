//! Dense complex matrices, row-major.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::state::StateVector;
use crate::tol;

/// A dense complex matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from rows of entries, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::DimensionMismatch {
                context: "matrix rows",
                expected: 1,
                actual: 0,
            });
        }
        let ncols = rows[0].len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in &rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: ncols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self {
            rows: nrows,
            cols: ncols,
            data,
        };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Real diagonal matrix.
    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|k| self.get(k, k)).sum()
    }

    /// Kronecker product; the left factor is the most significant index,
    /// matching the composite-layout convention.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a * other.get(i2, j2),
                        );
                    }
                }
            }
        }
        out
    }

    /// Largest entry of |self − other|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of |M − M†|; zero for exactly Hermitian matrices.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Largest entry of |U†U − I|.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let product = self
            .adjoint()
            .mul(self)
            .expect("square product dimensions always match");
        product.max_abs_diff(&Self::identity(self.rows))
    }
}

/// Applies a unitary to a state, checking unitarity and dimensions.
pub fn apply_unitary(u: &ComplexMatrix, psi: &StateVector) -> Result<StateVector> {
    if !u.is_square() || u.cols() != psi.dim() {
        return Err(Error::DimensionMismatch {
            context: "unitary application",
            expected: psi.dim(),
            actual: u.cols(),
        });
    }
    let deviation = u.unitarity_deviation();
    if deviation > tol::UNITARITY {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: tol::UNITARITY,
        });
    }
    StateVector::new(u.mul_vec(psi.amplitudes())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let prod = ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(3));
        assert_eq!(prod, ComplexMatrix::identity(6));
    }

    #[test]
    fn kron_follows_row_major_index_formula() {
        // Oracle: (A ⊗ B)[(i1·rB + i2), (j1·cB + j2)] = A[i1,j1]·B[i2,j2],
        // enumerated by brute force.
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 0.5 * i as f64));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c(j as f64 - i as f64, 0.25));
        let prod = a.kron(&b);
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..3 {
                    for j2 in 0..3 {
                        let expected = a.get(i1, j1) * b.get(i2, j2);
                        let got = prod.get(i1 * 3 + i2, j1 * 3 + j2);
                        assert!((expected - got).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 2.0), c(3.0, -1.0)],
            vec![c(0.0, 0.5), c(-2.0, 0.0)],
        ])
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a.get(0, 1), c(0.0, -0.5));
        assert_eq!(a.get(1, 0), c(3.0, 1.0));
    }

    #[test]
    fn apply_unitary_rejects_non_unitary_input() {
        let m = ComplexMatrix::diagonal(&[1.0, 2.0]);
        let psi = StateVector::basis(2, 0);
        match apply_unitary(&m, &psi) {
            Err(Error::NotUnitary { .. }) => {}
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn apply_identity_returns_input() {
        let psi = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = apply_unitary(&ComplexMatrix::identity(2), &psi).unwrap();
        assert!(psi.overlap_modulus(&out) > 1.0 - 1e-15);
    }

    #[test]
    fn random_unitaries_preserve_the_norm() {
        let mut rng = crate::random::rng_from_seed(91);
        for dim in [2usize, 3, 6] {
            let u = crate::random::random_unitary(dim, &mut rng);
            let psi = crate::random::random_state_vector(dim, &mut rng);
            let image = apply_unitary(&u, &psi).unwrap();
            assert!((image.norm() - 1.0).abs() < 1e-12);
        }
    }
}
