//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Each rotation zeroes one off-diagonal element of the 2×2 Hermitian block
//! [[a, b], [b̄, d]] with b = |b|e^{iβ}: the phase diag(e^{iβ/2}, e^{−iβ/2})
//! reduces the block to a real symmetric one, which the classic rotation with
//! cot 2φ = (a − d)/(2|b|) and |tan φ| ≤ 1 diagonalizes. The accumulated
//! product of rotations is exactly unitary up to roundoff, which is what
//! grounds the orthonormality guarantees downstream.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::tol;

const MAX_SWEEPS: usize = 100;

/// Result of a Hermitian eigendecomposition.
///
/// Eigenvalues are sorted descending; eigenvectors are the matching columns,
/// orthonormal, with the first component of modulus above
/// [`tol::PHASE_PIVOT`] made real positive so outputs are deterministic.
/// Indices of eigenvalues closer than [`tol::DEGENERACY`] are grouped into
/// `degenerate_blocks` (only groups of two or more are listed).
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
    pub degenerate_blocks: Vec<Vec<usize>>,
}

impl Eigendecomposition {
    /// Eigenvector for index `k` as an owned column.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }

    pub fn in_degenerate_block(&self, k: usize) -> bool {
        self.degenerate_blocks.iter().any(|b| b.contains(&k))
    }

    /// Σ λ_k v_k v_k† — used by reconstruction checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..self.values.len())
                .map(|k| {
                    Complex64::new(self.values[k], 0.0)
                        * self.vectors.get(i, k)
                        * self.vectors.get(j, k).conj()
                })
                .sum()
        })
    }
}

/// Diagonalizes a Hermitian matrix (within [`tol::HERMITICITY`]).
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<Eigendecomposition> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigendecomposition input",
            expected: h.rows(),
            actual: h.cols(),
        });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = h.hermiticity_deviation();
    if deviation > tol::HERMITICITY {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: tol::HERMITICITY,
        });
    }

    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);

    let diag_scale: f64 = (0..n).map(|k| a.get(k, k).norm()).sum::<f64>().max(1.0);
    let threshold = 1e-14 * diag_scale;
    let skip = threshold / ((n * n) as f64);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm();
            }
        }
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let absb = apq.norm();
                if absb <= skip {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Real rotation for the phase-stripped block.
                let theta = (app - aqq) / (2.0 * absb);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let half_phase = Complex64::from_polar(1.0, apq.arg() / 2.0);
                // U restricted to (p, q):
                //   U_pp = c·e^{iβ/2}   U_pq = −s·e^{iβ/2}
                //   U_qp = s·e^{−iβ/2}  U_qq = c·e^{−iβ/2}
                let upp = half_phase * c;
                let upq = half_phase * (-s);
                let uqp = half_phase.conj() * s;
                let uqq = half_phase.conj() * c;

                // A ← A·U on columns p, q.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * upp + aiq * uqp);
                    a.set(i, q, aip * upq + aiq * uqq);
                }
                // A ← U†·A on rows p, q.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, upp.conj() * apj + uqp.conj() * aqj);
                    a.set(q, j, upq.conj() * apj + uqq.conj() * aqj);
                }
                // V ← V·U.
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * upp + viq * uqp);
                    v.set(i, q, vip * upq + viq * uqq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    // Sort descending; the stable sort keeps solver order under exact ties,
    // which together with the phase convention makes outputs deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .re
            .partial_cmp(&a.get(i, i).re)
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| a.get(k, k).re).collect();

    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut column: Vec<Complex64> = (0..n).map(|i| v.get(i, k)).collect();
        if let Some(pivot) = column.iter().find(|z| z.norm() > tol::PHASE_PIVOT) {
            let phase = pivot.conj() / pivot.norm();
            for z in &mut column {
                *z *= phase;
            }
        }
        for (i, z) in column.into_iter().enumerate() {
            vectors.set(i, col, z);
        }
    }

    let degenerate_blocks = group_degenerate(&values, tol::DEGENERACY);

    Ok(Eigendecomposition {
        values,
        vectors,
        degenerate_blocks,
    })
}

/// Groups consecutive sorted values whose neighbors differ by at most `tol`.
pub(crate) fn group_degenerate(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut blocks = Vec::new();
    let mut current = vec![0usize];
    for k in 1..values.len() {
        if (values[k - 1] - values[k]).abs() <= tol {
            current.push(k);
        } else {
            if current.len() > 1 {
                blocks.push(current.clone());
            }
            current = vec![k];
        }
    }
    if current.len() > 1 && !values.is_empty() {
        blocks.push(current);
    }
    blocks
}

/// Propagator exp(−iHt) of a Hermitian generator, built from its
/// eigendecomposition: V·diag(e^{−iλt})·V†.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    let n = h.rows();
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&lambda| Complex64::from_polar(1.0, -lambda * t))
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| phases[k] * eig.vectors.get(i, k) * eig.vectors.get(j, k).conj())
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: &mut u64) -> ComplexMatrix {
        // Small deterministic LCG; test-local so the oracle stays
        // independent of the crate's sampling helpers.
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let b = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        b.add(&b.adjoint()).scale(c(0.5, 0.0))
    }

    #[test]
    fn diagonal_matrix_yields_sorted_basis_pairs() {
        let h = ComplexMatrix::diagonal(&[0.3, 0.7]);
        let eig = eig_hermitian(&h).unwrap();
        assert!((eig.values[0] - 0.7).abs() < 1e-15);
        assert!((eig.values[1] - 0.3).abs() < 1e-15);
        assert!((eig.vectors.get(1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((eig.vectors.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(eig.degenerate_blocks.is_empty());
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            eig_hermitian(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_8x8_reconstructs_to_1e9() {
        let mut seed = 0x9E3779B97F4A7C15;
        for _ in 0..5 {
            let h = random_hermitian(8, &mut seed);
            let eig = eig_hermitian(&h).unwrap();
            assert!(eig.reconstruct().max_abs_diff(&h) < tol::EIG_RECONSTRUCTION);
            // Columns orthonormal.
            let vtv = eig.vectors.adjoint().mul(&eig.vectors).unwrap();
            assert!(vtv.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-10);
            // Eigenpair residuals H v = λ v.
            for k in 0..8 {
                let v = eig.vector(k);
                let hv = h.mul_vec(&v).unwrap();
                let max_res = hv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * eig.values[k]).norm())
                    .fold(0.0, f64::max);
                assert!(max_res < 1e-9, "residual {max_res}");
            }
        }
    }

    #[test]
    fn degenerate_values_are_grouped() {
        let h = ComplexMatrix::diagonal(&[0.5, 0.5, 0.0]);
        let eig = eig_hermitian(&h).unwrap();
        assert_eq!(eig.degenerate_blocks, vec![vec![0, 1]]);
        assert!(eig.in_degenerate_block(0));
        assert!(!eig.in_degenerate_block(2));
    }

    #[test]
    fn expm_at_zero_time_is_identity() {
        let mut seed = 42;
        let h = random_hermitian(4, &mut seed);
        let u = expm_hermitian(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn expm_of_pauli_z_at_pi_is_minus_identity() {
        let sigma_z = ComplexMatrix::diagonal(&[1.0, -1.0]);
        let u = expm_hermitian(&sigma_z, std::f64::consts::PI).unwrap();
        let minus_identity = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        assert!(u.max_abs_diff(&minus_identity) < 1e-14);
    }

    #[test]
    fn expm_times_inverse_is_identity() {
        let mut seed = 7;
        let h = random_hermitian(5, &mut seed);
        let forward = expm_hermitian(&h, 1.3).unwrap();
        let backward = expm_hermitian(&h, -1.3).unwrap();
        let product = forward.mul(&backward).unwrap();
        assert!(product.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-9);
        assert!(forward.unitarity_deviation() < tol::UNITARITY);
    }
}
