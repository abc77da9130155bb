//! CHSH correlators and angle scans over the Bell distributions.
//!
//! E(θ1, θ2) contracts a joint outcome table with the sign assignment
//! up → +1, down → −1, and S = E(a1,b1) + E(a1,b2) + E(a2,b1) − E(a2,b2).
//! Correlators built from the factorized distribution never exceed |S| = 2;
//! the quantum distribution reaches 2√2 for the singlet.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::scenarios::bell::closed_form;
use crate::scenarios::check_normalized_pair;

/// Which joint distribution feeds the correlators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Quantum,
    Factorized,
}

/// Margin added to the classical bound when flagging a violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ChshReport {
    pub kind: CorrelationKind,
    /// (a1, a2, b1, b2)
    pub angles: [f64; 4],
    /// (E(a1,b1), E(a1,b2), E(a2,b1), E(a2,b2))
    pub correlators: [f64; 4],
    pub s: f64,
    /// |S| > 2 + margin.
    pub violated: bool,
}

/// E(θ1, θ2) = Σ_{j,k} s_j s_k P(M1,j,M2,k) with s = (+1, −1).
pub fn correlator(c: &[Complex64; 2], theta1: f64, theta2: f64, kind: CorrelationKind) -> f64 {
    let table = match kind {
        CorrelationKind::Quantum => closed_form(c, theta1, theta2).quantum,
        CorrelationKind::Factorized => closed_form(c, theta1, theta2).factorized,
    };
    table[0][0] - table[0][1] - table[1][0] + table[1][1]
}

pub fn chsh(
    c: [Complex64; 2],
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    kind: CorrelationKind,
) -> Result<ChshReport> {
    check_normalized_pair(&c)?;
    let correlators = [
        correlator(&c, a1, b1, kind),
        correlator(&c, a1, b2, kind),
        correlator(&c, a2, b1, kind),
        correlator(&c, a2, b2, kind),
    ];
    let s = correlators[0] + correlators[1] + correlators[2] - correlators[3];
    Ok(ChshReport {
        kind,
        angles: [a1, a2, b1, b2],
        correlators,
        s,
        violated: s.abs() > 2.0 + VIOLATION_MARGIN,
    })
}

/// A half-open angle grid: `steps` points from `start` toward `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn full_circle(steps: usize) -> Self {
        Self {
            start: 0.0,
            stop: std::f64::consts::TAU,
            steps,
        }
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / self.steps as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step()
    }
}

#[derive(Debug, Clone)]
pub struct ChshScanReport {
    pub kind: CorrelationKind,
    pub grid: GridSpec,
    /// Best quadruple on the coarse grid.
    pub coarse: ChshReport,
    /// Best quadruple after local refinement (equal to `coarse` when
    /// refinement is disabled).
    pub refined: ChshReport,
}

/// Scans all quadruples of grid angles for the largest |S|, optionally
/// followed by a shrinking pattern search around the best cell.
pub fn chsh_scan(
    c: [Complex64; 2],
    grid: GridSpec,
    kind: CorrelationKind,
    refine: bool,
) -> Result<ChshScanReport> {
    check_normalized_pair(&c)?;
    let n = grid.steps.max(1);
    // E(a_i, b_j) lookup for all grid pairs.
    let table: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| correlator(&c, grid.angle(i), grid.angle(j), kind))
                .collect()
        })
        .collect();

    // Deterministic parallel max: per-a1 winners combined with a total order
    // (larger |S| wins; ties go to the lexicographically smaller quadruple).
    let best = (0..n)
        .into_par_iter()
        .map(|a1| {
            let mut local: (f64, [usize; 4]) = (f64::NEG_INFINITY, [0; 4]);
            for a2 in 0..n {
                for b1 in 0..n {
                    for b2 in 0..n {
                        let s = table[a1][b1] + table[a1][b2] + table[a2][b1] - table[a2][b2];
                        let key = (s.abs(), [a1, a2, b1, b2]);
                        if key.0 > local.0 || (key.0 == local.0 && key.1 < local.1) {
                            local = key;
                        }
                    }
                }
            }
            local
        })
        .reduce(
            || (f64::NEG_INFINITY, [usize::MAX; 4]),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );

    let coarse_angles = best.1.map(|k| grid.angle(k));
    let coarse = chsh(
        c,
        coarse_angles[0],
        coarse_angles[1],
        coarse_angles[2],
        coarse_angles[3],
        kind,
    )?;

    let refined = if refine {
        let refined_angles = pattern_search(&c, coarse_angles, grid.step() / 2.0, kind);
        chsh(
            c,
            refined_angles[0],
            refined_angles[1],
            refined_angles[2],
            refined_angles[3],
            kind,
        )?
    } else {
        coarse.clone()
    };

    Ok(ChshScanReport {
        kind,
        grid,
        coarse,
        refined,
    })
}

fn chsh_magnitude(c: &[Complex64; 2], angles: [f64; 4], kind: CorrelationKind) -> f64 {
    (correlator(c, angles[0], angles[2], kind) + correlator(c, angles[0], angles[3], kind)
        + correlator(c, angles[1], angles[2], kind)
        - correlator(c, angles[1], angles[3], kind))
    .abs()
}

/// Coordinate pattern search with a halving step; the objective is smooth,
/// so this converges well past the 1e-6 target from any coarse-grid start.
fn pattern_search(
    c: &[Complex64; 2],
    start: [f64; 4],
    initial_step: f64,
    kind: CorrelationKind,
) -> [f64; 4] {
    let mut center = start;
    let mut value = chsh_magnitude(c, center, kind);
    let mut step = initial_step;
    let mut iterations = 0;
    while step > 1e-8 && iterations < 400 {
        iterations += 1;
        let mut best = (value, center);
        for mask in 0..81u32 {
            // Each axis moves by −step, 0, or +step (ternary mask).
            let mut candidate = center;
            let mut digits = mask;
            for angle in &mut candidate {
                let direction = (digits % 3) as i32 - 1;
                digits /= 3;
                *angle += direction as f64 * step;
            }
            let candidate_value = chsh_magnitude(c, candidate, kind);
            if candidate_value > best.0 {
                best = (candidate_value, candidate);
            }
        }
        if best.0 > value {
            value = best.0;
            center = best.1;
        } else {
            step /= 2.0;
        }
    }
    center
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_state_vector, rng_from_seed};
    use crate::scenarios::singlet_coefficients;
    use rand::Rng;

    const TWO_SQRT_2: f64 = 2.0 * std::f64::consts::SQRT_2;

    #[test]
    fn singlet_correlator_is_minus_cosine_of_the_angle_difference() {
        let c = singlet_coefficients();
        for k in 0..12 {
            let t1 = k as f64 * 0.53;
            let t2 = 1.7 - k as f64 * 0.21;
            let e = correlator(&c, t1, t2, CorrelationKind::Quantum);
            assert!((e - (-(t1 - t2).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_scan_finds_the_tsirelson_value() {
        let report = chsh_scan(
            singlet_coefficients(),
            GridSpec::full_circle(25),
            CorrelationKind::Quantum,
            true,
        )
        .unwrap();
        assert!(report.coarse.s.abs() > 2.8, "coarse {}", report.coarse.s);
        assert!((report.refined.s.abs() - TWO_SQRT_2).abs() < 1e-9);
        assert!(report.refined.s.abs() <= TWO_SQRT_2 + 1e-9);
        assert!(report.refined.violated);
    }

    #[test]
    fn factorized_correlators_never_violate_the_classical_bound() {
        let mut rng = rng_from_seed(57);
        for _ in 0..200 {
            let state = random_state_vector(2, &mut rng);
            let c = [state.amplitude(0), state.amplitude(1)];
            let angles: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
            let report = chsh(
                c,
                angles[0],
                angles[1],
                angles[2],
                angles[3],
                CorrelationKind::Factorized,
            )
            .unwrap();
            assert!(report.s.abs() <= 2.0 + VIOLATION_MARGIN);
            assert!(!report.violated);
        }
    }

    #[test]
    fn product_state_quantum_correlators_stay_classical() {
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let report = chsh_scan(
            c,
            GridSpec::full_circle(25),
            CorrelationKind::Quantum,
            true,
        )
        .unwrap();
        assert!(report.refined.s.abs() <= 2.0 + VIOLATION_MARGIN);
        assert!(!report.refined.violated);
    }

    #[test]
    fn scan_is_deterministic() {
        let a = chsh_scan(
            singlet_coefficients(),
            GridSpec::full_circle(13),
            CorrelationKind::Quantum,
            true,
        )
        .unwrap();
        let b = chsh_scan(
            singlet_coefficients(),
            GridSpec::full_circle(13),
            CorrelationKind::Quantum,
            true,
        )
        .unwrap();
        assert_eq!(a.refined.s.to_bits(), b.refined.s.to_bits());
        assert_eq!(a.coarse.angles, b.coarse.angles);
    }
}
