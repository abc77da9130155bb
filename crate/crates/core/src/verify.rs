//! The acceptance checks behind `verify`: one deterministic, self-contained
//! check per criterion, each reporting a pass flag and measured values.

use num_complex::Complex64;
use rand::Rng;

use crate::correlations::joint_distribution;
use crate::dynamics::{measurement_unitary_embedded, rotated_spin_basis, MeasurementModel};
use crate::error::Result;
use crate::frames::{frame_state, possible_internal_states, sample_internal_state, PointerMap};
use crate::linalg::eig::eig_hermitian;
use crate::linalg::layout::{partial_trace, CompositeLayout, SubsystemSet};
use crate::linalg::matrix::apply_unitary;
use crate::linalg::state::StateVector;
use crate::random::{
    random_amplitude_pair, random_density_matrix, random_hermitian, random_state_vector,
    random_unitary, rng_from_seed,
};
use crate::scenarios::{
    bell_run, chsh, chsh_scan, epr_run, extended_bell_run, singlet_coefficients, ChshReport,
    CorrelationKind, GridSpec,
};

const TWO_SQRT_2: f64 = 2.828_427_124_746_190_3;

/// Thresholds of the acceptance checks. `default()` pins the contractual
/// values; `scaled` exists so tests can prove a tampered tolerance is
/// reported as a named failure.
#[derive(Debug, Clone)]
pub struct Criteria {
    pub eigenvalue_error: f64,
    pub singlet_entry_error: f64,
    pub dual_path: f64,
    pub separability: f64,
    pub no_signaling: f64,
    pub chsh_max_error: f64,
    pub chsh_coarse_floor: f64,
    pub classical_bound_slack: f64,
    pub extended_consistency: f64,
    pub pair_difference_floor: f64,
    pub oracle_equivalence: f64,
    pub eig_reconstruction: f64,
    pub trace_composition: f64,
    pub table_normalization: f64,
    pub permutation_invariance: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Self {
            eigenvalue_error: 1e-12,
            singlet_entry_error: 1e-12,
            dual_path: 1e-10,
            separability: 1e-10,
            no_signaling: 1e-10,
            chsh_max_error: 1e-6,
            chsh_coarse_floor: 2.8,
            classical_bound_slack: 1e-9,
            extended_consistency: 1e-10,
            pair_difference_floor: 0.01,
            oracle_equivalence: 1e-10,
            eig_reconstruction: 1e-9,
            trace_composition: 1e-10,
            table_normalization: 1e-10,
            permutation_invariance: 1e-12,
        }
    }
}

impl Criteria {
    /// Multiplies every upper-bound tolerance by `factor` (floors are left
    /// alone). A factor of zero makes every bounded check fail.
    pub fn scaled(factor: f64) -> Self {
        let base = Self::default();
        Self {
            eigenvalue_error: base.eigenvalue_error * factor,
            singlet_entry_error: base.singlet_entry_error * factor,
            dual_path: base.dual_path * factor,
            separability: base.separability * factor,
            no_signaling: base.no_signaling * factor,
            chsh_max_error: base.chsh_max_error * factor,
            classical_bound_slack: base.classical_bound_slack * factor,
            extended_consistency: base.extended_consistency * factor,
            oracle_equivalence: base.oracle_equivalence * factor,
            eig_reconstruction: base.eig_reconstruction * factor,
            trace_composition: base.trace_composition * factor,
            table_normalization: base.table_normalization * factor,
            permutation_invariance: base.permutation_invariance * factor,
            ..base
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn judged(id: usize, name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name,
            passed,
            detail,
        }
    }
}

/// Runs every acceptance check with the contractual tolerances.
pub fn run_all() -> Vec<CheckOutcome> {
    run_with(&Criteria::default())
}

pub fn run_with(criteria: &Criteria) -> Vec<CheckOutcome> {
    vec![
        criterion_01_reduced_state(criteria),
        criterion_02_singlet_joint(criteria),
        criterion_03_epr_dual_path(criteria),
        criterion_04_separability(criteria),
        criterion_05_no_signaling(criteria),
        criterion_06_quantum_chsh(criteria),
        criterion_07_factorized_chsh(criteria),
        criterion_08_extended_experiment(criteria),
        criterion_09_oracle_equivalence(criteria),
        criterion_10_numerics(criteria),
        criterion_11_determinism(criteria),
    ]
}

/// Criterion 1: the device state after the ideal spin measurement with
/// |α|² = 0.3 decomposes into (|m↓⟩, 0.7) and (|m↑⟩, 0.3).
pub fn criterion_01_reduced_state(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<(f64, f64)> {
        let layout = CompositeLayout::new(vec![("P", 2), ("M", 3)])?;
        let alpha = 0.3_f64.sqrt();
        let beta = 0.7_f64.sqrt();
        let particle =
            StateVector::new(vec![Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0)])?;
        let psi0 = particle.tensor(&StateVector::basis(3, 0));
        let (up, down) = rotated_spin_basis(0.0);
        let model = MeasurementModel::new(
            SubsystemSet::single("P"),
            vec![up, down],
            PointerMap::from_basis("M", 3, &["up", "down"])?,
        )?;
        let u = measurement_unitary_embedded(&model, &layout)?;
        let evolved = apply_unitary(&u, &psi0)?;
        let rho_m = frame_state(&evolved, &layout, &SubsystemSet::single("M"))?;
        let ensemble = possible_internal_states(&rho_m)?;
        let value_error = (ensemble.members()[0].probability - 0.7)
            .abs()
            .max((ensemble.members()[1].probability - 0.3).abs());
        let vector_error = (1.0
            - ensemble.members()[0]
                .state
                .overlap_modulus(&StateVector::basis(3, 2)))
        .max(
            1.0 - ensemble.members()[1]
                .state
                .overlap_modulus(&StateVector::basis(3, 1)),
        );
        Ok((value_error, vector_error))
    };
    match run() {
        Ok((value_error, vector_error)) => CheckOutcome::judged(
            1,
            "reduced-state-reproduction",
            value_error <= criteria.eigenvalue_error && vector_error <= 1e-10,
            format!(
                "eigenvalue error {value_error:.3e} (tol {:.1e}), pointer-state error {vector_error:.3e}",
                criteria.eigenvalue_error
            ),
        ),
        Err(e) => failed(1, "reduced-state-reproduction", e),
    }
}

/// Criterion 2: P(P1,j,P2,k) = |c_j|² δ_{jk} for 100 random Schmidt pairs.
pub fn criterion_02_singlet_joint(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<f64> {
        let mut rng = rng_from_seed(0xC0FFEE02);
        let layout = CompositeLayout::new(vec![("P1", 2), ("P2", 2)])?;
        let systems = [SubsystemSet::single("P1"), SubsystemSet::single("P2")];
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c = random_amplitude_pair(&mut rng);
            let psi = crate::scenarios::schmidt_pair_state(c)?;
            let e1 = possible_internal_states(&frame_state(&psi, &layout, &systems[0])?)?;
            let e2 = possible_internal_states(&frame_state(&psi, &layout, &systems[1])?)?;
            let jd = joint_distribution(&psi, &layout, &systems, &[&e1, &e2])?;
            // Identify each member with its Schmidt index by overlap.
            let p1_basis = [StateVector::basis(2, 0), StateVector::basis(2, 1)];
            let p2_basis = [StateVector::basis(2, 1), StateVector::basis(2, 0)];
            let schmidt_index = |state: &StateVector, basis: &[StateVector; 2]| -> usize {
                usize::from(state.overlap_modulus(&basis[1]) > state.overlap_modulus(&basis[0]))
            };
            for (j, mj) in e1.members().iter().enumerate() {
                let lj = schmidt_index(&mj.state, &p1_basis);
                for (k, mk) in e2.members().iter().enumerate() {
                    let lk = schmidt_index(&mk.state, &p2_basis);
                    let expected = if lj == lk { c[lj].norm_sqr() } else { 0.0 };
                    worst = worst.max((jd.prob(&[j, k]) - expected).abs());
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckOutcome::judged(
            2,
            "schmidt-joint-probability",
            worst <= criteria.singlet_entry_error,
            format!(
                "max entry error {worst:.3e} over 100 draws (tol {:.1e})",
                criteria.singlet_entry_error
            ),
        ),
        Err(e) => failed(2, "schmidt-joint-probability", e),
    }
}

/// Criterion 3: EPR conditional states via closed form vs full pipeline.
pub fn criterion_03_epr_dual_path(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<(f64, f64)> {
        let mut rng = rng_from_seed(0xC0FFEE03);
        let mut worst: f64 = 0.0;
        let mut min_gap = f64::INFINITY;
        for _ in 0..100 {
            let [a, b] = random_amplitude_pair(&mut rng);
            let delta = rng.gen::<f64>() * std::f64::consts::TAU;
            let result = epr_run(a, b, delta)?;
            worst = worst.max(result.dual_path_deviation);
            min_gap = min_gap.min(result.branch_gap);
        }
        Ok((worst, min_gap))
    };
    match run() {
        Ok((worst, min_gap)) => CheckOutcome::judged(
            3,
            "epr-dual-path",
            worst <= criteria.dual_path,
            format!(
                "max deviation {worst:.3e} over 100 draws (tol {:.1e}); smallest branch gap {min_gap:.3e}",
                criteria.dual_path
            ),
        ),
        Err(e) => failed(3, "epr-dual-path", e),
    }
}

/// Criterion 4: P2's possible internal states unchanged by the measurement
/// on P1, for non-degenerate draws.
pub fn criterion_04_separability(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<f64> {
        let mut rng = rng_from_seed(0xC0FFEE04);
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        while checked < 100 {
            let [a, b] = random_amplitude_pair(&mut rng);
            if (a.norm_sqr() - b.norm_sqr()).abs() < 1e-3 {
                continue;
            }
            let delta = rng.gen::<f64>() * std::f64::consts::TAU;
            let result = epr_run(a, b, delta)?;
            worst = worst.max(result.separability.max_deviation);
            checked += 1;
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckOutcome::judged(
            4,
            "separability",
            worst <= criteria.separability,
            format!(
                "max deviation {worst:.3e} over 100 non-degenerate draws (tol {:.1e})",
                criteria.separability
            ),
        ),
        Err(e) => failed(4, "separability", e),
    }
}

/// Criterion 5: M1's outcome distribution is flat across 32 settings of θ2.
pub fn criterion_05_no_signaling(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<f64> {
        let c = singlet_coefficients();
        let theta1 = 0.7;
        let mut reference: Option<[f64; 2]> = None;
        let mut worst: f64 = 0.0;
        for k in 0..32 {
            let theta2 = k as f64 * std::f64::consts::TAU / 32.0;
            let result = bell_run(c, theta1, theta2)?;
            match reference {
                None => reference = Some(result.marginal1),
                Some(base) => {
                    for j in 0..2 {
                        worst = worst.max((result.marginal1[j] - base[j]).abs());
                    }
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckOutcome::judged(
            5,
            "no-signaling",
            worst <= criteria.no_signaling,
            format!(
                "max marginal variation {worst:.3e} over 32 settings (tol {:.1e})",
                criteria.no_signaling
            ),
        ),
        Err(e) => failed(5, "no-signaling", e),
    }
}

/// Criterion 6: the singlet's grid-refined |S| maximum is 2√2; the coarse
/// 25-point grid alone exceeds 2.8.
pub fn criterion_06_quantum_chsh(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<(f64, f64)> {
        let report = chsh_scan(
            singlet_coefficients(),
            GridSpec::full_circle(25),
            CorrelationKind::Quantum,
            true,
        )?;
        Ok((report.coarse.s.abs(), report.refined.s.abs()))
    };
    match run() {
        Ok((coarse, refined)) => {
            let error = (refined - TWO_SQRT_2).abs();
            let passed = coarse > criteria.chsh_coarse_floor
                && error <= criteria.chsh_max_error
                && refined <= TWO_SQRT_2 + criteria.classical_bound_slack;
            CheckOutcome::judged(
                6,
                "chsh-quantum-maximum",
                passed,
                format!(
                    "coarse max {coarse:.6} (floor {}), refined max {refined:.12} vs 2\u{221a}2 (error {error:.3e}, tol {:.1e})",
                    criteria.chsh_coarse_floor, criteria.chsh_max_error
                ),
            )
        }
        Err(e) => failed(6, "chsh-quantum-maximum", e),
    }
}

/// Criterion 7: factorized CHSH never exceeds 2 over 1000 random draws.
pub fn criterion_07_factorized_chsh(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<f64> {
        let mut rng = rng_from_seed(0xC0FFEE07);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let state = random_state_vector(2, &mut rng);
            let c = [state.amplitude(0), state.amplitude(1)];
            let angles: Vec<f64> = (0..4)
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect();
            let report: ChshReport = chsh(
                c,
                angles[0],
                angles[1],
                angles[2],
                angles[3],
                CorrelationKind::Factorized,
            )?;
            worst = worst.max(report.s.abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckOutcome::judged(
            7,
            "chsh-factorized-bound",
            worst <= 2.0 + criteria.classical_bound_slack,
            format!(
                "max |S| {worst:.12} over 1000 draws (bound 2 + {:.1e})",
                criteria.classical_bound_slack
            ),
        ),
        Err(e) => failed(7, "chsh-factorized-bound", e),
    }
}

/// Measured pieces of criterion 8, exposed so the acceptance suite can
/// report the attainable and unattainable sub-checks separately.
#[derive(Debug, Clone)]
pub struct ExtendedExperimentParts {
    /// Max deviation of the 4-device table from its product form, 50 draws.
    pub table_deviation: f64,
    /// Max deviation of the (M1, M2) marginal from the factorized form.
    pub marginal_deviation: f64,
    /// Pair-marginal difference from the quantum distribution for the
    /// singlet at the stated angles (θ1, θ2) = (0, π/4).
    pub stated_angle_difference: f64,
    /// The same difference at (π/4, π/2), where both settings are away from
    /// the Schmidt axes.
    pub off_axis_difference: f64,
}

pub fn criterion_08_parts() -> Result<ExtendedExperimentParts> {
    let mut rng = rng_from_seed(0xC0FFEE08);
    let mut table_deviation: f64 = 0.0;
    let mut marginal_deviation: f64 = 0.0;
    for _ in 0..50 {
        let state = random_state_vector(2, &mut rng);
        let c = [state.amplitude(0), state.amplitude(1)];
        let theta1 = rng.gen::<f64>() * std::f64::consts::TAU;
        let theta2 = rng.gen::<f64>() * std::f64::consts::TAU;
        let result = extended_bell_run(c, theta1, theta2)?;
        table_deviation = table_deviation.max(result.closed_form_deviation);
        marginal_deviation = marginal_deviation.max(result.factorized_deviation);
    }
    let stated = extended_bell_run(
        singlet_coefficients(),
        0.0,
        std::f64::consts::FRAC_PI_4,
    )?;
    let off_axis = extended_bell_run(
        singlet_coefficients(),
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2,
    )?;
    Ok(ExtendedExperimentParts {
        table_deviation,
        marginal_deviation,
        stated_angle_difference: stated.quantum_difference,
        off_axis_difference: off_axis.quantum_difference,
    })
}

/// Criterion 8: extended-experiment consistency. The random-draw table and
/// marginal equalities hold; the stated-angle difference check requires the
/// pair marginal to differ from the quantum form at (θ1, θ2) = (0, π/4),
/// where the two distributions are analytically identical (their gap is
/// ¼·sin θ1·sin θ2), so that sub-check cannot pass and is reported failing.
pub fn criterion_08_extended_experiment(criteria: &Criteria) -> CheckOutcome {
    match criterion_08_parts() {
        Ok(parts) => {
            let consistency_ok = parts.table_deviation <= criteria.extended_consistency
                && parts.marginal_deviation <= criteria.extended_consistency;
            let stated_ok = parts.stated_angle_difference > criteria.pair_difference_floor;
            CheckOutcome::judged(
                8,
                "extended-experiment-consistency",
                consistency_ok && stated_ok,
                format!(
                    "table vs product form {:.3e}, marginal vs factorized {:.3e} (tol {:.1e}); \
                     pair-marginal difference at (0, \u{3c0}/4) = {:.3e} (required > {}), \
                     at (\u{3c0}/4, \u{3c0}/2) = {:.4}",
                    parts.table_deviation,
                    parts.marginal_deviation,
                    criteria.extended_consistency,
                    parts.stated_angle_difference,
                    criteria.pair_difference_floor,
                    parts.off_axis_difference,
                ),
            )
        }
        Err(e) => failed(8, "extended-experiment-consistency", e),
    }
}

/// Criterion 9: the full pipeline distribution equals the closed-form
/// quantum joint over 100 random draws.
pub fn criterion_09_oracle_equivalence(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<f64> {
        let mut rng = rng_from_seed(0xC0FFEE09);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let state = random_state_vector(2, &mut rng);
            let c = [state.amplitude(0), state.amplitude(1)];
            let theta1 = rng.gen::<f64>() * std::f64::consts::TAU;
            let theta2 = rng.gen::<f64>() * std::f64::consts::TAU;
            let result = bell_run(c, theta1, theta2)?;
            worst = worst.max(result.dual_path_deviation);
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckOutcome::judged(
            9,
            "oracle-equivalence",
            worst <= criteria.oracle_equivalence,
            format!(
                "max pipeline vs closed-form deviation {worst:.3e} over 100 draws (tol {:.1e})",
                criteria.oracle_equivalence
            ),
        ),
        Err(e) => failed(9, "oracle-equivalence", e),
    }
}

/// Criterion 10: numerics — eigensolver reconstruction to dim 64, partial
/// trace composition, joint-table normalization and permutation invariance.
pub fn criterion_10_numerics(criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<(f64, f64, f64, f64)> {
        let mut rng = rng_from_seed(0xC0FFEE10);
        let mut reconstruction: f64 = 0.0;
        for dim in [2usize, 3, 5, 8, 13, 21, 34, 64] {
            let h = random_hermitian(dim, &mut rng);
            let eig = eig_hermitian(&h)?;
            reconstruction = reconstruction.max(eig.reconstruct().max_abs_diff(&h));
        }

        let layout = CompositeLayout::new(vec![("A", 2), ("B", 3), ("C", 2)])?;
        let ab = SubsystemSet::new(vec!["A", "B"])?;
        let a = SubsystemSet::single("A");
        let mut composition: f64 = 0.0;
        for _ in 0..20 {
            let rho = random_density_matrix(12, &mut rng);
            let via_ab = partial_trace(
                &partial_trace(&rho, &layout, &ab)?,
                &layout.sub_layout(&ab)?,
                &a,
            )?;
            let direct = partial_trace(&rho, &layout, &a)?;
            composition = composition.max(via_ab.max_abs_diff(&direct));
        }

        let layout2 = CompositeLayout::new(vec![("P1", 2), ("P2", 2)])?;
        let systems = [SubsystemSet::single("P1"), SubsystemSet::single("P2")];
        let mut normalization: f64 = 0.0;
        let mut permutation: f64 = 0.0;
        for _ in 0..20 {
            let psi = random_state_vector(4, &mut rng);
            // Random orthonormal ensembles from random unitary columns.
            let ensembles: Vec<_> = (0..2)
                .map(|_| random_ensemble(2, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let jd = joint_distribution(
                &psi,
                &layout2,
                &systems,
                &[&ensembles[0], &ensembles[1]],
            )?;
            normalization = normalization.max((jd.total() - 1.0).abs());
            let swapped = joint_distribution(
                &psi,
                &layout2,
                &[systems[1].clone(), systems[0].clone()],
                &[&ensembles[1], &ensembles[0]],
            )?;
            let back = swapped.transposed(&[1, 0])?;
            for j in 0..2 {
                for k in 0..2 {
                    permutation =
                        permutation.max((jd.prob(&[j, k]) - back.prob(&[j, k])).abs());
                }
            }
        }
        Ok((reconstruction, composition, normalization, permutation))
    };
    match run() {
        Ok((reconstruction, composition, normalization, permutation)) => {
            let passed = reconstruction <= criteria.eig_reconstruction
                && composition <= criteria.trace_composition
                && normalization <= criteria.table_normalization
                && permutation <= criteria.permutation_invariance;
            CheckOutcome::judged(
                10,
                "numerics",
                passed,
                format!(
                    "eig reconstruction {reconstruction:.3e} (tol {:.1e}), trace composition {composition:.3e} (tol {:.1e}), \
                     table normalization {normalization:.3e} (tol {:.1e}), permutation invariance {permutation:.3e} (tol {:.1e})",
                    criteria.eig_reconstruction,
                    criteria.trace_composition,
                    criteria.table_normalization,
                    criteria.permutation_invariance
                ),
            )
        }
        Err(e) => failed(10, "numerics", e),
    }
}

fn random_ensemble(
    dim: usize,
    rng: &mut impl Rng,
) -> Result<crate::frames::InternalStateEnsemble> {
    let u = random_unitary(dim, rng);
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let members = (0..dim)
        .map(|k| {
            Ok(crate::frames::EnsembleMember {
                state: StateVector::new((0..dim).map(|i| u.get(i, k)).collect())?,
                probability: raw[k] / total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    crate::frames::InternalStateEnsemble::from_members(members)
}

/// Criterion 11: two executions of the seeded pipeline produce bit-identical
/// numbers.
pub fn criterion_11_determinism(_criteria: &Criteria) -> CheckOutcome {
    let run = || -> Result<bool> {
        let a = determinism_digest()?;
        let b = determinism_digest()?;
        Ok(a == b)
    };
    match run() {
        Ok(identical) => CheckOutcome::judged(
            11,
            "determinism",
            identical,
            if identical {
                "two consecutive executions produced bit-identical outputs".to_string()
            } else {
                "executions disagreed".to_string()
            },
        ),
        Err(e) => failed(11, "determinism", e),
    }
}

/// A digest of every number a representative seeded run produces.
fn determinism_digest() -> Result<String> {
    use std::fmt::Write;
    let mut digest = String::new();
    let bell = bell_run(singlet_coefficients(), 0.3, 1.1)?;
    for p in bell.joint_quantum.probabilities() {
        write!(digest, "{:.17e};", p).unwrap();
    }
    let epr = epr_run(
        Complex64::new(0.6, 0.0),
        Complex64::new(0.0, 0.8),
        0.77,
    )?;
    for p in epr.branch_probabilities {
        write!(digest, "{:.17e};", p).unwrap();
    }
    let scan = chsh_scan(
        singlet_coefficients(),
        GridSpec::full_circle(9),
        CorrelationKind::Quantum,
        true,
    )?;
    write!(digest, "{:.17e};", scan.refined.s).unwrap();
    let mut rng = rng_from_seed(0xC0FFEE11);
    let layout = CompositeLayout::new(vec![("P1", 2), ("P2", 2)])?;
    let psi = crate::scenarios::schmidt_pair_state([
        Complex64::new(0.6, 0.0),
        Complex64::new(-0.8, 0.0),
    ])?;
    let ens =
        possible_internal_states(&frame_state(&psi, &layout, &SubsystemSet::single("P1"))?)?;
    for _ in 0..256 {
        write!(digest, "{};", sample_internal_state(&ens, &mut rng).index).unwrap();
    }
    Ok(digest)
}

fn failed(id: usize, name: &'static str, error: crate::error::Error) -> CheckOutcome {
    CheckOutcome {
        id,
        name,
        passed: false,
        detail: format!("errored: {error}"),
    }
}
