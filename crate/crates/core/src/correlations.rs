//! Joint probabilities of internal states across disjoint subsystems.
//!
//! For disjoint systems S_1 … S_n inside an isolated reference system I with
//! internal state ψ_I, the joint probability that each S_i is found in its
//! j_i-th possible internal state is the trace of the product of the
//! eigenprojectors against the reduced state of the union. Since the
//! projectors are rank-1 on disjoint factors, that trace equals the quadratic
//! form ⟨Φ|ρ_union|Φ⟩ with Φ the interleaved tensor of the member states —
//! exactly permutation invariant by construction.
//!
//! Overlapping systems are rejected: a joint probability over them cannot be
//! defined, any attempted comparison disturbs the states involved.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::InternalStateEnsemble;
use crate::linalg::layout::{reduced_density, tensor_on_layout, CompositeLayout, SubsystemSet};
use crate::linalg::state::StateVector;
use crate::tol;

/// A dense joint probability table over one axis per system.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    systems: Vec<String>,
    axis_labels: Vec<Vec<String>>,
    shape: Vec<usize>,
    probabilities: Vec<f64>,
    basis_ambiguous: bool,
    clamped_entries: usize,
}

impl JointDistribution {
    /// Assembles a table, clamping entries in [−NEGATIVE_PROBABILITY, 0) to
    /// zero and validating normalization.
    pub fn new(
        systems: Vec<String>,
        axis_labels: Vec<Vec<String>>,
        probabilities: Vec<f64>,
        basis_ambiguous: bool,
    ) -> Result<Self> {
        let shape: Vec<usize> = axis_labels.iter().map(Vec::len).collect();
        let expected: usize = shape.iter().product();
        if systems.len() != axis_labels.len() || probabilities.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "joint distribution table",
                expected,
                actual: probabilities.len(),
            });
        }
        let mut clamped_entries = 0;
        let mut table = probabilities;
        for p in &mut table {
            if *p < 0.0 {
                if *p < -tol::NEGATIVE_PROBABILITY {
                    return Err(Error::NegativeProbability { value: *p });
                }
                *p = 0.0;
                clamped_entries += 1;
            }
        }
        let sum: f64 = table.iter().sum();
        if (sum - 1.0).abs() > tol::PROBABILITY_NORM {
            return Err(Error::NotADistribution { sum });
        }
        Ok(Self {
            systems,
            axis_labels,
            shape,
            probabilities: table,
            basis_ambiguous,
            clamped_entries,
        })
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn axis_labels(&self) -> &[Vec<String>] {
        &self.axis_labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// True when any input ensemble carried a degenerate block, in which case
    /// the table depends on a basis choice the physics does not fix.
    pub fn basis_ambiguous(&self) -> bool {
        self.basis_ambiguous
    }

    pub fn clamped_entries(&self) -> usize {
        self.clamped_entries
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    fn flat_index(&self, indices: &[usize]) -> usize {
        assert_eq!(indices.len(), self.shape.len(), "index rank mismatch");
        let mut flat = 0;
        for (k, (&idx, &dim)) in indices.iter().zip(&self.shape).enumerate() {
            assert!(idx < dim, "index out of range on axis {k}");
            flat = flat * dim + idx;
        }
        flat
    }

    pub fn prob(&self, indices: &[usize]) -> f64 {
        self.probabilities[self.flat_index(indices)]
    }

    /// Reorders the entries of one axis (e.g. into a canonical label order).
    pub fn with_axis_order(&self, axis: usize, order: &[usize]) -> Result<Self> {
        if axis >= self.shape.len() || order.len() != self.shape[axis] {
            return Err(Error::DimensionMismatch {
                context: "axis reorder",
                expected: self.shape.get(axis).copied().unwrap_or(0),
                actual: order.len(),
            });
        }
        let mut out = self.clone();
        out.axis_labels[axis] = order
            .iter()
            .map(|&k| self.axis_labels[axis][k].clone())
            .collect();
        for (flat, slot) in out.probabilities.iter_mut().enumerate() {
            let mut indices = unflatten(flat, &self.shape);
            indices[axis] = order[indices[axis]];
            *slot = self.probabilities[self.flat_index(&indices)];
        }
        Ok(out)
    }

    /// Permutes the axes, returning the table with systems in `order`.
    pub fn transposed(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.shape.len() {
            return Err(Error::DimensionMismatch {
                context: "axis permutation",
                expected: self.shape.len(),
                actual: order.len(),
            });
        }
        let systems = order.iter().map(|&k| self.systems[k].clone()).collect();
        let axis_labels: Vec<Vec<String>> = order
            .iter()
            .map(|&k| self.axis_labels[k].clone())
            .collect();
        let shape: Vec<usize> = order.iter().map(|&k| self.shape[k]).collect();
        let total: usize = shape.iter().product();
        let mut probabilities = vec![0.0; total];
        for (flat, p) in probabilities.iter_mut().enumerate() {
            let new_indices = unflatten(flat, &shape);
            let mut old_indices = vec![0usize; self.shape.len()];
            for (new_axis, &old_axis) in order.iter().enumerate() {
                old_indices[old_axis] = new_indices[new_axis];
            }
            *p = self.prob(&old_indices);
        }
        Ok(Self {
            systems,
            axis_labels,
            shape,
            probabilities,
            basis_ambiguous: self.basis_ambiguous,
            clamped_entries: self.clamped_entries,
        })
    }
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut indices = vec![0usize; shape.len()];
    for k in (0..shape.len()).rev() {
        indices[k] = flat % shape[k];
        flat /= shape[k];
    }
    indices
}

fn check_disjoint(systems: &[SubsystemSet]) -> Result<()> {
    for (k, a) in systems.iter().enumerate() {
        if a.is_empty() {
            return Err(Error::EmptySelection);
        }
        for b in &systems[..k] {
            if !a.is_disjoint(b) {
                return Err(Error::OverlappingSystems {
                    first: b.name(),
                    second: a.name(),
                });
            }
        }
    }
    Ok(())
}

struct JointContext {
    union_sub: CompositeLayout,
    rho_union: crate::linalg::matrix::ComplexMatrix,
}

fn joint_context(
    psi_i: &StateVector,
    layout: &CompositeLayout,
    systems: &[SubsystemSet],
) -> Result<JointContext> {
    check_disjoint(systems)?;
    let mut union = systems[0].clone();
    for s in &systems[1..] {
        union = union.union(s);
    }
    let union_sub = layout.sub_layout(&union)?;
    let rho_union = if union_sub.len() == layout.len() {
        psi_i.projector()
    } else {
        reduced_density(psi_i, layout, &union)?
    };
    Ok(JointContext {
        union_sub,
        rho_union,
    })
}

fn quadratic_form(
    ctx: &JointContext,
    systems: &[SubsystemSet],
    states: &[&StateVector],
) -> Result<f64> {
    let parts: Vec<(&SubsystemSet, &StateVector)> =
        systems.iter().zip(states.iter().copied()).collect();
    let phi = tensor_on_layout(&ctx.union_sub, &parts)?;
    let image = ctx.rho_union.mul_vec(phi.amplitudes())?;
    let value: Complex64 = phi
        .amplitudes()
        .iter()
        .zip(&image)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(value.re)
}

/// Joint probability that each system's internal state is the indexed
/// ensemble member. Systems must be pairwise disjoint; the reference system
/// `psi_i` is taken to be isolated (tracked by the caller's provenance).
pub fn joint_probability(
    psi_i: &StateVector,
    layout: &CompositeLayout,
    systems: &[SubsystemSet],
    ensembles: &[&InternalStateEnsemble],
    indices: &[usize],
) -> Result<f64> {
    if systems.len() != ensembles.len() || systems.len() != indices.len() {
        return Err(Error::DimensionMismatch {
            context: "joint probability arguments",
            expected: systems.len(),
            actual: ensembles.len().min(indices.len()),
        });
    }
    let ctx = joint_context(psi_i, layout, systems)?;
    let states: Vec<&StateVector> = ensembles
        .iter()
        .zip(indices)
        .map(|(ens, &j)| &ens.members()[j].state)
        .collect();
    quadratic_form(&ctx, systems, &states)
}

/// The full joint table over every combination of ensemble members.
pub fn joint_distribution(
    psi_i: &StateVector,
    layout: &CompositeLayout,
    systems: &[SubsystemSet],
    ensembles: &[&InternalStateEnsemble],
) -> Result<JointDistribution> {
    if systems.len() != ensembles.len() {
        return Err(Error::DimensionMismatch {
            context: "joint distribution arguments",
            expected: systems.len(),
            actual: ensembles.len(),
        });
    }
    let ctx = joint_context(psi_i, layout, systems)?;
    let shape: Vec<usize> = ensembles.iter().map(|e| e.len()).collect();
    let total: usize = shape.iter().product();
    let mut probabilities = Vec::with_capacity(total);
    for flat in 0..total {
        let combo = unflatten(flat, &shape);
        let states: Vec<&StateVector> = ensembles
            .iter()
            .zip(&combo)
            .map(|(ens, &j)| &ens.members()[j].state)
            .collect();
        probabilities.push(quadratic_form(&ctx, systems, &states)?);
    }
    let names = systems.iter().map(SubsystemSet::name).collect();
    let axis_labels = ensembles
        .iter()
        .map(|e| (0..e.len()).map(|k| k.to_string()).collect())
        .collect();
    let basis_ambiguous = ensembles.iter().any(|e| e.has_degeneracy());
    JointDistribution::new(names, axis_labels, probabilities, basis_ambiguous)
}

/// Sums the table over every axis not in `keep`. Kept axes stay in ascending
/// original order.
pub fn marginalize(jd: &JointDistribution, keep: &[usize]) -> Result<JointDistribution> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let rank = jd.shape().len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || *kept.last().unwrap() >= rank {
        return Err(Error::DimensionMismatch {
            context: "marginalization axes",
            expected: rank,
            actual: keep.len(),
        });
    }
    let out_shape: Vec<usize> = kept.iter().map(|&k| jd.shape()[k]).collect();
    let out_total: usize = out_shape.iter().product();
    let mut table = vec![0.0; out_total];
    for flat in 0..jd.probabilities().len() {
        let indices = unflatten(flat, jd.shape());
        let mut out_flat = 0;
        for (pos, &axis) in kept.iter().enumerate() {
            out_flat = out_flat * out_shape[pos] + indices[axis];
        }
        table[out_flat] += jd.probabilities()[flat];
    }
    let systems = kept.iter().map(|&k| jd.systems()[k].clone()).collect();
    let axis_labels = kept.iter().map(|&k| jd.axis_labels()[k].clone()).collect();
    JointDistribution::new(systems, axis_labels, table, jd.basis_ambiguous())
}
