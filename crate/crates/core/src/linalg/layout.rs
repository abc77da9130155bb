//! Labeled composite systems and the index bookkeeping built on them.
//!
//! A [`CompositeLayout`] fixes the tensor convention once: the subsystem
//! listed first is the most significant index (row-major composition). Every
//! partial trace, operator embedding and interleaved tensor product resolves
//! indices through the layout, so a transposition bug cannot hide in ad-hoc
//! stride arithmetic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::state::StateVector;

/// An ordered list of labeled subsystems with their local dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLayout {
    parts: Vec<(String, usize)>,
}

impl CompositeLayout {
    /// Builds a layout; labels must be unique and local dimensions ≥ 2.
    pub fn new<L: Into<String>>(parts: Vec<(L, usize)>) -> Result<Self> {
        let parts: Vec<(String, usize)> = parts
            .into_iter()
            .map(|(label, dim)| (label.into(), dim))
            .collect();
        if parts.is_empty() {
            return Err(Error::EmptySelection);
        }
        for (k, (label, dim)) in parts.iter().enumerate() {
            if *dim < 2 {
                return Err(Error::DimensionMismatch {
                    context: "subsystem local dimension",
                    expected: 2,
                    actual: *dim,
                });
            }
            if parts[..k].iter().any(|(other, _)| other == label) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(Self { parts })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|(_, d)| *d).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownSubsystem {
                label: label.to_string(),
            })
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.parts[self.position(label)?].1)
    }

    /// Row-major strides; the first subsystem is most significant.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.parts.len()];
        for k in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.parts[k + 1].1;
        }
        strides
    }

    /// A subsystem set covering every label in this layout.
    pub fn whole(&self) -> SubsystemSet {
        SubsystemSet {
            members: self.parts.iter().map(|(l, _)| l.clone()).collect(),
        }
    }

    /// Validates membership and returns layout positions in layout order.
    pub fn positions_of(&self, set: &SubsystemSet) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(set.members.len());
        for label in &set.members {
            positions.push(self.position(label)?);
        }
        positions.sort_unstable();
        Ok(positions)
    }

    /// The sub-layout of the given subsystems, kept in layout order.
    pub fn sub_layout(&self, set: &SubsystemSet) -> Result<CompositeLayout> {
        let positions = self.positions_of(set)?;
        if positions.is_empty() {
            return Err(Error::EmptySelection);
        }
        Ok(CompositeLayout {
            parts: positions
                .into_iter()
                .map(|p| self.parts[p].clone())
                .collect(),
        })
    }

    /// Labels of this layout not contained in `set`.
    pub fn complement(&self, set: &SubsystemSet) -> Result<SubsystemSet> {
        for label in &set.members {
            self.position(label)?;
        }
        Ok(SubsystemSet {
            members: self
                .parts
                .iter()
                .filter(|(l, _)| !set.contains(l))
                .map(|(l, _)| l.clone())
                .collect(),
        })
    }

    /// Flat contribution of each sub-index combination of the selected
    /// positions, enumerated row-major over the selected sub-layout.
    fn flat_contributions(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let sel_dims: Vec<usize> = positions.iter().map(|&p| self.parts[p].1).collect();
        let size: usize = sel_dims.iter().product::<usize>().max(1);
        let mut below = vec![1usize; sel_dims.len()];
        for k in (0..sel_dims.len().saturating_sub(1)).rev() {
            below[k] = below[k + 1] * sel_dims[k + 1];
        }
        (0..size)
            .map(|idx| {
                positions
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (idx / below[k]) % sel_dims[k] * strides[p])
                    .sum()
            })
            .collect()
    }
}

/// A duplicate-free set of subsystem labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemSet {
    members: Vec<String>,
}

impl SubsystemSet {
    pub fn new<L: Into<String>>(labels: Vec<L>) -> Result<Self> {
        let members: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (k, label) in members.iter().enumerate() {
            if members[..k].contains(label) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(Self { members })
    }

    pub fn single(label: impl Into<String>) -> Self {
        Self {
            members: vec![label.into()],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.members.iter().any(|l| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &SubsystemSet) -> bool {
        self.members.iter().all(|l| other.contains(l))
    }

    pub fn is_disjoint(&self, other: &SubsystemSet) -> bool {
        self.members.iter().all(|l| !other.contains(l))
    }

    /// Union, keeping first-come order.
    pub fn union(&self, other: &SubsystemSet) -> SubsystemSet {
        let mut members = self.members.clone();
        for l in &other.members {
            if !members.contains(l) {
                members.push(l.clone());
            }
        }
        SubsystemSet { members }
    }

    /// Display name, e.g. `P1+P2`.
    pub fn name(&self) -> String {
        self.members.join("+")
    }
}

/// Whether states relative to the two reference systems may coexist:
/// true iff one contains the other or they are disjoint.
pub fn comparable(r1: &SubsystemSet, r2: &SubsystemSet) -> bool {
    r1.is_subset(r2) || r2.is_subset(r1) || r1.is_disjoint(r2)
}

/// Traces out every subsystem not in `keep`. The result lives on the
/// sub-layout of `keep` in layout order; the trace is preserved.
pub fn partial_trace(
    rho: &ComplexMatrix,
    layout: &CompositeLayout,
    keep: &SubsystemSet,
) -> Result<ComplexMatrix> {
    let total = layout.total_dim();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::DimensionMismatch {
            context: "partial trace input",
            expected: total,
            actual: rho.rows(),
        });
    }
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let keep_pos = layout.positions_of(keep)?;
    let traced = layout.complement(keep)?;
    let keep_map = layout.flat_contributions(&keep_pos);
    let traced_map = layout.flat_contributions(&layout.positions_of(&traced)?);
    let dk = keep_map.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_map {
                acc += rho.get(keep_map[i] + t, keep_map[j] + t);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Reduced density matrix of `keep` for a pure state, without materializing
/// the full projector: ρ[(i),(j)] = Σ_t ψ[i,t]·ψ*[j,t].
pub fn reduced_density(
    psi: &StateVector,
    layout: &CompositeLayout,
    keep: &SubsystemSet,
) -> Result<ComplexMatrix> {
    let total = layout.total_dim();
    if psi.dim() != total {
        return Err(Error::DimensionMismatch {
            context: "reduced density input",
            expected: total,
            actual: psi.dim(),
        });
    }
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let keep_map = layout.flat_contributions(&layout.positions_of(keep)?);
    let traced = layout.complement(keep)?;
    let traced_map = layout.flat_contributions(&layout.positions_of(&traced)?);
    let dk = keep_map.len();
    let amps = psi.amplitudes();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_map {
                acc += amps[keep_map[i] + t] * amps[keep_map[j] + t].conj();
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Embeds an operator acting on `on` (expressed on its sub-layout in layout
/// order) into the full layout, tensored with identity elsewhere. Handles
/// arbitrary interleaving of the acted-on subsystems.
pub fn embed_operator(
    op: &ComplexMatrix,
    layout: &CompositeLayout,
    on: &SubsystemSet,
) -> Result<ComplexMatrix> {
    let own_pos = layout.positions_of(on)?;
    if own_pos.is_empty() {
        return Err(Error::EmptySelection);
    }
    let own_map = layout.flat_contributions(&own_pos);
    if !op.is_square() || op.rows() != own_map.len() {
        return Err(Error::DimensionMismatch {
            context: "operator embedding",
            expected: own_map.len(),
            actual: op.rows(),
        });
    }
    let rest = layout.complement(on)?;
    let rest_map = layout.flat_contributions(&layout.positions_of(&rest)?);
    let total = layout.total_dim();
    let mut out = ComplexMatrix::zeros(total, total);
    for a in 0..own_map.len() {
        for b in 0..own_map.len() {
            let v = op.get(a, b);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &r in &rest_map {
                out.set(own_map[a] + r, own_map[b] + r, v);
            }
        }
    }
    Ok(out)
}

/// Interleaved tensor product: assembles a state on the full layout from
/// per-part states. The parts must partition the layout exactly; each state
/// lives on its part's sub-layout (layout order).
pub fn tensor_on_layout(
    layout: &CompositeLayout,
    parts: &[(&SubsystemSet, &StateVector)],
) -> Result<StateVector> {
    let mut seen = 0usize;
    for (k, (set, state)) in parts.iter().enumerate() {
        let sub = layout.sub_layout(set)?;
        if state.dim() != sub.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "tensor part state",
                expected: sub.total_dim(),
                actual: state.dim(),
            });
        }
        for other in &parts[..k] {
            if !set.is_disjoint(other.0) {
                return Err(Error::OverlappingSystems {
                    first: other.0.name(),
                    second: set.name(),
                });
            }
        }
        seen += set.len();
    }
    if seen != layout.len() {
        return Err(Error::DimensionMismatch {
            context: "tensor parts must cover the layout",
            expected: layout.len(),
            actual: seen,
        });
    }
    let strides = layout.strides();
    let dims = layout.dims();
    // Per part: layout positions (ascending) and row-major sub-strides.
    let mut part_indexing = Vec::with_capacity(parts.len());
    for (set, _) in parts {
        let positions = layout.positions_of(set)?;
        let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let mut sub_strides = vec![1usize; positions.len()];
        for k in (0..positions.len().saturating_sub(1)).rev() {
            sub_strides[k] = sub_strides[k + 1] * sub_dims[k + 1];
        }
        part_indexing.push((positions, sub_strides));
    }
    let total = layout.total_dim();
    let mut amps = Vec::with_capacity(total);
    for full in 0..total {
        let mut amp = Complex64::new(1.0, 0.0);
        for ((positions, sub_strides), (_, state)) in part_indexing.iter().zip(parts) {
            let mut sub = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                let digit = (full / strides[p]) % dims[p];
                sub += digit * sub_strides[k];
            }
            amp *= state.amplitude(sub);
        }
        amps.push(amp);
    }
    StateVector::new(amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn layout_pm() -> CompositeLayout {
        CompositeLayout::new(vec![("P", 2), ("M", 3)]).unwrap()
    }

    #[test]
    fn strides_put_first_subsystem_most_significant() {
        let layout = CompositeLayout::new(vec![("A", 2), ("B", 3), ("C", 2)]).unwrap();
        assert_eq!(layout.strides(), vec![6, 2, 1]);
        assert_eq!(layout.total_dim(), 12);
    }

    #[test]
    fn rejects_duplicate_labels_and_small_dims() {
        assert!(matches!(
            CompositeLayout::new(vec![("A", 2), ("A", 2)]),
            Err(Error::DuplicateLabel { .. })
        ));
        assert!(CompositeLayout::new(vec![("A", 1)]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state_keeps_second_factor() {
        let layout = layout_pm();
        let phi = StateVector::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let chi = StateVector::normalized(vec![c(0.2, 0.1), c(-0.5, 0.3), c(0.4, 0.0)]).unwrap();
        let rho = phi.tensor(&chi).projector();
        let keep = SubsystemSet::single("M");
        let reduced = partial_trace(&rho, &layout, &keep).unwrap();
        assert!(reduced.max_abs_diff(&chi.projector()) < 1e-14);
    }

    #[test]
    fn partial_trace_matches_double_index_sum_oracle() {
        // keep the first factor of a random 2⊗3 pure state and compare with
        // the explicit Σ_k ⟨i,k|ρ|j,k⟩ summation.
        let layout = layout_pm();
        let psi = StateVector::normalized(vec![
            c(0.12, -0.44),
            c(0.31, 0.02),
            c(-0.55, 0.21),
            c(0.09, 0.17),
            c(0.40, -0.08),
            c(0.23, 0.35),
        ])
        .unwrap();
        let rho = psi.projector();
        let reduced = partial_trace(&rho, &layout, &SubsystemSet::single("P")).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    acc += rho.get(3 * i + k, 3 * j + k);
                }
                assert!((reduced.get(i, j) - acc).norm() < 1e-15);
            }
        }
        // reduced_density must agree with the matrix route.
        let direct = reduced_density(&psi, &layout, &SubsystemSet::single("P")).unwrap();
        assert!(direct.max_abs_diff(&reduced) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_inputs() {
        let layout = layout_pm();
        let rho = ComplexMatrix::identity(5);
        assert!(matches!(
            partial_trace(&rho, &layout, &SubsystemSet::single("P")),
            Err(Error::DimensionMismatch { .. })
        ));
        let rho = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace(&rho, &layout, &SubsystemSet::single("X")),
            Err(Error::UnknownSubsystem { .. })
        ));
    }

    #[test]
    fn embed_operator_acts_as_identity_elsewhere() {
        let layout = CompositeLayout::new(vec![("A", 2), ("B", 2), ("C", 2)]).unwrap();
        // Embed a Pauli-X on the middle subsystem and check the action on a
        // product basis state: flips only B's digit.
        let x = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let embedded = embed_operator(&x, &layout, &SubsystemSet::single("B")).unwrap();
        assert!(embedded.unitarity_deviation() < 1e-15);
        for full in 0..8 {
            let state = StateVector::basis(8, full);
            let image = embedded.mul_vec(state.amplitudes()).unwrap();
            let flipped = full ^ 0b010;
            assert!((image[flipped] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_on_layout_interleaves_correctly() {
        // Layout (P1, M1, P2): a joint state on {P1, P2} with M1 in between.
        let layout = CompositeLayout::new(vec![("P1", 2), ("M1", 3), ("P2", 2)]).unwrap();
        let pair = StateVector::normalized(vec![c(0.0, 0.0), c(0.6, 0.0), c(-0.8, 0.0), c(0.0, 0.0)])
            .unwrap();
        let ready = StateVector::basis(3, 0);
        let pair_set = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let m_set = SubsystemSet::single("M1");
        let full = tensor_on_layout(&layout, &[(&pair_set, &pair), (&m_set, &ready)]).unwrap();
        // Amplitude of |p1=0, m=0, p2=1⟩ is pair[01] = 0.6 at flat 0·6+0·2+1.
        assert!((full.amplitude(1) - c(0.6, 0.0)).norm() < 1e-15);
        // |p1=1, m=0, p2=0⟩ → pair[10] = −0.8 at flat 6.
        assert!((full.amplitude(6) - c(-0.8, 0.0)).norm() < 1e-15);
        assert!((full.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comparable_matches_containment_and_disjointness_rules() {
        let r1 = SubsystemSet::single("P1");
        let r12 = SubsystemSet::new(vec!["P1", "P2"]).unwrap();
        let p1m1 = SubsystemSet::new(vec!["P1", "M1"]).unwrap();
        let m1m2 = SubsystemSet::new(vec!["M1", "M2"]).unwrap();
        let p2 = SubsystemSet::single("P2");
        assert!(comparable(&r1, &r12)); // containment
        assert!(!comparable(&p1m1, &m1m2)); // overlap, neither contains
        assert!(comparable(&r1, &p2)); // disjoint
        assert_eq!(comparable(&p1m1, &m1m2), comparable(&m1m2, &p1m1));
    }
}
