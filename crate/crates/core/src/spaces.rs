// Copyright 2026 The retrodict Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Factor spaces and the ordered chain layout.
//!
//! Factor 0 is the measured system; factors `1..=n` are apparatuses. A
//! canonical apparatus with alphabet `Ω` has dimension `|Ω| + 1`: the final
//! states occupy basis indices `0..|Ω|` in alphabet order and the init state
//! is the last basis vector.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{inner, tensor_all, tensor_op, Operator, StateVector, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    System,
    Apparatus,
}

/// One tensor factor of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpace {
    label: String,
    dim: usize,
    role: Role,
    outcomes: Vec<String>,
    final_states: Vec<StateVector>,
    init_index: Option<usize>,
}

impl FactorSpace {
    pub fn system(label: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLayout("system dimension must be positive".into()));
        }
        Ok(Self {
            label: label.into(),
            dim,
            role: Role::System,
            outcomes: Vec::new(),
            final_states: Vec::new(),
            init_index: None,
        })
    }

    /// Apparatus with canonical pointer basis: finals first, init last.
    pub fn apparatus<S: AsRef<str>>(label: impl Into<String>, outcomes: &[S]) -> Result<Self> {
        let n = outcomes.len();
        let finals = (0..n).map(|m| StateVector::basis(n + 1, m)).collect();
        Self::apparatus_with_states(label, n + 1, outcomes, finals, n, DEFAULT_TOL)
    }

    /// Apparatus with caller-supplied final states and an init basis index.
    pub fn apparatus_with_states<S: AsRef<str>>(
        label: impl Into<String>,
        dim: usize,
        outcomes: &[S],
        final_states: Vec<StateVector>,
        init_index: usize,
        tol: f64,
    ) -> Result<Self> {
        let label = label.into();
        if outcomes.is_empty() {
            return Err(Error::InvalidLayout(format!("apparatus `{label}` has an empty alphabet")));
        }
        let outcomes: Vec<String> = outcomes.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, a) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(a) {
                return Err(Error::InvalidLayout(format!("apparatus `{label}` repeats outcome `{a}`")));
            }
        }
        if final_states.len() != outcomes.len() {
            return Err(Error::InvalidLayout(format!(
                "apparatus `{label}`: {} outcomes but {} final states",
                outcomes.len(),
                final_states.len()
            )));
        }
        if init_index >= dim {
            return Err(Error::InvalidLayout(format!("apparatus `{label}`: init index out of range")));
        }
        let init = StateVector::basis(dim, init_index);
        for (a, u) in final_states.iter().enumerate() {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: u.dim() });
            }
            for (b, v) in final_states[..=a].iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                if (inner(u, v)?.norm() - want).abs() > tol {
                    return Err(Error::InvalidLayout(format!(
                        "apparatus `{label}`: final states {b} and {a} are not orthonormal"
                    )));
                }
            }
            if inner(u, &init)?.norm() > tol {
                return Err(Error::InvalidLayout(format!(
                    "apparatus `{label}`: final state {a} overlaps the init state"
                )));
            }
        }
        Ok(Self { label, dim, role: Role::Apparatus, outcomes, final_states, init_index: Some(init_index) })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    pub fn final_states(&self) -> &[StateVector] {
        &self.final_states
    }

    pub fn final_state(&self, m: usize) -> &StateVector {
        &self.final_states[m]
    }

    pub fn init_index(&self) -> Option<usize> {
        self.init_index
    }

    pub fn init_state(&self) -> Option<StateVector> {
        self.init_index.map(|i| StateVector::basis(self.dim, i))
    }

    /// Projector onto the span of the final states; identity for a system factor.
    pub fn final_projector(&self) -> Operator {
        match self.role {
            Role::System => Operator::identity(self.dim),
            Role::Apparatus => {
                let mut p = Operator::zeros(self.dim, self.dim);
                for u in &self.final_states {
                    p = p.add(&Operator::outer(u, u)).expect("square factor operators");
                }
                p
            }
        }
    }

    /// Orthonormal basis of the final subspace (all of the factor for a system).
    pub fn final_basis(&self) -> Vec<StateVector> {
        match self.role {
            Role::System => (0..self.dim).map(|i| StateVector::basis(self.dim, i)).collect(),
            Role::Apparatus => self.final_states.clone(),
        }
    }
}

/// A pinned apparatus outcome: factor index and outcome index.
pub type Pin = (usize, usize);

/// The ordered factors `[system, apparatus_1, ..., apparatus_n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLayout {
    factors: Vec<FactorSpace>,
}

impl ChainLayout {
    pub fn new(factors: Vec<FactorSpace>) -> Result<Self> {
        match factors.first() {
            Some(f) if f.role == Role::System => {}
            _ => return Err(Error::InvalidLayout("factor 0 must be the system".into())),
        }
        if factors[1..].iter().any(|f| f.role != Role::Apparatus) {
            return Err(Error::InvalidLayout("only factor 0 may be a system".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidLayout(format!("duplicate factor label `{}`", f.label)));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[FactorSpace] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &FactorSpace {
        &self.factors[i]
    }

    pub fn system(&self) -> &FactorSpace {
        &self.factors[0]
    }

    /// Number of apparatus factors `n`.
    pub fn n_apparatus(&self) -> usize {
        self.factors.len() - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(FactorSpace::dim).collect()
    }

    /// Dimension of factors `0..k`.
    pub fn prefix_dim(&self, k: usize) -> usize {
        self.factors[..k].iter().map(FactorSpace::dim).product()
    }

    pub fn total_dim(&self) -> usize {
        self.prefix_dim(self.factors.len())
    }

    pub fn factor_index(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Resolve an outcome label on apparatus `i`.
    pub fn outcome_index(&self, i: usize, label: &str) -> Result<usize> {
        self.check_apparatus(i)?;
        self.factors[i]
            .outcome_index(label)
            .ok_or_else(|| Error::UnknownOutcome { factor: i, label: label.to_string() })
    }

    /// Layout restricted to factors `0..=k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self { factors: self.factors[..=k].to_vec() }
    }

    /// Merge factors `0..=p` into one system factor of the product dimension.
    ///
    /// Row-major order makes the merged basis index coincide with the old
    /// composite index, so operators on later prefixes keep their matrices.
    pub fn merge_prefix(&self, p: usize) -> Result<Self> {
        if p >= self.factors.len() {
            return Err(Error::InvalidLayout(format!("cannot merge {} factors", p + 1)));
        }
        let label = self.factors[..=p].iter().map(|f| f.label.as_str()).collect::<Vec<_>>().join("+");
        let mut factors = Vec::with_capacity(self.factors.len() - p);
        factors.push(FactorSpace::system(label, self.prefix_dim(p + 1))?);
        factors.extend_from_slice(&self.factors[p + 1..]);
        Self::new(factors)
    }

    /// `op ⊗ I` where `op` acts on factors `0..k`.
    pub fn embed_operator(&self, op: &Operator, k: usize) -> Result<Operator> {
        let d = self.prefix_dim(k);
        if op.rows() != d || op.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.rows().max(op.cols()) });
        }
        let rest = self.total_dim() / d;
        Ok(if rest == 1 { op.clone() } else { tensor_op(op, &Operator::identity(rest)) })
    }

    /// `I ⊗ op ⊗ I` where `op` acts on factor `slot` alone.
    pub fn embed_at(&self, op: &Operator, slot: usize) -> Result<Operator> {
        let d = self.factors[slot].dim;
        if op.rows() != d || op.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.rows().max(op.cols()) });
        }
        let left = self.prefix_dim(slot);
        let right = self.total_dim() / (left * d);
        Ok(tensor_op(&tensor_op(&Operator::identity(left), op), &Operator::identity(right)))
    }

    /// `I ⊗ |Φ^i[m]><Φ^i[m]| ⊗ I` on the full space.
    pub fn final_subspace_projector(&self, i: usize, m: usize) -> Result<Operator> {
        self.check_apparatus(i)?;
        let f = &self.factors[i];
        let u = f.final_states.get(m).ok_or_else(|| Error::UnknownOutcome {
            factor: i,
            label: format!("#{m}"),
        })?;
        self.embed_at(&Operator::outer(u, u), i)
    }

    /// Product of single-factor final projectors; identity for no pins.
    pub fn joint_projector(&self, pins: &[Pin]) -> Result<Operator> {
        let mut sorted = pins.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidPins(format!("factor {} pinned twice", w[0].0)));
            }
        }
        let mut parts = Vec::with_capacity(self.factors.len());
        for (i, f) in self.factors.iter().enumerate() {
            match sorted.iter().find(|p| p.0 == i) {
                Some(&(_, m)) => {
                    self.check_apparatus(i)?;
                    let u = f.final_states.get(m).ok_or_else(|| Error::UnknownOutcome {
                        factor: i,
                        label: format!("#{m}"),
                    })?;
                    parts.push(Operator::outer(u, u));
                }
                None => parts.push(Operator::identity(f.dim)),
            }
        }
        Ok(kron_all(&parts))
    }

    /// `I_S ⊗ Π_1 ⊗ ... ⊗ Π_{k-1}` on factors `0..k`, each `Π` the final-subspace projector.
    pub fn final_domain_projector(&self, k: usize) -> Operator {
        let parts: Vec<Operator> = self.factors[..k].iter().map(FactorSpace::final_projector).collect();
        kron_all(&parts)
    }

    /// Orthonormal basis of `H_S ⊗ H_1 ⊗ ... ⊗ H_{k-1}` (final subspaces), row-major order.
    pub fn final_domain_basis(&self, k: usize) -> Vec<StateVector> {
        let mut acc = alloc::vec![StateVector::basis(1, 0)];
        for f in &self.factors[..k] {
            let fb = f.final_basis();
            acc = acc.iter().flat_map(|a| fb.iter().map(move |b| a.tensor(b))).collect();
        }
        acc
    }

    /// Tensor product of init states of factors `from..=n`; the scalar `[1]` when empty.
    pub fn init_tail(&self, from: usize) -> StateVector {
        let inits: Vec<StateVector> = self.factors[from.max(1)..]
            .iter()
            .map(|f| f.init_state().expect("apparatus has an init state"))
            .collect();
        tensor_all(inits.iter())
    }

    /// `Φ^1[t_1] ⊗ ... ⊗ Φ^k[t_k]` for a tuple of length `k`.
    pub fn final_product(&self, tuple: &[usize]) -> Result<StateVector> {
        if tuple.len() > self.n_apparatus() {
            return Err(Error::DimensionMismatch { expected: self.n_apparatus(), found: tuple.len() });
        }
        let mut parts = Vec::with_capacity(tuple.len());
        for (j, &m) in tuple.iter().enumerate() {
            let f = &self.factors[j + 1];
            parts.push(f.final_states.get(m).cloned().ok_or_else(|| Error::UnknownOutcome {
                factor: j + 1,
                label: format!("#{m}"),
            })?);
        }
        Ok(tensor_all(parts.iter()))
    }

    /// Human-readable outcome labels of a tuple.
    pub fn tuple_labels(&self, tuple: &[usize]) -> Vec<String> {
        tuple.iter().enumerate().map(|(j, &m)| self.factors[j + 1].outcomes[m].clone()).collect()
    }

    fn check_apparatus(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.factors.len() {
            return Err(Error::InvalidPins(format!("factor {i} is not an apparatus")));
        }
        Ok(())
    }
}

/// Kronecker product of a list of operators.
pub fn kron_all(ops: &[Operator]) -> Operator {
    let mut acc = Operator::identity(1);
    for o in ops {
        acc = tensor_op(&acc, o);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{approx_eq, re, ONE};
    use proptest::prelude::*;

    fn wigner_layout() -> ChainLayout {
        ChainLayout::new(alloc::vec![
            FactorSpace::system("S", 2).unwrap(),
            FactorSpace::apparatus("F", &["0", "1"]).unwrap(),
            FactorSpace::apparatus("W", &["0", "1", "2"]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn layout_shape() {
        let l = wigner_layout();
        assert_eq!(l.dims(), alloc::vec![2, 3, 4]);
        assert_eq!(l.total_dim(), 24);
        assert_eq!(l.factor(1).init_index(), Some(2));
        assert!(ChainLayout::new(alloc::vec![FactorSpace::apparatus("F", &["0"]).unwrap()]).is_err());
        assert!(FactorSpace::apparatus::<&str>("F", &[]).is_err());
        assert!(FactorSpace::apparatus("F", &["0", "0"]).is_err());
    }

    #[test]
    fn custom_final_states_must_be_orthonormal() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let a = StateVector::from_real(&[s, s, 0.0]).unwrap();
        let b = StateVector::from_real(&[s, -s, 0.0]).unwrap();
        assert!(FactorSpace::apparatus_with_states("A", 3, &["x", "y"], alloc::vec![a.clone(), b], 2, 1e-12).is_ok());
        assert!(FactorSpace::apparatus_with_states("A", 3, &["x", "y"], alloc::vec![a.clone(), a.clone()], 2, 1e-12).is_err());
        assert!(FactorSpace::apparatus_with_states("A", 3, &["x"], alloc::vec![a], 0, 1e-12).is_err());
    }

    #[test]
    fn embedding_prefix_and_slot() {
        let l = wigner_layout();
        assert_eq!(l.embed_operator(&Operator::identity(6), 2).unwrap(), Operator::identity(24));
        assert!(l.embed_operator(&Operator::identity(5), 2).is_err());
        // slot-1 operator moves F's init to F's final 0, checked on a product basis state
        let mut u = Operator::zeros(3, 3);
        u.set(0, 2, ONE);
        let e = l.embed_at(&u, 1).unwrap();
        let input = tensor_all([&StateVector::basis(2, 1), &StateVector::basis(3, 2), &StateVector::basis(4, 3)]);
        let want = tensor_all([&StateVector::basis(2, 1), &StateVector::basis(3, 0), &StateVector::basis(4, 3)]);
        assert!(approx_eq(&e.apply(&input).unwrap(), &want, 0.0));
    }

    #[test]
    fn single_pin_projector() {
        let l = wigner_layout();
        let p = l.final_subspace_projector(1, 0).unwrap();
        assert!(p.is_projector(1e-12));
        // trace = dim S * dim W
        assert_eq!(p.trace(), re(8.0));
        assert!(l.final_subspace_projector(1, 2).is_err());
        assert!(l.final_subspace_projector(0, 0).is_err());
    }

    #[test]
    fn joint_projector_rules() {
        let l = wigner_layout();
        assert_eq!(l.joint_projector(&[]).unwrap(), Operator::identity(24));
        assert!(matches!(l.joint_projector(&[(1, 0), (1, 1)]), Err(Error::InvalidPins(_))));
        let j = l.joint_projector(&[(2, 1), (1, 0)]).unwrap();
        let k = l.final_subspace_projector(1, 0).unwrap().mul(&l.final_subspace_projector(2, 1).unwrap()).unwrap();
        assert!(j.approx_eq(&k, 1e-15));
    }

    #[test]
    fn domain_objects() {
        let l = wigner_layout();
        let d = l.final_domain_projector(2);
        assert_eq!(d.trace(), re(4.0));
        assert_eq!(l.final_domain_basis(3).len(), 2 * 2 * 3);
        let tail = l.init_tail(1);
        assert_eq!(tail, tensor_all([&StateVector::basis(3, 2), &StateVector::basis(4, 3)]));
        assert_eq!(l.init_tail(3).dim(), 1);
        assert_eq!(l.final_product(&[1, 2]).unwrap(), tensor_all([&StateVector::basis(3, 1), &StateVector::basis(4, 2)]));
    }

    #[test]
    fn merging_prefix_keeps_dimensions() {
        let l = wigner_layout();
        let m = l.merge_prefix(1).unwrap();
        assert_eq!(m.dims(), alloc::vec![6, 4]);
        assert_eq!(m.system().label(), "S+F");
        assert_eq!(m.factor(1).outcomes().len(), 3);
    }

    fn pin_set() -> impl Strategy<Value = Vec<Pin>> {
        (proptest::option::of(0usize..2), proptest::option::of(0usize..3))
            .prop_map(|(a, b)| a.map(|m| (1, m)).into_iter().chain(b.map(|m| (2, m))).collect())
    }

    proptest! {
        #[test]
        fn joint_projectors_are_projectors(pins in pin_set()) {
            let p = wigner_layout().joint_projector(&pins).unwrap();
            prop_assert!(p.mul(&p).unwrap().approx_eq(&p, 1e-12));
            prop_assert!(p.adjoint().approx_eq(&p, 1e-12));
        }

        #[test]
        fn disjoint_pins_multiply(a in 0usize..2, b in 0usize..3) {
            let l = wigner_layout();
            let joint = l.joint_projector(&[(1, a), (2, b)]).unwrap();
            let prod = l.joint_projector(&[(1, a)]).unwrap().mul(&l.joint_projector(&[(2, b)]).unwrap()).unwrap();
            prop_assert!(joint.approx_eq(&prod, 1e-12));
        }

        #[test]
        fn distinct_outcomes_are_orthogonal(i in 1usize..3, a in 0usize..3, b in 0usize..3) {
            let l = wigner_layout();
            let k = l.factor(i).outcomes().len();
            prop_assume!(a < k && b < k && a != b);
            let p = l.final_subspace_projector(i, a).unwrap().mul(&l.final_subspace_projector(i, b).unwrap()).unwrap();
            prop_assert!(p.is_zero(1e-12));
        }
    }
}
