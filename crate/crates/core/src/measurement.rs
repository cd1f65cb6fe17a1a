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

//! Measurement families and chain composition.
//!
//! The family attached to apparatus `k` acts on factors `0..k` at their full
//! dimensions, init directions included. A measurement step is the isometry
//! `ψ ⊗ init_k ↦ Σ_m (M_m ψ) ⊗ Φ^k[m]`; the full unitary is never built.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{contract_factor, Operator, StateVector};
use crate::spaces::ChainLayout;

/// Outcome-labelled measurement operators for one apparatus slot.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFamily {
    slot: usize,
    outcomes: Vec<String>,
    operators: Vec<Operator>,
}

impl MeasurementFamily {
    /// Build a family and require the completeness equation within `tol`.
    pub fn new<S: AsRef<str>>(slot: usize, outcomes: &[S], operators: Vec<Operator>, tol: f64) -> Result<Self> {
        let f = Self::new_deferred(slot, outcomes, operators)?;
        let residual = f.completeness_residual();
        if residual > tol {
            return Err(Error::Incomplete { slot, residual });
        }
        Ok(f)
    }

    /// Build a family checking shapes only; completeness is left to the caller.
    pub fn new_deferred<S: AsRef<str>>(slot: usize, outcomes: &[S], operators: Vec<Operator>) -> Result<Self> {
        if slot == 0 {
            return Err(Error::InvalidChain("family slot must be an apparatus index".into()));
        }
        if outcomes.is_empty() || outcomes.len() != operators.len() {
            return Err(Error::InvalidChain(format!(
                "family {slot}: {} outcomes, {} operators",
                outcomes.len(),
                operators.len()
            )));
        }
        let d = operators[0].rows();
        for op in &operators {
            if op.rows() != d || op.cols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: op.rows().max(op.cols()) });
            }
        }
        let outcomes: Vec<String> = outcomes.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(Self { slot, outcomes, operators })
    }

    /// The single-outcome family `{I}`.
    pub fn identity(slot: usize, dim: usize, label: &str) -> Self {
        Self { slot, outcomes: alloc::vec![label.to_string()], operators: alloc::vec![Operator::identity(dim)] }
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    /// Same operators attached to a different apparatus slot.
    pub fn reslot(&self, slot: usize) -> Self {
        Self { slot, ..self.clone() }
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn operator(&self, m: usize) -> &Operator {
        &self.operators[m]
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Dimension of the space the operators act on.
    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `max |Σ M†M - I|` entrywise.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut acc = Operator::zeros(d, d);
        for m in &self.operators {
            acc = acc.add(&m.adjoint().mul(m).expect("square")).expect("same shape");
        }
        acc.max_abs_diff(&Operator::identity(d))
    }

    pub fn check_completeness(&self, tol: f64) -> bool {
        self.completeness_residual() <= tol
    }

    /// Hermitian, idempotent, pairwise orthogonal, and summing to `I`.
    pub fn check_pvm(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut sum = Operator::zeros(d, d);
        for (a, p) in self.operators.iter().enumerate() {
            if !p.is_projector(tol) {
                return false;
            }
            for q in &self.operators[..a] {
                if !p.mul(q).expect("square").is_zero(tol) {
                    return false;
                }
            }
            sum = sum.add(p).expect("same shape");
        }
        sum.approx_eq(&Operator::identity(d), tol)
    }

    /// Every operator maps the final-state domain of factors `0..slot` into itself.
    pub fn check_domain_condition(&self, layout: &ChainLayout, tol: f64) -> bool {
        if self.slot > layout.n_apparatus() || self.dim() != layout.prefix_dim(self.slot) {
            return false;
        }
        let dproj = layout.final_domain_projector(self.slot);
        let basis = layout.final_domain_basis(self.slot);
        self.operators.iter().all(|m| {
            basis.iter().all(|b| {
                let out = m.apply(b).expect("dims checked");
                let inside = dproj.apply(&out).expect("dims checked");
                out.sub(&inside).expect("dims checked").norm() <= tol
            })
        })
    }
}

/// One dilation step: the per-outcome components `(M_m ψ) ⊗ Φ^k[m]` on factors `0..=k`.
pub fn measurement_step(
    layout: &ChainLayout,
    state: &StateVector,
    family: &MeasurementFamily,
    tol: f64,
) -> Result<Vec<StateVector>> {
    let residual = family.completeness_residual();
    if residual > tol {
        return Err(Error::Incomplete { slot: family.slot, residual });
    }
    step_components(layout, state, family)
}

fn step_components(layout: &ChainLayout, state: &StateVector, family: &MeasurementFamily) -> Result<Vec<StateVector>> {
    let k = family.slot;
    if k > layout.n_apparatus() {
        return Err(Error::InvalidChain(format!("family slot {k} exceeds the layout")));
    }
    let f = layout.factor(k);
    if family.len() != f.outcomes().len() {
        return Err(Error::InvalidChain(format!("family {k} alphabet does not match apparatus `{}`", f.label())));
    }
    family
        .operators
        .iter()
        .zip(f.final_states())
        .map(|(m, phi)| Ok(m.apply(state)?.tensor(phi)))
        .collect()
}

/// Apply the dilation of `family` to `state` on factors `0..slot`; result lives on `0..=slot`.
pub fn dilate(layout: &ChainLayout, state: &StateVector, family: &MeasurementFamily) -> Result<StateVector> {
    let parts = step_components(layout, state, family)?;
    let mut acc = StateVector::zeros(parts[0].dim());
    for p in &parts {
        acc = acc.add(p)?;
    }
    Ok(acc)
}

/// A layout together with one family per apparatus.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    layout: ChainLayout,
    families: Vec<MeasurementFamily>,
}

impl Chain {
    /// Build and validate shapes, completeness and the domain condition.
    pub fn new(layout: ChainLayout, families: Vec<MeasurementFamily>, tol: f64) -> Result<Self> {
        let chain = Self::new_unchecked(layout, families)?;
        chain.validate(tol)?;
        Ok(chain)
    }

    /// Build checking shapes and alphabets only.
    pub fn new_unchecked(layout: ChainLayout, families: Vec<MeasurementFamily>) -> Result<Self> {
        if families.len() != layout.n_apparatus() {
            return Err(Error::InvalidChain(format!(
                "{} apparatuses but {} families",
                layout.n_apparatus(),
                families.len()
            )));
        }
        for (j, f) in families.iter().enumerate() {
            let k = j + 1;
            if f.slot != k {
                return Err(Error::InvalidChain(format!("family {j} targets slot {}, expected {k}", f.slot)));
            }
            let d = layout.prefix_dim(k);
            if f.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
            }
            if f.outcomes != layout.factor(k).outcomes() {
                return Err(Error::InvalidChain(format!(
                    "family {k} alphabet does not match apparatus `{}`",
                    layout.factor(k).label()
                )));
            }
        }
        Ok(Self { layout, families })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for f in &self.families {
            let residual = f.completeness_residual();
            if residual > tol {
                return Err(Error::Incomplete { slot: f.slot, residual });
            }
            if !f.check_domain_condition(&self.layout, tol) {
                return Err(Error::DomainCondition { slot: f.slot });
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn families(&self) -> &[MeasurementFamily] {
        &self.families
    }

    pub fn family(&self, k: usize) -> &MeasurementFamily {
        &self.families[k - 1]
    }

    /// Number of apparatuses.
    pub fn n(&self) -> usize {
        self.families.len()
    }

    /// The chain of the first `k` measurements.
    pub fn truncate(&self, k: usize) -> Self {
        Self { layout: self.layout.truncate(k), families: self.families[..k].to_vec() }
    }

    pub fn all_pvm(&self, tol: f64) -> bool {
        self.families.iter().all(|f| f.check_pvm(tol))
    }

    /// State on factors `0..=k` right after the `k`-th measurement.
    pub fn evolve(&self, initial: &StateVector, k: usize) -> Result<StateVector> {
        let d = self.layout.system().dim();
        if initial.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: initial.dim() });
        }
        let mut state = initial.clone();
        for f in &self.families[..k] {
            state = dilate(&self.layout, &state, f)?;
        }
        Ok(state)
    }

    /// Full-space state after the `k`-th measurement with later apparatuses at init.
    pub fn virtual_state(&self, initial: &StateVector, k: usize) -> Result<StateVector> {
        Ok(self.evolve(initial, k)?.tensor(&self.layout.init_tail(k + 1)))
    }

    /// Every outcome tuple in lexicographic order, last apparatus fastest.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let sizes: Vec<usize> = self.families.iter().map(MeasurementFamily::len).collect();
        all_tuples(&sizes)
    }
}

/// Odometer enumeration of `[0, s_0) × ... × [0, s_{n-1})`.
pub fn all_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut t = alloc::vec![0usize; sizes.len()];
    loop {
        out.push(t.clone());
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < sizes[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

/// One term of the final total state, keyed by outcome tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub tuple: Vec<usize>,
    /// `M^{1..n}_{tuple} ψ` on the system factor.
    pub system: StateVector,
    /// `system ⊗ Φ^1[m_1] ⊗ ... ⊗ Φ^n[m_n]` on the full space.
    pub vector: StateVector,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.system.norm_sqr()
    }
}

/// Project the system component of `total` onto the apparatus final product for `tuple`.
fn system_component(layout: &ChainLayout, total: &StateVector, tuple: &[usize]) -> Result<StateVector> {
    let fin = layout.final_product(tuple)?;
    contract_factor(total, &[layout.system().dim(), fin.dim()], 1, &fin)
}

/// Run the chain on `initial` and split the final state into per-tuple branches.
pub fn compose_chain(chain: &Chain, initial: &StateVector, tol: f64) -> Result<Vec<Branch>> {
    chain.validate(tol)?;
    let total = chain.evolve(initial, chain.n())?;
    let mut branches = Vec::new();
    let mut mass = 0.0;
    for t in chain.tuples() {
        let system = system_component(&chain.layout, &total, &t)?;
        let vector = system.tensor(&chain.layout.final_product(&t)?);
        mass += system.norm_sqr();
        branches.push(Branch { tuple: t, system, vector });
    }
    if (mass - initial.norm_sqr()).abs() > tol {
        return Err(Error::InvalidChain(format!(
            "branch weights sum to {mass}, input norm squared is {}",
            initial.norm_sqr()
        )));
    }
    Ok(branches)
}

/// Composed operator `M^{1..n}_{tuple}` on the system factor.
pub fn extract_composed_operator(chain: &Chain, tuple: &[usize], tol: f64) -> Result<Operator> {
    chain.validate(tol)?;
    if tuple.len() != chain.n() || tuple.iter().zip(&chain.families).any(|(&m, f)| m >= f.len()) {
        return Err(Error::InvalidArgument(format!("tuple {tuple:?} is not in the chain alphabet")));
    }
    let d = chain.layout.system().dim();
    let mut cols = Vec::with_capacity(d);
    for s in 0..d {
        let total = chain.evolve(&StateVector::basis(d, s), chain.n())?;
        cols.push(system_component(&chain.layout, &total, tuple)?);
    }
    Operator::from_columns(&cols)
}

/// All composed operators keyed by tuple, in [`Chain::tuples`] order.
pub fn composed_operators(chain: &Chain, tol: f64) -> Result<Vec<(Vec<usize>, Operator)>> {
    chain.validate(tol)?;
    let d = chain.layout.system().dim();
    let totals: Vec<StateVector> =
        (0..d).map(|s| chain.evolve(&StateVector::basis(d, s), chain.n())).collect::<Result<_>>()?;
    chain
        .tuples()
        .into_iter()
        .map(|t| {
            let mut m = Operator::zeros(d, d);
            for (s, total) in totals.iter().enumerate() {
                let col = system_component(&chain.layout, total, &t)?;
                for r in 0..d {
                    m.set(r, s, col.get(r));
                }
            }
            Ok((t, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{approx_eq, approx_eq_up_to_phase, c, projector_complement, re, tensor_all, tensor_op, ONE, ZERO};
    use crate::spaces::FactorSpace;
    use alloc::vec;
    use proptest::prelude::*;

    const S2: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn proj(dim: usize, i: usize) -> Operator {
        let e = StateVector::basis(dim, i);
        Operator::outer(&e, &e)
    }

    fn plus() -> StateVector {
        StateVector::from_real(&[S2, S2]).unwrap()
    }

    fn wigner() -> Chain {
        let layout = ChainLayout::new(vec![
            FactorSpace::system("S", 2).unwrap(),
            FactorSpace::apparatus("F", &["0", "1"]).unwrap(),
            FactorSpace::apparatus("W", &["0", "1", "2"]).unwrap(),
        ])
        .unwrap();
        let mf = MeasurementFamily::new(1, &["0", "1"], vec![proj(2, 0), proj(2, 1)], 1e-12).unwrap();
        let w0 = proj(3, 0);
        let w1 = proj(3, 1);
        let w2 = projector_complement(&[w0.clone(), w1.clone()], 1e-12).unwrap();
        let i2 = Operator::identity(2);
        let mw = MeasurementFamily::new(
            2,
            &["0", "1", "2"],
            vec![tensor_op(&i2, &w0), tensor_op(&i2, &w1), tensor_op(&i2, &w2)],
            1e-12,
        )
        .unwrap();
        Chain::new(layout, vec![mf, mw], 1e-12).unwrap()
    }

    #[test]
    fn family_checks() {
        let mf = MeasurementFamily::new(1, &["0", "1"], vec![proj(2, 0), proj(2, 1)], 1e-12).unwrap();
        assert!(mf.check_completeness(1e-12) && mf.check_pvm(1e-12));
        let id = MeasurementFamily::identity(1, 2, "*");
        assert!(id.check_completeness(1e-12) && id.check_pvm(1e-12));
        assert!(matches!(
            MeasurementFamily::new(1, &["0"], vec![proj(2, 0)], 1e-9),
            Err(Error::Incomplete { slot: 1, .. })
        ));
        // complete but not projective
        let a = Operator::identity(2).scale(re(S2));
        let f = MeasurementFamily::new(1, &["a", "b"], vec![a.clone(), a], 1e-12).unwrap();
        assert!(f.check_completeness(1e-12) && !f.check_pvm(1e-12));
    }

    #[test]
    fn domain_condition_detects_leak_to_init() {
        let ch = wigner();
        assert!(ch.family(2).check_domain_condition(ch.layout(), 1e-12));
        assert!(MeasurementFamily::identity(2, 6, "*").check_domain_condition(ch.layout(), 1e-12));
        // swap F's final 0 with F's init: unitary, so complete, but leaves the domain
        let mut swap = Operator::identity(3);
        swap.set(0, 0, ZERO);
        swap.set(2, 2, ZERO);
        swap.set(0, 2, ONE);
        swap.set(2, 0, ONE);
        let bad = MeasurementFamily::new(2, &["x"], vec![tensor_op(&Operator::identity(2), &swap)], 1e-12).unwrap();
        assert!(!bad.check_domain_condition(ch.layout(), 1e-12));
    }

    #[test]
    fn first_step_of_wigner_chain() {
        let ch = wigner();
        let parts = measurement_step(ch.layout(), &plus(), ch.family(1), 1e-12).unwrap();
        for (k, p) in parts.iter().enumerate() {
            let want = StateVector::basis(2, k).tensor(&StateVector::basis(3, k)).scale(re(S2));
            assert!(approx_eq(p, &want, 1e-15));
        }
    }

    #[test]
    fn wigner_branches_and_operators() {
        let ch = wigner();
        let bs = compose_chain(&ch, &plus(), 1e-10).unwrap();
        assert_eq!(bs.len(), 6);
        for b in &bs {
            let want = if b.tuple[0] == b.tuple[1] { 0.5 } else { 0.0 };
            assert!((b.weight() - want).abs() < 1e-12, "{:?}", b.tuple);
        }
        for (t, m) in composed_operators(&ch, 1e-10).unwrap() {
            let want = if t[0] == t[1] { proj(2, t[0]) } else { Operator::zeros(2, 2) };
            assert!(m.approx_eq(&want, 1e-12), "{t:?}");
            assert!(m.approx_eq(&extract_composed_operator(&ch, &t, 1e-10).unwrap(), 0.0));
        }
    }

    #[test]
    fn trivial_chain_has_one_branch() {
        let layout =
            ChainLayout::new(vec![FactorSpace::system("S", 2).unwrap(), FactorSpace::apparatus("A", &["*"]).unwrap()])
                .unwrap();
        let ch = Chain::new(layout, vec![MeasurementFamily::identity(1, 2, "*")], 1e-12).unwrap();
        let bs = compose_chain(&ch, &plus(), 1e-10).unwrap();
        assert_eq!(bs.len(), 1);
        assert!((bs[0].weight() - 1.0).abs() < 1e-12);
        assert!(approx_eq(&bs[0].vector, &tensor_all([&plus(), &StateVector::basis(2, 0)]), 1e-15));
    }

    #[test]
    fn chain_rejects_bad_families() {
        let ch = wigner();
        let fams = ch.families().to_vec();
        assert!(Chain::new(ch.layout().clone(), fams[..1].to_vec(), 1e-12).is_err());
        let swapped = vec![fams[1].clone(), fams[0].clone()];
        assert!(Chain::new(ch.layout().clone(), swapped, 1e-12).is_err());
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(all_tuples(&[2, 3]).len(), 6);
        assert_eq!(all_tuples(&[2, 3])[1], vec![0, 1]);
        assert_eq!(all_tuples(&[]), vec![Vec::<usize>::new()]);
    }

    fn cplx() -> impl Strategy<Value = crate::linalg::C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
    }

    /// Complete family from a random `d·r × d` isometry block split.
    fn random_complete(d: usize, r: usize) -> impl Strategy<Value = Vec<Operator>> {
        proptest::collection::vec(cplx(), d * r * d).prop_map(move |raw| {
            // Gram-Schmidt the d columns of a (d·r)×d matrix
            let mut cols: Vec<StateVector> = Vec::new();
            for j in 0..d {
                let mut v = StateVector::new((0..d * r).map(|i| raw[i * d + j]).collect()).unwrap();
                for u in &cols {
                    let ov = crate::linalg::inner(u, &v).unwrap();
                    v = v.sub(&u.scale(ov)).unwrap();
                }
                cols.push(v.normalize().unwrap_or_else(|_| StateVector::basis(d * r, j)));
            }
            (0..r)
                .map(|b| Operator::from_fn(d, d, |i, j| cols[j].get(b * d + i)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn isometry_of_complete_families(ops in random_complete(3, 3), psi in proptest::collection::vec(cplx(), 3)) {
            let f = MeasurementFamily::new_deferred(1, &["a", "b", "c"], ops).unwrap();
            prop_assume!(f.check_completeness(1e-9));
            let psi = StateVector::new(psi).unwrap();
            let total: f64 = f.operators().iter().map(|m| m.apply(&psi).unwrap().norm_sqr()).sum();
            prop_assert!((total - psi.norm_sqr()).abs() <= 1e-10);
        }

        #[test]
        fn composed_operators_are_complete(a in 0.0f64..core::f64::consts::PI) {
            // rotated first measurement followed by the Wigner-type second step
            let (s, co) = libm::sincos(a);
            let u = StateVector::from_real(&[co, s]).unwrap();
            let v = StateVector::from_real(&[-s, co]).unwrap();
            let base = wigner();
            let f1 = MeasurementFamily::new(1, &["0", "1"], vec![Operator::outer(&u, &u), Operator::outer(&v, &v)], 1e-12).unwrap();
            let ch = Chain::new(base.layout().clone(), vec![f1, base.family(2).clone()], 1e-12).unwrap();
            let mut acc = Operator::zeros(2, 2);
            for (_, m) in composed_operators(&ch, 1e-10).unwrap() {
                acc = acc.add(&m.adjoint().mul(&m).unwrap()).unwrap();
            }
            prop_assert!(acc.approx_eq(&Operator::identity(2), 1e-10));
        }

        #[test]
        fn branches_match_composed_operators(psi in proptest::collection::vec(cplx(), 2)) {
            let psi = StateVector::new(psi).unwrap();
            prop_assume!(psi.norm() > 1e-3);
            let psi = psi.normalize().unwrap();
            let ch = wigner();
            let bs = compose_chain(&ch, &psi, 1e-10).unwrap();
            for b in &bs {
                let m = extract_composed_operator(&ch, &b.tuple, 1e-10).unwrap();
                prop_assert!(approx_eq(&m.apply(&psi).unwrap(), &b.system, 1e-10));
            }
        }

        #[test]
        fn prefix_then_extend_equals_full(psi in proptest::collection::vec(cplx(), 2)) {
            let psi = StateVector::new(psi).unwrap();
            let ch = wigner();
            let prefix = ch.truncate(1).evolve(&psi, 1).unwrap();
            let stepped = dilate(ch.layout(), &prefix, ch.family(2)).unwrap();
            prop_assert!(approx_eq(&stepped, &ch.evolve(&psi, 2).unwrap(), 1e-12));
            prop_assert!(approx_eq_up_to_phase(&stepped, &ch.evolve(&psi, 2).unwrap(), 1e-12));
        }
    }
}
