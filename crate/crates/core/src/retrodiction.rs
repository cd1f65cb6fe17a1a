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

//! Unchanged and confirmed predicates, confirming points, and the two
//! retrodiction routes: factor backtracking and projection of the virtual
//! pre-final state.
//!
//! Step convention: "before step `j`" means immediately before the `j`-th
//! measurement, i.e. right after measurement `j - 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    approx_eq_up_to_phase, contract_factor, factorize, inner, tensor_all, Operator, StateVector, C64,
};
use crate::measurement::{compose_chain, dilate, Chain, MeasurementFamily};
use crate::spaces::{ChainLayout, FactorSpace, Pin};
use crate::typicality::WorldPrefix;

/// The factor a retrodiction query is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    System,
    Apparatus(usize),
}

/// Result of the min-V rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfirmingPoint {
    SystemItself,
    Apparatus(usize),
}

/// `M^j_m` restricted to the final domain has the form `I_S ⊗ K_m` for every outcome.
pub fn system_unchanged_after(chain: &Chain, j: usize, tol: f64) -> bool {
    if j == 0 || j > chain.n() {
        return false;
    }
    let layout = chain.layout();
    let ds = layout.system().dim();
    let rest = layout.prefix_dim(j) / ds;
    // finals basis of factors 1..j, as vectors on their full dims
    let tail: Vec<StateVector> = product_basis(layout.factors()[1..j].iter().map(FactorSpace::final_basis).collect());
    chain.family(j).operators().iter().all(|m| {
        tail.iter().all(|b| {
            let probe0 = StateVector::basis(ds, 0).tensor(b);
            let out0 = m.apply(&probe0).expect("prefix dims");
            let k_b = contract_factor(&out0, &[ds, rest], 0, &StateVector::basis(ds, 0)).expect("dims");
            (0..ds).all(|s| {
                let e = StateVector::basis(ds, s);
                let out = m.apply(&e.tensor(b)).expect("prefix dims");
                out.sub(&e.tensor(&k_b)).expect("dims").norm() <= tol
            })
        })
    })
}

/// `M^j` keeps every pinned slice `Φ^i[m]` of the final domain inside that slice.
pub fn apparatus_unchanged_after(chain: &Chain, i: usize, j: usize, tol: f64) -> bool {
    if i == 0 || i >= j || j > chain.n() {
        return false;
    }
    let layout = chain.layout().truncate(j - 1);
    let d = layout.final_domain_projector(j);
    let outcomes = layout.factor(i).outcomes().len();
    (0..outcomes).all(|m| {
        let p = layout.final_subspace_projector(i, m).expect("apparatus slot");
        let q = Operator::identity(p.rows()).sub(&p).expect("square");
        let pd = p.mul(&d).expect("square");
        chain.family(j).operators().iter().all(|op| {
            q.mul(op).and_then(|x| x.mul(&pd)).map(|x| x.is_zero(tol)).unwrap_or(false)
        })
    })
}

/// Unchanged after every measurement `k >= j`.
pub fn confirmed_before(chain: &Chain, target: Target, j: usize, tol: f64) -> bool {
    let n = chain.n();
    if j == 0 || j > n {
        return false;
    }
    match target {
        Target::System => (j..=n).all(|k| system_unchanged_after(chain, k, tol)),
        Target::Apparatus(i) => i >= 1 && i < j && (j..=n).all(|k| apparatus_unchanged_after(chain, i, k, tol)),
    }
}

/// Apply the min-V rule to the confirmed-before predicate.
pub fn confirming_point(chain: &Chain, target: Target, tol: f64) -> ConfirmingPoint {
    let n = chain.n();
    let lo = match target {
        Target::System => 1,
        Target::Apparatus(i) => i + 1,
    };
    match (lo..=n).find(|&j| confirmed_before(chain, target, j, tol)) {
        Some(1) => ConfirmingPoint::SystemItself,
        Some(j) => ConfirmingPoint::Apparatus(j - 1),
        None => ConfirmingPoint::Apparatus(n),
    }
}

/// All unchanged predicates and the confirming points derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfirmingReport {
    /// Entry `j - 1`: system unchanged after measurement `j`.
    pub system_unchanged: Vec<bool>,
    /// Entry `[i - 1][j - 1]`: apparatus `i` unchanged after measurement `j`; `None` unless `i < j`.
    pub unchanged: Vec<Vec<Option<bool>>>,
    pub system_point: ConfirmingPoint,
    /// Entry `i - 1`: confirming apparatus index for apparatus `i`.
    pub apparatus_points: Vec<usize>,
}

pub fn confirming_report(chain: &Chain, tol: f64) -> ConfirmingReport {
    let n = chain.n();
    let system_unchanged = (1..=n).map(|j| system_unchanged_after(chain, j, tol)).collect();
    let unchanged = (1..=n)
        .map(|i| (1..=n).map(|j| (i < j).then(|| apparatus_unchanged_after(chain, i, j, tol))).collect())
        .collect();
    let system_point = confirming_point(chain, Target::System, tol);
    let apparatus_points = (1..=n)
        .map(|i| match confirming_point(chain, Target::Apparatus(i), tol) {
            ConfirmingPoint::Apparatus(a) => a,
            ConfirmingPoint::SystemItself => unreachable!("apparatus points are apparatuses"),
        })
        .collect();
    ConfirmingReport { system_unchanged, unchanged, system_point, apparatus_points }
}

/// A total state of the form `Ψ ⊗ Φ^1[m_1] ⊗ ... ⊗ Φ^n[m_n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBranch {
    /// Unit system state, phased so that `system ⊗ finals` equals the normalized input.
    pub system: StateVector,
    pub tuple: Vec<usize>,
}

/// Recognize a product branch over every factor of `layout`.
pub fn product_branch(layout: &ChainLayout, v: &StateVector, tol: f64) -> Result<ProductBranch> {
    if v.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: v.dim() });
    }
    let factors = factorize(v, &layout.dims(), tol).ok_or(Error::NotProductBranch)?;
    let mut tuple = Vec::with_capacity(layout.n_apparatus());
    for (i, f) in factors.iter().enumerate().skip(1) {
        let m = layout
            .factor(i)
            .final_states()
            .iter()
            .position(|phi| inner(phi, f).map(|z| (z.norm() - 1.0).abs() <= tol).unwrap_or(false))
            .ok_or(Error::NotProductBranch)?;
        tuple.push(m);
    }
    let unit = v.normalize_with(tol)?;
    let fin = layout.final_product(&tuple)?;
    let system = contract_factor(&unit, &[layout.system().dim(), fin.dim()], 1, &fin)?;
    Ok(ProductBranch { system, tuple })
}

/// Factor backtracking: the queried factor's state immediately before measurement `j`.
///
/// Licensed only when the target is confirmed before `j`; the final branch
/// must be a product branch.
pub fn backtrack_cf(chain: &Chain, final_branch: &StateVector, query: Target, j: usize, tol: f64) -> Result<StateVector> {
    if !confirmed_before(chain, query, j, tol) {
        return Err(Error::NotLicensed(format!("{query:?} is not confirmed before measurement {j}")));
    }
    let pb = product_branch(chain.layout(), final_branch, tol)?;
    Ok(match query {
        Target::System => pb.system,
        Target::Apparatus(i) => chain.layout().factor(i).final_state(pb.tuple[i - 1]).clone(),
    })
}

/// Apparatuses `i < n` unchanged after the last measurement.
pub fn ru_unchanged_set(chain: &Chain, tol: f64) -> Vec<usize> {
    let n = chain.n();
    (1..n).filter(|&i| apparatus_unchanged_after(chain, i, n, tol)).collect()
}

/// Projector retrodiction of one step: the normalized total state right after measurement `n - 1`.
///
/// Every family must be a PVM.
pub fn ru_step(chain: &Chain, initial: &StateVector, final_branch: &StateVector, tol: f64) -> Result<StateVector> {
    if let Some(f) = chain.families().iter().find(|f| !f.check_pvm(tol)) {
        return Err(Error::PvmRequired { slot: f.slot() });
    }
    ru_step_unchecked(chain, initial, final_branch, tol)
}

/// [`ru_step`] without the PVM premise; exists to exhibit why the premise is needed.
pub fn ru_step_unchecked(chain: &Chain, initial: &StateVector, final_branch: &StateVector, tol: f64) -> Result<StateVector> {
    let n = chain.n();
    if n == 0 {
        return Err(Error::InvalidChain("empty chain".into()));
    }
    let pb = product_branch(chain.layout(), final_branch, tol)?;
    let pins: Vec<Pin> = ru_unchanged_set(chain, tol).into_iter().map(|i| (i, pb.tuple[i - 1])).collect();
    let j = chain.layout().joint_projector(&pins)?;
    let virtual_state = chain.virtual_state(initial, n - 1)?;
    j.apply(&virtual_state)?.normalize_with(tol)
}

/// Retrodicted total state after one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct RetrodictedStep {
    pub step: usize,
    /// Unit state on the full layout, later apparatuses at init.
    pub total: StateVector,
    /// Per-factor unit states when `total` is a product.
    pub factors: Option<Vec<StateVector>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrodictedStates {
    /// Entry `k - 1` holds the state after measurement `k`.
    pub steps: Vec<RetrodictedStep>,
}

impl RetrodictedStates {
    pub fn after(&self, k: usize) -> Option<&RetrodictedStep> {
        k.checked_sub(1).and_then(|i| self.steps.get(i))
    }
}

/// Apply [`ru_step`] level by level, truncating the chain each time.
///
/// Each intermediate state consumed by a further step must be a product
/// branch; otherwise the recursion stops with [`Error::RecursionBlocked`].
pub fn ru_recursive(chain: &Chain, initial: &StateVector, final_branch: &StateVector, tol: f64) -> Result<RetrodictedStates> {
    let n = chain.n();
    let full = chain.layout();
    let dims = full.dims();
    let top = final_branch.normalize_with(tol)?;
    let mut steps = vec![RetrodictedStep { step: n, total: top.clone(), factors: factorize(&top, &dims, tol) }];
    let mut branch = top;
    for level in (2..=n).rev() {
        let sub = chain.truncate(level);
        let out = ru_step(&sub, initial, &branch, tol).map_err(|e| match e {
            Error::NotProductBranch => Error::RecursionBlocked { step: level },
            other => other,
        })?;
        let lower = sub.layout().truncate(level - 1);
        let init = sub.layout().factor(level).init_state().expect("apparatus");
        branch = contract_factor(&out, &[lower.total_dim(), init.dim()], 1, &init)?;
        let total = out.tensor(&full.init_tail(level + 1));
        let factors = factorize(&total, &dims, tol);
        steps.push(RetrodictedStep { step: level - 1, total, factors });
    }
    steps.reverse();
    Ok(RetrodictedStates { steps })
}

/// One comparison between the two retrodiction routes.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementRow {
    /// Number of measurements in the truncated chain the query was posed on.
    pub level: usize,
    pub target: Target,
    pub step: usize,
    pub backtracked: StateVector,
    pub projected: StateVector,
    pub agree: bool,
}

/// Compare factor backtracking with projector retrodiction wherever both give a factor state.
pub fn retrodiction_agreement(chain: &Chain, initial: &StateVector, final_branch: &StateVector, tol: f64) -> Result<Vec<AgreementRow>> {
    let states = ru_recursive(chain, initial, final_branch, tol)?;
    let n = chain.n();
    let mut rows = Vec::new();
    for level in (1..=n).rev() {
        let sub = chain.truncate(level);
        let step = states.after(level).expect("recorded");
        // branch on the truncated layout: drop trailing init factors
        let branch = drop_tail(chain.layout(), &step.total, level)?;
        let targets = core::iter::once(Target::System).chain((1..level).map(Target::Apparatus));
        for target in targets {
            for j in 2..=level {
                if !confirmed_before(&sub, target, j, tol) {
                    continue;
                }
                let Some(factors) = states.after(j - 1).and_then(|s| s.factors.as_ref()) else {
                    continue;
                };
                let backtracked = backtrack_cf(&sub, &branch, target, j, tol)?;
                let projected = match target {
                    Target::System => factors[0].clone(),
                    Target::Apparatus(i) => factors[i].clone(),
                };
                let agree = approx_eq_up_to_phase(&backtracked, &projected, tol);
                rows.push(AgreementRow { level, target, step: j, backtracked, projected, agree });
            }
        }
    }
    Ok(rows)
}

/// Contract factors `level+1..=n` of `v` with their init states.
fn drop_tail(layout: &ChainLayout, v: &StateVector, level: usize) -> Result<StateVector> {
    let head = layout.prefix_dim(level + 1);
    let tail = layout.init_tail(level + 1);
    contract_factor(v, &[head, tail.dim()], 1, &tail)
}

/// Joint state of factors `0..j` immediately before measurement `j`, assembled by backtracking.
///
/// Every factor `0..j` must be confirmed before `j`.
pub fn backtrack_prefix(chain: &Chain, final_branch: &StateVector, j: usize, tol: f64) -> Result<StateVector> {
    let mut parts = vec![backtrack_cf(chain, final_branch, Target::System, j, tol)?];
    for i in 1..j {
        parts.push(backtrack_cf(chain, final_branch, Target::Apparatus(i), j, tol)?);
    }
    Ok(tensor_all(parts.iter()))
}

fn product_basis(lists: Vec<Vec<StateVector>>) -> Vec<StateVector> {
    let mut acc = vec![StateVector::basis(1, 0)];
    for l in &lists {
        acc = acc.iter().flat_map(|a| l.iter().map(move |b| a.tensor(b))).collect();
    }
    acc
}

/// Orthonormal basis of the complement of unit `psi` in its space.
fn orthonormal_complement(psi: &StateVector, tol: f64) -> Vec<StateVector> {
    let d = psi.dim();
    let mut basis = vec![psi.clone()];
    for i in 0..d {
        let mut v = StateVector::basis(d, i);
        for u in &basis {
            let ov: C64 = inner(u, &v).expect("dims");
            v = v.sub(&u.scale(ov)).expect("dims");
        }
        if let Ok(u) = v.normalize_with(tol.max(1e-8)) {
            basis.push(u);
        }
    }
    basis.split_off(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Violation {
    pub tuple: Vec<usize>,
    pub target: Target,
    pub step: usize,
    pub measurement: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Report {
    pub branches: usize,
    pub checks: usize,
    pub violations: Vec<Prop1Violation>,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Brute-force check that confirmed-before implies the final factor state already held earlier.
///
/// For each positive-weight branch and each confirmed `(target, j)`, every
/// measurement `k >= j` must map the claimed slice into itself and carry its
/// orthogonal complement isometrically out of it. Induction from `n` down to
/// `j` then forces the state before `j` into the claimed slice.
pub fn verify_proposition1(chain: &Chain, initial: &StateVector, tol: f64) -> Result<Prop1Report> {
    chain.validate(tol)?;
    let n = chain.n();
    let layout = chain.layout();
    let branches = compose_chain(chain, initial, tol)?;
    let mut report = Prop1Report { branches: 0, checks: 0, violations: Vec::new() };
    let mut targets = vec![Target::System];
    targets.extend((1..=n).map(Target::Apparatus));
    for b in branches.iter().filter(|b| b.weight() > tol) {
        report.branches += 1;
        let psi = b.system.normalize_with(tol)?;
        for &target in &targets {
            for j in 1..=n {
                if !confirmed_before(chain, target, j, tol) {
                    continue;
                }
                for k in j..=n {
                    report.checks += 1;
                    let residual = slice_residual(layout, chain.family(k), target, &psi, &b.tuple, tol);
                    if residual > tol {
                        report.violations.push(Prop1Violation {
                            tuple: b.tuple.clone(),
                            target,
                            step: j,
                            measurement: k,
                            residual,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Largest deviation from "slice preserved, complement carried isometrically out" for one step.
fn slice_residual(
    layout: &ChainLayout,
    family: &MeasurementFamily,
    target: Target,
    psi: &StateVector,
    tuple: &[usize],
    tol: f64,
) -> f64 {
    let k = family.slot();
    let mut slice_lists: Vec<Vec<StateVector>> = layout.factors()[..k].iter().map(FactorSpace::final_basis).collect();
    let mut comp_lists = slice_lists.clone();
    match target {
        Target::System => {
            slice_lists[0] = vec![psi.clone()];
            comp_lists[0] = orthonormal_complement(psi, tol);
        }
        Target::Apparatus(i) => {
            let f = layout.factor(i);
            let m = tuple[i - 1];
            slice_lists[i] = vec![f.final_state(m).clone()];
            comp_lists[i] = (0..f.outcomes().len()).filter(|&x| x != m).map(|x| f.final_state(x).clone()).collect();
        }
    }
    let after = layout.truncate(k);
    let keep = match target {
        Target::System => {
            let rest = Operator::identity(after.total_dim() / psi.dim());
            crate::linalg::tensor_op(&Operator::outer(psi, psi), &rest)
        }
        Target::Apparatus(i) => after.final_subspace_projector(i, tuple[i - 1]).expect("apparatus"),
    };
    let q = Operator::identity(keep.rows()).sub(&keep).expect("square");
    let image = |x: &StateVector| q.apply(&dilate(layout, x, family).expect("dims")).expect("dims");
    let mut worst: f64 = 0.0;
    for x in product_basis(slice_lists) {
        worst = worst.max(image(&x).norm());
    }
    let imgs: Vec<StateVector> = product_basis(comp_lists).iter().map(image).collect();
    for (a, u) in imgs.iter().enumerate() {
        for (b, v) in imgs.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            let g = inner(u, v).expect("dims");
            worst = worst.max((g - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Project the virtual state after measurement `n - 1` with every earlier apparatus pinned.
pub fn overpinned_projection(chain: &Chain, initial: &StateVector, tuple: &[usize]) -> Result<StateVector> {
    let n = chain.n();
    let pins: Vec<Pin> = (1..n).map(|i| (i, tuple[i - 1])).collect();
    let j = chain.layout().joint_projector(&pins)?;
    j.apply(&chain.virtual_state(initial, n - 1)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationSurvey {
    pub samples: usize,
    pub annihilated: usize,
    pub rate: f64,
    /// Per repetition: whether the over-pinned projection vanished.
    pub flags: Vec<bool>,
}

/// Over a sampled world, count repetitions whose over-pinned projection is the zero vector.
pub fn annihilation_survey(chain: &Chain, initial: &StateVector, world: &WorldPrefix<Vec<usize>>, tol: f64) -> Result<AnnihilationSurvey> {
    let mut cache: Vec<(Vec<usize>, bool)> = Vec::new();
    let mut flags = Vec::with_capacity(world.len());
    for t in &world.symbols {
        let z = match cache.iter().find(|(u, _)| u == t) {
            Some(&(_, z)) => z,
            None => {
                let z = overpinned_projection(chain, initial, t)?.is_zero(tol);
                cache.push((t.clone(), z));
                z
            }
        };
        flags.push(z);
    }
    let annihilated = flags.iter().filter(|&&z| z).count();
    let samples = flags.len();
    Ok(AnnihilationSurvey { samples, annihilated, rate: annihilated as f64 / samples.max(1) as f64, flags })
}

/// Merge the last two measurements of `chain` into one apparatus with outcomes `(a, b)`.
///
/// The grouped operators are the composed operators of the two-step
/// sub-chain on factors `0..n-1`; outcome `(a, b)` gets index `a * |Ω_n| + b`
/// and label `"a,b"`.
pub fn group_last_two(chain: &Chain, tol: f64) -> Result<Chain> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::InvalidChain("grouping needs at least two measurements".into()));
    }
    let layout = chain.layout();
    let (fa, fb) = (layout.factor(n - 1), layout.factor(n));
    let d = layout.prefix_dim(n - 1);
    let mut labels = Vec::new();
    let mut ops = Vec::new();
    let mut cols: Vec<Vec<StateVector>> = vec![Vec::with_capacity(d); fa.outcomes().len() * fb.outcomes().len()];
    for s in 0..d {
        let e = StateVector::basis(d, s);
        let mid = dilate(layout, &e, chain.family(n - 1))?;
        let out = dilate(layout, &mid, chain.family(n))?;
        for a in 0..fa.outcomes().len() {
            let x = contract_factor(&out, &[d, fa.dim(), fb.dim()], 1, fa.final_state(a))?;
            for b in 0..fb.outcomes().len() {
                let y = contract_factor(&x, &[d, fb.dim()], 1, fb.final_state(b))?;
                cols[a * fb.outcomes().len() + b].push(y);
            }
        }
    }
    for a in fa.outcomes() {
        for b in fb.outcomes() {
            labels.push(format!("{a},{b}"));
        }
    }
    for c in &cols {
        ops.push(Operator::from_columns(c)?);
    }
    let label = format!("{}+{}", fa.label(), fb.label());
    let mut factors: Vec<FactorSpace> = layout.factors()[..n - 1].to_vec();
    factors.push(FactorSpace::apparatus(label, &labels)?);
    let grouped = ChainLayout::new(factors)?;
    let mut families: Vec<MeasurementFamily> = chain.families()[..n - 2].to_vec();
    families.push(MeasurementFamily::new(n - 1, &labels, ops, tol)?);
    Chain::new(grouped, families, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaiveRuRow {
    /// Tuple of the original chain.
    pub tuple: Vec<usize>,
    /// State of factors `0..n-1` after measurement `n - 2`, naive route on the grouped chain.
    pub naive: StateVector,
    /// Same factors, projector retrodiction on the original chain followed by backtracking.
    pub derived: StateVector,
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaiveRuReport {
    pub grouped_is_pvm: bool,
    /// The checked route refuses the grouped chain.
    pub checked_route_refused: bool,
    pub rows: Vec<NaiveRuRow>,
    pub min_overlap: f64,
    pub max_overlap: f64,
    pub contradiction: bool,
}

/// Exhibit the inconsistency of projector retrodiction without the PVM premise.
///
/// The last two measurements are grouped into one (non-projective) family;
/// the naive projector step on the grouped chain is compared with the state
/// obtained on the original chain by one projector step followed by factor
/// backtracking.
pub fn demonstrate_naive_ru_failure(chain: &Chain, initial: &StateVector, tol: f64) -> Result<NaiveRuReport> {
    let n = chain.n();
    if n < 3 {
        return Err(Error::InvalidChain("the demonstration needs at least three measurements".into()));
    }
    let grouped = group_last_two(chain, tol)?;
    let grouped_is_pvm = grouped.all_pvm(tol);
    let wb = chain.layout().factor(n).outcomes().len();
    let mut rows = Vec::new();
    let mut refused = true;
    for b in compose_chain(chain, initial, tol)?.into_iter().filter(|b| b.weight() > tol) {
        let t = &b.tuple;
        let mut gt = t[..n - 2].to_vec();
        gt.push(t[n - 2] * wb + t[n - 1]);
        let gbranch = b.system.tensor(&grouped.layout().final_product(&gt)?);
        refused &= matches!(ru_step(&grouped, initial, &gbranch, tol), Err(Error::PvmRequired { .. }));
        let naive_total = ru_step_unchecked(&grouped, initial, &gbranch, tol)?;
        let naive = drop_tail(grouped.layout(), &naive_total, n - 2)?;
        // original chain: one projector step, then backtrack factors 0..n-2 on the truncated chain
        let after = ru_step(chain, initial, &b.vector, tol)?;
        let sub = chain.truncate(n - 1);
        let sub_branch = drop_tail(chain.layout(), &after, n - 1)?;
        let derived = backtrack_prefix(&sub, &sub_branch, n - 1, tol)?;
        let overlap = crate::linalg::fidelity(&naive, &derived)?;
        rows.push(NaiveRuRow { tuple: t.clone(), naive, derived, overlap });
    }
    let min_overlap = rows.iter().map(|r| r.overlap).fold(f64::INFINITY, f64::min);
    let max_overlap = rows.iter().map(|r| r.overlap).fold(0.0, f64::max);
    let contradiction = !rows.is_empty() && min_overlap < 1.0 - tol;
    Ok(NaiveRuReport { grouped_is_pvm, checked_route_refused: refused, rows, min_overlap, max_overlap, contradiction })
}
