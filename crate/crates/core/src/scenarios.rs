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

//! Built-in scenarios, their exact oracles, and the end-to-end runner.
//!
//! Canonical pointer layout: apparatus `F` has basis `[Φ[0], Φ[1], init]`,
//! `W` has `[Φ[0], Φ[1], Φ[2], init]`, `D` has `[Φ[+], Φ[-], init]`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    approx_eq_up_to_phase, projector_complement, projector_onto, re, tensor_all, tensor_op, Operator, StateVector,
};
use crate::measurement::{compose_chain, Chain, MeasurementFamily};
use crate::probability::{marginalize, world_distribution, FiniteProbabilitySpace};
use crate::retrodiction::{
    annihilation_survey, confirming_report, demonstrate_naive_ru_failure, retrodiction_agreement, ru_recursive,
    verify_proposition1, AgreementRow, ConfirmingPoint, ConfirmingReport, NaiveRuReport, Prop1Report,
    RetrodictedStates,
};
use crate::spaces::{ChainLayout, FactorSpace};
use crate::typicality::{check_lln, check_support, sample_worlds, LlnReport, WorldPrefix};

pub const BUILTIN_NAMES: [&str; 5] = ["wigner_friend", "deutsch", "deutsch_mere_f", "wdc", "wdc_mere_f"];

const S2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// A chain description before mere-system resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: String,
    pub layout: ChainLayout,
    pub initial: StateVector,
    pub families: Vec<MeasurementFamily>,
    /// Leading families applied as plain evolution; their factors join the system.
    pub mere_system_prefix: Option<usize>,
}

/// A validated chain and its start state on the (possibly merged) system.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedScenario {
    pub chain: Chain,
    pub initial: StateVector,
}

impl ScenarioSpec {
    pub fn resolve(&self, tol: f64) -> Result<ResolvedScenario> {
        if (self.initial.norm() - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("initial state has norm {}", self.initial.norm())));
        }
        let full = Chain::new(self.layout.clone(), self.families.clone(), tol)?;
        let p = self.mere_system_prefix.unwrap_or(0);
        if p == 0 {
            return Ok(ResolvedScenario { chain: full, initial: self.initial.clone() });
        }
        if p >= full.n() {
            return Err(Error::InvalidArgument(format!(
                "mere-system prefix {p} leaves no measurement out of {}",
                full.n()
            )));
        }
        let initial = full.truncate(p).evolve(&self.initial, p)?;
        let layout = self.layout.merge_prefix(p)?;
        let families = self.families[p..].iter().map(|f| f.reslot(f.slot() - p)).collect();
        Ok(ResolvedScenario { chain: Chain::new(layout, families, tol)?, initial })
    }
}

fn ket(dim: usize, i: usize) -> StateVector {
    StateVector::basis(dim, i)
}

fn proj(v: &StateVector) -> Operator {
    Operator::outer(v, v)
}

fn plus() -> StateVector {
    StateVector::from_real(&[S2, S2]).expect("finite")
}

fn system() -> FactorSpace {
    FactorSpace::system("S", 2).expect("positive dim")
}

fn observer_f() -> FactorSpace {
    FactorSpace::apparatus("F", &["0", "1"]).expect("valid alphabet")
}

fn observer_w() -> FactorSpace {
    FactorSpace::apparatus("W", &["0", "1", "2"]).expect("valid alphabet")
}

fn observer_d() -> FactorSpace {
    FactorSpace::apparatus("D", &["+", "-"]).expect("valid alphabet")
}

/// `(|0⟩Φ^F[0] ± |1⟩Φ^F[1]) / √2` on `S ⊗ F`.
pub fn psi_sf(sign: f64) -> StateVector {
    let a = ket(2, 0).tensor(&ket(3, 0));
    let b = ket(2, 1).tensor(&ket(3, 1));
    a.scale(re(S2)).add(&b.scale(re(sign * S2))).expect("same dim")
}

fn f_family(tol: f64) -> Result<MeasurementFamily> {
    MeasurementFamily::new(1, &["0", "1"], vec![proj(&ket(2, 0)), proj(&ket(2, 1))], tol)
}

/// `I_S ⊗ {Π_0, Π_1, I - Π_0 - Π_1}` reading `F`'s pointer.
fn w_family(slot: usize, tol: f64) -> Result<MeasurementFamily> {
    let w0 = proj(&ket(3, 0));
    let w1 = proj(&ket(3, 1));
    let w2 = projector_complement(&[w0.clone(), w1.clone()], tol)?;
    let i = Operator::identity(2);
    MeasurementFamily::new(slot, &["0", "1", "2"], vec![tensor_op(&i, &w0), tensor_op(&i, &w1), tensor_op(&i, &w2)], tol)
}

/// `{|Ψ+⟩⟨Ψ+|, I - |Ψ+⟩⟨Ψ+|}` on `S ⊗ F`, padded by identity on `extra` trailing dims.
fn d_family(slot: usize, extra: usize, tol: f64) -> Result<MeasurementFamily> {
    let p = projector_onto(&psi_sf(1.0), tol)?;
    let q = Operator::identity(6).sub(&p)?;
    let pad = Operator::identity(extra);
    MeasurementFamily::new(slot, &["+", "-"], vec![tensor_op(&p, &pad), tensor_op(&q, &pad)], tol)
}

/// One of the five built-in scenarios.
pub fn build_scenario(name: &str) -> Result<ScenarioSpec> {
    let tol = 1e-12;
    let spec = |description: &str, factors: Vec<FactorSpace>, families, prefix| -> Result<ScenarioSpec> {
        Ok(ScenarioSpec {
            name: name.to_string(),
            description: description.to_string(),
            layout: ChainLayout::new(factors)?,
            initial: plus(),
            families,
            mere_system_prefix: prefix,
        })
    };
    match name {
        "wigner_friend" => spec(
            "F measures a qubit in |+>; W then reads F's pointer",
            vec![system(), observer_f(), observer_w()],
            vec![f_family(tol)?, w_family(2, tol)?],
            None,
        ),
        "deutsch" => spec(
            "F measures a qubit in |+>; D measures S+F in the entangled basis",
            vec![system(), observer_f(), observer_d()],
            vec![f_family(tol)?, d_family(2, 1, tol)?],
            None,
        ),
        "deutsch_mere_f" => spec(
            "as deutsch, with F treated as a plain quantum system",
            vec![system(), observer_f(), observer_d()],
            vec![f_family(tol)?, d_family(2, 1, tol)?],
            Some(1),
        ),
        "wdc" => spec(
            "F measures, W reads F, then D measures S+F in the entangled basis",
            vec![system(), observer_f(), observer_w(), observer_d()],
            vec![f_family(tol)?, w_family(2, tol)?, d_family(3, 4, tol)?],
            None,
        ),
        "wdc_mere_f" => spec(
            "as wdc, with F treated as a plain quantum system",
            vec![system(), observer_f(), observer_w(), observer_d()],
            vec![f_family(tol)?, w_family(2, tol)?, d_family(3, 4, tol)?],
            Some(1),
        ),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Sign of the three-observer branch `(k, l, m)`: negative iff `k ≠ l` and `m = -`.
pub fn sign_f(k: usize, l: usize, m: usize) -> f64 {
    if k != l && m == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Sign of the mere-system branch `(l, m)`: negative iff `l = 1` and `m = -`.
pub fn sign_g(l: usize, m: usize) -> f64 {
    if l == 1 && m == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Exact values a run must reproduce.
#[derive(Clone, Debug)]
pub struct ExpectedReport {
    pub table: FiniteProbabilitySpace<Vec<usize>>,
    /// Signed branch vectors (unnormalized) for positive-weight tuples.
    pub branch_states: Vec<(Vec<usize>, StateVector)>,
    /// `(tuple, step)` → unit total state after that step.
    pub retrodicted: Vec<((Vec<usize>, usize), StateVector)>,
    pub system_point: ConfirmingPoint,
    pub apparatus_points: Vec<usize>,
    /// `(i, j, unchanged)` facts about apparatus `i` under measurement `j`.
    pub unchanged: Vec<(usize, usize, bool)>,
    /// Tuples whose over-pinned projection must vanish.
    pub annihilates: Option<fn(&[usize]) -> bool>,
    /// Squared overlap between naive and derived retrodicted states.
    pub naive_overlap: Option<f64>,
}

fn table(tuples: Vec<Vec<usize>>, weight: impl Fn(&[usize]) -> f64) -> FiniteProbabilitySpace<Vec<usize>> {
    let w = tuples.iter().map(|t| weight(t)).collect();
    FiniteProbabilitySpace::new(tuples, w, 1e-12).expect("oracle tables are normalized")
}

fn grid(sizes: &[usize]) -> Vec<Vec<usize>> {
    crate::measurement::all_tuples(sizes)
}

fn not_equal(t: &[usize]) -> bool {
    t[0] != t[1]
}

/// Oracle for a built-in scenario, written from the closed-form analysis.
pub fn expected_report(name: &str) -> Result<ExpectedReport> {
    let (wi, di) = (ket(4, 3), ket(3, 2));
    let sf = |b: usize| ket(2, b).tensor(&ket(3, b));
    Ok(match name {
        "wigner_friend" => {
            let tab = table(grid(&[2, 3]), |t| if t[0] == t[1] { 0.5 } else { 0.0 });
            let mut branch_states = Vec::new();
            let mut retrodicted = Vec::new();
            for a in 0..2 {
                let t = vec![a, a];
                let b = tensor_all([&sf(a), &ket(4, a)]);
                branch_states.push((t.clone(), b.scale(re(S2))));
                retrodicted.push(((t.clone(), 2), b));
                retrodicted.push(((t, 1), tensor_all([&sf(a), &wi])));
            }
            ExpectedReport {
                table: tab,
                branch_states,
                retrodicted,
                system_point: ConfirmingPoint::Apparatus(1),
                apparatus_points: vec![1, 2],
                unchanged: vec![(1, 2, true)],
                annihilates: None,
                naive_overlap: None,
            }
        }
        "deutsch" => {
            let tab = table(grid(&[2, 2]), |t| if t[1] == 0 { 0.5 } else { 0.0 });
            let mut branch_states = Vec::new();
            let mut retrodicted = Vec::new();
            for k in 0..2 {
                let t = vec![k, 0];
                let b = tensor_all([&sf(k), &ket(3, 0)]);
                branch_states.push((t.clone(), b.scale(re(S2))));
                retrodicted.push(((t.clone(), 2), b));
                retrodicted.push(((t, 1), psi_sf(1.0).tensor(&di)));
            }
            ExpectedReport {
                table: tab,
                branch_states,
                retrodicted,
                system_point: ConfirmingPoint::Apparatus(2),
                apparatus_points: vec![2, 2],
                unchanged: vec![(1, 2, false)],
                annihilates: None,
                naive_overlap: None,
            }
        }
        "deutsch_mere_f" => {
            let tab = table(grid(&[2]), |t| if t[0] == 0 { 1.0 } else { 0.0 });
            let b = psi_sf(1.0).tensor(&ket(3, 0));
            ExpectedReport {
                table: tab,
                branch_states: vec![(vec![0], b.clone())],
                retrodicted: vec![((vec![0], 1), b)],
                system_point: ConfirmingPoint::Apparatus(1),
                apparatus_points: vec![1],
                unchanged: Vec::new(),
                annihilates: None,
                naive_overlap: None,
            }
        }
        "wdc" => {
            let tab = table(grid(&[2, 3, 2]), |t| if t[1] < 2 { 0.125 } else { 0.0 });
            let mut branch_states = Vec::new();
            let mut retrodicted = Vec::new();
            for t in grid(&[2, 2, 2]) {
                let (k, l, m) = (t[0], t[1], t[2]);
                let b = tensor_all([&sf(k), &ket(4, l), &ket(3, m)]);
                branch_states.push((t.clone(), b.scale(re(sign_f(k, l, m) * 0.5 * S2))));
                retrodicted.push(((t.clone(), 3), b));
                retrodicted.push(((t.clone(), 2), tensor_all([&sf(l), &ket(4, l), &di])));
                retrodicted.push(((t, 1), tensor_all([&sf(l), &wi, &di])));
            }
            ExpectedReport {
                table: tab,
                branch_states,
                retrodicted,
                system_point: ConfirmingPoint::Apparatus(3),
                apparatus_points: vec![3, 2, 3],
                unchanged: vec![(1, 2, true), (1, 3, false), (2, 3, true)],
                annihilates: Some(not_equal),
                naive_overlap: Some(0.5),
            }
        }
        "wdc_mere_f" => {
            let tab = table(grid(&[3, 2]), |t| if t[0] < 2 { 0.25 } else { 0.0 });
            let mut branch_states = Vec::new();
            let mut retrodicted = Vec::new();
            for t in grid(&[2, 2]) {
                let (l, m) = (t[0], t[1]);
                let pm = if m == 0 { 1.0 } else { -1.0 };
                let b = tensor_all([&psi_sf(pm), &ket(4, l), &ket(3, m)]);
                branch_states.push((t.clone(), b.scale(re(sign_g(l, m) * 0.5))));
                retrodicted.push(((t.clone(), 2), b));
                retrodicted.push(((t, 1), tensor_all([&sf(l), &ket(4, l), &di])));
            }
            ExpectedReport {
                table: tab,
                branch_states,
                retrodicted,
                system_point: ConfirmingPoint::Apparatus(2),
                apparatus_points: vec![1, 2],
                unchanged: vec![(1, 2, true)],
                annihilates: None,
                naive_overlap: None,
            }
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    })
}

/// Knobs for [`run_scenario`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    /// Tolerance for empirical frequencies.
    pub stat_tol: f64,
    /// Tolerance for algebraic identities.
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, stat_tol: 0.01, tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSummary {
    pub samples: usize,
    pub seed: u64,
    pub support_ok: bool,
    pub lln: LlnReport<Vec<usize>>,
    /// Per apparatus: the outcome index recorded in every repetition, if any.
    pub constant_outcomes: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationSummary {
    pub samples: usize,
    pub annihilated: usize,
    pub rate: f64,
    /// `(tuple, occurrences, annihilated)` for every tuple seen in the world.
    pub by_tuple: Vec<(Vec<usize>, usize, bool)>,
}

/// Everything a scenario run derives.
#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub name: String,
    pub chain: Chain,
    pub initial: StateVector,
    pub table: FiniteProbabilitySpace<Vec<usize>>,
    pub sampling: SamplingSummary,
    pub confirming: ConfirmingReport,
    /// Unit branch states for positive-weight tuples.
    pub branch_states: Vec<(Vec<usize>, StateVector)>,
    /// Signed unnormalized branch vectors for positive-weight tuples.
    pub branch_vectors: Vec<(Vec<usize>, StateVector)>,
    pub retrodicted: Vec<(Vec<usize>, core::result::Result<RetrodictedStates, Error>)>,
    pub agreement: Vec<(Vec<usize>, Vec<AgreementRow>)>,
    pub confirmation: Prop1Report,
    pub overpinning: Option<AnnihilationSummary>,
    pub naive_retrodiction: Option<NaiveRuReport>,
}

/// Run a scenario with the sequential sampler.
pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<ScenarioReport> {
    run_scenario_with(spec, opts, sample_worlds)
}

/// Run a scenario with a caller-supplied sampler (same contract as [`sample_worlds`]).
pub fn run_scenario_with<F>(spec: &ScenarioSpec, opts: &RunOptions, sampler: F) -> Result<ScenarioReport>
where
    F: Fn(&FiniteProbabilitySpace<Vec<usize>>, usize, u64) -> Result<WorldPrefix<Vec<usize>>>,
{
    let tol = opts.tol;
    let ResolvedScenario { chain, initial } = spec.resolve(tol)?;
    let branches = compose_chain(&chain, &initial, tol)?;
    let table = world_distribution(&branches, tol)?;
    let world = sampler(&table, opts.samples, opts.seed)?;
    let lln = check_lln(&table, &world, opts.stat_tol)?;
    let constant_outcomes = (0..chain.n())
        .map(|j| {
            let first = world.symbols.first()?[j];
            world.symbols.iter().all(|t| t[j] == first).then_some(first)
        })
        .collect();
    let sampling = SamplingSummary {
        samples: world.len(),
        seed: opts.seed,
        support_ok: check_support(&table, &world),
        lln,
        constant_outcomes,
    };
    let confirming = confirming_report(&chain, tol);
    let live: Vec<_> = branches.iter().filter(|b| b.weight() > tol).collect();
    let mut branch_states = Vec::new();
    let mut branch_vectors = Vec::new();
    let mut retrodicted = Vec::new();
    let mut agreement = Vec::new();
    let all_pvm = chain.all_pvm(tol);
    for b in &live {
        branch_states.push((b.tuple.clone(), b.vector.normalize_with(tol)?));
        branch_vectors.push((b.tuple.clone(), b.vector.clone()));
        retrodicted.push((b.tuple.clone(), ru_recursive(&chain, &initial, &b.vector, tol)));
        if all_pvm {
            if let Ok(rows) = retrodiction_agreement(&chain, &initial, &b.vector, tol) {
                agreement.push((b.tuple.clone(), rows));
            }
        }
    }
    let confirmation = verify_proposition1(&chain, &initial, tol)?;
    let (overpinning, naive_retrodiction) = if chain.n() >= 3 && all_pvm {
        let s = annihilation_survey(&chain, &initial, &world, tol)?;
        let mut by_tuple: Vec<(Vec<usize>, usize, bool)> = Vec::new();
        for (t, &z) in world.symbols.iter().zip(&s.flags) {
            match by_tuple.iter_mut().find(|(u, _, _)| u == t) {
                Some(row) => row.1 += 1,
                None => by_tuple.push((t.clone(), 1, z)),
            }
        }
        by_tuple.sort();
        let summary = AnnihilationSummary { samples: s.samples, annihilated: s.annihilated, rate: s.rate, by_tuple };
        (Some(summary), Some(demonstrate_naive_ru_failure(&chain, &initial, tol)?))
    } else {
        (None, None)
    };
    Ok(ScenarioReport {
        name: spec.name.clone(),
        chain,
        initial,
        table,
        sampling,
        confirming,
        branch_states,
        branch_vectors,
        retrodicted,
        agreement,
        confirmation,
        overpinning,
        naive_retrodiction,
    })
}

/// Outcome of [`compare_expected`]: one line per mismatch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Comparison {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches.push(what());
        }
    }
}

/// Compare a run against an oracle: tables entrywise, states up to phase.
pub fn compare_expected(report: &ScenarioReport, oracle: &ExpectedReport, tol: f64) -> Comparison {
    let mut c = Comparison::default();
    let layout = report.chain.layout();
    let show = |t: &[usize]| format!("({})", layout.tuple_labels(t).join(","));
    c.check(report.table.len() == oracle.table.len(), || "table size differs".into());
    for (t, want) in oracle.table.iter() {
        let got = report.table.weight(t);
        c.check(got.is_some_and(|g| (g - want).abs() <= tol), || {
            format!("P{} = {:?}, expected {want}", show(t), got)
        });
    }
    for (t, want) in &oracle.branch_states {
        let got = report.branch_vectors.iter().find(|(u, _)| u == t).map(|(_, v)| v);
        c.check(got.is_some_and(|g| crate::linalg::approx_eq(g, want, tol)), || {
            format!("branch {} differs from the signed closed form", show(t))
        });
    }
    for ((t, k), want) in &oracle.retrodicted {
        let got = report
            .retrodicted
            .iter()
            .find(|(u, _)| u == t)
            .and_then(|(_, r)| r.as_ref().ok())
            .and_then(|r| r.after(*k))
            .map(|s| &s.total);
        c.check(got.is_some_and(|g| approx_eq_up_to_phase(g, want, tol)), || {
            format!("retrodicted state after step {k} on branch {} differs", show(t))
        });
    }
    c.check(report.confirming.system_point == oracle.system_point, || {
        format!("system confirming point {:?}, expected {:?}", report.confirming.system_point, oracle.system_point)
    });
    c.check(report.confirming.apparatus_points == oracle.apparatus_points, || {
        format!(
            "apparatus confirming points {:?}, expected {:?}",
            report.confirming.apparatus_points, oracle.apparatus_points
        )
    });
    for &(i, j, want) in &oracle.unchanged {
        let got = report.confirming.unchanged[i - 1][j - 1];
        c.check(got == Some(want), || format!("unchanged({i}, {j}) = {got:?}, expected {want}"));
    }
    c.check(report.sampling.support_ok, || "sampled world leaves the support".into());
    c.check(report.sampling.lln.pass, || {
        format!("max frequency deviation {:.4} exceeds {}", report.sampling.lln.max_deviation, report.sampling.lln.tol)
    });
    c.check(report.confirmation.passed(), || format!("{} proposition violations", report.confirmation.violations.len()));
    for (t, rows) in &report.agreement {
        c.check(rows.iter().all(|r| r.agree), || format!("retrodiction routes disagree on branch {}", show(t)));
    }
    if let Some(pred) = oracle.annihilates {
        match &report.overpinning {
            Some(r1) => {
                for (t, _, z) in &r1.by_tuple {
                    c.check(*z == pred(t), || format!("annihilation on {} is {z}", show(t)));
                }
            }
            None => c.check(false, || "annihilation survey missing".into()),
        }
    }
    if let Some(want) = oracle.naive_overlap {
        match &report.naive_retrodiction {
            Some(r2) => {
                c.check(!r2.grouped_is_pvm, || "grouped family unexpectedly projective".into());
                c.check(r2.contradiction, || "naive retrodiction not flagged".into());
                c.check((r2.min_overlap - want).abs() <= tol && (r2.max_overlap - want).abs() <= tol, || {
                    format!("naive overlap in [{}, {}], expected {want}", r2.min_overlap, r2.max_overlap)
                });
            }
            None => c.check(false, || "naive retrodiction demonstration missing".into()),
        }
    }
    c
}

/// Marginal over the first apparatus, e.g. the three-observer table summed over `k`.
pub fn drop_first(p: &FiniteProbabilitySpace<Vec<usize>>) -> FiniteProbabilitySpace<Vec<usize>> {
    marginalize(p, |t| t[1..].to_vec())
}
