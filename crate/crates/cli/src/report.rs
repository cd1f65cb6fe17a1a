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


//! Machine-readable run reports.
//!
//! Field order is fixed by the struct definitions and every list follows the
//! chain's tuple order, so identical runs serialize to identical bytes.

use retrodict_core::linalg::StateVector;
use retrodict_core::retrodiction::{AgreementRow, ConfirmingPoint, ConfirmingReport, RetrodictedStates, Target};
use retrodict_core::Error as CoreError;
use retrodict_core::scenarios::{Comparison, RunOptions, ScenarioReport};
use retrodict_core::spaces::ChainLayout;
use retrodict_core::typicality::LlnReport;
use serde::Serialize;

use crate::format::Complex;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: String,
    pub options: OptionsEntry,
    pub factors: Vec<FactorEntry>,
    pub table: Vec<TableRow>,
    pub sampling: SamplingEntry,
    pub confirming: ConfirmingEntry,
    pub branches: Vec<BranchEntry>,
    pub retrodicted: Vec<RetrodictedEntry>,
    pub agreement: Vec<AgreementEntry>,
    pub proposition: PropositionEntry,
    pub overpinning: Option<OverpinningEntry>,
    pub naive_retrodiction: Option<NaiveEntry>,
    pub comparison: Option<ComparisonEntry>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct OptionsEntry {
    pub samples: usize,
    pub seed: u64,
    pub stat_tol: f64,
    pub tol: f64,
}

#[derive(Debug, Serialize)]
pub struct FactorEntry {
    pub label: String,
    pub dim: usize,
    pub outcomes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TableRow {
    pub tuple: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Serialize)]
pub struct FrequencyEntry {
    pub tuple: Vec<String>,
    pub expected: f64,
    pub empirical: f64,
}

#[derive(Debug, Serialize)]
pub struct SamplingEntry {
    pub samples: usize,
    pub seed: u64,
    pub support_ok: bool,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
    pub frequencies: Vec<FrequencyEntry>,
    /// Per apparatus: the outcome recorded in every repetition, if any.
    pub constant_outcomes: Vec<Option<String>>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointEntry {
    SystemItself,
    Apparatus(String),
}

#[derive(Debug, Serialize)]
pub struct ConfirmingEntry {
    pub system_unchanged_after: Vec<bool>,
    /// Row `i - 1`, column `j - 1`: apparatus `i` unchanged after measurement `j`.
    pub apparatus_unchanged_after: Vec<Vec<Option<bool>>>,
    pub system_point: PointEntry,
    pub apparatus_points: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct BranchEntry {
    pub tuple: Vec<String>,
    pub weight: f64,
    pub state: Vec<Complex>,
}

#[derive(Debug, Serialize)]
pub struct StepEntry {
    pub after: usize,
    pub total: Vec<Complex>,
    pub factors: Option<Vec<Vec<Complex>>>,
}

#[derive(Debug, Serialize)]
pub struct RetrodictedEntry {
    pub tuple: Vec<String>,
    pub steps: Vec<StepEntry>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AgreementEntry {
    pub tuple: Vec<String>,
    pub level: usize,
    pub target: String,
    pub before: usize,
    pub agree: bool,
}

#[derive(Debug, Serialize)]
pub struct ViolationEntry {
    pub tuple: Vec<String>,
    pub target: String,
    pub before: usize,
    pub measurement: usize,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct PropositionEntry {
    pub branches: usize,
    pub checks: usize,
    pub violations: Vec<ViolationEntry>,
}

#[derive(Debug, Serialize)]
pub struct OverpinningRow {
    pub tuple: Vec<String>,
    pub occurrences: usize,
    pub annihilated: bool,
}

#[derive(Debug, Serialize)]
pub struct OverpinningEntry {
    pub samples: usize,
    pub annihilated: usize,
    pub rate: f64,
    pub by_tuple: Vec<OverpinningRow>,
}

#[derive(Debug, Serialize)]
pub struct NaiveEntry {
    pub grouped_is_pvm: bool,
    pub checked_route_refused: bool,
    pub min_overlap: f64,
    pub max_overlap: f64,
    pub contradiction: bool,
}

#[derive(Debug, Serialize)]
pub struct ComparisonEntry {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

pub fn state_entry(v: &StateVector) -> Vec<Complex> {
    v.amps().iter().map(|z| [z.re, z.im]).collect()
}

pub fn target_label(layout: &ChainLayout, t: Target) -> String {
    match t {
        Target::System => layout.system().label().to_string(),
        Target::Apparatus(i) => layout.factor(i).label().to_string(),
    }
}

pub fn sampling_entry(layout: &ChainLayout, lln: &LlnReport<Vec<usize>>, samples: usize, seed: u64, support_ok: bool) -> SamplingEntry {
    let constant_outcomes = (1..=layout.n_apparatus())
        .map(|k| {
            let first = lln.rows.iter().find(|r| r.empirical > 0.0)?.symbol[k - 1];
            lln.rows
                .iter()
                .filter(|r| r.empirical > 0.0)
                .all(|r| r.symbol[k - 1] == first)
                .then(|| layout.factor(k).outcomes()[first].clone())
        })
        .collect();
    SamplingEntry {
        samples,
        seed,
        support_ok,
        max_deviation: lln.max_deviation,
        tol: lln.tol,
        pass: lln.pass,
        frequencies: lln
            .rows
            .iter()
            .map(|r| FrequencyEntry { tuple: layout.tuple_labels(&r.symbol), expected: r.expected, empirical: r.empirical })
            .collect(),
        constant_outcomes,
    }
}

pub fn confirming_entry(layout: &ChainLayout, conf: &ConfirmingReport) -> ConfirmingEntry {
    ConfirmingEntry {
        system_unchanged_after: conf.system_unchanged.clone(),
        apparatus_unchanged_after: conf.unchanged.clone(),
        system_point: match conf.system_point {
            ConfirmingPoint::SystemItself => PointEntry::SystemItself,
            ConfirmingPoint::Apparatus(k) => PointEntry::Apparatus(layout.factor(k).label().to_string()),
        },
        apparatus_points: conf.apparatus_points.iter().map(|&k| layout.factor(k).label().to_string()).collect(),
    }
}

pub fn retrodicted_entries(
    layout: &ChainLayout,
    rows: &[(Vec<usize>, Result<RetrodictedStates, CoreError>)],
) -> Vec<RetrodictedEntry> {
    rows.iter()
        .map(|(t, res)| match res {
            Ok(rs) => RetrodictedEntry {
                tuple: layout.tuple_labels(t),
                steps: rs
                    .steps
                    .iter()
                    .map(|st| StepEntry {
                        after: st.step,
                        total: state_entry(&st.total),
                        factors: st.factors.as_ref().map(|fs| fs.iter().map(state_entry).collect()),
                    })
                    .collect(),
                error: None,
            },
            Err(e) => RetrodictedEntry { tuple: layout.tuple_labels(t), steps: Vec::new(), error: Some(e.to_string()) },
        })
        .collect()
}

pub fn agreement_entries(layout: &ChainLayout, rows: &[(Vec<usize>, Vec<AgreementRow>)]) -> Vec<AgreementEntry> {
    rows.iter()
        .flat_map(|(t, rows)| {
            rows.iter().map(move |row| AgreementEntry {
                tuple: layout.tuple_labels(t),
                level: row.level,
                target: target_label(layout, row.target),
                before: row.step,
                agree: row.agree,
            })
        })
        .collect()
}

/// Overall verdict: sampling, proposition, route agreement and (if given) the oracle.
pub fn run_passed(r: &ScenarioReport, cmp: Option<&Comparison>) -> bool {
    r.sampling.support_ok
        && r.sampling.lln.pass
        && r.confirmation.passed()
        && r.agreement.iter().all(|(_, rows)| rows.iter().all(|x| x.agree))
        && cmp.is_none_or(Comparison::passed)
}

impl RunReport {
    pub fn new(r: &ScenarioReport, opts: &RunOptions, cmp: Option<&Comparison>) -> Self {
        let layout = r.chain.layout();
        let labels = |t: &[usize]| layout.tuple_labels(t);
        let s = &r.sampling;
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: r.name.clone(),
            options: OptionsEntry { samples: opts.samples, seed: opts.seed, stat_tol: opts.stat_tol, tol: opts.tol },
            factors: layout
                .factors()
                .iter()
                .map(|f| FactorEntry { label: f.label().to_string(), dim: f.dim(), outcomes: f.outcomes().to_vec() })
                .collect(),
            table: r.table.iter().map(|(t, p)| TableRow { tuple: labels(t), probability: p }).collect(),
            sampling: sampling_entry(layout, &s.lln, s.samples, s.seed, s.support_ok),
            confirming: confirming_entry(layout, &r.confirming),
            branches: r
                .branch_vectors
                .iter()
                .zip(&r.branch_states)
                .map(|((t, v), (_, u))| BranchEntry { tuple: labels(t), weight: v.norm_sqr(), state: state_entry(u) })
                .collect(),
            retrodicted: retrodicted_entries(layout, &r.retrodicted),
            agreement: agreement_entries(layout, &r.agreement),
            proposition: PropositionEntry {
                branches: r.confirmation.branches,
                checks: r.confirmation.checks,
                violations: r
                    .confirmation
                    .violations
                    .iter()
                    .map(|v| ViolationEntry {
                        tuple: labels(&v.tuple),
                        target: target_label(layout, v.target),
                        before: v.step,
                        measurement: v.measurement,
                        residual: v.residual,
                    })
                    .collect(),
            },
            overpinning: r.overpinning.as_ref().map(|a| OverpinningEntry {
                samples: a.samples,
                annihilated: a.annihilated,
                rate: a.rate,
                by_tuple: a
                    .by_tuple
                    .iter()
                    .map(|(t, n, z)| OverpinningRow { tuple: labels(t), occurrences: *n, annihilated: *z })
                    .collect(),
            }),
            naive_retrodiction: r.naive_retrodiction.as_ref().map(|n| NaiveEntry {
                grouped_is_pvm: n.grouped_is_pvm,
                checked_route_refused: n.checked_route_refused,
                min_overlap: n.min_overlap,
                max_overlap: n.max_overlap,
                contradiction: n.contradiction,
            }),
            comparison: cmp.map(|c| ComparisonEntry { checked: c.checked, mismatches: c.mismatches.clone() }),
            pass: run_passed(r, cmp),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}
