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


//! Subcommand bodies. Each writes human-readable text to `out` and returns the
//! exit status; input problems surface as [`CliError`].

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use retrodict_core::linalg::StateVector;
use retrodict_core::measurement::{compose_chain, Chain};
use retrodict_core::probability::world_distribution;
use retrodict_core::retrodiction::{confirming_report, retrodiction_agreement, ru_recursive, ConfirmingPoint};
use retrodict_core::scenarios::{
    build_scenario, compare_expected, expected_report, run_scenario_with, RunOptions, ScenarioSpec, BUILTIN_NAMES,
};
use retrodict_core::spaces::{ChainLayout, FactorSpace, Role};
use retrodict_core::typicality::{check_lln, check_support};
use serde::Serialize;

use crate::error::{CliError, ExitCode};
use crate::format::{load_scenario, scenario_to_json};
use crate::parallel::host_sampler;
use crate::report::{
    agreement_entries, confirming_entry, retrodicted_entries, run_passed, sampling_entry, AgreementEntry,
    ConfirmingEntry, RetrodictedEntry, RunReport, SamplingEntry, REPORT_SCHEMA_VERSION,
};

/// Amplitudes below this are omitted from printed kets.
const PRINT_EPS: f64 = 1e-12;

/// Flags shared by the sampling commands.
#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub scenario: String,
    pub samples: usize,
    pub seed: u64,
    pub stat_tol: f64,
    pub tol: f64,
    pub json_out: Option<PathBuf>,
    pub quiet: bool,
}

impl CliConfig {
    fn run_options(&self) -> RunOptions {
        RunOptions { samples: self.samples, seed: self.seed, stat_tol: self.stat_tol, tol: self.tol }
    }
}

/// A built-in name, or a path to a scenario file.
pub fn resolve_input(arg: &str) -> Result<ScenarioSpec, CliError> {
    if BUILTIN_NAMES.contains(&arg) {
        return Ok(build_scenario(arg)?);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return load_scenario(path);
    }
    Err(CliError::UnknownScenario(arg.to_string()))
}

/// The spec is exactly a built-in, so its oracle applies.
fn is_builtin(spec: &ScenarioSpec) -> bool {
    build_scenario(&spec.name).is_ok_and(|b| b == *spec)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    std::fs::write(path, s).map_err(io_err(path))
}

fn show_tuple(layout: &ChainLayout, t: &[usize]) -> String {
    format!("({})", layout.tuple_labels(t).join(","))
}

fn basis_label(f: &FactorSpace, i: usize) -> String {
    if f.role() == Role::System {
        return i.to_string();
    }
    if f.init_index() == Some(i) {
        return "init".into();
    }
    let canonical = f.final_states().iter().position(|v| *v == StateVector::basis(f.dim(), i));
    match canonical {
        Some(m) => f.outcomes()[m].clone(),
        None => format!("#{i}"),
    }
}

fn coefficient(z: retrodict_core::linalg::C64) -> String {
    if z.im.abs() < PRINT_EPS {
        format!("{:+.6}", z.re)
    } else {
        format!("({:+.6}{:+.6}i)", z.re, z.im)
    }
}

/// Ket expansion of `v` over the product basis of `factors`.
pub fn format_state(factors: &[FactorSpace], v: &StateVector) -> String {
    let dims: Vec<usize> = factors.iter().map(FactorSpace::dim).collect();
    let mut terms = Vec::new();
    for (idx, z) in v.amps().iter().enumerate() {
        if z.norm() < PRINT_EPS {
            continue;
        }
        let mut rest = idx;
        let mut digits = vec![0; dims.len()];
        for (k, &d) in dims.iter().enumerate().rev() {
            digits[k] = rest % d;
            rest /= d;
        }
        let labels: Vec<String> = factors.iter().zip(&digits).map(|(f, &i)| basis_label(f, i)).collect();
        terms.push(format!("{} |{}⟩", coefficient(*z), labels.join(",")));
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

fn point_name(layout: &ChainLayout, p: ConfirmingPoint) -> String {
    match p {
        ConfirmingPoint::SystemItself => format!("{} itself", layout.system().label()),
        ConfirmingPoint::Apparatus(k) => layout.factor(k).label().to_string(),
    }
}

fn confirming_text(layout: &ChainLayout, chain: &Chain, tol: f64) -> String {
    let rep = confirming_report(chain, tol);
    let mut s = String::new();
    let n = chain.n();
    let heads: Vec<&str> = (1..=n).map(|j| layout.factor(j).label()).collect();
    let _ = writeln!(s, "unchanged after measurement by: {}", heads.join(" "));
    let yn = |b: bool| if b { "yes" } else { "no" };
    let row: Vec<&str> = rep.system_unchanged.iter().map(|&b| yn(b)).collect();
    let _ = writeln!(s, "  {:<6} {}", layout.system().label(), row.join(" "));
    for i in 1..=n {
        let row: Vec<&str> = rep.unchanged[i - 1].iter().map(|u| u.map_or("-", yn)).collect();
        let _ = writeln!(s, "  {:<6} {}", layout.factor(i).label(), row.join(" "));
    }
    let _ = writeln!(s, "confirming point for {}: {}", layout.system().label(), point_name(layout, rep.system_point));
    for i in 1..=n {
        let _ = writeln!(s, "confirming point for {}: {}", layout.factor(i).label(), layout.factor(rep.apparatus_points[i - 1]).label());
    }
    s
}

pub fn cmd_list(out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let mut s = String::new();
    for name in BUILTIN_NAMES {
        let spec = build_scenario(name)?;
        let _ = writeln!(s, "{name:<16} {}", spec.description);
    }
    emit(out, &s)?;
    Ok(ExitCode::Pass)
}

pub fn cmd_run(cfg: &CliConfig, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let spec = resolve_input(&cfg.scenario)?;
    let opts = cfg.run_options();
    let report = run_scenario_with(&spec, &opts, host_sampler)?;
    let cmp = if is_builtin(&spec) {
        Some(compare_expected(&report, &expected_report(&spec.name)?, cfg.tol))
    } else {
        None
    };
    let pass = run_passed(&report, cmp.as_ref());
    if let Some(path) = &cfg.json_out {
        write_json(path, &RunReport::new(&report, &opts, cmp.as_ref()))?;
    }
    if cfg.quiet {
        return Ok(ExitCode::from_pass(pass));
    }
    let layout = report.chain.layout();
    let mut s = String::new();
    let names: Vec<&str> = layout.factors().iter().map(FactorSpace::label).collect();
    let _ = writeln!(s, "scenario {}: {} ({} samples, seed {})", report.name, names.join(" ⊗ "), cfg.samples, cfg.seed);
    let _ = writeln!(s, "{:<16} {:>10} {:>10}", "outcome", "P", "frequency");
    for row in &report.sampling.lln.rows {
        let _ = writeln!(s, "{:<16} {:>10.6} {:>10.6}", show_tuple(layout, &row.symbol), row.expected, row.empirical);
    }
    let lln = &report.sampling.lln;
    let verdict = if lln.pass && report.sampling.support_ok { "pass" } else { "FAIL" };
    let _ = writeln!(s, "LLN: max deviation {:.6} (tol {}): {verdict}", lln.max_deviation, lln.tol);
    for (j, c) in report.sampling.constant_outcomes.iter().enumerate() {
        if let Some(m) = c {
            let f = layout.factor(j + 1);
            let _ = writeln!(s, "observer {} records {} in every repetition", f.label(), f.outcomes()[*m]);
        }
    }
    s.push_str(&confirming_text(layout, &report.chain, cfg.tol));
    let rows: Vec<bool> = report.agreement.iter().flat_map(|(_, r)| r.iter().map(|x| x.agree)).collect();
    let agree = rows.iter().filter(|&&a| a).count();
    let _ = writeln!(s, "retrodiction routes: {agree} of {} comparisons agree", rows.len());
    let p = &report.confirmation;
    let _ = writeln!(s, "proposition check: {} checks over {} branches, {} violations", p.checks, p.branches, p.violations.len());
    if let Some(r1) = &report.overpinning {
        let _ = writeln!(
            s,
            "over-pinned projection vanished in {} of {} repetitions (rate {:.5})",
            r1.annihilated, r1.samples, r1.rate
        );
    }
    if let Some(r2) = &report.naive_retrodiction {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "grouped last two families: PVM {}; checked route refuses: {}; naive overlap {:.6}..{:.6}; contradiction: {}",
            yn(r2.grouped_is_pvm),
            yn(r2.checked_route_refused),
            r2.min_overlap,
            r2.max_overlap,
            yn(r2.contradiction)
        );
    }
    if let Some(c) = &cmp {
        if c.passed() {
            let _ = writeln!(s, "oracle: {} checks, all match", c.checked);
        } else {
            let _ = writeln!(s, "oracle: {} of {} checks failed", c.mismatches.len(), c.checked);
            for m in &c.mismatches {
                let _ = writeln!(s, "  {m}");
            }
        }
    }
    let _ = writeln!(s, "{}", if pass { "PASS" } else { "FAIL" });
    emit(out, &s)?;
    Ok(ExitCode::from_pass(pass))
}

pub fn cmd_verify(scenario: &str, tol: f64, quiet: bool, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let spec = resolve_input(scenario)?;
    let chain = Chain::new_unchecked(spec.layout.clone(), spec.families.clone())?;
    let layout = chain.layout();
    let pvm: Vec<bool> = chain.families().iter().map(|f| f.check_pvm(tol)).collect();
    let incomplete: Vec<(String, f64)> = chain
        .families()
        .iter()
        .filter(|f| !f.check_completeness(tol))
        .map(|f| (layout.factor(f.slot()).label().to_string(), f.completeness_residual()))
        .collect();
    let leaking: Vec<&str> = chain
        .families()
        .iter()
        .filter(|f| !f.check_domain_condition(layout, tol))
        .map(|f| layout.factor(f.slot()).label())
        .collect();
    let norm_ok = (spec.initial.norm() - 1.0).abs() <= tol;
    let pass = incomplete.is_empty() && leaking.is_empty() && norm_ok;
    if !quiet {
        let yn: Vec<&str> = pvm.iter().map(|&b| if b { "yes" } else { "no" }).collect();
        let ok = |b: bool| if b { "ok" } else { "FAILED" };
        let mut s = format!(
            "PVM: {}; completeness: {}; domain condition: {}\n",
            yn.join(" "),
            ok(incomplete.is_empty()),
            ok(leaking.is_empty())
        );
        for (label, r) in &incomplete {
            let _ = writeln!(s, "  family of {label} is incomplete (residual {r:.3e})");
        }
        for label in &leaking {
            let _ = writeln!(s, "  family of {label} leaves the final-pointer domain");
        }
        if !norm_ok {
            let _ = writeln!(s, "  initial state has norm {}", spec.initial.norm());
        }
        emit(out, &s)?;
    }
    Ok(ExitCode::from_pass(pass))
}

#[derive(Serialize)]
struct SampleReport {
    schema_version: u32,
    scenario: String,
    sampling: SamplingEntry,
}

/// Emit the sampled world as JSON lines, one outcome tuple per line.
pub fn cmd_sample(cfg: &CliConfig, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let spec = resolve_input(&cfg.scenario)?;
    let r = spec.resolve(cfg.tol)?;
    let layout = r.chain.layout();
    let table = world_distribution(&compose_chain(&r.chain, &r.initial, cfg.tol)?, cfg.tol)?;
    let world = host_sampler(&table, cfg.samples, cfg.seed)?;
    let mut lines = String::with_capacity(world.len() * 12);
    for t in &world.symbols {
        lines.push_str(&serde_json::to_string(&layout.tuple_labels(t)).expect("strings serialize"));
        lines.push('\n');
    }
    emit(out, &lines)?;
    let lln = check_lln(&table, &world, cfg.stat_tol)?;
    let support_ok = check_support(&table, &world);
    let pass = lln.pass && support_ok;
    let entry = sampling_entry(layout, &lln, world.len(), cfg.seed, support_ok);
    if !cfg.quiet {
        eprintln!(
            "{} samples, seed {}: max deviation {:.6} (tol {}): {}",
            world.len(),
            cfg.seed,
            lln.max_deviation,
            lln.tol,
            if pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(path) = &cfg.json_out {
        write_json(path, &SampleReport { schema_version: REPORT_SCHEMA_VERSION, scenario: spec.name.clone(), sampling: entry })?;
    }
    Ok(ExitCode::from_pass(pass))
}

#[derive(Serialize)]
struct RetrodictReport {
    schema_version: u32,
    scenario: String,
    confirming: ConfirmingEntry,
    retrodicted: Vec<RetrodictedEntry>,
    agreement: Vec<AgreementEntry>,
    pass: bool,
}

/// Confirming report plus per-branch retrodicted states; fails only if the two routes disagree.
pub fn cmd_retrodict(scenario: &str, tol: f64, json_out: Option<&Path>, quiet: bool, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let spec = resolve_input(scenario)?;
    let r = spec.resolve(tol)?;
    let (chain, initial) = (&r.chain, &r.initial);
    let layout = chain.layout();
    let live: Vec<_> = compose_chain(chain, initial, tol)?.into_iter().filter(|b| b.weight() > tol).collect();
    let mut retro = Vec::new();
    let mut agreement = Vec::new();
    for b in &live {
        retro.push((b.tuple.clone(), ru_recursive(chain, initial, &b.vector, tol)));
        if chain.all_pvm(tol) {
            if let Ok(rows) = retrodiction_agreement(chain, initial, &b.vector, tol) {
                agreement.push((b.tuple.clone(), rows));
            }
        }
    }
    let pass = agreement.iter().all(|(_, rows)| rows.iter().all(|x| x.agree));
    if let Some(path) = json_out {
        let rep = RetrodictReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: spec.name.clone(),
            confirming: confirming_entry(layout, &confirming_report(chain, tol)),
            retrodicted: retrodicted_entries(layout, &retro),
            agreement: agreement_entries(layout, &agreement),
            pass,
        };
        write_json(path, &rep)?;
    }
    if !quiet {
        let mut s = confirming_text(layout, chain, tol);
        for (b, (_, res)) in live.iter().zip(&retro) {
            let _ = writeln!(s, "branch {} (weight {:.6})", show_tuple(layout, &b.tuple), b.weight());
            match res {
                Ok(rs) => {
                    for st in &rs.steps {
                        let label = layout.factor(st.step).label();
                        let _ = writeln!(s, "  after {label}: {}", format_state(layout.factors(), &st.total));
                        if let Some(fs) = &st.factors {
                            for (f, v) in layout.factors().iter().zip(fs).take(st.step + 1) {
                                let _ = writeln!(s, "    {}: {}", f.label(), format_state(std::slice::from_ref(f), v));
                            }
                        }
                    }
                }
                Err(e) => {
                    let _ = writeln!(s, "  not retrodictable: {e}");
                }
            }
        }
        let rows: Vec<bool> = agreement.iter().flat_map(|(_, r)| r.iter().map(|x| x.agree)).collect();
        let _ = writeln!(s, "retrodiction routes: {} of {} comparisons agree", rows.iter().filter(|&&a| a).count(), rows.len());
        emit(out, &s)?;
    }
    Ok(ExitCode::from_pass(pass))
}

/// Write built-in scenarios as `<dir>/<name>.json`; no names means all.
pub fn cmd_export(names: &[String], dir: &Path, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    let names: Vec<String> = if names.is_empty() { BUILTIN_NAMES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut s = String::new();
    for name in &names {
        let spec = build_scenario(name)?;
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, scenario_to_json(&spec)).map_err(io_err(&path))?;
        let _ = writeln!(s, "wrote {}", path.display());
    }
    emit(out, &s)?;
    Ok(ExitCode::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kets_use_pointer_labels() {
        let spec = build_scenario("deutsch").unwrap();
        let f = spec.layout.factors();
        let v = StateVector::basis(2, 1).tensor(&StateVector::basis(3, 1)).tensor(&StateVector::basis(3, 2));
        assert_eq!(format_state(f, &v), "+1.000000 |1,1,init⟩");
        assert_eq!(format_state(&f[..1], &StateVector::zeros(2)), "0");
    }

    #[test]
    fn unknown_input_is_rejected() {
        assert!(matches!(resolve_input("no-such-scenario"), Err(CliError::UnknownScenario(_))));
    }

    #[test]
    fn builtin_detection_requires_exact_match() {
        let mut spec = build_scenario("wdc").unwrap();
        assert!(is_builtin(&spec));
        spec.description.push('!');
        assert!(!is_builtin(&spec));
    }
}
