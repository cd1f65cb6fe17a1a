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


//! Versioned JSON scenario files.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row lists. Apparatuses
//! default to the canonical pointer basis (finals first, init last); any of
//! `dim`, `final_states` and `init_index` may override it. Families are listed
//! in measurement order and name the apparatus they record on.

use std::path::Path;

use retrodict_core::linalg::{c, Operator, StateVector, C64};
use retrodict_core::measurement::{Chain, MeasurementFamily};
use retrodict_core::scenarios::ScenarioSpec;
use retrodict_core::spaces::{ChainLayout, FactorSpace};
use retrodict_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Pointer-state orthonormality tolerance used when loading files.
const LOAD_TOL: f64 = 1e-10;

pub type Complex = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub system: SystemEntry,
    pub apparatus: Vec<ApparatusEntry>,
    pub initial_state: Vec<Complex>,
    pub families: Vec<FamilyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mere_system_prefix: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub label: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApparatusEntry {
    pub label: String,
    pub outcomes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_states: Option<Vec<Vec<Complex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub apparatus: String,
    pub outcomes: Vec<String>,
    pub matrices: Vec<Vec<Vec<Complex>>>,
}

fn to_pair(z: &C64) -> Complex {
    [z.re, z.im]
}

fn state_entry(v: &StateVector) -> Vec<Complex> {
    v.amps().iter().map(to_pair).collect()
}

fn matrix_entry(m: &Operator) -> Vec<Vec<Complex>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|col| to_pair(&m.get(r, col))).collect()).collect()
}

fn is_canonical(f: &FactorSpace) -> bool {
    let n = f.outcomes().len();
    f.dim() == n + 1
        && f.init_index() == Some(n)
        && f.final_states().iter().enumerate().all(|(m, v)| *v == StateVector::basis(n + 1, m))
}

impl ScenarioFile {
    /// Serializable form of a spec; canonical apparatuses omit their basis data.
    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        let layout = &spec.layout;
        let apparatus = layout.factors()[1..]
            .iter()
            .map(|f| {
                let canonical = is_canonical(f);
                ApparatusEntry {
                    label: f.label().to_string(),
                    outcomes: f.outcomes().to_vec(),
                    dim: (!canonical).then_some(f.dim()),
                    final_states: (!canonical).then(|| f.final_states().iter().map(state_entry).collect()),
                    init_index: if canonical { None } else { f.init_index() },
                }
            })
            .collect();
        let families = spec
            .families
            .iter()
            .map(|fam| FamilyEntry {
                apparatus: layout.factor(fam.slot()).label().to_string(),
                outcomes: fam.outcomes().to_vec(),
                matrices: fam.operators().iter().map(matrix_entry).collect(),
            })
            .collect();
        Self {
            schema_version: SCENARIO_SCHEMA_VERSION,
            name: spec.name.clone(),
            description: spec.description.clone(),
            system: SystemEntry { label: layout.system().label().to_string(), dim: layout.system().dim() },
            apparatus,
            initial_state: state_entry(&spec.initial),
            families,
            mere_system_prefix: spec.mere_system_prefix,
        }
    }

    /// Build the spec, checking shapes and alphabets; completeness and the
    /// domain condition are left to [`ScenarioSpec::resolve`] or `verify`.
    pub fn to_spec(&self, origin: &str) -> Result<ScenarioSpec, CliError> {
        let invalid = |location: String, message: String| CliError::Invalid { origin: origin.to_string(), location, message };
        let core = |location: String| move |e: CoreError| invalid(location.clone(), e.to_string());
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(invalid(
                "schema_version".into(),
                format!("unsupported version {}, expected {SCENARIO_SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let mut factors = vec![FactorSpace::system(&self.system.label, self.system.dim).map_err(core("system".into()))?];
        for (i, a) in self.apparatus.iter().enumerate() {
            let at = format!("apparatus[{i}]");
            let f = match (&a.dim, &a.final_states, &a.init_index) {
                (None, None, None) => FactorSpace::apparatus(&a.label, &a.outcomes),
                _ => {
                    let dim = a.dim.unwrap_or(a.outcomes.len() + 1);
                    let finals = match &a.final_states {
                        Some(states) => states
                            .iter()
                            .enumerate()
                            .map(|(m, s)| state_from(s).map_err(core(format!("{at}.final_states[{m}]"))))
                            .collect::<Result<Vec<_>, _>>()?,
                        None => (0..a.outcomes.len()).map(|m| StateVector::basis(dim, m)).collect(),
                    };
                    let init = a.init_index.unwrap_or(dim - 1);
                    FactorSpace::apparatus_with_states(&a.label, dim, &a.outcomes, finals, init, LOAD_TOL)
                }
            }
            .map_err(core(at))?;
            factors.push(f);
        }
        let layout = ChainLayout::new(factors).map_err(core("apparatus".into()))?;
        let mut families = Vec::with_capacity(self.families.len());
        for (j, fam) in self.families.iter().enumerate() {
            let at = format!("families[{j}]");
            let slot = layout.factor_index(&fam.apparatus).filter(|&s| s > 0).ok_or_else(|| {
                invalid(format!("{at}.apparatus"), format!("no apparatus labelled `{}`", fam.apparatus))
            })?;
            let ops = fam
                .matrices
                .iter()
                .enumerate()
                .map(|(m, rows)| operator_from(rows).map_err(core(format!("{at}.matrices[{m}]"))))
                .collect::<Result<Vec<_>, _>>()?;
            families.push(MeasurementFamily::new_deferred(slot, &fam.outcomes, ops).map_err(core(at))?);
        }
        Chain::new_unchecked(layout.clone(), families.clone()).map_err(core("families".into()))?;
        let initial = state_from(&self.initial_state).map_err(core("initial_state".into()))?;
        if initial.dim() != layout.system().dim() {
            return Err(invalid(
                "initial_state".into(),
                format!("has {} amplitudes, system dimension is {}", initial.dim(), layout.system().dim()),
            ));
        }
        if let Some(p) = self.mere_system_prefix {
            if p >= families.len() {
                return Err(invalid(
                    "mere_system_prefix".into(),
                    format!("{p} leaves no measurement out of {}", families.len()),
                ));
            }
        }
        Ok(ScenarioSpec {
            name: self.name.clone(),
            description: self.description.clone(),
            layout,
            initial,
            families,
            mere_system_prefix: self.mere_system_prefix,
        })
    }
}

fn state_from(amps: &[Complex]) -> Result<StateVector, CoreError> {
    StateVector::new(amps.iter().map(|&[a, b]| c(a, b)).collect())
}

fn operator_from(rows: &[Vec<Complex>]) -> Result<Operator, CoreError> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&[a, b]| c(a, b)).collect()).collect();
    let op = Operator::from_rows(&rows)?;
    if !op.is_square() {
        return Err(CoreError::DimensionMismatch { expected: op.rows(), found: op.cols() });
    }
    Ok(op)
}

/// Parse scenario JSON; `origin` names the source in messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioSpec, CliError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_location(&e),
    })?;
    file.to_spec(origin)
}

// serde_json appends " at line L column C"; the location is reported separately.
fn strip_location(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Pretty JSON with a trailing newline.
pub fn scenario_to_json(spec: &ScenarioSpec) -> String {
    let mut s = serde_json::to_string_pretty(&ScenarioFile::from_spec(spec)).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use retrodict_core::scenarios::{build_scenario, BUILTIN_NAMES};

    #[test]
    fn builtins_round_trip_exactly() {
        for name in BUILTIN_NAMES {
            let spec = build_scenario(name).unwrap();
            let back = parse_scenario(&scenario_to_json(&spec), name).unwrap();
            assert_eq!(back, spec, "{name}");
        }
    }

    #[test]
    fn unknown_keys_carry_a_location() {
        let mut v: serde_json::Value = serde_json::from_str(&scenario_to_json(&build_scenario("wigner_friend").unwrap())).unwrap();
        v["apparatus"][0]["colour"] = "red".into();
        let text = serde_json::to_string_pretty(&v).unwrap();
        match parse_scenario(&text, "x.json") {
            Err(CliError::Parse { line, message, .. }) => {
                assert!(line > 1);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let mut f = ScenarioFile::from_spec(&build_scenario("wdc").unwrap());
        f.families[1].apparatus = "Q".into();
        let e = f.to_spec("x.json").unwrap_err().to_string();
        assert!(e.starts_with("x.json: families[1].apparatus:"), "{e}");
        let mut f = ScenarioFile::from_spec(&build_scenario("wdc").unwrap());
        f.schema_version = 9;
        assert!(f.to_spec("x.json").unwrap_err().to_string().contains("schema_version"));
        let mut f = ScenarioFile::from_spec(&build_scenario("wdc").unwrap());
        f.families[0].matrices[0].pop();
        assert!(f.to_spec("x.json").unwrap_err().to_string().contains("families[0].matrices[0]"));
        let mut f = ScenarioFile::from_spec(&build_scenario("wdc").unwrap());
        f.initial_state.push([0.0, 0.0]);
        assert!(f.to_spec("x.json").unwrap_err().to_string().contains("initial_state"));
    }

    #[test]
    fn custom_pointer_bases_survive() {
        let layout = ChainLayout::new(vec![
            FactorSpace::system("S", 2).unwrap(),
            FactorSpace::apparatus_with_states(
                "A",
                3,
                &["u", "d"],
                vec![StateVector::basis(3, 1), StateVector::basis(3, 2)],
                0,
                1e-12,
            )
            .unwrap(),
        ])
        .unwrap();
        let fam = MeasurementFamily::new(1, &["u", "d"], vec![Operator::outer(&StateVector::basis(2, 0), &StateVector::basis(2, 0)), Operator::outer(&StateVector::basis(2, 1), &StateVector::basis(2, 1))], 1e-12).unwrap();
        let spec = ScenarioSpec {
            name: "custom".into(),
            description: String::new(),
            layout,
            initial: StateVector::basis(2, 0),
            families: vec![fam],
            mere_system_prefix: None,
        };
        let text = scenario_to_json(&spec);
        assert!(text.contains("init_index"));
        assert_eq!(parse_scenario(&text, "c").unwrap(), spec);
    }
}
