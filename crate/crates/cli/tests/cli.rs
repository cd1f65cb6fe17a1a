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


use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use retrodict::format::{load_scenario, scenario_to_json, ScenarioFile};
use retrodict_core::scenarios::{build_scenario, BUILTIN_NAMES};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retrodict")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn list_names_every_builtin() {
    let o = bin(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    for name in BUILTIN_NAMES {
        assert!(stdout(&o).contains(name));
    }
}

#[test]
fn run_prints_the_table_and_passes() {
    let o = bin(&["run", "wigner_friend", "--samples", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    for line in s.lines().filter(|l| l.starts_with('(')) {
        let p: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        let want = if matches!(line.split_whitespace().next(), Some("(0,0)" | "(1,1)")) { 0.5 } else { 0.0 };
        assert_eq!(p, want, "{line}");
    }
    assert!(s.contains("LLN: max deviation"), "{s}");
    assert!(s.contains(": pass"));
    assert!(s.trim_end().ends_with("PASS"));
}

#[test]
fn deutsch_observer_is_constant() {
    let o = bin(&["run", "deutsch", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("observer D records + in every repetition"));
}

#[test]
fn verify_shipped_three_observer_file() {
    let p = shipped("wdc");
    let o = bin(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim_end(), "PVM: yes yes yes; completeness: ok; domain condition: ok");
}

#[test]
fn shipped_files_match_builtins() {
    for name in BUILTIN_NAMES {
        let spec = build_scenario(name).unwrap();
        let p = shipped(name);
        assert_eq!(load_scenario(&p).unwrap(), spec, "{name}");
        assert_eq!(std::fs::read_to_string(&p).unwrap(), scenario_to_json(&spec), "{name} is stale; rerun export");
    }
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = bin(&["run", "wdc", "--samples", "20000", "--seed", "11", "--quiet", "--json", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: serde_json::Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["naive_retrodiction"]["contradiction"], true);
    assert_eq!(v["confirming"]["system_point"]["apparatus"], "D");
}

#[test]
fn sample_emits_one_tuple_per_line() {
    let o = bin(&["sample", "deutsch", "--samples", "5000", "--seed", "9", "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 5000);
    for line in s.lines() {
        let t: Vec<String> = serde_json::from_str(line).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1], "+");
    }
    assert_eq!(bin(&["sample", "deutsch", "--samples", "5000", "--seed", "9", "--quiet"]).stdout, o.stdout);
    assert_ne!(bin(&["sample", "deutsch", "--samples", "5000", "--seed", "10", "--quiet"]).stdout, o.stdout);
}

#[test]
fn retrodict_reports_states() {
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("r.json");
    let o = bin(&["retrodict", "wigner_friend", "--json", j.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("confirming point for S: F"), "{s}");
    assert!(s.contains("after F: +1.000000 |0,0,init⟩"), "{s}");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(j).unwrap()).unwrap();
    assert_eq!(v["retrodicted"].as_array().unwrap().len(), 2);
    let o = bin(&["retrodict", "deutsch"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn export_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["export", "deutsch", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(load_scenario(&dir.path().join("deutsch.json")).unwrap(), build_scenario("deutsch").unwrap());
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_file(dir.path(), "broken.json", "{\n  \"schema_version\": 1,\n  \"name\": \"x\",\n  \"bogus\": true\n}\n");
    let o = bin(&["verify", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.json:4:"), "{}", stderr(&o));
    let truncated = write_file(dir.path(), "trunc.json", "{ \"schema_version\": 1,");
    let o = bin(&["run", &truncated, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trunc.json:1:"), "{}", stderr(&o));
    for args in [
        vec!["run", "nope", "--seed", "1"],
        vec!["run", "wdc"],
        vec!["sample", "wdc", "--seed", "1", "--samples", "0"],
        vec!["run", "wdc", "--seed", "1", "--tol", "-1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(bin(&args).status.code(), Some(2), "{args:?}");
    }
    let missing = dir.path().join("absent").join("out.json");
    let o = bin(&["run", "wigner_friend", "--seed", "1", "--samples", "10", "--json", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = ScenarioFile::from_spec(&build_scenario("wigner_friend").unwrap());
    f.families[0].matrices[1][1][1] = [0.5, 0.0];
    let bad = write_file(dir.path(), "incomplete.json", &serde_json::to_string(&f).unwrap());
    let o = bin(&["verify", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("PVM: no yes; completeness: FAILED; domain condition: ok"), "{}", stdout(&o));
    // running a chain that fails validation is an input error, not a check failure
    assert_eq!(bin(&["run", &bad, "--seed", "1"]).status.code(), Some(2));
    // ten draws cannot match a fair table to 1e-6
    let o = bin(&["run", "wigner_friend", "--seed", "1", "--samples", "10", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).trim_end().ends_with("FAIL"));
}
