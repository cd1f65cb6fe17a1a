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

//! Finite probability spaces, string and cylinder measures, and finite-level
//! Martin-Löf test containers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::measurement::Branch;

/// Tolerance for the sum-to-one check.
pub const SUM_TOL: f64 = 1e-10;

/// A probability assignment on a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteProbabilitySpace<S> {
    alphabet: Vec<S>,
    weights: Vec<f64>,
}

impl<S: Clone + Ord + Debug> FiniteProbabilitySpace<S> {
    pub fn new(alphabet: Vec<S>, weights: Vec<f64>, tol: f64) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if alphabet.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} symbols but {} weights",
                alphabet.len(),
                weights.len()
            )));
        }
        let mut sorted: Vec<&S> = alphabet.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDistribution("duplicate symbol".into()));
        }
        if let Some((a, w)) = alphabet.iter().zip(&weights).find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w} for {a:?}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Ok(Self { alphabet, weights })
    }

    pub fn uniform(alphabet: Vec<S>) -> Result<Self> {
        let n = alphabet.len().max(1) as f64;
        let w = alloc::vec![1.0 / n; alphabet.len()];
        Self::new(alphabet, w, SUM_TOL)
    }

    pub fn alphabet(&self) -> &[S] {
        &self.alphabet
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn index_of(&self, a: &S) -> Option<usize> {
        self.alphabet.iter().position(|b| b == a)
    }

    pub fn weight(&self, a: &S) -> Option<f64> {
        self.index_of(a).map(|i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.alphabet.iter().zip(self.weights.iter().copied())
    }

    /// Symbols of strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = &S> {
        self.iter().filter(|(_, w)| *w > 0.0).map(|(a, _)| a)
    }
}

/// Weight per tuple equals the squared norm of its branch.
pub fn world_distribution(branches: &[Branch], tol: f64) -> Result<FiniteProbabilitySpace<Vec<usize>>> {
    let alphabet = branches.iter().map(|b| b.tuple.clone()).collect();
    let weights = branches.iter().map(Branch::weight).collect();
    FiniteProbabilitySpace::new(alphabet, weights, tol)
        .map_err(|e| Error::InvalidDistribution(format!("chain is not complete: {e}")))
}

/// `P(σ)`: product of symbol weights, `1` for the empty string.
pub fn string_weight<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, sigma: &[S]) -> Result<f64> {
    sigma.iter().try_fold(1.0, |acc, a| p.weight(a).map(|w| acc * w).ok_or(Error::UnknownSymbol))
}

/// No string is a prefix of another (duplicates count as prefixes).
pub fn is_prefix_free<S: PartialEq>(set: &[Vec<S>]) -> bool {
    set.iter().enumerate().all(|(i, a)| {
        set.iter().enumerate().all(|(j, b)| i == j || !(a.len() <= b.len() && b[..a.len()] == a[..]))
    })
}

/// Measure of the union of cylinders over a prefix-free set.
pub fn cylinder_measure<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, set: &[Vec<S>]) -> Result<f64> {
    if !is_prefix_free(set) {
        return Err(Error::NotPrefixFree);
    }
    set.iter().map(|s| string_weight(p, s)).sum()
}

/// Check `r(λ) = 1` and `r(σ) = Σ_a r(σa)` for all `|σ| < max_len`.
pub fn validate_representation<S, R>(r: R, alphabet: &[S], max_len: usize, tol: f64) -> bool
where
    S: Clone,
    R: Fn(&[S]) -> f64,
{
    if (r(&[]) - 1.0).abs() > tol {
        return false;
    }
    let mut level: Vec<Vec<S>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * alphabet.len());
        for sigma in &level {
            let parent = r(sigma);
            if !parent.is_finite() || parent < -tol {
                return false;
            }
            let mut sum = 0.0;
            for a in alphabet {
                let mut child = sigma.clone();
                child.push(a.clone());
                sum += r(&child);
                next.push(child);
            }
            if (sum - parent).abs() > tol {
                return false;
            }
        }
        level = next;
    }
    true
}

/// Push a distribution forward along `f`, e.g. keeping the first coordinate.
pub fn marginalize<S, T, F>(p: &FiniteProbabilitySpace<S>, f: F) -> FiniteProbabilitySpace<T>
where
    S: Clone + Ord + Debug,
    T: Clone + Ord + Debug,
    F: Fn(&S) -> T,
{
    let mut acc: BTreeMap<T, f64> = BTreeMap::new();
    for (a, w) in p.iter() {
        *acc.entry(f(a)).or_insert(0.0) += w;
    }
    let (alphabet, weights) = acc.into_iter().unzip();
    FiniteProbabilitySpace { alphabet, weights }
}

/// Finitely many levels of a Martin-Löf test, each a finite set of strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MLTestFinite<S> {
    pub levels: BTreeMap<u32, Vec<Vec<S>>>,
}

impl<S> MLTestFinite<S> {
    pub fn new() -> Self {
        Self { levels: BTreeMap::new() }
    }

    pub fn with_level(mut self, n: u32, strings: Vec<Vec<S>>) -> Self {
        self.levels.insert(n, strings);
        self
    }
}

/// Per-level outcome of [`ml_test_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCheck {
    pub level: u32,
    pub prefix_free: bool,
    pub measure: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn ml_test_report<S: Clone + Ord + Debug>(
    p: &FiniteProbabilitySpace<S>,
    t: &MLTestFinite<S>,
) -> Result<Vec<LevelCheck>> {
    t.levels
        .iter()
        .map(|(&n, set)| {
            let bound = libm::exp2(-(n as f64));
            let prefix_free = is_prefix_free(set);
            let measure = set.iter().map(|s| string_weight(p, s)).sum::<Result<f64>>()?;
            let ok = n > 0 && prefix_free && measure < bound;
            Ok(LevelCheck { level: n, prefix_free, measure, bound, ok })
        })
        .collect()
}

/// Every level is prefix-free with cylinder measure strictly below `2^-n`.
pub fn check_ml_test<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, t: &MLTestFinite<S>) -> bool {
    ml_test_report(p, t).map(|r| r.iter().all(|c| c.ok)).unwrap_or(false)
}

/// Some string of level `n` is a prefix of `prefix`.
pub fn covered_at_level<S: PartialEq>(t: &MLTestFinite<S>, prefix: &[S], n: u32) -> bool {
    t.levels
        .get(&n)
        .is_some_and(|set| set.iter().any(|s| s.len() <= prefix.len() && prefix[..s.len()] == s[..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn coin() -> FiniteProbabilitySpace<u8> {
        FiniteProbabilitySpace::new(vec![0, 1], vec![0.5, 0.5], SUM_TOL).unwrap()
    }

    fn wigner_table() -> FiniteProbabilitySpace<(u8, u8)> {
        let alphabet: Vec<(u8, u8)> = (0..2).flat_map(|k| (0..3).map(move |l| (k, l))).collect();
        let weights = alphabet.iter().map(|&(k, l)| if k == l { 0.5 } else { 0.0 }).collect();
        FiniteProbabilitySpace::new(alphabet, weights, SUM_TOL).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(FiniteProbabilitySpace::new(vec![0u8, 1], vec![0.5, 0.6], SUM_TOL).is_err());
        assert!(FiniteProbabilitySpace::new(vec![0u8, 1], vec![1.5, -0.5], SUM_TOL).is_err());
        assert!(FiniteProbabilitySpace::new(vec![0u8, 0], vec![0.5, 0.5], SUM_TOL).is_err());
        assert!(FiniteProbabilitySpace::<u8>::new(vec![], vec![], SUM_TOL).is_err());
    }

    #[test]
    fn string_weights() {
        assert_eq!(string_weight(&coin(), &[]).unwrap(), 1.0);
        assert_eq!(string_weight(&coin(), &[0, 1, 0, 1]).unwrap(), 1.0 / 16.0);
        assert_eq!(string_weight(&wigner_table(), &[(0, 0), (1, 1)]).unwrap(), 0.25);
        assert_eq!(string_weight(&coin(), &[2]), Err(Error::UnknownSymbol));
    }

    #[test]
    fn cylinders() {
        assert_eq!(cylinder_measure(&coin(), &[]).unwrap(), 0.0);
        assert_eq!(cylinder_measure(&coin(), &[vec![0], vec![1]]).unwrap(), 1.0);
        assert_eq!(cylinder_measure(&coin(), &[vec![0, 0], vec![0, 1]]).unwrap(), 0.5);
        assert_eq!(cylinder_measure(&coin(), &[vec![0], vec![0, 1]]), Err(Error::NotPrefixFree));
        assert_eq!(cylinder_measure(&coin(), &[vec![1], vec![1]]), Err(Error::NotPrefixFree));
    }

    #[test]
    fn representations() {
        let p = wigner_table();
        assert!(validate_representation(|s| string_weight(&p, s).unwrap(), p.alphabet(), 3, 1e-12));
        assert!(!validate_representation(|s: &[u8]| if s.is_empty() { 0.9 } else { 0.45 }, &[0, 1], 2, 1e-12));
        // consistent at the root, inconsistent one level down
        let r = |s: &[u8]| match s.len() {
            0 => 1.0,
            1 => 0.5,
            _ => 0.3,
        };
        assert!(validate_representation(r, &[0, 1], 1, 1e-12));
        assert!(!validate_representation(r, &[0, 1], 2, 1e-12));
    }

    #[test]
    fn marginals() {
        let q = marginalize(&wigner_table(), |&(k, _)| k);
        assert_eq!(q.alphabet(), &[0, 1]);
        assert_eq!(q.weights(), &[0.5, 0.5]);
        let prod: Vec<(u8, u8)> = vec![(0, 0), (0, 1), (1, 0), (1, 1)];
        let pw = FiniteProbabilitySpace::new(prod, vec![0.3 * 0.25, 0.3 * 0.75, 0.7 * 0.25, 0.7 * 0.75], SUM_TOL).unwrap();
        let first = marginalize(&pw, |&(a, _)| a);
        assert!((first.weight(&0).unwrap() - 0.3).abs() < 1e-15);
        assert!((first.weight(&1).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ml_levels() {
        assert!(check_ml_test(&coin(), &MLTestFinite::new().with_level(1, vec![vec![0, 0]])));
        assert!(!check_ml_test(&coin(), &MLTestFinite::new().with_level(1, vec![vec![0], vec![1]])));
        let w = MLTestFinite::new().with_level(2, vec![vec![(0, 1)]]);
        let r = ml_test_report(&wigner_table(), &w).unwrap();
        assert_eq!(r[0].measure, 0.0);
        assert!(r[0].ok);
        let t = MLTestFinite::new().with_level(1, vec![vec![0u8, 0]]);
        assert!(covered_at_level(&t, &[0, 0, 1], 1));
        assert!(!covered_at_level(&t, &[0, 1, 1], 1));
        assert!(!covered_at_level(&t, &[0], 1));
        assert!(!covered_at_level(&t, &[0, 0], 2));
    }

    /// Dyadic weights from integer counts summing to `2^16`.
    fn dyadic(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0u32..1000, n).prop_map(|raw| {
            let total: u32 = raw.iter().sum::<u32>().max(1);
            let mut counts: Vec<u32> = raw.iter().map(|&r| r * 65536 / total).collect();
            let short = 65536 - counts.iter().sum::<u32>();
            counts[0] += short;
            counts.iter().map(|&c| c as f64 / 65536.0).collect()
        })
    }

    proptest! {
        #[test]
        fn marginalize_conserves_mass(w in dyadic(6)) {
            let alphabet: Vec<(u8, u8)> = (0..2).flat_map(|k| (0..3).map(move |l| (k, l))).collect();
            let p = FiniteProbabilitySpace::new(alphabet, w, 0.0).unwrap();
            let q = marginalize(&p, |&(k, _)| k);
            prop_assert_eq!(q.weights().iter().sum::<f64>(), 1.0);
            let r = marginalize(&p, |&(_, l)| l);
            prop_assert_eq!(r.weights().iter().sum::<f64>(), 1.0);
        }

        #[test]
        fn bernoulli_is_a_representation(w in dyadic(3), len in 0usize..=6) {
            let p = FiniteProbabilitySpace::new(vec![0u8, 1, 2], w, 0.0).unwrap();
            prop_assert!(validate_representation(|s| string_weight(&p, s).unwrap(), p.alphabet(), len, 1e-12));
        }

        #[test]
        fn cylinder_measure_is_monotone(w in dyadic(2), extra in proptest::collection::vec(0u8..2, 3)) {
            let p = FiniteProbabilitySpace::new(vec![0u8, 1], w, 0.0).unwrap();
            let small = vec![vec![0u8, 0]];
            let mut big = small.clone();
            big.push(extra.clone());
            prop_assume!(is_prefix_free(&big));
            prop_assert!(cylinder_measure(&p, &small).unwrap() <= cylinder_measure(&p, &big).unwrap());
        }

        #[test]
        fn ml_bound_is_enforced(w in dyadic(2), n in 1u32..5, len in 1usize..8) {
            let p = FiniteProbabilitySpace::new(vec![0u8, 1], w, 0.0).unwrap();
            let set = vec![vec![0u8; len]];
            let m = cylinder_measure(&p, &set).unwrap();
            let t = MLTestFinite::new().with_level(n, set);
            prop_assert_eq!(check_ml_test(&p, &t), m < libm::exp2(-(n as f64)));
        }
    }
}
