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

//! Seeded world sampling and typicality checks.
//!
//! Draws are split into shards of [`SHARD_SIZE`]. Shard `s` uses ChaCha8
//! seeded from the user seed on stream `s`, so any partition of shards
//! across workers reproduces the sequential output exactly.

use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::measurement::{extract_composed_operator, Chain};
use crate::probability::FiniteProbabilitySpace;

pub const SHARD_SIZE: usize = 4096;

/// A finite sampled prefix of a world.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldPrefix<S> {
    pub symbols: Vec<S>,
    pub seed: u64,
    pub source: FiniteProbabilitySpace<S>,
}

impl<S: Clone + Ord + Debug> WorldPrefix<S> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Repetition `n`, counted from 1.
    pub fn at(&self, n: usize) -> Option<&S> {
        n.checked_sub(1).and_then(|i| self.symbols.get(i))
    }

    /// Push every symbol and the source distribution through `f`.
    pub fn map<T, F>(&self, f: F) -> WorldPrefix<T>
    where
        T: Clone + Ord + Debug,
        F: Fn(&S) -> T,
    {
        WorldPrefix {
            symbols: self.symbols.iter().map(&f).collect(),
            seed: self.seed,
            source: crate::probability::marginalize(&self.source, &f),
        }
    }
}

/// Inverse-CDF sampler over the positive-weight support.
#[derive(Clone, Debug)]
pub struct Sampler {
    support: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>) -> Self {
        let mut support = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (i, &w) in p.weights().iter().enumerate() {
            if w > 0.0 {
                acc += w;
                support.push(i);
                cumulative.push(acc);
            }
        }
        Self { support, cumulative }
    }

    /// Number of shards needed for `n` draws.
    pub fn shard_count(n: usize) -> usize {
        n.div_ceil(SHARD_SIZE)
    }

    /// Alphabet indices drawn by shard `shard` of an `n`-draw run.
    pub fn shard(&self, seed: u64, shard: usize, n: usize) -> Vec<usize> {
        let start = shard * SHARD_SIZE;
        let count = n.saturating_sub(start).min(SHARD_SIZE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        let total = *self.cumulative.last().expect("distribution has positive mass");
        (0..count)
            .map(|_| {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * total;
                let k = self.cumulative.partition_point(|&c| c <= u).min(self.support.len() - 1);
                self.support[k]
            })
            .collect()
    }
}

/// `n` i.i.d. draws from `p`, deterministic in `seed`.
pub fn sample_worlds<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, n: usize, seed: u64) -> Result<WorldPrefix<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let sampler = Sampler::new(p);
    let mut symbols = Vec::with_capacity(n);
    for s in 0..Sampler::shard_count(n) {
        symbols.extend(sampler.shard(seed, s, n).into_iter().map(|i| p.alphabet()[i].clone()));
    }
    Ok(WorldPrefix { symbols, seed, source: p.clone() })
}

/// Every symbol of `w` has strictly positive weight under `p`.
pub fn check_support<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, w: &WorldPrefix<S>) -> bool {
    w.symbols.iter().all(|a| p.weight(a).is_some_and(|x| x > 0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyRow<S> {
    pub symbol: S,
    pub expected: f64,
    pub empirical: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlnReport<S> {
    pub rows: Vec<FrequencyRow<S>>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compare empirical frequencies in `w` against `p` symbol by symbol.
pub fn check_lln<S: Clone + Ord + Debug>(p: &FiniteProbabilitySpace<S>, w: &WorldPrefix<S>, tol: f64) -> Result<LlnReport<S>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty world prefix".into()));
    }
    let mut counts = alloc::vec![0usize; p.len()];
    for a in &w.symbols {
        let i = p.index_of(a).ok_or(Error::UnknownSymbol)?;
        counts[i] += 1;
    }
    let n = w.len() as f64;
    let rows: Vec<FrequencyRow<S>> = p
        .iter()
        .zip(&counts)
        .map(|((a, expected), &c)| {
            let empirical = c as f64 / n;
            FrequencyRow { symbol: a.clone(), expected, empirical, deviation: (empirical - expected).abs() }
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(LlnReport { rows, max_deviation, tol, pass: max_deviation <= tol })
}

/// Normalized branch `(M_{ω(n)} ψ) ⊗ Φ[ω(n)]` for repetition `n` (from 1).
pub fn branch_state_at(chain: &Chain, initial: &StateVector, w: &WorldPrefix<Vec<usize>>, n: usize, tol: f64) -> Result<StateVector> {
    let tuple = w
        .at(n)
        .ok_or_else(|| Error::InvalidArgument(format!("repetition {n} outside 1..={}", w.len())))?;
    let m = extract_composed_operator(chain, tuple, tol)?;
    m.apply(initial)?.tensor(&chain.layout().final_product(tuple)?).normalize()
}
