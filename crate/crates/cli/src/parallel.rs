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


//! Threaded sampling over the core sampler's fixed shards.
//!
//! Shard `s` always yields the same draws, so the output is identical to the
//! sequential sampler for any worker count.

use std::fmt::Debug;
use std::num::NonZeroUsize;
use std::thread;

use retrodict_core::probability::FiniteProbabilitySpace;
use retrodict_core::typicality::{Sampler, WorldPrefix};
use retrodict_core::{Error, Result};

/// Worker count from the host, at least one.
pub fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

/// Drop-in replacement for the sequential `sample_worlds`.
pub fn sample_worlds_parallel<S>(p: &FiniteProbabilitySpace<S>, n: usize, seed: u64, workers: usize) -> Result<WorldPrefix<S>>
where
    S: Clone + Ord + Debug + Send + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let sampler = Sampler::new(p);
    let shards = Sampler::shard_count(n);
    let workers = workers.clamp(1, shards);
    let per = shards.div_ceil(workers);
    let chunks: Vec<Vec<usize>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let sampler = &sampler;
                scope.spawn(move || {
                    let mut out = Vec::new();
                    for s in (w * per)..((w + 1) * per).min(shards) {
                        out.extend(sampler.shard(seed, s, n));
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
    });
    let alphabet = p.alphabet();
    let symbols = chunks.into_iter().flatten().map(|i| alphabet[i].clone()).collect();
    Ok(WorldPrefix { symbols, seed, source: p.clone() })
}

/// `sample_worlds`-shaped closure using every available core.
pub fn host_sampler<S>(p: &FiniteProbabilitySpace<S>, n: usize, seed: u64) -> Result<WorldPrefix<S>>
where
    S: Clone + Ord + Debug + Send + Sync,
{
    sample_worlds_parallel(p, n, seed, default_workers())
}
