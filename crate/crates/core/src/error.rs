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

use alloc::string::String;

/// Errors raised by the chain, probability and retrodiction routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite amplitude or matrix entry")]
    NonFinite,

    /// A vector that should represent a physical state is numerically zero.
    #[error("state vector is numerically zero (norm {norm:e})")]
    ZeroState { norm: f64 },

    #[error("operator is not a projector-complement input: {0}")]
    NotProjector(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unknown outcome `{label}` for factor {factor}")]
    UnknownOutcome { factor: usize, label: String },

    #[error("invalid pin set: {0}")]
    InvalidPins(String),

    #[error("family of apparatus {slot} violates completeness (residual {residual:e})")]
    Incomplete { slot: usize, residual: f64 },

    #[error("family of apparatus {slot} leaves the final-state subspaces")]
    DomainCondition { slot: usize },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("family of apparatus {slot} is not a PVM; projector retrodiction needs PVMs")]
    PvmRequired { slot: usize },

    #[error("state is not a product branch over the chain factors")]
    NotProductBranch,

    #[error("retrodiction not licensed: {0}")]
    NotLicensed(String),

    #[error("recursion blocked after step {step}: intermediate state is not a product branch")]
    RecursionBlocked { step: usize },

    #[error("invalid probability space: {0}")]
    InvalidDistribution(String),

    #[error("string set is not prefix-free")]
    NotPrefixFree,

    #[error("symbol not in the alphabet")]
    UnknownSymbol,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
