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


//! Std companion to `retrodict-core`: scenario files, JSON reports, a threaded
//! sampler and the command-line driver.

pub mod commands;
pub mod error;
pub mod format;
pub mod parallel;
pub mod report;

pub use error::{CliError, ExitCode};
