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


use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use retrodict::commands::{cmd_export, cmd_list, cmd_retrodict, cmd_run, cmd_sample, cmd_verify, CliConfig};
use retrodict::{CliError, ExitCode};

/// Branch-world retrodiction for chains of measurements.
#[derive(Parser)]
#[command(name = "retrodict", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Derive, sample and check a scenario; built-ins are compared with their oracles.
    Run {
        /// Built-in name or path to a scenario file.
        scenario: String,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check completeness, projectivity and the domain condition of a scenario.
    Verify {
        scenario: String,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        quiet: bool,
    },
    /// Print a sampled world as JSON lines, one outcome tuple per line.
    Sample {
        scenario: String,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print confirming points and retrodicted states for every branch.
    Retrodict {
        scenario: String,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write built-in scenarios as JSON files.
    Export {
        /// Scenario names; all built-ins when omitted.
        names: Vec<String>,
        #[arg(long, default_value = "scenarios")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct SamplingArgs {
    /// Number of repetitions to sample.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Seed for the world sampler.
    #[arg(long)]
    seed: u64,
    /// Tolerance for empirical frequencies.
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    tol: f64,
    #[command(flatten)]
    algebra: AlgebraArgs,
}

#[derive(Args)]
struct AlgebraArgs {
    /// Tolerance for algebraic identities.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    atol: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Also write a JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Suppress human-readable output.
    #[arg(long)]
    quiet: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn config(scenario: String, s: SamplingArgs, o: OutputArgs) -> Result<CliConfig, CliError> {
    let samples = usize::try_from(s.samples).map_err(|_| CliError::Usage("--samples too large".into()))?;
    Ok(CliConfig {
        scenario,
        samples,
        seed: s.seed,
        stat_tol: s.tol,
        tol: s.algebra.atol,
        json_out: o.json,
        quiet: o.quiet,
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::List => cmd_list(out),
        Command::Run { scenario, sampling, output } => cmd_run(&config(scenario, sampling, output)?, out),
        Command::Verify { scenario, algebra, quiet } => cmd_verify(&scenario, algebra.atol, quiet, out),
        Command::Sample { scenario, sampling, output } => cmd_sample(&config(scenario, sampling, output)?, out),
        Command::Retrodict { scenario, algebra, output } => {
            cmd_retrodict(&scenario, algebra.atol, output.json.as_deref(), output.quiet, out)
        }
        Command::Export { names, dir } => cmd_export(&names, &dir, out),
    }
}

fn main() {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match dispatch(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    if out.flush().is_err() {
        process::exit(ExitCode::InputError.code());
    }
    process::exit(code.code());
}
