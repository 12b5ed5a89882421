//! `hindman`: batch experiments and invariant checks over hindman-core.
//!
//! Exit status is 0 on success, 1 when a verification fails (the failing
//! witness goes to stderr and into the report), 2 on usage or I/O errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{Failure, Globals, OrdinalColoringArg, Suite};
use report::{Emitter, Format, RunReport};

#[derive(Parser)]
#[command(name = "hindman", version, about = "Finite experiments with Hindman-type colorings")]
struct Cli {
    /// Seed for random colorings and randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the family search
    #[arg(long, global = true, env = "HINDMAN_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Per-search time budget; an interrupted search reports a lower bound
    #[arg(long, global = true)]
    time_budget_secs: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log block and log-parity color of each size 1..=n
    ColorTable {
        #[arg(long, default_value_t = 16)]
        n: u64,
    },
    /// Largest disjoint family with monochromatic finite unions, for each n in a range
    SearchMax {
        /// Inclusive range such as 4..8
        #[arg(long, value_parser = commands::parse_range)]
        n_range: (u32, u32),
        /// log_parity, random (keyed by --seed), or a JSON coloring spec file
        #[arg(long, default_value = "log_parity")]
        coloring: String,
    },
    /// Smallest n forcing disjoint x, y with x, y, x ∪ y one color, cross-checked two ways
    HindmanMinN {
        #[arg(long)]
        max_n: u32,
    },
    /// Run a named invariant suite
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Size parameter (universe size, length bound, or exponent bound by suite)
        #[arg(long)]
        n: Option<u64>,
        /// Random instances for the randomized suites
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Coloring for flip-lemma: log_parity, random, or a spec file
        #[arg(long, default_value = "log_parity")]
        coloring: String,
    },
    /// Randomized free-group length formula against direct reduction
    FreegroupCheck {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Greedy ordinal sequence whose finite sums are its own elements
    OrdinalDemo {
        /// Upper bound in Cantor normal form, e.g. w^3
        #[arg(long, default_value = "w^3")]
        bound: String,
        #[arg(long, default_value_t = 3)]
        length: u32,
        #[arg(long, value_enum, default_value_t = OrdinalColoringArg::CoefficientParity)]
        coloring: OrdinalColoringArg,
        #[arg(long, default_value_t = hindman_core::ordinals::DEFAULT_COEFF_CAP)]
        coeff_cap: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ColorTable { .. } => "color-table",
            Command::SearchMax { .. } => "search-max",
            Command::HindmanMinN { .. } => "hindman-min-n",
            Command::Verify { .. } => "verify",
            Command::FreegroupCheck { .. } => "freegroup-check",
            Command::OrdinalDemo { .. } => "ordinal-demo",
        }
    }
}

fn run(cli: Cli) -> Result<Option<String>, Failure> {
    let start = Instant::now();
    let globals = Globals { seed: cli.seed, threads: cli.threads, time_budget_secs: cli.time_budget_secs };
    let mut out = Emitter::open(cli.format, cli.output.as_deref())
        .map_err(|e| Failure::Usage(format!("cannot open output: {e}")))?;
    let outcome = match &cli.command {
        Command::ColorTable { n } => commands::color_table(&mut out, *n)?,
        Command::SearchMax { n_range, coloring } => commands::search_max(&mut out, &globals, *n_range, coloring)?,
        Command::HindmanMinN { max_n } => commands::hindman_min_n(&mut out, *max_n)?,
        Command::Verify { suite, n, trials, coloring } => {
            commands::verify(&mut out, &globals, *suite, *n, *trials, coloring)?
        }
        Command::FreegroupCheck { trials } => commands::freegroup_check(&mut out, &globals, *trials)?,
        Command::OrdinalDemo { bound, length, coloring, coeff_cap } => {
            commands::ordinal_demo(&mut out, &globals, bound, *length, *coloring, *coeff_cap)?
        }
    };
    let report = RunReport {
        command: cli.command.name().to_string(),
        inputs: outcome.inputs,
        results: outcome.results,
        wall_time_ms: start.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    out.finish(&report, &outcome.summary)?;
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(witness)) | Err(Failure::Verification(witness)) => {
            eprintln!("verification failed: {witness}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
