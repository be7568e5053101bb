//! `groupcode`: tables, verification, channel simulation, coset leader
//! graphs and partial-code analysis from the command line.
//!
//! Exit status is 0 on success, 1 when a requested check does not pass and
//! 2 for bad input.

mod run;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use groupcode::par::{Execution, WORKERS_ENV};
use groupcode::partial::{PartialCodeSpec, RatioConvention};

use run::{ConventionArg, DecoderKind, Format, Outcome, SimulateArgs, Table};
use source::{resolve, GroupRef};

#[derive(Parser)]
#[command(
    name = "groupcode",
    version,
    about = "Group codes over finite unitary groups"
)]
struct Cli {
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GroupArgs {
    /// `gr1n:<r>,<n>`, `catalog:<g4|g8|g16>` or `file:<path.json>`.
    #[arg(long)]
    group: GroupRef,

    /// `standard`, a vector name from the group file, or entries like `0.7+0.5i,0.5`.
    #[arg(long)]
    x0: Option<String>,

    /// Generators of the middle subgroup for matrix groups, comma separated words.
    #[arg(long)]
    subgroup: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum distance grid or decoder comparison counts.
    Tables {
        #[arg(value_enum)]
        which: Table,
        /// Root-of-unity order used for the comparison table.
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the decoding checks on a group, chain and initial vector.
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Run every applicable check (currently the only mode).
        #[arg(long, required = true)]
        all: bool,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Monte Carlo error rates over an SNR sweep.
    Simulate {
        #[command(flatten)]
        group: GroupArgs,
        /// `start:step:stop` in dB, inclusive.
        #[arg(long)]
        snr: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        decoder: DecoderKind,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Coset leader graphs in Graphviz format.
    Graph {
        #[command(flatten)]
        group: GroupArgs,
        /// `all` or a 1-based stage number.
        #[arg(long, default_value = "all")]
        stage: String,
    },
    /// Partial codes of `G(r,1,n)`.
    Partial {
        #[command(subcommand)]
        command: PartialCommand,
    },
}

#[derive(Subcommand)]
enum PartialCommand {
    /// Size, generator distances and minimum distance for one divisor chain.
    Analyze {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: usize,
        /// Divisors `m_1,...,m_n`; all ones by default.
        #[arg(long)]
        m: Option<String>,
        /// Ratio of the coordinate step to the first coordinate; repeatable.
        #[arg(long)]
        ratio: Vec<f64>,
        #[arg(long, value_enum, default_value = "both")]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Every divisor chain against every ratio.
    Sweep {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, required = true)]
        ratio: Vec<f64>,
        #[arg(long, value_enum, default_value = "stated")]
        convention: ConventionArg,
    },
}

fn execution(workers: Option<usize>) -> Execution {
    match workers {
        Some(0) | None => Execution::default(),
        Some(w) => Execution::with_workers(w),
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let exec = execution(cli.workers);
    match cli.command {
        Command::Tables {
            which,
            r,
            trials,
            seed,
            format,
        } => run::tables(which, r, trials, seed, exec, format),
        Command::Verify {
            group,
            samples,
            seed,
            format,
            ..
        } => {
            let setup = resolve(&group.group, group.x0.as_deref(), group.subgroup.as_deref())?;
            run::verify(&setup, samples, seed, exec, format)
        }
        Command::Simulate {
            group,
            snr,
            trials,
            seed,
            decoder,
            format,
        } => {
            let setup = resolve(&group.group, group.x0.as_deref(), group.subgroup.as_deref())?;
            run::simulate(
                &setup,
                &SimulateArgs {
                    snr: &snr,
                    trials,
                    seed,
                    decoder,
                    exec,
                    format,
                },
            )
        }
        Command::Graph { group, stage } => {
            let setup = resolve(&group.group, group.x0.as_deref(), group.subgroup.as_deref())?;
            run::graph(&setup, &stage)
        }
        Command::Partial { command } => match command {
            PartialCommand::Analyze {
                r,
                n,
                m,
                ratio,
                convention,
                format,
            } => {
                let spec = PartialCodeSpec::new(r, n, run::parse_divisors(m.as_deref(), n)?)?;
                run::partial_analyze(&spec, &ratio, convention, format)
            }
            PartialCommand::Sweep {
                r,
                n,
                ratio,
                convention,
            } => {
                let conv = match convention {
                    ConventionArg::Scaled => RatioConvention::Scaled,
                    ConventionArg::Stated => RatioConvention::Stated,
                    ConventionArg::Both => anyhow::bail!("sweep takes a single convention"),
                };
                run::partial_sweep(r, n, &ratio, conv, exec)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let outcome = match dispatch(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let written = match &output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(outcome.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
