use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subexp_cli::{execute, RunRequest, Scenario, Task};

/// Envelope-model experiment runner: checks sub-linear expectation axioms,
/// Choquet integrals, moment inequalities, series criteria, and strong-law
/// scaling on a scenario file, writing plot-ready tables and a manifest.
#[derive(Debug, Parser)]
#[command(name = "subexp", version, about)]
struct Cli {
    /// Scenario file (TOML); a run manifest is accepted too.
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Output directory for reports, tables, and the manifest.
    #[arg(
        long,
        global = true,
        env = "SUBEXP_OUT",
        default_value = "subexp-out",
        value_name = "DIR"
    )]
    out: PathBuf,

    /// Overrides the scenario seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Overrides the scenario horizon.
    #[arg(long, global = true, value_name = "N")]
    horizon: Option<usize>,

    /// Rayon thread count (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Randomized envelope axiom suite plus capacity sub-additivity.
    Axioms,
    /// Choquet integrals and envelope moments of |X|^p on an exponent grid.
    Choquet,
    /// Fuzz sweep of the Holder/Chebyshev/Jensen/Cr/positive-part bounds.
    Inequalities,
    /// Exhaustive Rosenthal grid sweep with DP vs enumeration cross-check.
    Rosenthal,
    /// Truncated three-series criterion on the scenario sequence.
    ThreeSeries,
    /// Marcinkiewicz strong-law trajectory simulation and scaling verdict.
    Slln,
    /// Every subcommand above, in order, sharing one manifest.
    All,
}

impl Command {
    fn tasks(self) -> Vec<Task> {
        match self {
            Command::Axioms => vec![Task::Axioms],
            Command::Choquet => vec![Task::Choquet],
            Command::Inequalities => vec![Task::Inequalities],
            Command::Rosenthal => vec![Task::Rosenthal],
            Command::ThreeSeries => vec![Task::ThreeSeries],
            Command::Slln => vec![Task::Slln],
            Command::All => Task::ALL.to_vec(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Command::Axioms => "axioms",
            Command::Choquet => "choquet",
            Command::Inequalities => "inequalities",
            Command::Rosenthal => "rosenthal",
            Command::ThreeSeries => "three-series",
            Command::Slln => "slln",
            Command::All => "all",
        }
    }
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    // Clap exits with status 2 on parse errors, matching config-error exits.
    let cli = Cli::parse();

    let Some(scenario_path) = cli.scenario else {
        eprintln!("error: --scenario <PATH> is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let mut scenario = match Scenario::load(&scenario_path) {
        Ok(scenario) => scenario,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(horizon) = cli.horizon {
        scenario.sequence.horizon = horizon;
    }
    if let Some(threads) = cli.threads {
        // A second call in one process fails harmlessly; the pool stands.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let request = RunRequest {
        tasks: cli.command.tasks(),
        subcommand: cli.command.label().to_string(),
        scenario,
        out_dir: cli.out,
        threads: cli.threads,
    };
    match execute(&request) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
