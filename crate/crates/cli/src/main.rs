use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use complementarity::jointmeas::{instance_from_setup, JMInstance};
use complementarity_cli::commands::{self, Format, OracleChoice, SweepConfig};
use complementarity_cli::{CliError, Outcome, Scenario, EXIT_INVALID_INPUT};

/// Log verbosity, in `env_logger` filter syntax. Nothing else is read from the environment.
const LOG_ENV: &str = "COMPLEMENTARITY_LOG";

#[derive(Parser)]
#[command(
    name = "complementarity",
    version,
    about = "Which-path duality and joint-measurability checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every duality quantity for one scenario.
    Report {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Decide joint measurability of N and M, from magnitudes or a scenario.
    CheckJm {
        #[arg(long, requires_all = ["m", "n"], conflicts_with = "scenario")]
        m0: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "full")]
        oracle: OracleChoice,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
    /// Run random setups through every check and write one CSV row each.
    Sweep {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the joint observable and compare with the Born probabilities.
    Sample {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        shots: u64,
        /// Defaults to the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the predicted slope of the duality gap with a finite-difference estimate.
    GammaSlope {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        p_step: f64,
    },
    /// Run the acceptance criteria at a chosen scale.
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
}

fn run(command: Command) -> Result<Outcome, CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Report { scenario, format } => {
            commands::report(&Scenario::load(&scenario)?, format, &mut out)
        }
        Command::CheckJm {
            m0,
            m,
            n,
            scenario,
            oracle,
            resolution,
        } => {
            let instance = match (m0, m, n, scenario) {
                (Some(m0), Some(m), Some(n), None) => JMInstance::from_magnitudes(m0, m, n)?,
                (None, None, None, Some(path)) => {
                    let resolved = Scenario::load(&path)?.resolve()?;
                    instance_from_setup(&resolved.setup, &resolved.strategy)?
                }
                _ => {
                    return Err(CliError::Argument(
                        "give either --m0, --m and --n, or --scenario".into(),
                    ))
                }
            };
            commands::check_jm(&instance, oracle, resolution, &mut out)
        }
        Command::Sweep {
            count,
            seed,
            dim,
            out: path,
        } => {
            let cfg = SweepConfig { count, seed, dim };
            let violations = match path {
                Some(path) => {
                    let file = File::create(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    let mut w = BufWriter::new(file);
                    let v = commands::sweep(&cfg, &mut w)?;
                    w.flush()?;
                    v
                }
                None => commands::sweep(&cfg, &mut out)?,
            };
            for v in &violations {
                eprintln!(
                    "violation at seed {} index {}: {}",
                    v.seed, v.index, v.detail
                );
            }
            Ok(if violations.is_empty() {
                Outcome::Ok
            } else {
                Outcome::Violation
            })
        }
        Command::Sample {
            scenario,
            shots,
            seed,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let seed = seed.unwrap_or(scenario.seed);
            commands::sample(&scenario, shots, seed, &mut out)
        }
        Command::GammaSlope { scenario, p_step } => {
            commands::gamma_slope(&Scenario::load(&scenario)?, p_step, &mut out)
        }
        Command::Verify { seed, count } => commands::verify(seed, count, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID_INPUT)
        }
    }
}
