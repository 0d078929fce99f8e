//! Acceptance gate: every criterion at full scale, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always printed.
//! `ACCEPTANCE_SEED` overrides the default seed.

use std::process::ExitCode;
use std::time::Instant;

use complementarity::verify::{run_all, VerifyConfig};

const DEFAULT_SEED: u64 = 20_260_917;

fn main() -> ExitCode {
    let seed = std::env::var("ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    let cfg = VerifyConfig::standard(seed);
    println!("acceptance suite, seed {seed}");
    let started = Instant::now();
    let outcomes = match run_all(&cfg) {
        Ok(o) => o,
        Err(e) => {
            println!("[FAIL] acceptance suite aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} criteria passed in {:.1}s",
        outcomes.len() - failed,
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
