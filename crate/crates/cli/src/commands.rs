//! One function per subcommand. Each writes its result to `out` and returns
//! whether every check it ran held.

use std::io::Write;

use complementarity::appendix::{gamma_slope_empirical, gamma_slope_prediction};
use complementarity::jointmeas::{
    feasibility_oracle, instance_from_setup, jm_criterion, JMInstance, OracleMode,
};
use complementarity::mzi::{
    duality_report, gamma_identity_residual, optimal_strategy, predictability, random_setup_with,
    random_strategy_with, sample_outcomes, strategy_stats, MziSetup, Strategy,
};
use complementarity::qubit::{BlochVector, QubitState, MAX_DETECTOR_DIM, MIN_DETECTOR_DIM};
use complementarity::rng;
use complementarity::verify::{realization_residuals, run_all, VerifyConfig};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::output::{write_csv, ResultRow};
use crate::scenario::Scenario;
use crate::Outcome;

/// Slack allowed on every identity and inequality checked here.
pub const CHECK_TOL: f64 = 1e-10;
/// Largest |z| a sampled outcome may show before the sampler is flagged.
pub const Z_LIMIT: f64 = 5.0;
/// Relative agreement required between predicted and measured γ slopes.
pub const SLOPE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleChoice {
    Full,
    Reduced,
    Off,
}

impl OracleChoice {
    fn mode(self) -> Option<OracleMode> {
        match self {
            Self::Full => Some(OracleMode::Full),
            Self::Reduced => Some(OracleMode::Reduced),
            Self::Off => None,
        }
    }
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Runs the whole pipeline on one setup and lists every check that failed.
pub fn evaluate(
    id: &str,
    seed: u64,
    setup: &MziSetup,
    strategy: &Strategy,
) -> Result<(ResultRow, Vec<String>), CliError> {
    let report = duality_report(setup, strategy)?;
    let instance = instance_from_setup(setup, strategy)?;
    let verdict = jm_criterion(&instance)?;
    let residuals = realization_residuals(setup, strategy)?;
    let stats = strategy_stats(setup, strategy)?;
    let identity = gamma_identity_residual(&stats, &predictability(setup.rho()));

    let mut failures = Vec::new();
    let mut expect = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };
    expect(
        report.lhs_thm2 <= report.rhs_thm2 + CHECK_TOL,
        format!("duality: {} > {}", report.lhs_thm2, report.rhs_thm2),
    );
    expect(
        report.lhs_jsve <= 1.0 + CHECK_TOL,
        format!("trace-norm duality: {} > 1", report.lhs_jsve),
    );
    expect(
        report.d_s <= report.d_max + CHECK_TOL,
        format!("D_S {} exceeds D {}", report.d_s, report.d_max),
    );
    expect(
        identity <= CHECK_TOL,
        format!("gap identity residual {identity:e}"),
    );
    expect(
        residuals.min_eigenvalue >= -CHECK_TOL,
        format!("joint effect eigenvalue {:e}", residuals.min_eigenvalue),
    );
    expect(
        residuals.completeness <= CHECK_TOL,
        format!("completeness residual {:e}", residuals.completeness),
    );
    expect(
        residuals.port_marginal.max(residuals.guess_marginal) <= CHECK_TOL,
        format!(
            "marginal residuals {:e}, {:e}",
            residuals.port_marginal, residuals.guess_marginal
        ),
    );
    expect(
        verdict.measurable,
        format!("realised pair has margin {:e}", verdict.margin),
    );
    if let Some(w) = &verdict.witness {
        expect(
            w.is_psd(),
            format!("witness eigenvalue {:e}", w.min_eigenvalue()),
        );
    }

    let row = ResultRow {
        id: id.to_owned(),
        seed,
        report: report.into(),
        margin: verdict.margin,
        measurable: verdict.measurable,
    };
    Ok((row, failures))
}

fn report_failures(failures: &[String], context: &str) -> Outcome {
    for f in failures {
        log::error!("{context}: {f}");
    }
    if failures.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Violation
    }
}

pub fn report<W: Write>(
    scenario: &Scenario,
    format: Format,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let resolved = scenario.resolve()?;
    let (row, failures) = evaluate(
        &scenario.id,
        scenario.seed,
        &resolved.setup,
        &resolved.strategy,
    )?;
    match format {
        Format::Csv => write_csv(&mut *out, [&row])?,
        Format::Json => write_json(out, &row)?,
    }
    Ok(report_failures(
        &failures,
        &format!("scenario {:?}", scenario.id),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct JmReport {
    pub m0: f64,
    pub m: f64,
    pub n: f64,
    pub measurable: bool,
    pub margin: f64,
    pub witness: Option<WitnessReport>,
    pub oracle: Option<OracleReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub x: f64,
    pub y: [f64; 3],
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub mode: &'static str,
    pub resolution: f64,
    pub feasible: bool,
    pub agrees: bool,
}

/// Decides joint measurability in closed form and, unless `oracle` is
/// `Off`, by direct search. Disagreement counts as a violation only when the
/// margin is wider than `resolution`; closer to the boundary the search
/// cannot tell the two answers apart.
pub fn check_jm<W: Write>(
    instance: &JMInstance,
    oracle: OracleChoice,
    resolution: f64,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let verdict = jm_criterion(instance)?;
    let mut ok = true;
    let witness = verdict.witness.as_ref().map(|w| {
        let min_eigenvalue = w.min_eigenvalue();
        ok &= min_eigenvalue >= -CHECK_TOL;
        WitnessReport {
            x: w.x,
            y: w.y_vec.0,
            min_eigenvalue,
        }
    });
    let oracle = match oracle.mode() {
        Some(mode) => {
            let feasible = feasibility_oracle(instance, mode, resolution)?;
            let agrees = feasible == verdict.measurable;
            if !agrees && verdict.margin.abs() > resolution {
                ok = false;
            }
            Some(OracleReport {
                mode: if mode == OracleMode::Full {
                    "full"
                } else {
                    "reduced"
                },
                resolution,
                feasible,
                agrees,
            })
        }
        None => None,
    };
    let report = JmReport {
        m0: instance.m0(),
        m: instance.m(),
        n: instance.n(),
        measurable: verdict.measurable,
        margin: verdict.margin,
        witness,
        oracle,
    };
    write_json(out, &report)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Violation })
}

#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
    pub dim: usize,
}

/// A failed check in a sweep, with what is needed to rerun that instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepViolation {
    pub seed: u64,
    pub index: u64,
    pub detail: String,
}

/// Instance `index` of a sweep: setup from stream `index` of `seed`; even
/// indices use the optimal strategy, odd ones a random one.
pub fn sweep_instance(seed: u64, index: u64, dim: usize) -> Result<(MziSetup, Strategy), CliError> {
    let mut r = rng::stream(seed, index);
    let setup = random_setup_with(dim, &mut r)?;
    let strategy = if index.is_multiple_of(2) {
        optimal_strategy(&setup)
    } else {
        random_strategy_with(dim, &mut r)?
    };
    Ok((setup, strategy))
}

/// Evaluates `count` random instances in parallel and writes one CSV row per
/// instance, in index order.
pub fn sweep<W: Write>(cfg: &SweepConfig, out: &mut W) -> Result<Vec<SweepViolation>, CliError> {
    if !(MIN_DETECTOR_DIM..=MAX_DETECTOR_DIM).contains(&cfg.dim) {
        return Err(CliError::Argument(format!(
            "--dim {} outside {MIN_DETECTOR_DIM}..={MAX_DETECTOR_DIM}",
            cfg.dim
        )));
    }
    if cfg.count == 0 {
        return Err(CliError::Argument("--count must be at least 1".into()));
    }
    log::info!(
        "sweep: {} instances, d = {}, seed {}",
        cfg.count,
        cfg.dim,
        cfg.seed
    );
    let evaluated: Vec<(ResultRow, Vec<String>)> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|index| {
            let (setup, strategy) = sweep_instance(cfg.seed, index, cfg.dim)?;
            evaluate(&format!("sweep-{index}"), cfg.seed, &setup, &strategy)
        })
        .collect::<Result<_, _>>()?;
    write_csv(&mut *out, evaluated.iter().map(|(row, _)| row))?;
    let violations = evaluated
        .iter()
        .enumerate()
        .flat_map(|(index, (_, failures))| {
            failures.iter().map(move |detail| SweepViolation {
                seed: cfg.seed,
                index: index as u64,
                detail: detail.clone(),
            })
        })
        .collect();
    Ok(violations)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub port: usize,
    /// `true` when the detector outcome fell in S.
    pub in_s: bool,
    pub count: u64,
    pub probability: f64,
    pub frequency: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub id: String,
    pub shots: u64,
    pub seed: u64,
    pub outcomes: Vec<SampleOutcome>,
    pub max_abs_z: f64,
}

pub fn sample<W: Write>(
    scenario: &Scenario,
    shots: u64,
    seed: u64,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let resolved = scenario.resolve()?;
    let counts = sample_outcomes(&resolved.setup, &resolved.strategy, shots, seed)?;
    let mut outcomes = Vec::with_capacity(4);
    for port in 0..2 {
        for j in 0..2 {
            outcomes.push(SampleOutcome {
                port,
                in_s: j == 0,
                count: counts.counts[port][j],
                probability: counts.probabilities[port][j],
                frequency: counts.frequency(port, j),
                z: counts.z_score(port, j),
            });
        }
    }
    let max_abs_z = outcomes.iter().map(|o| o.z.abs()).fold(0.0, f64::max);
    write_json(
        out,
        &SampleReport {
            id: scenario.id.clone(),
            shots,
            seed,
            outcomes,
            max_abs_z,
        },
    )?;
    Ok(if max_abs_z <= Z_LIMIT {
        Outcome::Ok
    } else {
        log::error!("sampled frequencies deviate by {max_abs_z:.2} standard deviations");
        Outcome::Violation
    })
}

/// Predicted against measured slope of the optimal gap γ in the path bias.
/// Only the detector of the scenario is used; the quanton is replaced by
/// states with Bloch vector (p, 0, 0). When the best guess at `p_step`
/// ignores the detector the closed form does not apply and no comparison is
/// made.
pub fn gamma_slope<W: Write>(
    scenario: &Scenario,
    p_step: f64,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let resolved = scenario.resolve()?;
    let setup = &resolved.setup;
    if setup.detector_dim() != 2 {
        return Err(CliError::Argument(format!(
            "gamma-slope needs a qubit detector, scenario has d = {}",
            setup.detector_dim()
        )));
    }
    let predicted = gamma_slope_prediction(setup.rho_d(), setup.unitary())?;
    let empirical = gamma_slope_empirical(setup.rho_d(), setup.unitary(), p_step)?;
    let biased = setup.with_rho(QubitState::from_bloch(BlochVector::new(p_step, 0.0, 0.0))?);
    let s_size = optimal_strategy(&biased).subset().len();
    let detector_consulted = s_size != 0 && s_size != 2;
    let deviation = (empirical - predicted).abs();
    let agrees = deviation <= SLOPE_TOL * predicted.abs().max(SLOPE_TOL);
    write_json(
        out,
        &json!({
            "id": scenario.id,
            "p_step": p_step,
            "predicted": predicted,
            "empirical": empirical,
            "deviation": deviation,
            "detector_consulted": detector_consulted,
            "agrees": agrees,
        }),
    )?;
    Ok(if agrees || !detector_consulted {
        Outcome::Ok
    } else {
        Outcome::Violation
    })
}

/// The acceptance suite, scaled to `count` joint-measurability instances.
pub fn verify<W: Write>(seed: u64, count: usize, out: &mut W) -> Result<Outcome, CliError> {
    if count == 0 {
        return Err(CliError::Argument("--count must be at least 1".into()));
    }
    let outcomes = run_all(&VerifyConfig::scaled(seed, count))?;
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(
        out,
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    )?;
    Ok(if failed == 0 {
        Outcome::Ok
    } else {
        Outcome::Violation
    })
}
