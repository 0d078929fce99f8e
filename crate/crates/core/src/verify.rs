//! Randomized cross-checks of every closed form against an independent route.
//!
//! Each check draws its instances from `rng::stream(seed, index)`, so a
//! reported failure can be replayed from the seed and index alone.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::appendix::{
    gamma_slope_empirical, gamma_slope_prediction, identity_a8_residual, QubitDetectorAnalysis,
};
use crate::error::Result;
use crate::jointmeas::{
    construct_joint, feasibility_oracle, instance_from_setup, jm_criterion, random_instance_with,
    JMInstance, OracleMode,
};
use crate::linalg::{hermitian_eig, CMatrix};
use crate::mzi::{
    best_partition_distinguishability, distinguishability, duality_report, gamma_identity_residual,
    joint_observable, max_distinguishability, optimal_strategy, povm_m, povm_n, predictability,
    random_setup_with, random_strategy_with, sample_outcomes, strategy_stats, MziSetup, Strategy,
};
use crate::qubit::{
    random_detector_state_with, random_direction, random_pure_state_with, random_qubit_state_with,
    random_unitary_with, x_rotation,
};
use crate::rng;

/// Instance counts for each criterion. [`VerifyConfig::standard`] is the full gate.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub jm_instances: usize,
    pub jm_resolution: f64,
    pub jm_band: f64,
    pub physical_setups: usize,
    pub duality_setups: usize,
    pub optimality_setups: usize,
    pub optimality_random_strategies: usize,
    pub pure_detectors: usize,
    pub a8_analyses: usize,
    pub slope_detectors: usize,
    pub slope_step: f64,
    pub sampler_scenarios: usize,
    pub sampler_shots: u64,
}

impl VerifyConfig {
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            jm_instances: 10_000,
            jm_resolution: 0.01,
            jm_band: 0.03,
            physical_setups: 1_000,
            duality_setups: 1_000,
            optimality_setups: 200,
            optimality_random_strategies: 1_000,
            pure_detectors: 1_000,
            a8_analyses: 10_000,
            slope_detectors: 100,
            slope_step: 1e-4,
            sampler_scenarios: 10,
            sampler_shots: 1_000_000,
        }
    }

    /// Scales every count by `count / 10⁴` (at least 1, sampler shots untouched).
    pub fn scaled(seed: u64, count: usize) -> Self {
        let base = Self::standard(seed);
        let f = count as f64 / base.jm_instances as f64;
        let s = |n: usize| ((n as f64 * f).round() as usize).max(1);
        Self {
            jm_instances: count.max(1),
            physical_setups: s(base.physical_setups),
            duality_setups: s(base.duality_setups),
            optimality_setups: s(base.optimality_setups),
            optimality_random_strategies: s(base.optimality_random_strategies),
            pure_detectors: s(base.pure_detectors),
            a8_analyses: s(base.a8_analyses),
            slope_detectors: s(base.slope_detectors),
            sampler_scenarios: s(base.sampler_scenarios),
            ..base
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn dim_for(index: usize, dims: &[usize]) -> usize {
    dims[index % dims.len()]
}

/// Random JM instances outside the band |margin| < `band`, with their stream index.
pub fn banded_instances(seed: u64, count: usize, band: f64) -> Vec<(u64, JMInstance)> {
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count {
        let inst = random_instance_with(&mut rng::stream(seed, index));
        if inst.margin().abs() >= band {
            out.push((index, inst));
        }
        index += 1;
    }
    out
}

/// Criteria 1 and 2: closed-form criterion vs FULL oracle, REDUCED vs FULL.
pub fn check_jm_differential(cfg: &VerifyConfig) -> Result<[CriterionOutcome; 2]> {
    let started = Instant::now();
    let instances = banded_instances(cfg.seed ^ 0x4a4d, cfg.jm_instances, cfg.jm_band);
    let results: Vec<(u64, bool, bool, bool)> = instances
        .par_iter()
        .map(|(index, inst)| {
            let closed = jm_criterion(inst)?.measurable;
            let full = feasibility_oracle(inst, OracleMode::Full, cfg.jm_resolution)?;
            let reduced = feasibility_oracle(inst, OracleMode::Reduced, cfg.jm_resolution)?;
            Ok((*index, closed, full, reduced))
        })
        .collect::<Result<_>>()?;
    let elapsed = started.elapsed().as_secs_f64();

    let criterion_vs_full: Vec<u64> = results.iter().filter(|r| r.1 != r.2).map(|r| r.0).collect();
    let reduced_vs_full: Vec<u64> = results.iter().filter(|r| r.3 != r.2).map(|r| r.0).collect();
    let measurable = results.iter().filter(|r| r.1).count();
    Ok([
        outcome(
            1,
            "joint-measurability criterion vs exhaustive oracle",
            criterion_vs_full.is_empty(),
            format!(
                "{} instances ({} measurable), |margin| >= {}, resolution {}, {} disagreements{}, {:.1}s",
                results.len(),
                measurable,
                cfg.jm_band,
                cfg.jm_resolution,
                criterion_vs_full.len(),
                first_indices(&criterion_vs_full),
                elapsed
            ),
        ),
        outcome(
            2,
            "x = 0 / planar reduction vs full search",
            reduced_vs_full.is_empty(),
            format!(
                "{} instances, {} disagreements{}",
                results.len(),
                reduced_vs_full.len(),
                first_indices(&reduced_vs_full)
            ),
        ),
    ])
}

fn first_indices(indices: &[u64]) -> String {
    if indices.is_empty() {
        String::new()
    } else {
        let shown: Vec<String> = indices.iter().take(5).map(|i| i.to_string()).collect();
        format!(" (stream indices {})", shown.join(", "))
    }
}

/// Worst-case residuals of one physically realised joint observable.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealizationResiduals {
    pub min_eigenvalue: f64,
    pub completeness: f64,
    pub port_marginal: f64,
    pub guess_marginal: f64,
    pub margin: f64,
}

pub fn realization_residuals(
    setup: &MziSetup,
    strategy: &Strategy,
) -> Result<RealizationResiduals> {
    let joint = joint_observable(setup, strategy)?;
    let n = povm_n(setup).effects();
    let m = povm_m(setup, strategy)?.effects();
    let mut r = RealizationResiduals {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    for i in 0..2 {
        for j in 0..2 {
            let eig = hermitian_eig(joint.effect(i, j))?;
            r.min_eigenvalue = r.min_eigenvalue.min(eig.min_eigenvalue());
        }
        r.port_marginal = r
            .port_marginal
            .max(joint.port_marginal(i).max_abs_diff(&n[i]));
        r.guess_marginal = r
            .guess_marginal
            .max(joint.guess_marginal(i).max_abs_diff(&m[i]));
    }
    r.completeness = joint.total().max_abs_diff(&CMatrix::identity(2));
    r.margin = instance_from_setup(setup, strategy)?.margin();
    Ok(r)
}

/// Criterion 3.
pub fn check_physical_realizability(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x5048;
    let residuals: Vec<(u64, RealizationResiduals)> = (0..cfg.physical_setups as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let d = dim_for(index as usize, &[2, 3, 4]);
            let setup = random_setup_with(d, &mut rng)?;
            let strategy = random_strategy_with(d, &mut rng)?;
            Ok((index, realization_residuals(&setup, &strategy)?))
        })
        .collect::<Result<_>>()?;
    let worst = residuals.iter().fold(
        RealizationResiduals {
            min_eigenvalue: f64::INFINITY,
            margin: f64::INFINITY,
            ..Default::default()
        },
        |acc, (_, r)| RealizationResiduals {
            min_eigenvalue: acc.min_eigenvalue.min(r.min_eigenvalue),
            completeness: acc.completeness.max(r.completeness),
            port_marginal: acc.port_marginal.max(r.port_marginal),
            guess_marginal: acc.guess_marginal.max(r.guess_marginal),
            margin: acc.margin.min(r.margin),
        },
    );
    let passed = worst.min_eigenvalue >= -1e-10
        && worst.completeness <= 1e-10
        && worst.port_marginal <= 1e-10
        && worst.guess_marginal <= 1e-10
        && worst.margin >= -1e-10;
    Ok(outcome(
        3,
        "physical joint observable: positive, complete, correct marginals",
        passed,
        format!(
            "{} setups d in {{2,3,4}}: min eig {:.3e}, |sum - I| {:.3e}, |N marginal| {:.3e}, |M marginal| {:.3e}, min margin {:.3e}",
            residuals.len(),
            worst.min_eigenvalue,
            worst.completeness,
            worst.port_marginal,
            worst.guess_marginal,
            worst.margin
        ),
    ))
}

/// Criterion 4.
pub fn check_duality(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x4455;
    // (thm2 excess, identity residual, jsve excess, optimal rhs when detector mixed)
    let rows: Vec<(f64, f64, f64, f64)> = (0..cfg.duality_setups as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let d = dim_for(index as usize, &[2, 3, 4]);
            let setup = random_setup_with(d, &mut rng)?;
            let random = random_strategy_with(d, &mut rng)?;
            let optimal = optimal_strategy(&setup);
            let weights = predictability(setup.rho());
            let mut thm2_excess = f64::NEG_INFINITY;
            let mut identity = 0.0f64;
            for strategy in [&random, &optimal] {
                let report = duality_report(&setup, strategy)?;
                thm2_excess = thm2_excess.max(report.lhs_thm2 - report.rhs_thm2);
                let stats = strategy_stats(&setup, strategy)?;
                identity = identity.max(gamma_identity_residual(&stats, &weights));
            }
            let opt = duality_report(&setup, &optimal)?;
            Ok((thm2_excess, identity, opt.lhs_jsve - 1.0, opt.rhs_thm2))
        })
        .collect::<Result<_>>()?;
    let thm2 = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let identity = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let jsve = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let tightest = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let passed = thm2 <= 1e-10 && identity <= 1e-12 && jsve <= 1e-10 && tightest < 1.0 - 1e-4;
    Ok(outcome(
        4,
        "duality inequality, gap identity, trace-norm bound, strictness",
        passed,
        format!(
            "{} mixed-detector setups x (random, optimal) strategies: max(lhs - rhs) {:.3e}, identity residual {:.3e}, max(trace-norm lhs - 1) {:.3e}, min optimal rhs {:.6}",
            rows.len(),
            thm2,
            identity,
            jsve,
            tightest
        ),
    ))
}

/// Criterion 5.
pub fn check_optimality(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x4f50;
    let rows: Vec<(f64, f64, f64)> = (0..cfg.optimality_setups as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let d = dim_for(index as usize, &[2, 3]);
            let setup = random_setup_with(d, &mut rng)?;
            let d_max = max_distinguishability(&setup);
            let optimal = optimal_strategy(&setup);
            let weights = predictability(setup.rho());
            let d_opt = distinguishability(
                &strategy_stats(&setup, &optimal)?,
                weights.w_plus,
                weights.w_minus,
            );
            let exhaustive = best_partition_distinguishability(&setup, optimal.basis())?;
            let mut best_random = f64::NEG_INFINITY;
            for _ in 0..cfg.optimality_random_strategies {
                let s = random_strategy_with(d, &mut rng)?;
                let stats = strategy_stats(&setup, &s)?;
                best_random =
                    best_random.max(distinguishability(&stats, weights.w_plus, weights.w_minus));
            }
            Ok((
                (d_max - exhaustive).abs(),
                (d_max - d_opt).abs(),
                best_random - d_max,
            ))
        })
        .collect::<Result<_>>()?;
    let exhaustive = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let optimal = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let passed = exhaustive <= 1e-10 && optimal <= 1e-10 && excess <= 1e-10;
    Ok(outcome(
        5,
        "trace-norm distinguishability is the optimum",
        passed,
        format!(
            "{} setups d in {{2,3}}: |D - exhaustive max| {:.3e}, |D - D_S(opt)| {:.3e}, max(random D_S - D) {:.3e} over {} strategies each",
            rows.len(),
            exhaustive,
            optimal,
            excess,
            cfg.optimality_random_strategies
        ),
    ))
}

fn random_mixed_analysis(seed: u64, index: u64) -> Result<QubitDetectorAnalysis> {
    let mut rng = rng::stream(seed, index);
    let rho_d = random_detector_state_with(2, &mut rng)?;
    let u = random_unitary_with(2, &mut rng)?;
    let p = 2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0;
    QubitDetectorAnalysis::from_detector(&rho_d, &u, p)
}

/// Criterion 6.
pub fn check_pure_detectors(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x5055;
    let gammas: Vec<f64> = (0..cfg.pure_detectors as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let d = dim_for(index as usize, &[2, 3, 4]);
            let rho = random_qubit_state_with(&mut rng);
            let rho_d = random_pure_state_with(d, &mut rng)?;
            let u = random_unitary_with(d, &mut rng)?;
            let setup = MziSetup::new(rho, rho_d, u, 0.0)?;
            let report = duality_report(&setup, &optimal_strategy(&setup))?;
            Ok(report.gamma_s)
        })
        .collect::<Result<_>>()?;
    let worst_gamma = gammas.iter().copied().fold(0.0, f64::max);

    let a8_seed = cfg.seed ^ 0x4138;
    let residuals: Vec<f64> = (0..cfg.a8_analyses as u64)
        .into_par_iter()
        .map(|index| identity_a8_residual(&random_mixed_analysis(a8_seed, index)?))
        .collect::<Result<_>>()?;
    let worst_a8 = residuals.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        6,
        "gap vanishes for pure detectors; qubit gap identity",
        worst_gamma <= 1e-10 && worst_a8 <= 1e-12,
        format!(
            "{} pure detectors d in {{2,3,4}}: max gamma_opt {:.3e}; {} mixed qubit analyses: max residual {:.3e}",
            gammas.len(),
            worst_gamma,
            residuals.len(),
            worst_a8
        ),
    ))
}

/// Criterion 7.
pub fn check_gamma_slope(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x534c;
    let errors: Vec<(u64, f64)> = (0..cfg.slope_detectors as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let rho_d = random_detector_state_with(2, &mut rng)?;
            let u = random_unitary_with(2, &mut rng)?;
            let predicted = gamma_slope_prediction(&rho_d, &u)?;
            let measured = gamma_slope_empirical(&rho_d, &u, cfg.slope_step)?;
            Ok((index, ((measured - predicted) / predicted).abs()))
        })
        .collect::<Result<_>>()?;
    let (worst_index, worst) =
        errors
            .iter()
            .copied()
            .fold((0, 0.0), |acc, e| if e.1 > acc.1 { e } else { acc });

    let rho_d = CMatrix::from_diag(&[0.75, 0.25]);
    let rot = x_rotation(2, FRAC_PI_2)?;
    let reference = 0.75 / 0.875f64.sqrt();
    let predicted = gamma_slope_prediction(&rho_d, &rot)?;
    let measured = gamma_slope_empirical(&rho_d, &rot, cfg.slope_step)?;
    let reference_ok = (predicted - reference).abs() <= 1e-12
        && ((measured - reference) / reference).abs() <= 1e-3;
    Ok(outcome(
        7,
        "linear growth of the gap for qubit detectors",
        worst <= 1e-3 && reference_ok,
        format!(
            "{} mixed detectors at p_step {:e}: max relative error {:.3e} (stream {}); a=0.25,b=0: predicted {:.9}, measured {:.9}, reference {:.9}",
            errors.len(),
            cfg.slope_step,
            worst,
            worst_index,
            predicted,
            measured,
            reference
        ),
    ))
}

/// Criterion 8.
pub fn check_sampler(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let seed = cfg.seed ^ 0x5341;
    let worst: Vec<f64> = (0..cfg.sampler_scenarios as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng::stream(seed, index);
            let d = dim_for(index as usize, &[2, 3, 4]);
            let setup = random_setup_with(d, &mut rng)?;
            let strategy = random_strategy_with(d, &mut rng)?;
            let counts = sample_outcomes(&setup, &strategy, cfg.sampler_shots, seed ^ index)?;
            let mut z = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    z = z.max(counts.z_score(i, j).abs());
                }
            }
            Ok(z)
        })
        .collect::<Result<_>>()?;
    let max_z = worst.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        8,
        "Born-rule sampler frequencies",
        max_z <= 5.0,
        format!(
            "{} scenarios x {} shots: max |z| {:.3}",
            worst.len(),
            cfg.sampler_shots,
            max_z
        ),
    ))
}

/// Criterion 9.
pub fn check_saturation(cfg: &VerifyConfig) -> Result<CriterionOutcome> {
    let mut rng = rng::stream(cfg.seed ^ 0x5341_5455, 0);
    let mut worst_gap = 0.0f64;
    let mut worst_unit = 0.0f64;
    for d in 2..=4 {
        let rho = random_qubit_state_with(&mut rng);
        let rho_d = random_pure_state_with(d, &mut rng)?;
        let setup = MziSetup::new(rho, rho_d, CMatrix::identity(d), 0.3)?;
        let report = duality_report(&setup, &optimal_strategy(&setup))?;
        worst_gap = worst_gap.max((report.lhs_thm2 - report.rhs_thm2).abs());
        worst_unit = worst_unit.max((report.lhs_thm2 - 1.0).abs());
    }

    let mut worst_eig = 0.0f64;
    let boundary = 200;
    for _ in 0..boundary {
        let m0: f64 = rand::Rng::random(&mut rng);
        let m = rand::Rng::random::<f64>(&mut rng) * m0.min(1.0 - m0);
        let n = 0.5 * ((m0 * m0 - m * m).sqrt() + ((1.0 - m0).powi(2) - m * m).sqrt());
        let m_dir = random_direction(&mut rng);
        let n_dir = m_dir.any_orthogonal();
        let inst = JMInstance::new(m0, m_dir.scale(m), n_dir.scale(n.min(0.5)))?;
        let witness = construct_joint(&inst)?;
        worst_eig = worst_eig.max(witness.min_eigenvalue().abs());
    }
    Ok(outcome(
        9,
        "saturation: pure uncoupled detector, boundary witnesses",
        worst_gap <= 1e-12 && worst_unit <= 1e-12 && worst_eig <= 1e-8,
        format!(
            "pure detector, U = I: |lhs - rhs| {:.3e}, |lhs - 1| {:.3e}; {} boundary instances: max |min eig| {:.3e}",
            worst_gap, worst_unit, boundary, worst_eig
        ),
    ))
}

/// Runs every criterion in order.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CriterionOutcome>> {
    let mut out = Vec::with_capacity(9);
    out.extend(check_jm_differential(cfg)?);
    out.push(check_physical_realizability(cfg)?);
    out.push(check_duality(cfg)?);
    out.push(check_optimality(cfg)?);
    out.push(check_pure_detectors(cfg)?);
    out.push(check_gamma_slope(cfg)?);
    out.push(check_sampler(cfg)?);
    out.push(check_saturation(cfg)?);
    Ok(out)
}
