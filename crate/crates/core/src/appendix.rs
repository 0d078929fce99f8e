//! Closed forms for a qubit detector.
//!
//! Write ρ_D = (I + α·σ)/2 and Uρ_DU† = (I + β·σ)/2, so |α| = |β| and
//! a = |α|², b = α·β. With w₊ = (1 + p)/2 the best path guess measures along
//! s ∝ w₊α − w₋β, and the tightness gap γ of the duality inequality grows
//! linearly in |p| with slope 2(1 − tr ρ_D²)/F(ρ_D, Uρ_DU†).

use crate::error::{Error, Result};
use crate::linalg::{fidelity_unitary_pair, CMatrix};
use crate::mzi::{gamma, optimal_strategy, predictability, strategy_stats, MziSetup};
use crate::qubit::{decompose, BlochVector, QubitState};

const DIRECTION_TOL: f64 = 1e-12;
const FIDELITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDetectorAnalysis {
    pub alpha: BlochVector,
    pub beta: BlochVector,
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl QubitDetectorAnalysis {
    pub fn new(alpha: BlochVector, beta: BlochVector, p: f64) -> Result<Self> {
        let (na, nb) = (alpha.norm(), beta.norm());
        if (na - nb).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "|alpha| = {na} and |beta| = {nb} differ"
            )));
        }
        if na > 1.0 + 1e-10 {
            return Err(Error::InvalidState(format!("Bloch radius {na} > 1")));
        }
        if !(-1.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [-1, 1]")));
        }
        Ok(Self {
            alpha,
            beta,
            a: alpha.dot(&alpha),
            b: alpha.dot(&beta),
            p,
        })
    }

    /// Reads α and β off a 2×2 detector state and coupling.
    pub fn from_detector(rho_d: &CMatrix, u: &CMatrix, p: f64) -> Result<Self> {
        if rho_d.dim() != 2 || u.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho_d.dim().max(u.dim()),
            });
        }
        let alpha = decompose(rho_d).1.scale(2.0);
        let beta = decompose(&rho_d.conjugate_by(u)).1.scale(2.0);
        Self::new(alpha, beta, p)
    }

    pub fn w_plus(&self) -> f64 {
        (1.0 + self.p) / 2.0
    }

    pub fn w_minus(&self) -> f64 {
        (1.0 - self.p) / 2.0
    }

    /// tr ρ_D² = (1 + a)/2
    pub fn purity(&self) -> f64 {
        (1.0 + self.a) / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitStrategy {
    pub s: BlochVector,
    pub eta_s: f64,
    pub eta_s_u: f64,
}

/// s = (w₊α − w₋β)/|w₊α − w₋β|, η_S = (1 + α·s)/2, η_S^U = (1 + β·s)/2.
pub fn optimal_projective_qubit(analysis: &QubitDetectorAnalysis) -> Result<QubitStrategy> {
    let v = analysis.alpha.scale(analysis.w_plus()) - analysis.beta.scale(analysis.w_minus());
    let s = v
        .normalized(DIRECTION_TOL)
        .ok_or(Error::DegenerateDirection(v.norm()))?;
    Ok(QubitStrategy {
        s,
        eta_s: (1.0 + analysis.alpha.dot(&s)) / 2.0,
        eta_s_u: (1.0 + analysis.beta.dot(&s)) / 2.0,
    })
}

/// |w₊²η_Sη_S̄ − w₋²η_S^Uη_S̄^U − ½(1 − tr ρ_D²)p| for the optimal s.
pub fn identity_a8_residual(analysis: &QubitDetectorAnalysis) -> Result<f64> {
    let strat = optimal_projective_qubit(analysis)?;
    let (wp, wm) = (analysis.w_plus(), analysis.w_minus());
    let lhs = wp * wp * strat.eta_s * (1.0 - strat.eta_s)
        - wm * wm * strat.eta_s_u * (1.0 - strat.eta_s_u);
    let rhs = 0.5 * (1.0 - analysis.purity()) * analysis.p;
    Ok((lhs - rhs).abs())
}

/// 2(1 − tr ρ_D²)/F(ρ_D, Uρ_DU†).
pub fn gamma_slope_prediction(rho_d: &CMatrix, u: &CMatrix) -> Result<f64> {
    let f = fidelity_unitary_pair(rho_d, u)?;
    if f <= FIDELITY_TOL {
        return Err(Error::DegenerateFidelity(f));
    }
    let purity = (rho_d * rho_d).trace().re;
    Ok(2.0 * (1.0 - purity) / f)
}

/// γ of the optimal strategy for a quanton with path bias w₊ − w₋ = p.
pub fn gamma_optimal(rho_d: &CMatrix, u: &CMatrix, p: f64) -> Result<f64> {
    let rho = QubitState::from_bloch(BlochVector::new(p, 0.0, 0.0))?;
    let setup = MziSetup::new(rho, rho_d.clone(), u.clone(), 0.0)?;
    let w = predictability(setup.rho());
    let stats = strategy_stats(&setup, &optimal_strategy(&setup))?;
    Ok(gamma(&stats, w.w_plus, w.w_minus))
}

/// Slope of γ_opt in |p| from the full interferometer pipeline: one-sided
/// quotients γ(h)/h at h = `p_step` and `p_step/2`, Richardson-extrapolated.
pub fn gamma_slope_empirical(rho_d: &CMatrix, u: &CMatrix, p_step: f64) -> Result<f64> {
    if !(1e-6..=1e-2).contains(&p_step) {
        return Err(Error::InvalidParameter(format!(
            "p_step {p_step} outside [1e-6, 1e-2]"
        )));
    }
    let coarse = gamma_optimal(rho_d, u, p_step)? / p_step;
    let fine = gamma_optimal(rho_d, u, p_step / 2.0)? / (p_step / 2.0);
    Ok(2.0 * fine - coarse)
}
