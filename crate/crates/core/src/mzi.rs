//! Mach-Zehnder interferometer with a which-path detector.
//!
//! The quanton enters in state ρ, passes a Hadamard beam splitter, a phase
//! shifter `e^{iφσ_z/2}`, and a second Hadamard. Between the first splitter
//! and the phase shifter it couples to a detector (state ρ_D) by the
//! controlled unitary `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`. A projective detector
//! measurement in some basis {|W⟩}, split into outcome sets S and S̄, is the
//! path guess.
//!
//! Conventions:
//! - path weights w± = ⟨±|ρ|±⟩ are taken in the σ_x eigenbasis of the input ρ;
//! - where a ratio V/V₀ appears, the factor `contrast = |tr(Uρ_D)|` is used
//!   instead, which stays defined when V₀ = 0;
//! - φ₀ and δ are reported as 0 when the corresponding modulus is below 1e-12.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    check_density, hermitian_eig, kron, partial_trace_detector, trace_norm, CMatrix, ZERO,
};
use crate::qubit::{
    random_detector_state_with, random_qubit_state_with, random_unitary_with, sigma_x, sigma_z,
    BinaryQubitObservable, BlochVector, Effect, QubitState, MAX_DETECTOR_DIM, MIN_DETECTOR_DIM,
};
use crate::rng;

const PHASE_CUTOFF: f64 = 1e-12;
const EIGEN_SIGN_CUTOFF: f64 = 1e-12;

/// Interferometer configuration: input state, detector state and coupling, phase.
#[derive(Clone, Debug, PartialEq)]
pub struct MziSetup {
    rho: QubitState,
    rho_d: CMatrix,
    unitary: CMatrix,
    phi: f64,
}

impl MziSetup {
    pub fn new(rho: QubitState, rho_d: CMatrix, unitary: CMatrix, phi: f64) -> Result<Self> {
        let d = rho_d.dim();
        if !(MIN_DETECTOR_DIM..=MAX_DETECTOR_DIM).contains(&d) {
            return Err(Error::BadDimension(d));
        }
        if unitary.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: unitary.dim(),
            });
        }
        check_density(&rho_d)?;
        let defect = unitary.unitarity_defect();
        if defect > crate::linalg::STRUCTURE_TOL {
            return Err(Error::NotUnitary(defect));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        Ok(Self {
            rho,
            rho_d,
            unitary,
            phi,
        })
    }

    pub fn rho(&self) -> &QubitState {
        &self.rho
    }

    pub fn rho_d(&self) -> &CMatrix {
        &self.rho_d
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn detector_dim(&self) -> usize {
        self.rho_d.dim()
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self {
            phi,
            ..self.clone()
        }
    }

    pub fn with_rho(&self, rho: QubitState) -> Self {
        Self {
            rho,
            ..self.clone()
        }
    }

    /// U ρ_D U†, the detector state left behind by the quanton on path |1⟩.
    pub fn rotated_detector(&self) -> CMatrix {
        self.rho_d.conjugate_by(&self.unitary).hermitian_part()
    }

    /// w₊ρ_D − w₋Uρ_DU†, whose eigenbasis carries the best path guess.
    pub fn guess_operator(&self) -> CMatrix {
        let w = predictability(&self.rho);
        let a = self.rho_d.scale_real(w.w_plus);
        let b = self.rotated_detector().scale_real(w.w_minus);
        (&a - &b).hermitian_part()
    }
}

/// Detector measurement basis (columns) and the outcome set S guessing path |0⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    basis: CMatrix,
    in_s: Vec<bool>,
}

impl Strategy {
    pub fn new(basis: CMatrix, subset: impl IntoIterator<Item = usize>) -> Result<Self> {
        let d = basis.dim();
        let defect = basis.orthonormality_defect();
        if defect > crate::linalg::STRUCTURE_TOL {
            return Err(Error::InvalidStrategy(format!(
                "basis columns not orthonormal (defect {defect:e})"
            )));
        }
        let mut in_s = vec![false; d];
        for k in subset {
            if k >= d {
                return Err(Error::InvalidStrategy(format!(
                    "outcome index {k} out of range for dimension {d}"
                )));
            }
            in_s[k] = true;
        }
        Ok(Self { basis, in_s })
    }

    /// Measurement in the computational basis.
    pub fn computational(d: usize, subset: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(CMatrix::identity(d), subset)
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn detector_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn subset(&self) -> Vec<usize> {
        (0..self.in_s.len()).filter(|&k| self.in_s[k]).collect()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.in_s[k]
    }

    /// Same basis, S and S̄ exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            in_s: self.in_s.iter().map(|b| !b).collect(),
        }
    }

    /// Σ_{W∈S} |W⟩⟨W| (or over S̄ when `in_s` is false).
    pub fn projector(&self, in_s: bool) -> CMatrix {
        let d = self.detector_dim();
        let mut p = CMatrix::zeros(d);
        for k in (0..d).filter(|&k| self.in_s[k] == in_s) {
            let proj = CMatrix::outer(&self.basis.column(k));
            p = &p + &proj;
        }
        p
    }
}

/// Outcome-set probabilities for the detector states ρ_D and Uρ_DU†.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyStats {
    pub eta_s: f64,
    pub eta_sbar: f64,
    pub eta_s_u: f64,
    pub eta_sbar_u: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathWeights {
    pub predictability: f64,
    pub w_plus: f64,
    pub w_minus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorVisibility {
    pub visibility: f64,
    pub delta: f64,
    pub contrast: f64,
}

/// Every duality quantity of one (setup, strategy) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityReport {
    pub v0: f64,
    pub predictability: f64,
    pub visibility: f64,
    pub phi0: f64,
    pub delta: f64,
    pub contrast: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub d_s: f64,
    pub d_max: f64,
    pub gamma_s: f64,
    /// D_S² + (1 − P²)·contrast²
    pub lhs_thm2: f64,
    /// 1 − γ_S²
    pub rhs_thm2: f64,
    /// D² + (1 − P²)·contrast²
    pub lhs_jsve: f64,
}

/// A four-outcome qubit POVM indexed `[i][j]`: `i` is the output port, `j = 0`
/// means the detector outcome fell in S.
#[derive(Clone, Debug, PartialEq)]
pub struct JointObservable {
    pub effects: [[Effect; 2]; 2],
}

impl JointObservable {
    pub fn effect(&self, i: usize, j: usize) -> &CMatrix {
        self.effects[i][j].matrix()
    }

    /// Σ_j E_ij
    pub fn port_marginal(&self, i: usize) -> CMatrix {
        self.effect(i, 0) + self.effect(i, 1)
    }

    /// Σ_i E_ij
    pub fn guess_marginal(&self, j: usize) -> CMatrix {
        self.effect(0, j) + self.effect(1, j)
    }

    pub fn total(&self) -> CMatrix {
        &self.port_marginal(0) + &self.port_marginal(1)
    }

    /// Born-rule probabilities tr(ρ E_ij).
    pub fn probabilities(&self, rho: &QubitState) -> [[f64; 2]; 2] {
        let mut p = [[0.0; 2]; 2];
        for (i, row) in p.iter_mut().enumerate() {
            for (j, pij) in row.iter_mut().enumerate() {
                *pij = rho.expectation(self.effect(i, j)).max(0.0);
            }
        }
        p
    }
}

fn plus_minus() -> ([Complex64; 2], [Complex64; 2]) {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    ([h, h], [h, -h])
}

fn sandwich(bra: &[Complex64; 2], m: &CMatrix, ket: &[Complex64; 2]) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            acc += bra[i].conj() * m[(i, j)] * ket[j];
        }
    }
    acc
}

/// V₀ = 2|⟨+|ρ|−⟩| and the phase φ₀ = arg⟨−|ρ|+⟩ at which it is attained.
pub fn a_priori_visibility(rho: &QubitState) -> (f64, f64) {
    let (plus, minus) = plus_minus();
    let coherence = sandwich(&minus, rho.matrix(), &plus);
    let v0 = 2.0 * coherence.norm();
    let phi0 = if v0 < PHASE_CUTOFF {
        0.0
    } else {
        coherence.arg()
    };
    (v0, phi0)
}

/// Path weights w± = ⟨±|ρ|±⟩ and P = |w₊ − w₋|.
pub fn predictability(rho: &QubitState) -> PathWeights {
    let (plus, minus) = plus_minus();
    let w_plus = sandwich(&plus, rho.matrix(), &plus).re;
    let w_minus = sandwich(&minus, rho.matrix(), &minus).re;
    PathWeights {
        predictability: (w_plus - w_minus).abs(),
        w_plus,
        w_minus,
    }
}

/// Fringe visibility with the detector coupled: V = V₀·|tr(Uρ_D)|.
pub fn visibility_with_detector(setup: &MziSetup) -> DetectorVisibility {
    let (v0, _) = a_priori_visibility(&setup.rho);
    let overlap = (&setup.rho_d * &setup.unitary.adjoint()).trace();
    let contrast = overlap.norm().min(1.0);
    let delta = if contrast < PHASE_CUTOFF {
        0.0
    } else {
        overlap.arg()
    };
    DetectorVisibility {
        visibility: v0 * contrast,
        delta,
        contrast,
    }
}

fn check_strategy_dim(setup: &MziSetup, strategy: &Strategy) -> Result<()> {
    if strategy.detector_dim() != setup.detector_dim() {
        return Err(Error::DimensionMismatch {
            expected: setup.detector_dim(),
            found: strategy.detector_dim(),
        });
    }
    Ok(())
}

pub fn strategy_stats(setup: &MziSetup, strategy: &Strategy) -> Result<StrategyStats> {
    check_strategy_dim(setup, strategy)?;
    let rotated = setup.rotated_detector();
    let (mut eta_s, mut eta_sbar, mut eta_s_u, mut eta_sbar_u) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..strategy.detector_dim() {
        let w = strategy.basis.column(k);
        let p = setup.rho_d.expectation(&w).re.max(0.0);
        let pu = rotated.expectation(&w).re.max(0.0);
        if strategy.in_s[k] {
            eta_s += p;
            eta_s_u += pu;
        } else {
            eta_sbar += p;
            eta_sbar_u += pu;
        }
    }
    Ok(StrategyStats {
        eta_s: eta_s.min(1.0),
        eta_sbar: eta_sbar.min(1.0),
        eta_s_u: eta_s_u.min(1.0),
        eta_sbar_u: eta_sbar_u.min(1.0),
    })
}

/// D_S = 2w₊η_S + 2w₋η_S̄^U − 1; the probability of a correct path guess is (1 + D_S)/2.
pub fn distinguishability(stats: &StrategyStats, w_plus: f64, w_minus: f64) -> f64 {
    2.0 * w_plus * stats.eta_s + 2.0 * w_minus * stats.eta_sbar_u - 1.0
}

/// Eigenbasis of w₊ρ_D − w₋Uρ_DU† with S the strictly positive eigenvalues.
/// Eigenvalues within 1e-12 of zero go to S̄.
pub fn optimal_strategy(setup: &MziSetup) -> Strategy {
    let eig = hermitian_eig(&setup.guess_operator())
        .expect("guess operator is Hermitian by construction");
    let in_s = eig
        .eigenvalues
        .iter()
        .map(|&l| l > EIGEN_SIGN_CUTOFF)
        .collect();
    Strategy {
        basis: eig.eigenvectors,
        in_s,
    }
}

/// D = ‖w₊ρ_D − w₋Uρ_DU†‖₁, the best achievable D_S.
pub fn max_distinguishability(setup: &MziSetup) -> f64 {
    trace_norm(&setup.guess_operator()).expect("guess operator is Hermitian by construction")
}

/// Largest D_S over all 2^d ways of splitting the columns of `basis` into S and S̄.
pub fn best_partition_distinguishability(setup: &MziSetup, basis: &CMatrix) -> Result<f64> {
    let d = setup.detector_dim();
    let w = predictability(&setup.rho);
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << d) {
        let strategy = Strategy::new(basis.clone(), (0..d).filter(|k| mask & (1 << k) != 0))?;
        let stats = strategy_stats(setup, &strategy)?;
        best = best.max(distinguishability(&stats, w.w_plus, w.w_minus));
    }
    Ok(best)
}

/// The output-port observable N: `N₀ = ½(I + contrast·σ_{δ+φ})`.
pub fn povm_n(setup: &MziSetup) -> BinaryQubitObservable {
    let vis = visibility_with_detector(setup);
    let angle = vis.delta + setup.phi;
    let vector = BlochVector::new(0.0, -angle.sin(), angle.cos()).scale(vis.contrast / 2.0);
    BinaryQubitObservable { bias: 0.5, vector }
}

/// The path-guess observable M: `M₀ = ½(η_S + η_S^U)I + ½(η_S − η_S^U)σ_x`.
pub fn povm_m(setup: &MziSetup, strategy: &Strategy) -> Result<BinaryQubitObservable> {
    let stats = strategy_stats(setup, strategy)?;
    Ok(BinaryQubitObservable {
        bias: 0.5 * (stats.eta_s + stats.eta_s_u),
        vector: BlochVector::new(0.5 * (stats.eta_s - stats.eta_s_u), 0.0, 0.0),
    })
}

fn hadamard() -> CMatrix {
    (&sigma_x() + &sigma_z()).scale_real(FRAC_1_SQRT_2)
}

fn phase_shifter(phi: f64) -> CMatrix {
    let mut p = CMatrix::zeros(2);
    p[(0, 0)] = Complex64::from_polar(1.0, phi / 2.0);
    p[(1, 1)] = Complex64::from_polar(1.0, -phi / 2.0);
    p
}

/// Full quanton⊗detector evolution (H ⊗ I)·U_QD·(ΦH ⊗ I).
pub fn interferometer_unitary(setup: &MziSetup) -> CMatrix {
    let d = setup.detector_dim();
    let id_d = CMatrix::identity(d);
    let h = hadamard();
    let p0 = CMatrix::from_diag(&[1.0, 0.0]);
    let p1 = CMatrix::from_diag(&[0.0, 1.0]);
    let controlled = &kron(&p0, &id_d) + &kron(&p1, &setup.unitary);
    let first = kron(&(&phase_shifter(setup.phi) * &h), &id_d);
    let last = kron(&h, &id_d);
    &(&last * &controlled) * &first
}

/// The four-outcome observable actually measured:
/// `E_ij = tr_D[(I ⊗ ρ_D) 𝒰† (|i⟩⟨i| ⊗ P_j) 𝒰]` with P₀ = Σ_{W∈S}|W⟩⟨W|, P₁ = I − P₀.
pub fn joint_observable(setup: &MziSetup, strategy: &Strategy) -> Result<JointObservable> {
    check_strategy_dim(setup, strategy)?;
    let d = setup.detector_dim();
    let evolution = interferometer_unitary(setup);
    let evolution_adj = evolution.adjoint();
    let weight = kron(&CMatrix::identity(2), &setup.rho_d);
    let ports = [
        CMatrix::from_diag(&[1.0, 0.0]),
        CMatrix::from_diag(&[0.0, 1.0]),
    ];
    let guesses = [strategy.projector(true), strategy.projector(false)];

    let build = |i: usize, j: usize| -> Result<Effect> {
        let heisenberg = &(&evolution_adj * &kron(&ports[i], &guesses[j])) * &evolution;
        let reduced = partial_trace_detector(&(&weight * &heisenberg), d)?;
        Effect::new(reduced.hermitian_part())
    };
    Ok(JointObservable {
        effects: [[build(0, 0)?, build(0, 1)?], [build(1, 0)?, build(1, 1)?]],
    })
}

/// Outcome counts of `shots` independent runs, indexed like the effects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeCounts {
    pub counts: [[u64; 2]; 2],
    pub probabilities: [[f64; 2]; 2],
    pub shots: u64,
}

impl OutcomeCounts {
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        self.counts[i][j] as f64 / self.shots as f64
    }

    /// (count − n·p)/√(n·p·(1 − p)); zero for a deterministic outcome that matched.
    pub fn z_score(&self, i: usize, j: usize) -> f64 {
        let n = self.shots as f64;
        let p = self.probabilities[i][j];
        let expected = n * p;
        let sd = (n * p * (1.0 - p)).sqrt();
        let dev = self.counts[i][j] as f64 - expected;
        if sd > 0.0 {
            dev / sd
        } else if dev.abs() < 0.5 {
            0.0
        } else {
            f64::INFINITY.copysign(dev)
        }
    }
}

/// Born-rule sampling of the joint observable.
pub fn sample_outcomes(
    setup: &MziSetup,
    strategy: &Strategy,
    shots: u64,
    seed: u64,
) -> Result<OutcomeCounts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let joint = joint_observable(setup, strategy)?;
    let probabilities = joint.probabilities(&setup.rho);
    let flat = [
        probabilities[0][0],
        probabilities[0][1],
        probabilities[1][0],
        probabilities[1][1],
    ];
    let total: f64 = flat.iter().sum();
    let last_possible = flat.iter().rposition(|&p| p > 0.0).unwrap_or(3);

    let mut rng = rng::seeded(seed);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = last_possible;
        for (k, &p) in flat.iter().enumerate().take(last_possible) {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            if u < acc {
                outcome = k;
                break;
            }
        }
        counts[outcome] += 1;
    }
    Ok(OutcomeCounts {
        counts: [[counts[0], counts[1]], [counts[2], counts[3]]],
        probabilities,
        shots,
    })
}

/// γ_S = 2|w₊√(η_S η_S̄) − w₋√(η_S^U η_S̄^U)|.
pub fn gamma(stats: &StrategyStats, w_plus: f64, w_minus: f64) -> f64 {
    let a = w_plus * (stats.eta_s * stats.eta_sbar).sqrt();
    let b = w_minus * (stats.eta_s_u * stats.eta_sbar_u).sqrt();
    2.0 * (a - b).abs()
}

/// √(η_S η_S^U) + √(η_S̄ η_S̄^U), the joint-measurability bound on the contrast.
pub fn overlap_bound(stats: &StrategyStats) -> f64 {
    (stats.eta_s * stats.eta_s_u).sqrt() + (stats.eta_sbar * stats.eta_sbar_u).sqrt()
}

/// Residual of D_S² + (√(η_Sη_S^U) + √(η_S̄η_S̄^U))²(1 − P²) = 1 − γ_S².
pub fn gamma_identity_residual(stats: &StrategyStats, weights: &PathWeights) -> f64 {
    let d_s = distinguishability(stats, weights.w_plus, weights.w_minus);
    let g = gamma(stats, weights.w_plus, weights.w_minus);
    let bound = overlap_bound(stats);
    let p2 = weights.predictability * weights.predictability;
    (d_s * d_s + bound * bound * (1.0 - p2) - (1.0 - g * g)).abs()
}

pub fn duality_report(setup: &MziSetup, strategy: &Strategy) -> Result<DualityReport> {
    let (v0, phi0) = a_priori_visibility(&setup.rho);
    let weights = predictability(&setup.rho);
    let vis = visibility_with_detector(setup);
    let stats = strategy_stats(setup, strategy)?;
    let d_s = distinguishability(&stats, weights.w_plus, weights.w_minus);
    let d_max = max_distinguishability(setup);
    let gamma_s = gamma(&stats, weights.w_plus, weights.w_minus);
    let wave =
        (1.0 - weights.predictability * weights.predictability) * vis.contrast * vis.contrast;
    Ok(DualityReport {
        v0,
        predictability: weights.predictability,
        visibility: vis.visibility,
        phi0,
        delta: vis.delta,
        contrast: vis.contrast,
        w_plus: weights.w_plus,
        w_minus: weights.w_minus,
        d_s,
        d_max,
        gamma_s,
        lhs_thm2: d_s * d_s + wave,
        rhs_thm2: 1.0 - gamma_s * gamma_s,
        lhs_jsve: d_max * d_max + wave,
    })
}

/// Random setup: Bloch-ball quanton, Hilbert-Schmidt detector state, Haar
/// coupling, uniform phase.
pub fn random_setup_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<MziSetup> {
    let rho = random_qubit_state_with(rng);
    let rho_d = random_detector_state_with(d, rng)?;
    let unitary = random_unitary_with(d, rng)?;
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    MziSetup::new(rho, rho_d, unitary, phi)
}

/// Haar-random basis with each outcome placed in S by a fair coin.
pub fn random_strategy_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Strategy> {
    let basis = random_unitary_with(d, rng)?;
    let subset: Vec<usize> = (0..d).filter(|_| rng.random::<bool>()).collect();
    Strategy::new(basis, subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::level_flip;

    fn ground(d: usize) -> CMatrix {
        let mut diag = vec![0.0; d];
        diag[0] = 1.0;
        CMatrix::from_diag(&diag)
    }

    fn bloch_state(x: f64, y: f64, z: f64) -> QubitState {
        QubitState::from_bloch(BlochVector::new(x, y, z)).unwrap()
    }

    fn setup(rho: QubitState, rho_d: CMatrix, u: CMatrix, phi: f64) -> MziSetup {
        MziSetup::new(rho, rho_d, u, phi).unwrap()
    }

    #[test]
    fn a_priori_visibility_presets() {
        let (v0, _) = a_priori_visibility(&bloch_state(0.0, 0.0, 1.0));
        assert!((v0 - 1.0).abs() < 1e-15);
        let (v0, phi0) = a_priori_visibility(&QubitState::maximally_mixed());
        assert_eq!((v0, phi0), (0.0, 0.0));
    }

    #[test]
    fn predictability_presets() {
        let plus = bloch_state(1.0, 0.0, 0.0);
        assert!((predictability(&plus).predictability - 1.0).abs() < 1e-15);
        assert!(a_priori_visibility(&plus).0 < 1e-15);
        let zero = bloch_state(0.0, 0.0, 1.0);
        assert!(predictability(&zero).predictability < 1e-15);
    }

    #[test]
    fn visibility_without_coupling() {
        let s = setup(
            bloch_state(0.2, 0.3, 0.5),
            ground(2),
            CMatrix::identity(2),
            0.4,
        );
        let vis = visibility_with_detector(&s);
        let (v0, _) = a_priori_visibility(s.rho());
        assert!((vis.visibility - v0).abs() < 1e-15);
        assert_eq!(vis.delta, 0.0);
    }

    #[test]
    fn orthogonal_detector_states_kill_fringes() {
        let s = setup(
            bloch_state(0.0, 0.0, 1.0),
            ground(2),
            level_flip(2).unwrap(),
            0.0,
        );
        assert_eq!(visibility_with_detector(&s).visibility, 0.0);
    }

    #[test]
    fn all_and_empty_subsets() {
        let s = setup(
            bloch_state(0.1, 0.2, 0.3),
            ground(3),
            level_flip(3).unwrap(),
            0.0,
        );
        let all = strategy_stats(&s, &Strategy::computational(3, 0..3).unwrap()).unwrap();
        assert_eq!((all.eta_s, all.eta_s_u), (1.0, 1.0));
        let none = strategy_stats(&s, &Strategy::computational(3, []).unwrap()).unwrap();
        assert_eq!((none.eta_s, none.eta_s_u), (0.0, 0.0));
    }

    #[test]
    fn strategy_dimension_mismatch() {
        let s = setup(
            bloch_state(0.1, 0.2, 0.3),
            ground(3),
            CMatrix::identity(3),
            0.0,
        );
        let strat = Strategy::computational(2, [0]).unwrap();
        assert!(matches!(
            strategy_stats(&s, &strat),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Strategy::computational(2, [2]).is_err());
    }

    #[test]
    fn distinguishability_without_coupling_is_path_bias() {
        let s = setup(
            bloch_state(0.4, 0.0, 0.2),
            ground(2),
            CMatrix::identity(2),
            0.0,
        );
        let w = predictability(s.rho());
        let stats = strategy_stats(&s, &Strategy::computational(2, 0..2).unwrap()).unwrap();
        assert!(
            (distinguishability(&stats, w.w_plus, w.w_minus) - (2.0 * w.w_plus - 1.0)).abs()
                < 1e-15
        );
    }

    #[test]
    fn full_distinguishability_for_orthogonal_records() {
        let s = setup(
            bloch_state(0.0, 0.0, 1.0),
            ground(2),
            level_flip(2).unwrap(),
            0.0,
        );
        let w = predictability(s.rho());
        let stats = strategy_stats(&s, &Strategy::computational(2, [0]).unwrap()).unwrap();
        assert!((distinguishability(&stats, w.w_plus, w.w_minus) - 1.0).abs() < 1e-15);
        assert!((max_distinguishability(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_strategy_without_coupling_picks_support() {
        let s = setup(
            bloch_state(0.5, 0.0, 0.0),
            ground(3),
            CMatrix::identity(3),
            0.0,
        );
        let opt = optimal_strategy(&s);
        let stats = strategy_stats(&s, &opt).unwrap();
        assert!((stats.eta_s - 1.0).abs() < 1e-12);
        assert_eq!(opt.subset().len(), 1);
        let p = predictability(s.rho()).predictability;
        assert!((max_distinguishability(&s) - p).abs() < 1e-12);
    }

    #[test]
    fn povm_n_presets() {
        let s = setup(
            bloch_state(0.0, 0.0, 1.0),
            ground(2),
            CMatrix::identity(2),
            0.0,
        );
        let n = povm_n(&s);
        assert!(n.effect0().max_abs_diff(&CMatrix::from_diag(&[1.0, 0.0])) < 1e-15);
        let s = setup(
            bloch_state(0.0, 0.0, 1.0),
            ground(2),
            level_flip(2).unwrap(),
            0.3,
        );
        assert!(
            povm_n(&s)
                .effect0()
                .max_abs_diff(&CMatrix::from_diag(&[0.5, 0.5]))
                < 1e-15
        );
    }

    #[test]
    fn povm_m_presets() {
        let s = setup(
            bloch_state(0.1, 0.0, 0.2),
            ground(2),
            level_flip(2).unwrap(),
            0.0,
        );
        let m = povm_m(&s, &Strategy::computational(2, 0..2).unwrap()).unwrap();
        assert!(m.effect0().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let rho_d = CMatrix::from_diag(&[0.7, 0.3]);
        let s = setup(bloch_state(0.1, 0.0, 0.2), rho_d, CMatrix::identity(2), 0.0);
        let m = povm_m(&s, &Strategy::computational(2, [0]).unwrap()).unwrap();
        assert!(
            m.effect0()
                .max_abs_diff(&CMatrix::identity(2).scale_real(0.7))
                < 1e-15
        );
    }

    #[test]
    fn joint_observable_with_all_outcomes_in_s() {
        let mut rng = rng::seeded(3);
        let s = random_setup_with(3, &mut rng).unwrap();
        let j = joint_observable(&s, &Strategy::computational(3, 0..3).unwrap()).unwrap();
        assert!(j.effect(0, 1).max_abs() < 1e-14);
        assert!(j.effect(1, 1).max_abs() < 1e-14);
    }

    #[test]
    fn decoupled_detector_gives_product_effects() {
        // U = I: E_ij = N_i · η_j with η_0 = η_S, η_1 = η_S̄.
        let rho_d = CMatrix::from_diag(&[0.6, 0.4]);
        let s = setup(
            bloch_state(0.3, -0.2, 0.4),
            rho_d,
            CMatrix::identity(2),
            0.0,
        );
        let strat = Strategy::computational(2, [0]).unwrap();
        let j = joint_observable(&s, &strat).unwrap();
        let n = povm_n(&s).effects();
        let eta = [0.6, 0.4];
        for (i, ni) in n.iter().enumerate() {
            for (jj, &e) in eta.iter().enumerate() {
                let expected = ni.scale_real(e);
                assert!(j.effect(i, jj).max_abs_diff(&expected) < 1e-14);
            }
        }
    }

    #[test]
    fn deterministic_outcome_sampled_exactly() {
        // ρ = |0⟩⟨0|, U = I, φ = 0: port 0 with certainty; all detector outcomes in S.
        let s = setup(
            bloch_state(0.0, 0.0, 1.0),
            ground(2),
            CMatrix::identity(2),
            0.0,
        );
        let strat = Strategy::computational(2, 0..2).unwrap();
        let counts = sample_outcomes(&s, &strat, 1000, 9).unwrap();
        assert_eq!(counts.counts, [[1000, 0], [0, 0]]);
        assert_eq!(counts.z_score(0, 0), 0.0);
        assert!(sample_outcomes(&s, &strat, 0, 9).is_err());
    }

    #[test]
    fn sample_counts_total() {
        let mut rng = rng::seeded(11);
        let s = random_setup_with(2, &mut rng).unwrap();
        let strat = random_strategy_with(2, &mut rng).unwrap();
        let c = sample_outcomes(&s, &strat, 12345, 1).unwrap();
        assert_eq!(c.counts.iter().flatten().sum::<u64>(), 12345);
        assert_eq!(c, sample_outcomes(&s, &strat, 12345, 1).unwrap());
    }

    #[test]
    fn gamma_degenerate_and_symmetric() {
        let stats = StrategyStats {
            eta_s: 1.0,
            eta_sbar: 0.0,
            eta_s_u: 0.0,
            eta_sbar_u: 1.0,
        };
        assert_eq!(gamma(&stats, 0.3, 0.7), 0.0);
        let stats = StrategyStats {
            eta_s: 0.35,
            eta_sbar: 0.65,
            eta_s_u: 0.35,
            eta_sbar_u: 0.65,
        };
        assert_eq!(gamma(&stats, 0.5, 0.5), 0.0);
    }

    #[test]
    fn pure_detector_without_coupling_saturates() {
        let s = setup(
            bloch_state(0.6, 0.0, 0.3),
            ground(2),
            CMatrix::identity(2),
            0.0,
        );
        let r = duality_report(&s, &optimal_strategy(&s)).unwrap();
        assert!((r.lhs_thm2 - 1.0).abs() < 1e-12);
        assert!((r.rhs_thm2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_setups() {
        let rho = QubitState::maximally_mixed();
        assert!(matches!(
            MziSetup::new(rho.clone(), ground(2), CMatrix::from_diag(&[1.0, 2.0]), 0.0),
            Err(Error::NotUnitary(_))
        ));
        assert!(matches!(
            MziSetup::new(
                rho.clone(),
                CMatrix::from_diag(&[0.5, 0.6]),
                CMatrix::identity(2),
                0.0
            ),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            MziSetup::new(rho.clone(), ground(2), CMatrix::identity(3), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MziSetup::new(rho, CMatrix::from_diag(&[1.0]), CMatrix::identity(1), 0.0),
            Err(Error::BadDimension(1))
        ));
    }
}
