//! Bloch-vector algebra, qubit states and effects, and the binary unsharp
//! observables `{bias·I + v·σ, (1 - bias)·I - v·σ}` shared by the
//! interferometer and the joint-measurability criterion.
//!
//! Random ensembles (all seeded, see [`crate::rng`]):
//! qubit states are uniform in the Bloch ball, detector states are drawn from
//! the Hilbert-Schmidt measure, unitaries from the Haar measure.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{check_density, hermitian_eig, CMatrix, ONE, STRUCTURE_TOL, ZERO};
use crate::rng;

pub const MIN_DETECTOR_DIM: usize = 2;
pub const MAX_DETECTOR_DIM: usize = 8;

/// A real 3-vector in Bloch coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub const ZERO: Self = Self([0.0; 3]);
    pub const X: Self = Self([1.0, 0.0, 0.0]);
    pub const Y: Self = Self([0.0, 1.0, 0.0]);
    pub const Z: Self = Self([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Self([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }

    /// Unit vector along `self`, or `None` when the norm is at most `tol`.
    pub fn normalized(&self, tol: f64) -> Option<Self> {
        let n = self.norm();
        (n > tol).then(|| self.scale(1.0 / n))
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(&self) -> Self {
        let [x, y, z] = self.0.map(f64::abs);
        let pick = if x <= y && x <= z {
            Self::X
        } else if y <= z {
            Self::Y
        } else {
            Self::Z
        };
        self.cross(&pick)
            .normalized(0.0)
            .expect("cross product with least-aligned axis is nonzero")
    }

    /// v·σ as a 2×2 matrix.
    pub fn dot_sigma(&self) -> CMatrix {
        let [x, y, z] = self.0;
        let mut m = CMatrix::zeros(2);
        m[(0, 0)] = Complex64::new(z, 0.0);
        m[(1, 1)] = Complex64::new(-z, 0.0);
        m[(0, 1)] = Complex64::new(x, -y);
        m[(1, 0)] = Complex64::new(x, y);
        m
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for BlochVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<BlochVector> for f64 {
    type Output = BlochVector;
    fn mul(self, v: BlochVector) -> BlochVector {
        v.scale(self)
    }
}

pub fn sigma_x() -> CMatrix {
    BlochVector::X.dot_sigma()
}

pub fn sigma_y() -> CMatrix {
    BlochVector::Y.dot_sigma()
}

pub fn sigma_z() -> CMatrix {
    BlochVector::Z.dot_sigma()
}

/// σ_φ = σ_z cos φ − σ_y sin φ, the observable read out behind a phase φ.
pub fn pauli_phi(phi: f64) -> CMatrix {
    BlochVector::new(0.0, -phi.sin(), phi.cos()).dot_sigma()
}

/// Splits a 2×2 Hermitian matrix as `bias·I + v·σ`.
pub fn decompose(m: &CMatrix) -> (f64, BlochVector) {
    let bias = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let x = m[(0, 1)].re;
    let y = -m[(0, 1)].im;
    let z = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    (bias, BlochVector::new(x, y, z))
}

fn compose(bias: f64, v: &BlochVector) -> CMatrix {
    let mut m = v.dot_sigma();
    m[(0, 0)] += bias;
    m[(1, 1)] += bias;
    m
}

/// A qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    matrix: CMatrix,
}

impl QubitState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: matrix.dim(),
            });
        }
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// `(I + r·σ)/2`; requires |r| ≤ 1 + 1e-10.
    pub fn from_bloch(r: BlochVector) -> Result<Self> {
        if r.norm() > 1.0 + STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {} exceeds 1",
                r.norm()
            )));
        }
        Ok(Self {
            matrix: compose(0.5, &r.scale(0.5)),
        })
    }

    pub fn pure(psi: [Complex64; 2]) -> Result<Self> {
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = [psi[0] / norm, psi[1] / norm];
        Self::new(CMatrix::outer(&v))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMatrix::from_diag(&[0.5, 0.5]),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn bloch(&self) -> BlochVector {
        decompose(&self.matrix).1.scale(2.0)
    }

    /// tr(ρ E).
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.matrix * op).trace().re
    }
}

/// A 2×2 effect, 0 ≤ E ≤ I up to 1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
}

impl Effect {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: matrix.dim(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::InvalidEffect(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        if eig.min_eigenvalue() < -STRUCTURE_TOL || eig.max_eigenvalue() > 1.0 + STRUCTURE_TOL {
            return Err(Error::InvalidEffect(format!(
                "spectrum [{:e}, {:e}] outside [0, 1]",
                eig.min_eigenvalue(),
                eig.max_eigenvalue()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn complement(&self) -> Effect {
        Effect {
            matrix: &CMatrix::identity(2) - &self.matrix,
        }
    }
}

/// `bias·I + b·σ` as an effect.
pub fn bloch_to_matrix(b: BlochVector, bias: f64) -> Result<Effect> {
    Effect::new(compose(bias, &b))
}

pub fn matrix_to_bloch(e: &Effect) -> (f64, BlochVector) {
    decompose(e.matrix())
}

/// Two-outcome qubit observable with first effect `bias·I + vector·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryQubitObservable {
    pub bias: f64,
    pub vector: BlochVector,
}

impl BinaryQubitObservable {
    pub fn new(bias: f64, vector: BlochVector) -> Result<Self> {
        let obs = Self { bias, vector };
        if !obs.is_valid() {
            return Err(Error::InvalidEffect(format!(
                "|v| = {} exceeds min(bias, 1 - bias) with bias {}",
                vector.norm(),
                bias
            )));
        }
        Ok(obs)
    }

    /// Unbiased observable `½I ± v·σ`.
    pub fn unbiased(vector: BlochVector) -> Result<Self> {
        Self::new(0.5, vector)
    }

    /// Both effects are positive iff |v| ≤ min(bias, 1 − bias).
    pub fn is_valid(&self) -> bool {
        self.vector.norm() <= self.bias.min(1.0 - self.bias) + STRUCTURE_TOL
    }

    pub fn effect0(&self) -> CMatrix {
        compose(self.bias, &self.vector)
    }

    pub fn effect1(&self) -> CMatrix {
        compose(1.0 - self.bias, &-self.vector)
    }

    pub fn effects(&self) -> [CMatrix; 2] {
        [self.effect0(), self.effect1()]
    }
}

/// Uniform in the Bloch ball.
pub fn random_qubit_state_with<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    let r = rng.random::<f64>().cbrt();
    let dir = random_direction(rng);
    QubitState::from_bloch(dir.scale(r)).expect("radius within the unit ball")
}

pub fn random_qubit_state(seed: u64) -> QubitState {
    random_qubit_state_with(&mut rng::seeded(seed))
}

pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized(1e-12) {
            return u;
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if !(MIN_DETECTOR_DIM..=MAX_DETECTOR_DIM).contains(&d) {
        return Err(Error::BadDimension(d));
    }
    Ok(())
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let mut g = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = gaussian(rng);
        }
    }
    g
}

/// Hilbert-Schmidt random density matrix G G† / tr(G G†).
pub fn random_detector_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(d)?;
    let g = gaussian_matrix(d, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    Ok(w.scale_real(1.0 / tr).hermitian_part())
}

pub fn random_detector_state(d: usize, seed: u64) -> Result<CMatrix> {
    random_detector_state_with(d, &mut rng::seeded(seed))
}

/// A uniformly random pure state |ψ⟩⟨ψ| in dimension `d`.
pub fn random_pure_state_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(d)?;
    loop {
        let psi: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
            return Ok(CMatrix::outer(&psi));
        }
    }
}

pub fn random_pure_state(d: usize, seed: u64) -> Result<CMatrix> {
    random_pure_state_with(d, &mut rng::seeded(seed))
}

/// Haar unitary: Gram-Schmidt on a complex Gaussian matrix. Gram-Schmidt leaves
/// a positive real diagonal in R, which is the phase fix the Haar measure needs.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(d)?;
    loop {
        let g = gaussian_matrix(d, rng);
        if let Some(q) = gram_schmidt(&g) {
            return Ok(q);
        }
    }
}

pub fn random_unitary(d: usize, seed: u64) -> Result<CMatrix> {
    random_unitary_with(d, &mut rng::seeded(seed))
}

/// Orthonormalises the columns of `g` (modified Gram-Schmidt, two passes).
/// Returns `None` when the columns are numerically dependent.
pub(crate) fn gram_schmidt(g: &CMatrix) -> Option<CMatrix> {
    let d = g.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|k| g.column(k)).collect();
    for k in 0..d {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let (basis, target) = (&done[j], &mut rest[0]);
                let proj: Complex64 = basis
                    .iter()
                    .zip(target.iter())
                    .map(|(b, t)| b.conj() * t)
                    .sum();
                for (t, b) in target.iter_mut().zip(basis) {
                    *t -= proj * b;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for z in cols[k].iter_mut() {
            *z /= norm;
        }
    }
    let mut q = CMatrix::zeros(d);
    for (k, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            q[(i, k)] = *z;
        }
    }
    Some(q)
}

/// exp(−iθσ_x/2) on the first two levels, identity elsewhere.
pub fn x_rotation(d: usize, theta: f64) -> Result<CMatrix> {
    check_dim(d)?;
    let mut u = CMatrix::identity(d);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    u[(0, 0)] = Complex64::new(c, 0.0);
    u[(1, 1)] = Complex64::new(c, 0.0);
    u[(0, 1)] = Complex64::new(0.0, -s);
    u[(1, 0)] = Complex64::new(0.0, -s);
    Ok(u)
}

/// σ_x on the first two levels, identity elsewhere.
pub fn level_flip(d: usize) -> Result<CMatrix> {
    check_dim(d)?;
    let mut u = CMatrix::identity(d);
    u[(0, 0)] = ZERO;
    u[(1, 1)] = ZERO;
    u[(0, 1)] = ONE;
    u[(1, 0)] = ONE;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_coin() {
        let e = bloch_to_matrix(BlochVector::ZERO, 0.5).unwrap();
        assert!(e.matrix().max_abs_diff(&CMatrix::from_diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn sharp_projector() {
        let e = bloch_to_matrix(BlochVector::new(0.0, 0.0, 0.5), 0.5).unwrap();
        assert!(e.matrix().max_abs_diff(&CMatrix::from_diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn invalid_effect_rejected() {
        assert!(matches!(
            bloch_to_matrix(BlochVector::new(0.0, 0.0, 0.6), 0.5),
            Err(Error::InvalidEffect(_))
        ));
        assert!(BinaryQubitObservable::new(0.2, BlochVector::new(0.3, 0.0, 0.0)).is_err());
    }

    #[test]
    fn pauli_phi_special_angles() {
        assert!(pauli_phi(0.0).max_abs_diff(&sigma_z()) < 1e-15);
        let minus_sy = sigma_y().scale_real(-1.0);
        assert!(pauli_phi(std::f64::consts::FRAC_PI_2).max_abs_diff(&minus_sy) < 1e-15);
    }

    #[test]
    fn pauli_phi_spectrum_and_square() {
        for k in 0..64 {
            let phi = -7.0 + 0.23 * k as f64;
            let s = pauli_phi(phi);
            let eig = hermitian_eig(&s).unwrap();
            assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
            assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
            assert!((&s * &s).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        }
    }

    #[test]
    fn state_from_bloch_roundtrip() {
        let r = BlochVector::new(0.3, -0.4, 0.5);
        let s = QubitState::from_bloch(r).unwrap();
        assert!((s.bloch() - r).norm() < 1e-15);
        assert!(QubitState::from_bloch(BlochVector::new(1.0, 0.1, 0.0)).is_err());
    }

    #[test]
    fn bad_dimensions() {
        assert!(matches!(random_unitary(1, 0), Err(Error::BadDimension(1))));
        assert!(matches!(
            random_detector_state(9, 0),
            Err(Error::BadDimension(9))
        ));
    }

    #[test]
    fn seeded_generators_are_deterministic() {
        assert_eq!(
            random_unitary(3, 42).unwrap(),
            random_unitary(3, 42).unwrap()
        );
        assert_ne!(
            random_unitary(3, 42).unwrap(),
            random_unitary(3, 43).unwrap()
        );
        assert_eq!(random_qubit_state(5), random_qubit_state(5));
    }

    #[test]
    fn presets_are_unitary() {
        for d in 2..=8 {
            assert!(x_rotation(d, 0.7).unwrap().is_unitary());
            assert!(level_flip(d).unwrap().is_unitary());
        }
    }
}
