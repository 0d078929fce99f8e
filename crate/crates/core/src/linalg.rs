//! Dense complex matrices for the small dimensions used throughout the crate
//! (quanton ⊗ detector never exceeds 16).
//!
//! The eigensolver is a cyclic complex Jacobi method. For matrices this small
//! it converges in a handful of sweeps and its output is fully determined by
//! the input, which keeps strategies derived from eigenbases reproducible.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max-entry tolerance for Hermiticity and unitarity checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows. Fails unless the rows form a square.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { dim, data })
    }

    /// Real-valued convenience constructor, mainly for tests and presets.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// The projector |v⟩⟨v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, k)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// (A + A†)/2, used to remove rounding asymmetry from products that are
    /// Hermitian in exact arithmetic.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut m = self + &adj;
        m = m.scale_real(0.5);
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= STRUCTURE_TOL
    }

    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= STRUCTURE_TOL
    }

    /// Max deviation of the columns from an orthonormal set.
    pub fn orthonormality_defect(&self) -> f64 {
        self.unitarity_defect()
    }

    /// ⟨v|A|v⟩ for a column vector `v`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..self.dim {
            let mut row = ZERO;
            for j in 0..self.dim {
                row += self[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc
    }

    /// U A U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product on mismatched dimensions");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum on mismatched dimensions");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.dim, rhs.dim,
            "matrix difference on mismatched dimensions"
        );
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    /// V Λ V†.
    pub fn reconstruct(&self) -> CMatrix {
        let lambda = CMatrix::from_diag(&self.eigenvalues);
        lambda.conjugate_by(&self.eigenvectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each eigenvector is normalised so that its first component with modulus
/// above 1e-10 is real and positive.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigDecomposition> {
    let defect = a.hermiticity_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();

    let mut converged = off_diagonal_norm(&m) <= JACOBI_TOL * scale;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&m) <= JACOBI_TOL * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));

    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut eigenvectors = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src);
        if let Some(lead) = vec.iter().find(|z| z.norm() > 1e-10) {
            let phase = lead.conj() / lead.norm();
            for z in vec.iter_mut() {
                *z *= phase;
            }
        }
        for (row, z) in vec.into_iter().enumerate() {
            eigenvectors[(row, col)] = z;
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation annihilating m[p][q]. The rotation is a phase fix on
/// column q followed by the real symmetric rotation of the resulting block.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let n = m.dim();
    let phase = apq / r; // e^{iθ}
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iθ}) on (p, q) times [[c, s], [-s, c]].
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    // M <- M J, V <- V J (columns p, q)
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * j_pp + mkq * j_qp;
        m[(k, q)] = mkp * j_pq + mkq * j_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
    // M <- J† M (rows p, q)
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = j_pp.conj() * mpk + j_qp.conj() * mqk;
        m[(q, k)] = j_pq.conj() * mpk + j_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &CMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// A ⊗ B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = CMatrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out the second tensor factor of dimension `detector_dim`, leaving the
/// quanton (first factor) operator.
pub fn partial_trace_detector(m: &CMatrix, detector_dim: usize) -> Result<CMatrix> {
    if detector_dim == 0 || !m.dim().is_multiple_of(detector_dim) {
        return Err(Error::DimensionMismatch {
            expected: detector_dim,
            found: m.dim(),
        });
    }
    let outer = m.dim() / detector_dim;
    let mut out = CMatrix::zeros(outer);
    for i in 0..outer {
        for j in 0..outer {
            out[(i, j)] = (0..detector_dim)
                .map(|k| m[(i * detector_dim + k, j * detector_dim + k)])
                .sum();
        }
    }
    Ok(out)
}

pub(crate) fn det2(m: &CMatrix) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Validates a density matrix: Hermitian, unit trace, eigenvalues ≥ -1e-10.
pub fn check_density(rho: &CMatrix) -> Result<()> {
    let defect = rho.hermiticity_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > STRUCTURE_TOL {
        return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
    }
    let min = hermitian_eig(rho)?.min_eigenvalue();
    if min < -STRUCTURE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Fidelity between a qubit state and its unitary image, from the closed form
/// valid for 2×2 states: F² = tr(ρ UρU†) + 2 det ρ.
pub fn fidelity_unitary_pair(rho_d: &CMatrix, u: &CMatrix) -> Result<f64> {
    if rho_d.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_d.dim(),
        });
    }
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    check_density(rho_d)?;
    let defect = u.unitarity_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let rotated = rho_d.conjugate_by(u);
    let overlap = (rho_d * &rotated).trace().re;
    let f2 = overlap + 2.0 * det2(rho_d).re;
    Ok(f2.clamp(0.0, 1.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn diagonal_input_gives_permuted_identity() {
        let a = CMatrix::from_diag(&[1.0, -1.0]);
        let eig = hermitian_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 1.0]);
        let expected = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(eig.eigenvectors.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum_and_sign_convention() {
        let eig = hermitian_eig(&sigma_x()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = eig.eigenvectors.column(0);
        let plus = eig.eigenvectors.column(1);
        assert!((minus[0] - c(h, 0.0)).norm() < 1e-14);
        assert!((minus[1] - c(-h, 0.0)).norm() < 1e-14);
        assert!((plus[0] - c(h, 0.0)).norm() < 1e-14);
        assert!((plus[1] - c(h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_entries_reconstruct() {
        let a = CMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.3, -0.7), c(0.0, 1.1)],
            vec![c(0.3, 0.7), c(-1.0, 0.0), c(0.5, 0.5)],
            vec![c(0.0, -1.1), c(0.5, -0.5), c(0.25, 0.0)],
        ])
        .unwrap();
        let eig = hermitian_eig(&a).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&a) < 1e-12);
        assert!(eig.eigenvectors.orthonormality_defect() < 1e-12);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian(_))));
        assert!(matches!(trace_norm(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zero_matrix() {
        let z = CMatrix::zeros(3);
        assert_eq!(trace_norm(&z).unwrap(), 0.0);
        let eig = hermitian_eig(&z).unwrap();
        assert!(eig.eigenvectors.max_abs_diff(&CMatrix::identity(3)) == 0.0);
    }

    #[test]
    fn trace_norm_of_signed_projectors() {
        let a = CMatrix::from_diag(&[1.0, -1.0]);
        assert!((trace_norm(&a).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kron_of_identities() {
        let id = CMatrix::identity(2);
        assert_eq!(kron(&id, &id), CMatrix::identity(4));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = CMatrix::from_rows(vec![
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ])
        .unwrap();
        let rho_d = CMatrix::from_diag(&[0.5, 0.25, 0.25]);
        let reduced = partial_trace_detector(&kron(&rho, &rho_d), 3).unwrap();
        assert!(reduced.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = CMatrix::identity(6);
        assert!(matches!(
            partial_trace_detector(&m, 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_identity_unitary() {
        let rho = CMatrix::from_rows(vec![
            vec![c(0.6, 0.0), c(0.2, 0.1)],
            vec![c(0.2, -0.1), c(0.4, 0.0)],
        ])
        .unwrap();
        let f = fidelity_unitary_pair(&rho, &CMatrix::identity(2)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_half_radius_quarter_turn() {
        // Bloch (0, 0, 1/2) rotated by π/2 about x: a = 1/4, b = 0.
        let rho = CMatrix::from_diag(&[0.75, 0.25]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_rows(vec![
            vec![c(h, 0.0), c(0.0, -h)],
            vec![c(0.0, -h), c(h, 0.0)],
        ])
        .unwrap();
        let f = fidelity_unitary_pair(&rho, &u).unwrap();
        assert!((f - 0.875f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_of_maximally_mixed_is_one() {
        let rho = CMatrix::from_diag(&[0.5, 0.5]);
        let f = fidelity_unitary_pair(&rho, &sigma_x()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_bad_inputs() {
        let not_state = CMatrix::from_diag(&[0.9, 0.3]);
        assert!(matches!(
            fidelity_unitary_pair(&not_state, &sigma_x()),
            Err(Error::InvalidState(_))
        ));
        let rho = CMatrix::from_diag(&[0.5, 0.5]);
        let not_unitary = CMatrix::from_diag(&[1.0, 2.0]);
        assert!(matches!(
            fidelity_unitary_pair(&rho, &not_unitary),
            Err(Error::NotUnitary(_))
        ));
    }
}
