//! Joint measurability of an unbiased observable `N₀ = ½I + n·σ` and a biased
//! one `M₀ = m₀I + m·σ` with n ⊥ m.
//!
//! Every four-outcome POVM with marginals N and M has the form
//!
//! ```text
//! E_ij = x_ij I + y_ij·σ
//! x_ij = ¼ + ¼(−1)^j (2m₀ − 1) + (−1)^{i+j} x/2
//! y_ij = ½[(−1)^j m + (−1)^i n + (−1)^{i+j} y]
//! ```
//!
//! for a free scalar `x` and vector `y`, and positivity of the four effects is
//! the system of ball constraints
//!
//! ```text
//! |m + n + y| ≤ m₀ + x        |m − n + y| ≤ 1 − m₀ − x
//! |m − n − y| ≤ m₀ − x        |m + n − y| ≤ 1 − m₀ + x
//! ```
//!
//! The pair is jointly measurable iff √(m₀² − m²) + √((1 − m₀)² − m²) ≥ 2n
//! ([`jm_criterion`]). [`feasibility_oracle`] decides the ball system directly
//! by exhaustive search, without using that closed form.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix};
use crate::mzi::{povm_m, povm_n, MziSetup, Strategy};
use crate::qubit::{random_direction, BlochVector};

const ORTHOGONALITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
/// Criterion and positivity decisions are made with this slack.
pub const DECISION_TOL: f64 = 1e-10;

/// The observable pair (m₀, m, n).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JMInstance {
    m0: f64,
    m_vec: BlochVector,
    n_vec: BlochVector,
}

impl JMInstance {
    pub fn new(m0: f64, m_vec: BlochVector, n_vec: BlochVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&m0) {
            return Err(Error::InvalidInstance(format!("m0 = {m0} outside [0, 1]")));
        }
        if m_vec.dot(&n_vec).abs() > ORTHOGONALITY_TOL {
            return Err(Error::InvalidInstance(format!(
                "m·n = {:e} is not zero",
                m_vec.dot(&n_vec)
            )));
        }
        if n_vec.norm() > 0.5 + NORM_TOL {
            return Err(Error::InvalidInstance(format!(
                "|n| = {} > 1/2",
                n_vec.norm()
            )));
        }
        if m_vec.norm() > m0.min(1.0 - m0) + NORM_TOL {
            return Err(Error::InvalidInstance(format!(
                "|m| = {} > min(m0, 1 - m0) = {}",
                m_vec.norm(),
                m0.min(1.0 - m0)
            )));
        }
        Ok(Self { m0, m_vec, n_vec })
    }

    /// Instance with m along x̂ and n along ẑ.
    pub fn from_magnitudes(m0: f64, m: f64, n: f64) -> Result<Self> {
        if m < 0.0 || n < 0.0 {
            return Err(Error::InvalidInstance("negative magnitude".into()));
        }
        Self::new(
            m0,
            BlochVector::new(m, 0.0, 0.0),
            BlochVector::new(0.0, 0.0, n),
        )
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn m_vec(&self) -> BlochVector {
        self.m_vec
    }

    pub fn n_vec(&self) -> BlochVector {
        self.n_vec
    }

    pub fn m(&self) -> f64 {
        self.m_vec.norm()
    }

    pub fn n(&self) -> f64 {
        self.n_vec.norm()
    }

    /// √(m₀² − m²) + √((1 − m₀)² − m²) − 2n
    pub fn margin(&self) -> f64 {
        let (a, b) = self.root_terms();
        a + b - 2.0 * self.n()
    }

    fn root_terms(&self) -> (f64, f64) {
        let m2 = self.m_vec.dot(&self.m_vec);
        let a = (self.m0 * self.m0 - m2).max(0.0).sqrt();
        let b = ((1.0 - self.m0) * (1.0 - self.m0) - m2).max(0.0).sqrt();
        (a, b)
    }

    /// Applies the same rotation to m and n.
    pub fn rotated(&self, rotation: &[[f64; 3]; 3]) -> Result<Self> {
        let apply = |v: BlochVector| {
            BlochVector(std::array::from_fn(|r| {
                (0..3).map(|c| rotation[r][c] * v.0[c]).sum()
            }))
        };
        Self::new(self.m0, apply(self.m_vec), apply(self.n_vec))
    }
}

/// A candidate joint observable fixed by the free parameters (x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct JointCandidate {
    pub x: f64,
    pub y_vec: BlochVector,
    /// (x_ij, y_ij) indexed `[i][j]`.
    pub coefficients: [[(f64, BlochVector); 2]; 2],
}

impl JointCandidate {
    pub fn new(inst: &JMInstance, x: f64, y_vec: BlochVector) -> Self {
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let coefficients = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let xij = 0.25 + 0.25 * sign(j) * (2.0 * inst.m0 - 1.0) + sign(i + j) * x / 2.0;
                let yij =
                    (sign(j) * inst.m_vec + sign(i) * inst.n_vec + sign(i + j) * y_vec).scale(0.5);
                (xij, yij)
            })
        });
        Self {
            x,
            y_vec,
            coefficients,
        }
    }

    /// E_ij = x_ij I + y_ij·σ
    pub fn effect(&self, i: usize, j: usize) -> CMatrix {
        let (xij, yij) = self.coefficients[i][j];
        let mut m = yij.dot_sigma();
        m[(0, 0)] += xij;
        m[(1, 1)] += xij;
        m
    }

    pub fn effects(&self) -> [[CMatrix; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.effect(i, j)))
    }

    /// Smallest eigenvalue over the four effect matrices.
    pub fn min_eigenvalue(&self) -> f64 {
        self.effects()
            .iter()
            .flatten()
            .map(|e| {
                hermitian_eig(e)
                    .expect("effects are Hermitian by construction")
                    .min_eigenvalue()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Positivity decided from the spectra of the effect matrices.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -DECISION_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JMVerdict {
    pub measurable: bool,
    pub margin: f64,
    pub witness: Option<JointCandidate>,
}

pub fn jm_criterion(inst: &JMInstance) -> Result<JMVerdict> {
    let margin = inst.margin();
    if !margin.is_finite() {
        return Err(Error::InvalidInstance("non-finite margin".into()));
    }
    let measurable = margin >= -DECISION_TOL;
    let witness = if measurable {
        Some(construct_joint(inst)?)
    } else {
        None
    };
    Ok(JMVerdict {
        measurable,
        margin,
        witness,
    })
}

/// Explicit joint observable: x = 0 and y along n with length
/// min{√(m₀² − m²) − n, n + √((1 − m₀)² − m²)}. When n = 0, y = 0.
pub fn construct_joint(inst: &JMInstance) -> Result<JointCandidate> {
    let margin = inst.margin();
    if margin < -DECISION_TOL {
        return Err(Error::NotMeasurable(margin));
    }
    let n = inst.n();
    let (a, b) = inst.root_terms();
    let y = (a - n).min(n + b);
    let y_vec = match inst.n_vec.normalized(0.0) {
        Some(dir) => dir.scale(y),
        None => BlochVector::ZERO,
    };
    Ok(JointCandidate::new(inst, 0.0, y_vec))
}

/// Left and right sides of the four ball constraints, ordered as in the module docs.
pub fn ball_constraints(inst: &JMInstance, x: f64, y: &BlochVector) -> [(f64, f64); 4] {
    let m = inst.m_vec;
    let n = inst.n_vec;
    let m0 = inst.m0;
    [
        ((m + n + *y).norm(), m0 + x),
        ((m - n + *y).norm(), 1.0 - m0 - x),
        ((m - n - *y).norm(), m0 - x),
        ((m + n - *y).norm(), 1.0 - m0 + x),
    ]
}

/// The four ball constraints hold within 1e-10.
pub fn positivity_check(cand: &JointCandidate, inst: &JMInstance) -> bool {
    ball_constraints(inst, cand.x, &cand.y_vec)
        .iter()
        .all(|&(lhs, rhs)| lhs <= rhs + DECISION_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Search x and y over the plane spanned by m and n.
    Full,
    /// Fix x = 0 and search y along n only.
    Reduced,
}

/// Cells this much finer than `resolution` that can be neither excluded nor
/// confirmed are counted as feasible.
pub const TANGENCY_FLOOR: f64 = 1e-3;

/// Decides the ball system by exhaustive branch-and-bound.
///
/// FULL searches x ∈ [−min(m₀, 1−m₀), min(m₀, 1−m₀)] and y = y₁e₁ + y₂e₂ in the
/// m–n plane with |y_k| ≤ m + n + 1. REDUCED searches x = 0, y = t·n̂ with
/// |t| ≤ m + n + 1. Each cell is discarded when a Lipschitz bound shows some
/// constraint fails everywhere in it, accepted when its center satisfies all
/// constraints exactly, and split otherwise. A cell whose edge falls below
/// `resolution·TANGENCY_FLOOR` without being decided counts as feasible, so the
/// verdict can only err inside a thin band around exact tangency.
pub fn feasibility_oracle(inst: &JMInstance, mode: OracleMode, resolution: f64) -> Result<bool> {
    if !(resolution > 0.0 && resolution <= 0.05) {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} outside (0, 0.05]"
        )));
    }
    let plane = PlaneProblem::new(inst);
    let floor = resolution * TANGENCY_FLOOR;
    let reach = inst.m() + inst.n() + 1.0;
    Ok(match mode {
        OracleMode::Full => {
            let x_max = inst.m0.min(1.0 - inst.m0);
            // Split x into `resolution`-wide slabs so workers share the grid.
            let slabs = ((2.0 * x_max / resolution).ceil() as usize).max(1);
            let width = 2.0 * x_max / slabs as f64;
            (0..slabs).into_par_iter().any(|k| {
                let lo = -x_max + width * k as f64;
                plane.search(
                    Cell {
                        center: [lo + width / 2.0, 0.0, 0.0],
                        half: [width / 2.0, reach, reach],
                    },
                    floor,
                    3,
                )
            })
        }
        OracleMode::Reduced => plane.search(
            Cell {
                center: [0.0, 0.0, 0.0],
                half: [0.0, reach, 0.0],
            },
            floor,
            1,
        ),
    })
}

/// The ball system in coordinates of the m–n plane: y = y₁e₁ + y₂e₂ with
/// e₁ = n̂ (or any unit vector when n = 0) and e₂ ⊥ e₁ spanning m.
struct PlaneProblem {
    centers: [[f64; 2]; 4],
    base: [f64; 4],
    x_sign: [f64; 4],
}

#[derive(Clone, Copy)]
struct Cell {
    center: [f64; 3],
    half: [f64; 3],
}

impl PlaneProblem {
    fn new(inst: &JMInstance) -> Self {
        let e1 = inst
            .n_vec
            .normalized(0.0)
            .or_else(|| inst.m_vec.normalized(0.0))
            .unwrap_or(BlochVector::Z);
        let e2 = {
            let rest = inst.m_vec - e1.scale(inst.m_vec.dot(&e1));
            rest.normalized(0.0).unwrap_or_else(|| e1.any_orthogonal())
        };
        let proj = |v: BlochVector| [v.dot(&e1), v.dot(&e2)];
        let m = inst.m_vec;
        let n = inst.n_vec;
        let m0 = inst.m0;
        // |y − c_k| ≤ base_k + x_sign_k·x
        Self {
            centers: [proj(-(m + n)), proj(n - m), proj(m - n), proj(m + n)],
            base: [m0, 1.0 - m0, m0, 1.0 - m0],
            x_sign: [1.0, -1.0, -1.0, 1.0],
        }
    }

    /// Max over k of |y − c_k| − r_k(x) at the point.
    fn worst_violation(&self, p: &[f64; 3]) -> f64 {
        (0..4)
            .map(|k| {
                let dy = [p[1] - self.centers[k][0], p[2] - self.centers[k][1]];
                (dy[0] * dy[0] + dy[1] * dy[1]).sqrt() - (self.base[k] + self.x_sign[k] * p[0])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Depth-first branch-and-bound. `free` is the number of searched axes
    /// (3 = x, y₁, y₂; 1 = y₁ only).
    fn search(&self, root: Cell, floor: f64, free: usize) -> bool {
        let axes: &[usize] = if free == 3 { &[0, 1, 2] } else { &[1] };
        let mut stack = vec![root];
        while let Some(cell) = stack.pop() {
            let violation = self.worst_violation(&cell.center);
            if violation <= 0.0 {
                return true;
            }
            let lipschitz = cell.half[0] + (cell.half[1].powi(2) + cell.half[2].powi(2)).sqrt();
            if violation > lipschitz {
                continue;
            }
            let edge = axes.iter().map(|&a| 2.0 * cell.half[a]).fold(0.0, f64::max);
            if edge <= floor {
                return true;
            }
            // Split every searched axis whose edge is at least half the longest.
            let split: Vec<usize> = axes
                .iter()
                .copied()
                .filter(|&a| 2.0 * cell.half[a] >= edge / 2.0)
                .collect();
            for mask in 0..(1usize << split.len()) {
                let mut child = cell;
                for (bit, &a) in split.iter().enumerate() {
                    child.half[a] = cell.half[a] / 2.0;
                    let dir = if mask & (1 << bit) != 0 { 1.0 } else { -1.0 };
                    child.center[a] = cell.center[a] + dir * child.half[a];
                }
                stack.push(child);
            }
        }
        false
    }
}

/// The instance formed by the setup's N and M observables.
pub fn instance_from_setup(setup: &MziSetup, strategy: &Strategy) -> Result<JMInstance> {
    let n = povm_n(setup);
    let m = povm_m(setup, strategy)?;
    JMInstance::new(m.bias.clamp(0.0, 1.0), m.vector, n.vector)
}

/// Random instance: m₀ ~ U(0, 1), |m| ~ U(0, min(m₀, 1 − m₀)), |n| ~ U(0, ½),
/// orthogonal random directions.
pub fn random_instance_with<R: Rng + ?Sized>(rng: &mut R) -> JMInstance {
    let m0: f64 = rng.random();
    let m = rng.random::<f64>() * m0.min(1.0 - m0);
    let n = rng.random::<f64>() * 0.5;
    let m_dir = random_direction(rng);
    let n_dir = loop {
        let raw = random_direction(rng);
        if let Some(u) = (raw - m_dir.scale(raw.dot(&m_dir))).normalized(1e-6) {
            break u;
        }
    };
    JMInstance::new(m0, m_dir.scale(m), n_dir.scale(n)).expect("sampled inside the valid region")
}
