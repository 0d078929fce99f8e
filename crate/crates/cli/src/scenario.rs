//! JSON scenario files.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major nested
//! arrays. A minimal file:
//!
//! ```json
//! {
//!   "id": "pure-detector",
//!   "quanton": { "bloch": [0.0, 0.0, 1.0] },
//!   "detector": { "dim": 2, "state": "ground", "unitary": "identity" },
//!   "phi": 0.0,
//!   "strategy": "optimal",
//!   "seed": 1
//! }
//! ```

use std::path::Path;

use complementarity::linalg::CMatrix;
use complementarity::mzi::{optimal_strategy, MziSetup, Strategy};
use complementarity::qubit::{level_flip, x_rotation, BlochVector, QubitState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub id: String,
    pub quanton: QuantonSpec,
    pub detector: DetectorSpec,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub strategy: StrategySpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum QuantonSpec {
    Bloch([f64; 3]),
    Matrix(MatrixJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub dim: usize,
    pub state: StateSpec,
    pub unitary: UnitarySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Preset(StatePreset),
    Explicit(ExplicitMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatePreset {
    /// |0⟩⟨0|
    Ground,
    /// I/d
    MaximallyMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMatrix {
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Preset(UnitaryPreset),
    Parametrised(UnitaryParametrised),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitaryPreset {
    Identity,
    /// σ_x on the first two levels.
    PauliX,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum UnitaryParametrised {
    /// exp(−iθσ_x/2) on the first two levels.
    XRotation {
        theta: f64,
    },
    Matrix(MatrixJson),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategySpec {
    #[default]
    #[serde(with = "optimal_tag")]
    Optimal,
    Explicit {
        basis: BasisSpec,
        subset: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Computational(ComputationalTag),
    Matrix(MatrixJson),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputationalTag {
    Computational,
}

/// `"optimal"` as a bare string for the unit variant of an untagged enum.
mod optimal_tag {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("optimal")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "optimal" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("unknown strategy {tag:?}")))
        }
    }
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix, CliError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    Ok(CMatrix::from_rows(rows)?)
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// A scenario turned into the objects the library works with.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub setup: MziSetup,
    pub strategy: Strategy,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Scenario(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let d = self.detector.dim;
        let rho = match &self.quanton {
            QuantonSpec::Bloch([x, y, z]) => QubitState::from_bloch(BlochVector::new(*x, *y, *z))?,
            QuantonSpec::Matrix(m) => QubitState::new(matrix_from_json(m)?)?,
        };
        let rho_d = match &self.detector.state {
            StateSpec::Preset(StatePreset::Ground) => {
                let mut diag = vec![0.0; d];
                if let Some(first) = diag.first_mut() {
                    *first = 1.0;
                }
                CMatrix::from_diag(&diag)
            }
            StateSpec::Preset(StatePreset::MaximallyMixed) => {
                CMatrix::identity(d).scale_real(1.0 / d.max(1) as f64)
            }
            StateSpec::Explicit(e) => matrix_from_json(&e.matrix)?,
        };
        let unitary = match &self.detector.unitary {
            UnitarySpec::Preset(UnitaryPreset::Identity) => CMatrix::identity(d),
            UnitarySpec::Preset(UnitaryPreset::PauliX) => level_flip(d)?,
            UnitarySpec::Parametrised(UnitaryParametrised::XRotation { theta }) => {
                x_rotation(d, *theta)?
            }
            UnitarySpec::Parametrised(UnitaryParametrised::Matrix(m)) => matrix_from_json(m)?,
        };
        for (what, m) in [("detector state", &rho_d), ("detector unitary", &unitary)] {
            if m.dim() != d {
                return Err(CliError::Scenario(format!(
                    "{what} is {0}x{0} but detector.dim is {d}",
                    m.dim()
                )));
            }
        }
        let setup = MziSetup::new(rho, rho_d, unitary, self.phi)?;
        let strategy = match &self.strategy {
            StrategySpec::Optimal => optimal_strategy(&setup),
            StrategySpec::Explicit { basis, subset } => {
                let basis = match basis {
                    BasisSpec::Computational(_) => CMatrix::identity(d),
                    BasisSpec::Matrix(m) => matrix_from_json(m)?,
                };
                Strategy::new(basis, subset.iter().copied())?
            }
        };
        Ok(Resolved { setup, strategy })
    }

    /// The same scenario with every preset replaced by its explicit matrix.
    /// The strategy is kept symbolic when it is `optimal`.
    pub fn explicit(&self) -> Result<Self, CliError> {
        let resolved = self.resolve()?;
        let setup = &resolved.setup;
        let strategy = match &self.strategy {
            StrategySpec::Optimal => StrategySpec::Optimal,
            StrategySpec::Explicit { .. } => StrategySpec::Explicit {
                basis: BasisSpec::Matrix(matrix_to_json(resolved.strategy.basis())),
                subset: resolved.strategy.subset(),
            },
        };
        Ok(Self {
            id: self.id.clone(),
            quanton: QuantonSpec::Matrix(matrix_to_json(setup.rho().matrix())),
            detector: DetectorSpec {
                dim: setup.detector_dim(),
                state: StateSpec::Explicit(ExplicitMatrix {
                    matrix: matrix_to_json(setup.rho_d()),
                }),
                unitary: UnitarySpec::Parametrised(UnitaryParametrised::Matrix(matrix_to_json(
                    setup.unitary(),
                ))),
            },
            phi: self.phi,
            strategy,
            seed: self.seed,
        })
    }
}
