//! The book under `book/src`, one module per chapter, and the README, so that `cargo test`
//! compiles and runs every snippet as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/qubits.md")]
pub mod qubits {}

#[doc = include_str!("../../../book/src/interferometer.md")]
pub mod interferometer {}

#[doc = include_str!("../../../book/src/joint-measurability.md")]
pub mod joint_measurability {}

#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}

#[doc = include_str!("../../../book/src/qubit-detectors.md")]
pub mod qubit_detectors {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
