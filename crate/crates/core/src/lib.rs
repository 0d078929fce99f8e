//! Which-path interferometry as a joint measurement of two unsharp qubit
//! observables.
//!
//! A Mach-Zehnder interferometer with a which-path detector reads out two
//! noisy observables of the quanton at once: a smeared σ_φ (which output port
//! fires, carrying the fringe visibility) and a smeared σ_x (the detector's
//! path guess, carrying the distinguishability). This crate builds that
//! interferometer ([`mzi`]), decides joint measurability of such observable
//! pairs in closed form ([`jointmeas`]), evaluates the resulting duality
//! inequality, and checks each closed form against an independent
//! brute-force route ([`verify`]).
//!
//! ```
//! use complementarity::jointmeas::{jm_criterion, JMInstance};
//! use complementarity::qubit::BlochVector;
//!
//! // Two sharp, mutually unbiased observables can never be measured together.
//! let inst = JMInstance::new(
//!     0.5,
//!     BlochVector::new(0.5, 0.0, 0.0),
//!     BlochVector::new(0.0, 0.0, 0.5),
//! )
//! .unwrap();
//! let verdict = jm_criterion(&inst).unwrap();
//! assert!(!verdict.measurable);
//! assert!((verdict.margin + 1.0).abs() < 1e-12);
//! ```

pub mod appendix;
pub mod error;
pub mod jointmeas;
pub mod linalg;
pub mod mzi;
pub mod qubit;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
