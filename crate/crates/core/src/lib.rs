//! Exact A∞ and bimodule algebra over ℤ[q]/(q^{N+1}), integer homology, sign bookkeeping,
//! and numerical toy models for Cauchy–Riemann operators on strips and a Morse continuation problem.

pub mod ainfty;
pub mod cc2;
pub mod error;
pub mod fixtures;
pub mod graded;
pub mod homology;
pub mod io;
pub mod morse_lab;
pub mod numeric;
pub mod profile;
pub mod sign_lab;
pub mod strip_lab;

pub use ainfty::{AInfty, Bimodule, GenId, LinearFunctor, ObjId, OpEntry, PairSpace, Violation};
pub use error::{KitError, Result};
pub use graded::{Element, Generator, GradedBasis, QSeries, DEFAULT_TRUNC};
pub use homology::{HomologyGroup, IntChainComplex, IntMatrix};
pub use morse_lab::{CollarProfile, DriftReport, FlowSpec};
pub use profile::Profile;
pub use strip_lab::{StripOptions, StripProblem, WeightVector};
