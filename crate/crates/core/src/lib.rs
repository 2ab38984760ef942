//! Numerical tools for one-dimensional quasi-periodic Schrödinger operators
//! `(H u)_n = u_{n+1} + u_{n-1} + lambda v(theta + n alpha) u_n`.

pub mod arithmetic;
pub mod cocycle;
pub mod duality;
pub mod error;
pub mod potential;
pub mod rotation;
pub mod spectrum;
pub mod verify;

pub use arithmetic::{Frequency, Real};
pub use cocycle::{Cocycle, Mat2, SchrodingerCocycle};
pub use error::{Error, Result};
pub use potential::{FourierCoefficient, PotentialSpec};
pub use rotation::RotationEstimate;
pub use spectrum::{IDSCurve, SpectralMeasureApprox, TruncatedOperator};
pub use duality::{DualOperator, DualSolution};
pub use verify::{CoveringDiagnostic, ExperimentReport, Verdict};
