//! Continued fractions, the exponential approximation rate beta, Diophantine
//! checks and eps0-resonances.

mod frequency;
pub mod real;
mod resonance;

pub use frequency::{
    beta_estimate, build_frequency_with_beta, continued_fraction, continued_fraction_rational,
    BetaConstruction, BetaEstimate, Frequency, FrequencyJson, DEFAULT_TAIL_WINDOW,
};
pub use real::Real;
pub use resonance::{
    best_multiple, diophantine_check, find_resonances, torus_distance, DiophantineCheck, Resonance,
    ResonanceRecord,
};

/// Default eps0 as a multiple of the estimated beta.
pub const DEFAULT_EPSILON0_FACTOR: f64 = 10.0;
