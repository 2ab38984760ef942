//! Fibered rotation number by tracking a continuous lift of the direction
//! angle, and the integrated density of states `N = 1 - 2 rho`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::arithmetic::Frequency;
use crate::cocycle::{grid_phase, orbit_point, Cocycle, Mat2, SchrodingerCocycle};
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub rho: f64,
    pub n_steps: usize,
    pub phase_count: usize,
    /// Max minus min of the per-phase estimates.
    pub spread: f64,
}

/// Angle of a vector in turns.
#[inline]
fn turns(v: (f64, f64)) -> f64 {
    v.1.atan2(v.0) / (2.0 * PI)
}

/// Lifted angle of `A e_1`, taken in `(-1/4, 3/4]`. For Schrödinger steps
/// it lies in `(0, 1/2)`, which fixes the lift homotopic to the identity.
#[inline]
fn base_angle(m: &Mat2) -> f64 {
    let t = turns((m.a, m.c));
    if t <= -0.25 {
        t + 1.0
    } else {
        t
    }
}

/// Lift of the action of `A` on directions: `phi` and the result are angles
/// in turns, and the map commutes with `phi -> phi + 1/2`.
pub fn projective_step(a: &Mat2, phi: f64) -> f64 {
    let m = (2.0 * phi).floor();
    let phi0 = phi - m / 2.0;
    m / 2.0 + lift_in_half_turn(a, phi0)
}

/// The lift on `[0, 1/2)`: the image of `e_1` plus the counterclockwise angle
/// from `A e_1` to `A u`, which stays in `[0, 1/2)` because `A` preserves
/// orientation.
#[inline]
fn lift_in_half_turn(a: &Mat2, phi0: f64) -> f64 {
    let (s, c) = (2.0 * PI * phi0).sin_cos();
    let w = a.apply((c, s));
    assert!(w.0 != 0.0 || w.1 != 0.0, "degenerate matrix in projective step");
    let e = (a.a, a.c);
    let cross = e.0 * w.1 - e.1 * w.0;
    let dot = e.0 * w.0 + e.1 * w.1;
    let mut rel = cross.atan2(dot) / (2.0 * PI);
    if rel < -0.25 {
        rel += 1.0;
    }
    base_angle(a) + rel
}

/// Displacement of the lift after `n` steps from `(x, phi = 0)`, kept as an
/// integer count of half turns plus a remainder to avoid drift.
fn displacement<C: Cocycle + ?Sized>(cocycle: &C, x: f64, n: usize) -> f64 {
    let alpha = cocycle.alpha();
    let mut halves: i64 = 0;
    let mut phi0 = 0.0;
    for j in 0..n {
        let next = lift_in_half_turn(&cocycle.matrix(orbit_point(x, alpha, j)), phi0);
        let k = (2.0 * next).floor();
        halves += k as i64;
        phi0 = next - k / 2.0;
    }
    halves as f64 / 2.0 + phi0
}

/// Phase average of the lift displacement per step, folded into `[0, 1/2]`.
pub fn rotation<C: Cocycle + ?Sized>(cocycle: &C, n_steps: usize, phase_count: usize) -> RotationEstimate {
    assert!(n_steps >= 1 && phase_count >= 1);
    let samples: Vec<f64> = (0..phase_count)
        .into_par_iter()
        .map(|j| displacement(cocycle, grid_phase(0.0, j), n_steps) / n_steps as f64)
        .collect();
    let mean = samples.iter().sum::<f64>() / phase_count as f64;
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    RotationEstimate {
        rho: mean.clamp(0.0, 0.5),
        n_steps,
        phase_count,
        spread: hi - lo,
    }
}

pub fn rotation_number(
    v: &PotentialSpec,
    freq: &Frequency,
    energy: f64,
    n_steps: usize,
    phase_count: usize,
) -> RotationEstimate {
    rotation(&SchrodingerCocycle::new(v, freq, energy), n_steps, phase_count)
}

/// `N = 1 - 2 rho`, clamped to `[0, 1]`.
pub fn ids_from_rotation(rho: &RotationEstimate) -> f64 {
    (1.0 - 2.0 * rho.rho).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    #[serde(rename = "E")]
    pub energy: f64,
    pub rho: f64,
    pub spread: f64,
}
