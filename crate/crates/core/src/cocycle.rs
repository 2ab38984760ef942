//! SL(2,R) cocycles over the rotation `x -> x + alpha`: transfer products,
//! Lyapunov exponents, sup-norm growth profiles and conjugation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::arithmetic::Frequency;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Steps between renormalizations of a running product.
pub const RENORM_STRIDE: usize = 32;

/// Step of the Kronecker sequence used for phase grids. It is badly
/// approximable and unrelated to the usual test frequencies.
pub const PHASE_GRID_STEP: f64 = 0.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    /// Counter-clockwise rotation by `turns` full turns.
    pub fn rotation(turns: f64) -> Self {
        let (s, c) = (2.0 * PI * turns).sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Inverse assuming unit determinant.
    pub fn sl2_inverse(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Operator 2-norm from the closed form of the largest singular value.
    pub fn norm(&self) -> f64 {
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0);
        ((s + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// A cocycle `(alpha, A)`: a frequency and a matrix-valued function on the circle.
pub trait Cocycle: Sync {
    fn alpha(&self) -> f64;
    fn matrix(&self, x: f64) -> Mat2;
}

#[inline]
pub(crate) fn orbit_point(x0: f64, alpha: f64, j: usize) -> f64 {
    (x0 + j as f64 * alpha).rem_euclid(1.0)
}

/// `j`-th point of the phase grid.
#[inline]
pub fn grid_phase(x0: f64, j: usize) -> f64 {
    (x0 + j as f64 * PHASE_GRID_STEP).rem_euclid(1.0)
}

/// `S(x) = [[E - lambda v(x), -1], [1, 0]]`.
#[inline]
pub fn schrodinger_step(v: &PotentialSpec, energy: f64, x: f64) -> Mat2 {
    Mat2::new(energy - v.coupled(x), -1.0, 1.0, 0.0)
}

#[derive(Clone, Debug)]
pub struct SchrodingerCocycle {
    potential: PotentialSpec,
    energy: f64,
    alpha: f64,
}

impl SchrodingerCocycle {
    pub fn new(potential: &PotentialSpec, freq: &Frequency, energy: f64) -> Self {
        SchrodingerCocycle::with_alpha(potential, freq.alpha(), energy)
    }

    pub fn with_alpha(potential: &PotentialSpec, alpha: f64, energy: f64) -> Self {
        SchrodingerCocycle {
            potential: potential.clone(),
            energy,
            alpha,
        }
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }
}

impl Cocycle for SchrodingerCocycle {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn matrix(&self, x: f64) -> Mat2 {
        schrodinger_step(&self.potential, self.energy, x)
    }
}

/// `A_n(x) = exp(log_scale) * matrix`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleProduct {
    pub matrix: Mat2,
    pub log_scale: f64,
    pub steps: usize,
    pub base_phase: f64,
}

impl CocycleProduct {
    /// `ln ||A_n(x)||`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.matrix.norm().ln()
    }

    /// The unscaled product; overflows for large growth.
    pub fn to_matrix(&self) -> Mat2 {
        self.matrix.scale(self.log_scale.exp())
    }

    /// `det(A_n)`, which should be 1.
    pub fn det(&self) -> f64 {
        self.matrix.det() * (2.0 * self.log_scale).exp()
    }
}

/// Running product with periodic renormalization.
struct RunningProduct {
    m: Mat2,
    log_scale: f64,
    since: usize,
}

impl RunningProduct {
    fn new() -> Self {
        RunningProduct {
            m: Mat2::IDENTITY,
            log_scale: 0.0,
            since: 0,
        }
    }

    #[inline]
    fn push(&mut self, step: Mat2) {
        self.m = step * self.m;
        self.since += 1;
        if self.since == RENORM_STRIDE {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let s = self.m.norm();
        if s > 0.0 && s.is_finite() {
            self.m = self.m.scale(1.0 / s);
            self.log_scale += s.ln();
        }
        self.since = 0;
    }

    fn log_norm(&self) -> f64 {
        self.log_scale + self.m.norm().ln()
    }
}

/// `A_n(x) = A(x + (n-1) alpha) ... A(x)`.
pub fn product<C: Cocycle + ?Sized>(cocycle: &C, x: f64, n: usize) -> CocycleProduct {
    let alpha = cocycle.alpha();
    let mut run = RunningProduct::new();
    for j in 0..n {
        run.push(cocycle.matrix(orbit_point(x, alpha, j)));
    }
    if n > 0 {
        run.renormalize();
    }
    CocycleProduct {
        matrix: run.m,
        log_scale: run.log_scale,
        steps: n,
        base_phase: x,
    }
}

pub fn cocycle_product(v: &PotentialSpec, freq: &Frequency, energy: f64, x: f64, n: usize) -> CocycleProduct {
    product(&SchrodingerCocycle::new(v, freq, energy), x, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub n_steps: usize,
    pub n_phases: usize,
    /// Standard error of the phase average.
    pub stderr: f64,
}

/// Phase average of `ln ||A_n(x)|| / n` over a Kronecker phase grid.
pub fn lyapunov<C: Cocycle + ?Sized>(cocycle: &C, n_steps: usize, n_phases: usize) -> LyapunovEstimate {
    assert!(n_steps >= 1 && n_phases >= 1);
    let samples: Vec<f64> = (0..n_phases)
        .into_par_iter()
        .map(|j| product(cocycle, grid_phase(0.0, j), n_steps).log_norm() / n_steps as f64)
        .collect();
    let (mean, stderr) = mean_stderr(&samples);
    debug_assert!(mean >= -1e-6, "negative Lyapunov estimate {mean}");
    LyapunovEstimate {
        value: mean.max(0.0),
        n_steps,
        n_phases,
        stderr,
    }
}

pub fn lyapunov_exponent(
    v: &PotentialSpec,
    freq: &Frequency,
    energy: f64,
    n_steps: usize,
    n_phases: usize,
) -> LyapunovEstimate {
    lyapunov(&SchrodingerCocycle::new(v, freq, energy), n_steps, n_phases)
}

pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheckpoint {
    pub s: usize,
    /// `ln max_x ||A_s(x)||` over the phase grid.
    pub sup_log_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub checkpoints: Vec<GrowthCheckpoint>,
    pub phase_count: usize,
}

impl GrowthProfile {
    pub fn max_log(&self) -> f64 {
        self.checkpoints.iter().map(|c| c.sup_log_norm).fold(0.0, f64::max)
    }

    /// Largest recorded `ln ||A_s||_0` over checkpoints with `s <= horizon`.
    pub fn sup_up_to(&self, horizon: usize) -> f64 {
        self.checkpoints
            .iter()
            .filter(|c| c.s <= horizon)
            .map(|c| c.sup_log_norm)
            .fold(0.0, f64::max)
    }

    pub fn s_max(&self) -> usize {
        self.checkpoints.last().map_or(0, |c| c.s)
    }
}

/// Geometrically spaced integers in `[1, s_max]`, always including both ends.
pub fn geometric_checkpoints(s_max: usize, count: usize) -> Vec<usize> {
    let count = count.max(2);
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            ((s_max as f64).powf(t).round() as usize).clamp(1, s_max)
        })
        .collect();
    out.dedup();
    out
}

/// `ln ||A_s||_0` at geometric checkpoints, one pass per phase.
pub fn growth<C: Cocycle + ?Sized>(
    cocycle: &C,
    s_max: usize,
    phase_count: usize,
    checkpoints: usize,
) -> GrowthProfile {
    assert!(s_max >= 1 && phase_count >= 1);
    let marks = geometric_checkpoints(s_max, checkpoints);
    let alpha = cocycle.alpha();
    let per_phase: Vec<Vec<f64>> = (0..phase_count)
        .into_par_iter()
        .map(|j| {
            let x0 = grid_phase(0.0, j);
            let mut run = RunningProduct::new();
            let mut out = Vec::with_capacity(marks.len());
            let mut next = 0;
            for s in 1..=s_max {
                run.push(cocycle.matrix(orbit_point(x0, alpha, s - 1)));
                if marks[next] == s {
                    out.push(run.log_norm());
                    next += 1;
                }
            }
            out
        })
        .collect();
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(i, &s)| GrowthCheckpoint {
            s,
            sup_log_norm: per_phase.iter().map(|p| p[i]).fold(0.0, f64::max),
        })
        .collect();
    GrowthProfile {
        checkpoints,
        phase_count,
    }
}

pub fn growth_profile(
    v: &PotentialSpec,
    freq: &Frequency,
    energy: f64,
    s_max: usize,
    phase_count: usize,
    checkpoints: usize,
) -> GrowthProfile {
    growth(&SchrodingerCocycle::new(v, freq, energy), s_max, phase_count, checkpoints)
}

/// True iff every checkpoint stays below `threshold_log`; also returns the max.
pub fn boundedness_probe(profile: &GrowthProfile, threshold_log: f64) -> (bool, f64) {
    let max_log = profile.max_log();
    (max_log <= threshold_log, max_log)
}

/// A matrix-valued function on the circle used as a conjugacy.
pub trait MatrixField: Sync {
    fn at(&self, x: f64) -> Mat2;
}

impl MatrixField for Mat2 {
    fn at(&self, _x: f64) -> Mat2 {
        *self
    }
}

/// Rotation by `amplitude * sin(2 pi harmonic x)` turns; homotopic to the
/// identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationField {
    pub amplitude: f64,
    pub harmonic: i32,
}

impl MatrixField for RotationField {
    fn at(&self, x: f64) -> Mat2 {
        Mat2::rotation(self.amplitude * (2.0 * PI * self.harmonic as f64 * x).sin())
    }
}

/// Real trigonometric polynomial `c0 + sum_k (a_k cos 2 pi k x + b_k sin 2 pi k x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    /// `(k, a_k, b_k)`.
    pub terms: Vec<(i32, f64, f64)>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().fold(self.constant, |s, &(k, a, b)| {
            let (sn, cs) = (2.0 * PI * k as f64 * x).sin_cos();
            s + a * cs + b * sn
        })
    }
}

/// Matrix field with trigonometric-polynomial entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigMatrixField {
    pub a: TrigPoly,
    pub b: TrigPoly,
    pub c: TrigPoly,
    pub d: TrigPoly,
}

impl MatrixField for TrigMatrixField {
    fn at(&self, x: f64) -> Mat2 {
        Mat2::new(self.a.eval(x), self.b.eval(x), self.c.eval(x), self.d.eval(x))
    }
}

/// `A'(x) = B(x + alpha)^{-1} A(x) B(x)`.
#[derive(Clone, Debug)]
pub struct ConjugatedCocycle<C, B> {
    base: C,
    conj: B,
}

impl<C: Cocycle, B: MatrixField> Cocycle for ConjugatedCocycle<C, B> {
    fn alpha(&self) -> f64 {
        self.base.alpha()
    }

    fn matrix(&self, x: f64) -> Mat2 {
        let alpha = self.base.alpha();
        let shifted = (x + alpha).rem_euclid(1.0);
        self.conj.at(shifted).sl2_inverse() * self.base.matrix(x) * self.conj.at(x)
    }
}

const CONJ_CHECK_POINTS: usize = 256;

/// Conjugates `base` by `conj`, checking `det B = 1` on a grid.
pub fn conjugate_cocycle<C: Cocycle, B: MatrixField>(conj: B, base: C) -> Result<ConjugatedCocycle<C, B>> {
    for i in 0..CONJ_CHECK_POINTS {
        let x = i as f64 / CONJ_CHECK_POINTS as f64;
        let det = conj.at(x).det();
        if (det - 1.0).abs() > 1e-8 {
            return Err(Error::NotUnimodular { x, det });
        }
    }
    Ok(ConjugatedCocycle { base, conj })
}

/// One CSV row of an energy sweep of Lyapunov estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRow {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "L")]
    pub value: f64,
    pub stderr: f64,
}
