//! The Aubry dual operator `(H^ u)_n = sum_k lambda v^_k u_{n-k} + 2 cos 2 pi (theta + n alpha) u_n`,
//! comparison of dual spectra, and bounded dual solutions normalized at site 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::arithmetic::Frequency;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::spectrum::linalg::{inverse_iteration, SymBanded, JITTER};
use crate::spectrum::{phase_grid, spectrum_indicator, truncate, TruncatedOperator};

/// A dual section is a banded truncated operator centered at site 0.
pub type DualOperator = TruncatedOperator;

/// Window used while searching for the phase.
pub const SEARCH_WINDOW: usize = 161;
/// Weight of the excess `max |u_k| - 1` in the candidate score.
pub const BOUND_PENALTY: f64 = 1.0;
const NORMALIZATION_FLOOR: f64 = 1e-8;
const REFINED_CANDIDATES: usize = 8;
const MEMBERSHIP_VOLUME: usize = 1000;
const MEMBERSHIP_PHASES: usize = 8;

fn first_site(l: usize) -> i64 {
    -(((l - 1) / 2) as i64)
}

/// Dirichlet section of the dual operator on `L` sites centered at 0. The
/// potential must have real Fourier coefficients so the section is real
/// symmetric.
pub fn dual_operator(v: &PotentialSpec, freq: &Frequency, theta: f64, l: usize) -> Result<DualOperator> {
    dual_section(v, freq.alpha(), theta, l)
}

fn dual_section(v: &PotentialSpec, alpha: f64, theta: f64, l: usize) -> Result<DualOperator> {
    let d = v.degree();
    if l < 2 * d + 1 || l < 2 {
        return Err(Error::InvalidArgument(format!("dual section needs L >= {}", (2 * d + 1).max(2))));
    }
    for c in v.coeffs() {
        if c.im != 0.0 {
            return Err(Error::ComplexDual { k: c.k });
        }
    }
    let lambda = v.lambda();
    let first = first_site(l);
    let mean = lambda * v.coeff(0).0;
    let diag = (0..l)
        .map(|i| 2.0 * (2.0 * PI * (theta + (first + i as i64) as f64 * alpha)).cos() + mean)
        .collect();
    let bands = (1..=d)
        .map(|k| vec![lambda * v.coeff(k as i32).0; l - k])
        .collect();
    Ok(TruncatedOperator {
        matrix: SymBanded { diag, bands },
        theta,
        first_site: first,
    })
}

/// Fraction of each section length treated as boundary layer.
const EDGE_LAYER: f64 = 0.1;
/// Eigenvectors with more weight than this in the boundary layer are edge states.
const EDGE_WEIGHT_MAX: f64 = 0.5;

/// Eigenvalues of a Dirichlet section with the edge states removed. Edge
/// states live in spectral gaps and are artifacts of the truncation; they are
/// recognized by the weight of their eigenvector in the outer layers.
pub fn bulk_eigenvalues(op: &TruncatedOperator) -> Vec<f64> {
    let a = &op.matrix;
    let n = a.size();
    let w = ((n as f64 * EDGE_LAYER) as usize).max(1);
    a.eigenvalues()
        .into_iter()
        .filter(|&e| {
            let x = inverse_iteration(a, e + JITTER, 2);
            let edge: f64 = x[..w].iter().chain(&x[n - w..]).map(|t| t * t).sum();
            edge <= EDGE_WEIGHT_MAX
        })
        .collect()
}

fn union_of(sets: Vec<Vec<f64>>) -> Vec<f64> {
    let mut out: Vec<f64> = sets.into_iter().flatten().collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Distance from `e` to a sorted set.
fn nearest_gap(sorted: &[f64], e: f64) -> f64 {
    let i = sorted.partition_point(|&x| x < e);
    let mut best = f64::INFINITY;
    if i < sorted.len() {
        best = best.min(sorted[i] - e);
    }
    if i > 0 {
        best = best.min(e - sorted[i - 1]);
    }
    best
}

pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one = |x: &[f64], y: &[f64]| x.iter().map(|&e| nearest_gap(y, e)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

/// Hausdorff distance between the bulk eigenvalues of direct and dual
/// sections over the midpoint phase grid.
pub fn dual_spectrum_compare(v: &PotentialSpec, freq: &Frequency, l: usize, phase_count: usize) -> Result<f64> {
    dual_spectrum_compare_offset(v, freq, l, phase_count, 0.0)
}

/// As [`dual_spectrum_compare`] with every phase shifted by `offset`.
pub fn dual_spectrum_compare_offset(
    v: &PotentialSpec,
    freq: &Frequency,
    l: usize,
    phase_count: usize,
    offset: f64,
) -> Result<f64> {
    let thetas: Vec<f64> = phase_grid(phase_count).into_iter().map(|t| t + offset).collect();
    let duals = thetas
        .iter()
        .map(|&t| dual_operator(v, freq, t, l))
        .collect::<Result<Vec<_>>>()?;
    let direct: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&t| bulk_eigenvalues(&truncate(v, freq, t, l)))
        .collect();
    let dual: Vec<Vec<f64>> = duals.par_iter().map(bulk_eigenvalues).collect();
    Ok(hausdorff(&union_of(direct), &union_of(dual)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "theta")]
    pub theta_star: f64,
    pub residual: f64,
    pub max_abs: f64,
    /// `u_{-K} .. u_K` with `u_0 = 1`.
    pub coeffs: Vec<f64>,
    /// Eigenvalue of the section whose eigenvector was returned.
    pub eigenvalue: f64,
    pub score: f64,
    /// `(theta, score)` of the other refined candidates, best first.
    pub runners_up: Vec<(f64, f64)>,
}

impl DualSolution {
    pub fn half_width(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `u_k` for `|k| <= K`.
    pub fn coeff(&self, k: i64) -> Option<f64> {
        let i = k + self.half_width() as i64;
        (i >= 0).then(|| self.coeffs.get(i as usize).cloned()).flatten()
    }
}

/// The eigenvalue whose eigenvector has the largest weight at site 0, with
/// that weight.
fn center_eigen(op: &DualOperator) -> (f64, f64) {
    let row = op.row_of(0).expect("dual sections contain site 0");
    let (vals, comps) = op.matrix.eigen_rows(&[row]);
    let (j, w) = comps[0]
        .iter()
        .enumerate()
        .map(|(j, c)| (j, c.abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    (vals[j], w)
}

/// Eigenvalue of the dual section at `theta` whose eigenvector has the
/// largest weight at site 0, with that weight.
pub fn center_eigenvalue(v: &PotentialSpec, freq: &Frequency, theta: f64, l: usize) -> Result<(f64, f64)> {
    Ok(center_eigen(&dual_operator(v, freq, theta, l)?))
}

/// Bounded solution of `H^ u = E u` with `u_0 = 1` over a searched phase.
pub fn dual_bounded_solution(
    v: &PotentialSpec,
    freq: &Frequency,
    energy: f64,
    l: usize,
    theta_grid_size: usize,
) -> Result<DualSolution> {
    let member = spectrum_indicator(v, freq, energy, MEMBERSHIP_VOLUME, MEMBERSHIP_PHASES, None);
    if !member.in_spectrum {
        return Err(Error::NotInSpectrum {
            energy,
            distance: member.distance,
        });
    }
    let alpha = freq.alpha();
    let lc = l.min(SEARCH_WINDOW) | 1;
    let probe = |theta: f64| -> Result<(f64, f64)> { Ok(center_eigen(&dual_section(v, alpha, theta, lc)?)) };

    let g = theta_grid_size.max(8);
    let coarse: Vec<(f64, f64, f64)> = (0..g)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / g as f64;
            probe(t).map(|(e, w)| (t, e - energy, w))
        })
        .collect::<Result<_>>()?;
    if coarse.iter().all(|c| c.2 < NORMALIZATION_FLOOR) {
        return Err(Error::DegenerateNormalization);
    }

    // Sign changes of e*(theta) - E bracket phases; refine each by bisection.
    let mut seeds: Vec<f64> = Vec::new();
    for i in 0..g {
        let (a, b) = (coarse[i], coarse[(i + 1) % g]);
        if a.1 == 0.0 {
            seeds.push(a.0);
        } else if a.1.signum() != b.1.signum() {
            let hi = if i + 1 == g { 1.0 } else { b.0 };
            seeds.push(bisect(&probe, energy, a.0, hi, a.1)?);
        }
    }
    if seeds.is_empty() {
        let best = coarse.iter().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
        seeds.push(best.0);
    }
    let mut ranked: Vec<(f64, f64)> = seeds
        .iter()
        .map(|&t| probe(t).map(|(e, _)| (t, (e - energy).abs())))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    ranked.truncate(REFINED_CANDIDATES);

    let mut finals: Vec<DualSolution> = ranked
        .par_iter()
        .map(|&(t, _)| finish(v, alpha, energy, t.rem_euclid(1.0), l))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if finals.is_empty() {
        return Err(Error::DegenerateNormalization);
    }
    finals.sort_by(|a, b| a.score.total_cmp(&b.score));
    let runners_up = finals[1..].iter().map(|s| (s.theta_star, s.score)).collect();
    let mut best = finals.swap_remove(0);
    best.runners_up = runners_up;
    Ok(best)
}

/// Bisection on the sign of `e*(theta) - E` in `[lo, hi]`.
fn bisect(
    probe: &dyn Fn(f64) -> Result<(f64, f64)>,
    energy: f64,
    mut lo: f64,
    mut hi: f64,
    g_lo: f64,
) -> Result<f64> {
    let positive_lo = g_lo > 0.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = probe(mid)?.0 - energy;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == positive_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full-volume eigenvector at `theta`, normalized at site 0, or `None` when
/// the site-0 entry vanishes.
fn finish(v: &PotentialSpec, alpha: f64, energy: f64, theta: f64, l: usize) -> Result<Option<DualSolution>> {
    let op = dual_section(v, alpha, theta, l)?;
    let x = inverse_iteration(&op.matrix, energy, 4);
    let row = op.row_of(0).unwrap();
    if x[row].abs() < NORMALIZATION_FLOOR {
        return Ok(None);
    }
    let scale = x[row];
    let coeffs: Vec<f64> = x.iter().map(|c| c / scale).collect();
    let m = &op.matrix;
    let n = m.size();
    let d = m.band_width();
    let apply = |i: usize| -> f64 {
        (i.saturating_sub(d)..=(i + d).min(n - 1)).map(|j| m.entry(i, j) * coeffs[j]).sum()
    };
    let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
    let eigenvalue = (0..n).map(|i| coeffs[i] * apply(i)).sum::<f64>() / norm2;
    let residual = (d..n - d)
        .map(|i| (apply(i) - energy * coeffs[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let max_abs = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let score = (eigenvalue - energy).abs() + BOUND_PENALTY * (max_abs - 1.0).max(0.0);
    Ok(Some(DualSolution {
        energy,
        theta_star: theta,
        residual,
        max_abs,
        coeffs,
        eigenvalue,
        score,
        runners_up: Vec::new(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::FourierCoefficient;
    use crate::spectrum::sample_spectrum;

    fn golden() -> Frequency {
        Frequency::golden(30)
    }

    #[test]
    fn amo_dual_is_tridiagonal() {
        let f = golden();
        let op = dual_operator(&PotentialSpec::amo(0.7), &f, 0.2, 9).unwrap();
        assert_eq!(op.band_width(), 1);
        assert_eq!(op.first_site, -4);
        assert!(op.matrix.bands[0].iter().all(|&b| (b - 0.7).abs() < 1e-15));
        for (i, &d) in op.diagonal().iter().enumerate() {
            let n = i as f64 - 4.0;
            assert!((d - 2.0 * (2.0 * PI * (0.2 + n * f.alpha())).cos()).abs() < 1e-12);
        }
        let zero = dual_operator(&PotentialSpec::amo(0.0), &f, 0.2, 9).unwrap();
        assert!(zero.matrix.bands[0].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn degree_two_is_pentadiagonal_and_symmetric() {
        let v = PotentialSpec::new(
            1.5,
            vec![
                FourierCoefficient { k: -2, re: 0.25, im: 0.0 },
                FourierCoefficient { k: -1, re: 1.0, im: 0.0 },
                FourierCoefficient { k: 1, re: 1.0, im: 0.0 },
                FourierCoefficient { k: 2, re: 0.25, im: 0.0 },
            ],
        )
        .unwrap();
        let op = dual_operator(&v, &golden(), 0.1, 11).unwrap();
        assert_eq!(op.band_width(), 2);
        let m = op.matrix.to_dense();
        assert_eq!(m, m.transpose());
        assert_eq!(m[(0, 2)], 1.5 * 0.25);
        assert_eq!(m[(0, 3)], 0.0);
        assert!(dual_operator(&v, &golden(), 0.1, 4).is_err());
    }

    #[test]
    fn complex_coefficients_rejected() {
        let v = PotentialSpec::new(
            1.0,
            vec![
                FourierCoefficient { k: -1, re: 0.0, im: 1.0 },
                FourierCoefficient { k: 1, re: 0.0, im: -1.0 },
            ],
        )
        .unwrap();
        assert!(matches!(dual_operator(&v, &golden(), 0.0, 11), Err(Error::ComplexDual { .. })));
    }

    #[test]
    fn amo_self_duality() {
        let f = golden();
        let lambda = 0.5;
        let l = 201;
        let op = dual_operator(&PotentialSpec::amo(lambda), &f, 0.33, l).unwrap();
        // Direct section of coupling 1/lambda on the same sites, built by hand.
        let direct = SymBanded {
            diag: (0..l)
                .map(|i| {
                    let n = i as f64 - 100.0;
                    2.0 / lambda * (2.0 * PI * (0.33 + n * f.alpha())).cos()
                })
                .collect(),
            bands: vec![vec![1.0; l - 1]],
        };
        for (a, b) in op.eigenvalues().iter().zip(direct.eigenvalues()) {
            assert!((a - lambda * b).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_spectra_match() {
        let f = golden();
        assert!(dual_spectrum_compare(&PotentialSpec::zero(), &f, 1000, 16).unwrap() <= 0.05);
        let v = PotentialSpec::amo(0.5);
        let h0 = dual_spectrum_compare(&v, &f, 1000, 16).unwrap();
        assert!(h0 <= 0.05, "{h0}");
        let h1 = dual_spectrum_compare_offset(&v, &f, 1000, 16, 0.013).unwrap();
        assert!((h0 - h1).abs() <= 0.02, "{h0} vs {h1}");
    }

    #[test]
    fn free_dual_solution_is_delta() {
        let e = 2.0 * (2.0 * PI * 0.2).cos();
        let s = dual_bounded_solution(&PotentialSpec::zero(), &golden(), e, 101, 512).unwrap();
        assert_eq!(s.coeff(0), Some(1.0));
        assert!((s.max_abs - 1.0).abs() < 1e-9);
        assert!(s.residual < 1e-9);
        assert!(s.coeffs.iter().enumerate().all(|(i, c)| i == 50 || c.abs() < 1e-6));
        let t = s.theta_star;
        assert!((t - 0.2).abs() < 1e-9 || (t - 0.8).abs() < 1e-9, "{t}");
    }

    #[test]
    fn amo_dual_solution_is_bounded() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        let energies = sample_spectrum(&v, &f, 3, 1000, 8, (-3.0, 3.0), 7, 200).unwrap();
        for &e in &energies {
            let s = dual_bounded_solution(&v, &f, e, 801, 512).unwrap();
            assert_eq!(s.coeff(0), Some(1.0));
            assert!(s.max_abs <= 1.1, "E = {e}: {}", s.max_abs);
            assert!(s.residual <= 1e-6, "E = {e}: {}", s.residual);
            let wide = dual_bounded_solution(&v, &f, e, 1601, 512).unwrap();
            assert!(wide.residual <= s.residual + 1e-12);
        }
    }

    #[test]
    fn outside_spectrum_is_rejected() {
        let r = dual_bounded_solution(&PotentialSpec::amo(0.5), &golden(), 5.0, 201, 64);
        assert!(matches!(r, Err(Error::NotInSpectrum { .. })));
    }

    #[test]
    fn solution_json_keys() {
        let e = 2.0 * (2.0 * PI * 0.3).cos();
        let s = dual_bounded_solution(&PotentialSpec::zero(), &golden(), e, 11, 64).unwrap();
        let j = serde_json::to_value(&s).unwrap();
        for key in ["E", "theta", "residual", "max_abs", "coeffs"] {
            assert!(j.get(key).is_some(), "{key}");
        }
    }
}
