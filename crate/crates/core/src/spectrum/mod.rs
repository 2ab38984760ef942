//! Finite-volume truncations: eigenvalue counts, the integrated density of
//! states, spectrum membership, spectral measures and Hölder scans.

pub mod linalg;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::arithmetic::Frequency;
use crate::cocycle::GrowthProfile;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
pub use linalg::SymBanded;

/// Largest volume accepted by the eigen-weight method.
pub const DENSE_CAP: usize = 4000;
/// Herglotz smoothing is `HERGLOTZ_ETA_FACTOR / L`.
pub const HERGLOTZ_ETA_FACTOR: f64 = 20.0;
/// Spectrum membership threshold is `MEMBERSHIP_FACTOR / L`.
pub const MEMBERSHIP_FACTOR: f64 = 10.0;
const BISECTION_TOL: f64 = 1e-12;

/// Dirichlet section of a quasi-periodic operator on consecutive sites.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    pub matrix: SymBanded,
    pub theta: f64,
    /// Lattice index of the first row.
    pub first_site: i64,
}

impl TruncatedOperator {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn band_width(&self) -> usize {
        self.matrix.band_width()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.matrix.diag
    }

    /// Row index of lattice site `n`, if inside the window.
    pub fn row_of(&self, n: i64) -> Option<usize> {
        let r = n - self.first_site;
        (r >= 0 && (r as usize) < self.size()).then_some(r as usize)
    }

    pub fn gershgorin_bound(&self) -> f64 {
        self.matrix.gershgorin_bound()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues()
    }
}

fn schrodinger_section(v: &PotentialSpec, alpha: f64, theta: f64, first: i64, l: usize) -> TruncatedOperator {
    let diag = (0..l)
        .map(|i| v.coupled((theta + (first + i as i64) as f64 * alpha).rem_euclid(1.0)))
        .collect();
    TruncatedOperator {
        matrix: SymBanded {
            diag,
            bands: vec![vec![1.0; l.saturating_sub(1)]],
        },
        theta,
        first_site: first,
    }
}

/// The `L x L` Dirichlet section on sites `0..L`.
pub fn truncate(v: &PotentialSpec, freq: &Frequency, theta: f64, l: usize) -> TruncatedOperator {
    assert!(l >= 2, "truncation needs L >= 2");
    schrodinger_section(v, freq.alpha(), theta, 0, l)
}

/// The section on sites `0..L` for a frequency given only as a float, as in
/// rational or swept-frequency spectra.
pub fn truncate_with_alpha(v: &PotentialSpec, alpha: f64, theta: f64, l: usize) -> TruncatedOperator {
    assert!(l >= 2, "truncation needs L >= 2");
    schrodinger_section(v, alpha, theta, 0, l)
}

/// The Dirichlet section on sites `-L/2 .. L - L/2`, so sites `-1` and `0`
/// sit in the bulk.
pub fn truncate_centered(v: &PotentialSpec, freq: &Frequency, theta: f64, l: usize) -> TruncatedOperator {
    assert!(l >= 2, "truncation needs L >= 2");
    schrodinger_section(v, freq.alpha(), theta, -((l / 2) as i64), l)
}

/// Number of eigenvalues strictly below `e` by inertia counting. A shift that
/// lands on a pivot breakdown is retried at `e - 1e-10`, then `e + 1e-10`.
pub fn eig_count_below(op: &TruncatedOperator, e: f64) -> usize {
    op.matrix.count_below(e)
}

/// Midpoint phase grid `(j + 1/2) / P`.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count).map(|j| (j as f64 + 0.5) / count as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IDSCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    pub phase_count: usize,
}

impl IDSCurve {
    /// Linear interpolation, saturating outside the grid.
    pub fn at(&self, e: f64) -> f64 {
        let g = &self.grid;
        if e <= g[0] {
            return self.values[0];
        }
        if e >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let i = g.partition_point(|&x| x <= e) - 1;
        let t = (e - g[i]) / (g[i + 1] - g[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn spacing(&self) -> f64 {
        self.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Maximal runs of at least `min_cells` cells over which `N` rises by no
    /// more than `tol`, as `(E_lo, E_hi, N)`. These locate spectral gaps.
    pub fn plateaus(&self, min_cells: usize, tol: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let n = self.grid.len();
        let mut i = 0;
        while i + 1 < n {
            let mut j = i;
            while j + 1 < n && self.values[j + 1] - self.values[i] <= tol {
                j += 1;
            }
            if j - i >= min_cells {
                out.push((self.grid[i], self.grid[j], self.values[i]));
                i = j;
            } else {
                i += 1;
            }
        }
        out
    }
}

/// `N(E)`: phase average of `eig_count_below(E) / L`.
pub fn ids(v: &PotentialSpec, freq: &Frequency, grid: &[f64], l: usize, phase_count: usize) -> IDSCurve {
    assert!(grid.windows(2).all(|w| w[0] <= w[1]), "energy grid must be sorted");
    let per_phase: Vec<Vec<usize>> = phase_grid(phase_count)
        .into_par_iter()
        .map(|theta| {
            let op = truncate(v, freq, theta, l);
            grid.iter().map(|&e| eig_count_below(&op, e)).collect()
        })
        .collect();
    let denom = (l * phase_count) as f64;
    let values = (0..grid.len())
        .map(|i| per_phase.iter().map(|c| c[i]).sum::<usize>() as f64 / denom)
        .collect();
    IDSCurve {
        grid: grid.to_vec(),
        values,
        l,
        phase_count,
    }
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMembership {
    pub in_spectrum: bool,
    pub distance: f64,
}

/// Membership test. The distance is the largest, over the phase grid, of the
/// distance from `E` to the eigenvalues of that truncation, so eigenvalues of
/// boundary states that cross a gap at some phases do not count.
pub fn spectrum_indicator(
    v: &PotentialSpec,
    freq: &Frequency,
    e: f64,
    l: usize,
    phase_count: usize,
    delta: Option<f64>,
) -> SpectrumMembership {
    let delta = delta.unwrap_or(MEMBERSHIP_FACTOR / l as f64);
    let distance = phase_grid(phase_count)
        .into_par_iter()
        .map(|theta| truncate(v, freq, theta, l).matrix.distance_to_spectrum(e, BISECTION_TOL))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    SpectrumMembership {
        in_spectrum: distance <= delta,
        distance,
    }
}

/// Seeded uniform samples from `[lo, hi]` accepted when `E` and `E +- delta`
/// all test as spectral.
#[allow(clippy::too_many_arguments)]
pub fn sample_spectrum(
    v: &PotentialSpec,
    freq: &Frequency,
    count: usize,
    l: usize,
    phase_count: usize,
    range: (f64, f64),
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<f64>> {
    let delta = MEMBERSHIP_FACTOR / l as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let e = rng.random_range(range.0..range.1);
        let ok = [e - delta, e, e + delta]
            .iter()
            .all(|&x| spectrum_indicator(v, freq, x, l, phase_count, Some(delta)).in_spectrum);
        if ok {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(Error::NoSpectralSamples);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    EigenWeights,
    Herglotz,
}

impl MeasureMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureMethod::EigenWeights => "eigen-weights",
            MeasureMethod::Herglotz => "herglotz",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasureApprox {
    pub partition: Vec<f64>,
    pub masses: Vec<f64>,
    pub method: MeasureMethod,
    pub theta: f64,
    pub total: f64,
}

impl SpectralMeasureApprox {
    /// Mass of `(a, b)`, splitting partially covered cells proportionally.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.partition
            .windows(2)
            .zip(&self.masses)
            .map(|(w, &m)| {
                let overlap = (b.min(w[1]) - a.max(w[0])).max(0.0);
                if w[1] > w[0] {
                    m * overlap / (w[1] - w[0])
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// `mu = mu^{e_{-1}} + mu^{e_0}`.
pub fn spectral_measure(
    v: &PotentialSpec,
    freq: &Frequency,
    theta: f64,
    partition: &[f64],
    l: usize,
    method: MeasureMethod,
) -> Result<SpectralMeasureApprox> {
    spectral_measure_of(v, freq, theta, partition, l, method, &[-1, 0])
}

/// Sum of the spectral measures of the Dirac vectors at `sites`, binned on
/// `partition`, from the centered truncation of volume `L`.
pub fn spectral_measure_of(
    v: &PotentialSpec,
    freq: &Frequency,
    theta: f64,
    partition: &[f64],
    l: usize,
    method: MeasureMethod,
    sites: &[i64],
) -> Result<SpectralMeasureApprox> {
    if partition.len() < 2 || partition.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("partition must be sorted with at least two points".into()));
    }
    let op = truncate_centered(v, freq, theta, l);
    let g = op.gershgorin_bound();
    let (lo, hi) = (partition[0], partition[partition.len() - 1]);
    if lo > -g || hi < g {
        return Err(Error::PartitionTooNarrow { lo, hi, need_lo: -g, need_hi: g });
    }
    let rows: Vec<usize> = sites
        .iter()
        .map(|&s| op.row_of(s).ok_or_else(|| Error::InvalidArgument(format!("site {s} outside the window"))))
        .collect::<Result<_>>()?;
    let masses = match method {
        MeasureMethod::EigenWeights => {
            if l > DENSE_CAP {
                return Err(Error::DenseTooLarge { size: l, cap: DENSE_CAP });
            }
            eigen_weight_masses(&op, &rows, partition)
        }
        MeasureMethod::Herglotz => herglotz_masses(&op, &rows, partition, HERGLOTZ_ETA_FACTOR / l as f64),
    };
    let total = masses.iter().sum();
    Ok(SpectralMeasureApprox {
        partition: partition.to_vec(),
        masses,
        method,
        theta,
        total,
    })
}

fn bin_of(partition: &[f64], x: f64) -> Option<usize> {
    let cells = partition.len() - 1;
    if x < partition[0] || x > partition[cells] {
        return None;
    }
    Some((partition.partition_point(|&p| p <= x).max(1) - 1).min(cells - 1))
}

fn eigen_weight_masses(op: &TruncatedOperator, rows: &[usize], partition: &[f64]) -> Vec<f64> {
    let (values, comps) = op.matrix.eigen_rows(rows);
    let mut masses = vec![0.0; partition.len() - 1];
    for (j, &lam) in values.iter().enumerate() {
        if let Some(b) = bin_of(partition, lam) {
            masses[b] += comps.iter().map(|c| c[j] * c[j]).sum::<f64>();
        }
    }
    masses
}

/// `(1/pi) int_I Im G_ff(E + i eta) dE` by composite Simpson with step at most
/// `eta / 4`.
fn herglotz_masses(op: &TruncatedOperator, rows: &[usize], partition: &[f64], eta: f64) -> Vec<f64> {
    let diag = &op.matrix.diag;
    let off = &op.matrix.bands[0];
    let density = |e: f64| -> f64 {
        let z = Complex::new(e, eta);
        rows.iter()
            .map(|&r| linalg::resolvent_diagonal(diag, off, r, z).im)
            .sum::<f64>()
            / PI
    };
    partition
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                return 0.0;
            }
            let mut n = ((b - a) / (eta / 4.0)).ceil() as usize;
            n = (n.max(2) + 1) & !1;
            let h = (b - a) / n as f64;
            let mut s = density(a) + density(b);
            for k in 1..n {
                s += density(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            (s * h / 3.0).max(0.0)
        })
        .collect()
}

/// `mu(E - eps, E + eps) / (eps * max_{s <= 1/eps} ||A_s||_0^2)`.
pub fn measure_bound_check(measure: &SpectralMeasureApprox, growth: &GrowthProfile, e: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let horizon = (1.0 / eps).floor() as usize;
    if growth.s_max() < horizon {
        return Err(Error::InvalidArgument(format!(
            "growth profile reaches s = {} but the check needs s = {horizon}",
            growth.s_max()
        )));
    }
    let mass = measure.mass_between(e - eps, e + eps);
    Ok(mass / (eps * (2.0 * growth.sup_up_to(horizon)).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub eps: f64,
    /// `max_E (N(E + eps) - N(E - eps)) / eps^{1/2}`.
    pub upper: f64,
    pub upper_at: f64,
    /// `min_E (N(E + eps) - N(E - eps)) / eps^2` over spectral energies.
    pub lower: Option<f64>,
    pub lower_at: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderScan {
    pub rows: Vec<HolderRow>,
}

/// Extremal Hölder ratios of an IDS curve. The upper scan runs over grid
/// energies whose window fits inside the grid; the lower scan over the given
/// spectral energies.
pub fn holder_scan(curve: &IDSCurve, eps_list: &[f64], spectral: &[f64]) -> Result<HolderScan> {
    let min_eps = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let spacing = curve.spacing();
    if eps_list.is_empty() || !(min_eps > 0.0) {
        return Err(Error::InvalidArgument("need at least one positive eps".into()));
    }
    if spacing > min_eps / 4.0 {
        return Err(Error::GridTooCoarse { spacing, eps: min_eps });
    }
    let (lo, hi) = (curve.grid[0], curve.grid[curve.grid.len() - 1]);
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let dn = |e: f64| curve.at(e + eps) - curve.at(e - eps);
            let (mut upper, mut upper_at) = (0.0, f64::NAN);
            for &e in curve.grid.iter().filter(|&&e| e - eps >= lo && e + eps <= hi) {
                let r = dn(e) / eps.sqrt();
                if r > upper {
                    upper = r;
                    upper_at = e;
                }
            }
            let mut lower: Option<(f64, f64)> = None;
            for &e in spectral.iter().filter(|&&e| e - eps >= lo && e + eps <= hi) {
                let r = dn(e) / (eps * eps);
                if lower.is_none_or(|(best, _)| r < best) {
                    lower = Some((r, e));
                }
            }
            HolderRow {
                eps,
                upper,
                upper_at,
                lower: lower.map(|p| p.0),
                lower_at: lower.map(|p| p.1),
            }
        })
        .collect();
    Ok(HolderScan { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsRow {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "N")]
    pub value: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub phases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub left: f64,
    pub right: f64,
    pub mass: f64,
    pub method: String,
}

impl SpectralMeasureApprox {
    pub fn rows(&self) -> Vec<MeasureRow> {
        self.partition
            .windows(2)
            .zip(&self.masses)
            .map(|(w, &m)| MeasureRow {
                left: w[0],
                right: w[1],
                mass: m,
                method: self.method.name().to_string(),
            })
            .collect()
    }
}

impl IDSCurve {
    pub fn rows(&self) -> Vec<IdsRow> {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&e, &n)| IdsRow {
                energy: e,
                value: n,
                l: self.l,
                phases: self.phase_count,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::growth_profile;
    use crate::rotation::{ids_from_rotation, rotation_number};
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn golden() -> Frequency {
        Frequency::golden(30)
    }

    fn free_ids(e: f64) -> f64 {
        1.0 - (e / 2.0).clamp(-1.0, 1.0).acos() / PI
    }

    #[test]
    fn free_three_site_section() {
        let op = truncate(&PotentialSpec::zero(), &golden(), 0.0, 3);
        let ev = op.eigenvalues();
        let s = 2f64.sqrt();
        for (x, y) in ev.iter().zip([-s, 0.0, s]) {
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(eig_count_below(&op, 0.5), 2);
        assert_eq!(eig_count_below(&op, -op.gershgorin_bound() - 1e-9), 0);
    }

    #[test]
    fn amo_two_site_section() {
        let f = golden();
        let op = truncate(&PotentialSpec::amo(1.0), &f, 0.0, 2);
        assert_eq!(op.diagonal()[0], 2.0);
        assert!((op.diagonal()[1] - 2.0 * (2.0 * PI * f.alpha()).cos()).abs() < 1e-14);
        assert_eq!(op.matrix.bands[0], vec![1.0]);
    }

    #[test]
    fn gershgorin_on_large_section() {
        let v = PotentialSpec::amo(1.7);
        let op = truncate(&v, &golden(), 0.3, 1000);
        let maxd = op.diagonal().iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(op.gershgorin_bound() <= 2.0 + maxd + 1e-12);
        let ev = op.eigenvalues();
        assert!(ev.iter().all(|x| x.abs() <= op.gershgorin_bound()));
    }

    #[test]
    fn counts_match_dense_for_amo() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = truncate(&PotentialSpec::amo(0.8), &golden(), rng.random(), 200);
        let dense = SymmetricEigen::new(op.matrix.to_dense()).eigenvalues;
        for _ in 0..50 {
            let e: f64 = rng.random_range(-4.0..4.0);
            assert_eq!(eig_count_below(&op, e), dense.iter().filter(|&&x| x < e).count());
        }
    }

    #[test]
    fn free_ids_closed_form() {
        let grid = uniform_grid(-1.9, 1.9, 39);
        let c = ids(&PotentialSpec::zero(), &golden(), &grid, 2000, 64);
        for (&e, &n) in c.grid.iter().zip(&c.values) {
            assert!((n - free_ids(e)).abs() < 2e-3, "E = {e}");
        }
        let mid = ids(&PotentialSpec::zero(), &golden(), &[0.0], 2000, 64);
        assert!((mid.values[0] - 0.5).abs() < 2e-3);
    }

    #[test]
    fn ids_agrees_with_rotation() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        let grid = uniform_grid(-3.2, 3.2, 50);
        let c = ids(&v, &f, &grid, 2000, 32);
        for (&e, &n) in c.grid.iter().zip(&c.values) {
            let r = ids_from_rotation(&rotation_number(&v, &f, e, 20_000, 8));
            assert!((n - r).abs() < 5e-3, "E = {e}: {n} vs {r}");
        }
    }

    #[test]
    fn membership_examples() {
        let free = PotentialSpec::zero();
        let f = golden();
        assert!(spectrum_indicator(&free, &f, 0.0, 500, 4, None).in_spectrum);
        let out = spectrum_indicator(&free, &f, 2.5, 500, 4, None);
        assert!(!out.in_spectrum);
        assert!(out.distance >= 0.5 - 1e-3);
    }

    #[test]
    fn plateau_midpoint_is_a_gap() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        let l = 1000;
        let c = ids(&v, &f, &uniform_grid(-3.0, 3.0, 601), l, 16);
        let widest = c
            .plateaus(3, 2.5 / l as f64)
            .into_iter()
            .filter(|p| p.2 > 0.0 && p.2 < 1.0)
            .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
            .expect("AMO has open gaps");
        let mid = 0.5 * (widest.0 + widest.1);
        assert!(!spectrum_indicator(&v, &f, mid, l, 16, None).in_spectrum, "{widest:?}");
    }

    fn partition(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
        uniform_grid(lo, hi, cells + 1)
    }

    #[test]
    fn free_measure_normalization_and_symmetry() {
        let free = PotentialSpec::zero();
        let f = golden();
        for method in [MeasureMethod::EigenWeights, MeasureMethod::Herglotz] {
            let m = spectral_measure_of(&free, &f, 0.0, &[-2.5, -2.0, 0.0, 2.0, 2.5], 2000, method, &[0]).unwrap();
            assert!((m.total - 1.0).abs() < 2e-2, "{method:?}");
            assert!((m.masses[0] + m.masses[1] - 0.5).abs() < 2e-2, "{method:?}");
            if method == MeasureMethod::EigenWeights {
                // Smoothing moves about sqrt(eta) of mass past the band edges.
                assert!((m.masses[1] + m.masses[2] - 1.0).abs() < 2e-2);
                assert!((m.masses[1] - 0.5).abs() < 2e-2);
            }
            let both = spectral_measure(&free, &f, 0.0, &partition(-2.5, 2.5, 10), 2000, method).unwrap();
            assert!((both.total - 2.0).abs() < 2e-2 * 2.0);
        }
    }

    #[test]
    fn measure_methods_agree() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        let p = partition(-3.0, 3.0, 24);
        let a = spectral_measure(&v, &f, 0.37, &p, 2000, MeasureMethod::EigenWeights).unwrap();
        let b = spectral_measure(&v, &f, 0.37, &p, 2000, MeasureMethod::Herglotz).unwrap();
        assert!((a.total - 2.0).abs() < 1e-10);
        assert!((b.total - 2.0).abs() < 5e-2);
        for (x, y) in a.masses.iter().zip(&b.masses) {
            assert!((x - y).abs() < 5e-2, "{x} vs {y}");
        }
    }

    #[test]
    fn measure_errors() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        assert!(matches!(
            spectral_measure(&v, &f, 0.0, &[-1.0, 1.0], 100, MeasureMethod::EigenWeights),
            Err(Error::PartitionTooNarrow { .. })
        ));
        assert!(matches!(
            spectral_measure(&v, &f, 0.0, &partition(-4.0, 4.0, 4), 5000, MeasureMethod::EigenWeights),
            Err(Error::DenseTooLarge { .. })
        ));
    }

    #[test]
    fn gap_carries_no_mass() {
        let v = PotentialSpec::amo(0.5);
        let f = golden();
        let l = 1000;
        let c = ids(&v, &f, &uniform_grid(-3.0, 3.0, 301), l, 8);
        let m = spectral_measure(&v, &f, 0.21, &partition(-3.5, 3.5, 700), l, MeasureMethod::EigenWeights).unwrap();
        for &(a, b, n) in &c.plateaus(3, 2.5 / l as f64) {
            if n <= 0.0 || n >= 1.0 {
                continue;
            }
            let mid = 0.5 * (a + b);
            let s = spectrum_indicator(&v, &f, mid, l, 8, None);
            if !s.in_spectrum {
                assert!(m.mass_between(mid - s.distance / 2.0, mid + s.distance / 2.0) <= 1e-3);
            }
        }
    }

    #[test]
    fn free_measure_bound() {
        let free = PotentialSpec::zero();
        let f = golden();
        let m = spectral_measure(&free, &f, 0.0, &partition(-2.5, 2.5, 100), 2000, MeasureMethod::EigenWeights).unwrap();
        let g0 = growth_profile(&free, &f, 0.0, 10, 8, 6);
        let r = measure_bound_check(&m, &g0, 0.0, 0.1).unwrap();
        assert!(r > 0.0 && r <= 10.0);
        let g3 = growth_profile(&free, &f, 3.0, 10, 8, 6);
        assert!(measure_bound_check(&m, &g3, 3.0, 0.1).unwrap() < 1e-12);
        assert!(measure_bound_check(&m, &g0, 0.0, 0.01).is_err());
    }

    #[test]
    fn free_holder_ratios() {
        let grid = uniform_grid(-2.2, 2.2, 4401);
        let c = IDSCurve {
            values: grid.iter().map(|&e| free_ids(e)).collect(),
            grid,
            l: 0,
            phase_count: 0,
        };
        let scan = holder_scan(&c, &[0.01], &[0.0]).unwrap();
        let row = &scan.rows[0];
        assert!(row.upper >= 0.2 && row.upper <= 2.0);
        assert!((row.upper - 2f64.sqrt() / PI).abs() < 1e-2);
        assert!(row.upper_at.abs() > 1.95);
        // The free density at 0 is 1 / (2 pi), so dN = eps / pi.
        assert!((row.lower.unwrap() - 1.0 / (PI * 0.01)).abs() < 0.1);
        assert!(matches!(holder_scan(&c, &[0.001], &[]), Err(Error::GridTooCoarse { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn ids_monotone_and_saturating(lambda in 0.0f64..2.0, l in 20usize..200) {
            let v = PotentialSpec::amo(lambda);
            let g = 2.0 + 2.0 * lambda;
            let grid = uniform_grid(-g - 0.5, g + 0.5, 80);
            let c = ids(&v, &golden(), &grid, l, 4);
            prop_assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(c.values[0], 0.0);
            prop_assert_eq!(*c.values.last().unwrap(), 1.0);
        }
    }
}
