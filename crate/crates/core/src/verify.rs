//! Desk-scale experiments with numeric pass/fail thresholds, and the
//! covering diagnostics that tie resonant phases to rotation numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::time::Instant;

use crate::arithmetic::{beta_estimate, best_multiple, find_resonances, torus_distance, Frequency, Real};
use crate::arithmetic::{ResonanceRecord, DEFAULT_TAIL_WINDOW};
use crate::cocycle::{boundedness_probe, growth_profile, lyapunov_exponent};
use crate::duality::{dual_bounded_solution, dual_spectrum_compare};
use crate::error::{Error, Result};
use crate::potential::{strip_norm, PotentialSpec};
use crate::rotation::{ids_from_rotation, rotation_number};
use crate::spectrum::{
    holder_scan, ids, measure_bound_check, sample_spectrum, spectral_measure, uniform_grid, HolderScan,
    MeasureMethod,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Value,
    pub measurements: Vec<(String, f64)>,
    pub verdict: Verdict,
    /// Wall-clock time; omitted from reproducible output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    fn new(name: &str, config: Value) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config,
            measurements: Vec::new(),
            verdict: Verdict::Informational,
            runtime_seconds: None,
        }
    }

    fn push(&mut self, label: impl Into<String>, value: f64) {
        self.measurements.push((label.into(), value));
    }

    pub fn measurement(&self, label: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.0 == label).map(|m| m.1)
    }

    /// False only for a failed pass/fail experiment.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn without_runtime(mut self) -> Self {
        self.runtime_seconds = None;
        self
    }

    fn finish(mut self, start: Instant) -> Self {
        self.runtime_seconds = Some(start.elapsed().as_secs_f64());
        self
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// `[-G, G]` with `G = 2 + |lambda| sum |v^_k|`, which contains the spectrum.
pub fn spectral_range(v: &PotentialSpec) -> (f64, f64) {
    let g = 2.0 + v.lambda().abs() * strip_norm(v, 0.0);
    (-g, g)
}

fn context(v: &PotentialSpec, freq: &Frequency) -> Value {
    json!({
        "potential": v.to_json(),
        "alpha": freq.alpha(),
        "depth": freq.depth(),
    })
}

fn label(prefix: &str, e: f64) -> String {
    format!("{prefix}[E={e:.6}]")
}

/// Settings for drawing energies from the numerical spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub count: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub phases: usize,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn new(count: usize, seed: u64) -> Self {
        SamplingConfig {
            count,
            l: 1000,
            phases: 8,
            seed,
        }
    }

    pub fn draw(&self, v: &PotentialSpec, freq: &Frequency) -> Result<Vec<f64>> {
        sample_spectrum(v, freq, self.count, self.l, self.phases, spectral_range(v), self.seed, 200 * self.count.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroLyapunovConfig {
    pub sampling: SamplingConfig,
    pub n_steps: usize,
    pub n_phases: usize,
    pub threshold: f64,
    /// Largest `|lambda|` for which a verdict is given.
    pub max_lambda: f64,
}

impl Default for ZeroLyapunovConfig {
    fn default() -> Self {
        ZeroLyapunovConfig {
            sampling: SamplingConfig::new(20, 1),
            n_steps: 1_000_000,
            n_phases: 4,
            threshold: 5e-3,
            max_lambda: 0.5,
        }
    }
}

/// Lyapunov exponents at spectral samples; pass iff all are below the threshold.
pub fn verify_zero_lyapunov(v: &PotentialSpec, freq: &Frequency, cfg: &ZeroLyapunovConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("zero_lyapunov", json!({ "setup": context(v, freq), "params": cfg }));
    let energies = cfg.sampling.draw(v, freq)?;
    let mut worst: f64 = 0.0;
    for &e in &energies {
        let l = lyapunov_exponent(v, freq, e, cfg.n_steps, cfg.n_phases);
        rep.push(label("L", e), l.value);
        worst = worst.max(l.value);
    }
    rep.push("samples", energies.len() as f64);
    rep.push("max_L", worst);
    rep.verdict = if v.lambda().abs() <= cfg.max_lambda {
        verdict(worst <= cfg.threshold)
    } else {
        Verdict::Informational
    };
    Ok(rep.finish(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthConfig {
    pub s_max: usize,
    pub phase_count: usize,
    pub checkpoints: usize,
    /// Recorded with the report; the envelope fit does not depend on it.
    pub epsilon0: f64,
    /// Pass iff `ln ||A_{s_max}||_0 <= slope * s_max` at every energy.
    pub slope: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            s_max: 100_000,
            phase_count: 16,
            checkpoints: 24,
            epsilon0: 0.0,
            slope: 0.05,
        }
    }
}

/// Least-squares fit `y = a ln s + b`.
pub fn fit_log_envelope(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

/// Sup-norm growth profiles at the given energies with a logarithmic
/// envelope fit; pass iff growth at the horizon is sublinear.
pub fn verify_growth_bound(
    v: &PotentialSpec,
    freq: &Frequency,
    energies: &[f64],
    cfg: &GrowthConfig,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new(
        "growth_bound",
        json!({ "setup": context(v, freq), "params": cfg, "energies": energies }),
    );
    let mut ok = true;
    for &e in energies {
        let p = growth_profile(v, freq, e, cfg.s_max, cfg.phase_count, cfg.checkpoints);
        let pts: Vec<(usize, f64)> = p.checkpoints.iter().map(|c| (c.s, c.sup_log_norm)).collect();
        let (a, b) = fit_log_envelope(&pts);
        let last = pts.last().map_or(0.0, |p| p.1);
        rep.push(label("a", e), a);
        rep.push(label("b", e), b);
        rep.push(label("sup_log_norm_at_s_max", e), last);
        ok &= last <= cfg.slope * cfg.s_max as f64;
    }
    rep.verdict = verdict(ok);
    Ok(rep.finish(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolderConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub phases: usize,
    pub eps_list: Vec<f64>,
    pub sampling: SamplingConfig,
    /// Largest allowed `upper(eps) / upper(eps_max)`.
    pub growth_factor: f64,
    pub lower_min: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            l: 2000,
            phases: 32,
            eps_list: vec![0.1, 0.03, 0.01],
            sampling: SamplingConfig::new(10, 2),
            growth_factor: 2.0,
            lower_min: 0.05,
        }
    }
}

/// Hölder scans of the IDS on a grid of spacing `min eps / 4`.
pub fn verify_holder(v: &PotentialSpec, freq: &Frequency, cfg: &HolderConfig) -> Result<(HolderScan, ExperimentReport)> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("holder", json!({ "setup": context(v, freq), "params": cfg }));
    let eps_max = cfg.eps_list.iter().cloned().fold(0.0, f64::max);
    let eps_min = cfg.eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    if cfg.eps_list.is_empty() || !(eps_min > 0.0) {
        return Err(Error::InvalidArgument("eps_list needs positive entries".into()));
    }
    let (lo, hi) = spectral_range(v);
    let (lo, hi) = (lo - eps_max - 0.1, hi + eps_max + 0.1);
    let points = ((hi - lo) / (eps_min / 5.0)).ceil() as usize + 1;
    let curve = ids(v, freq, &uniform_grid(lo, hi, points), cfg.l, cfg.phases);
    let spectral = cfg.sampling.draw(v, freq)?;
    let scan = holder_scan(&curve, &cfg.eps_list, &spectral)?;
    let reference = scan
        .rows
        .iter()
        .find(|r| r.eps == eps_max)
        .map(|r| r.upper)
        .unwrap_or(f64::NAN);
    let mut ok = reference > 0.0;
    for row in &scan.rows {
        rep.push(format!("upper[eps={}]", row.eps), row.upper);
        rep.push(format!("upper_at[eps={}]", row.eps), row.upper_at);
        ok &= row.upper <= cfg.growth_factor * reference;
        match row.lower {
            Some(low) => {
                rep.push(format!("lower[eps={}]", row.eps), low);
                ok &= low >= cfg.lower_min;
            }
            None => ok = false,
        }
    }
    rep.verdict = verdict(ok);
    Ok((scan, rep.finish(start)))
}

/// Links a resonant phase to the rotation number at its energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringDiagnostic {
    #[serde(rename = "E")]
    pub energy: f64,
    pub theta_star: f64,
    pub resonance_record: ResonanceRecord,
    pub rho: f64,
    pub m_best: i64,
    pub m_search_bound: i64,
    /// `||2 rho - m_best alpha||`.
    pub rotation_residual: f64,
}

impl CoveringDiagnostic {
    pub fn n_j(&self) -> i64 {
        self.resonance_record.last().n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResonanceConfig {
    /// `None` uses the tail estimate of beta itself. Larger multiples leave
    /// dual phases without resonances at desk-scale `K`.
    pub epsilon0: Option<f64>,
    pub m_bound_factor: i64,
    pub k_max: usize,
    pub dual_l: usize,
    pub theta_grid: usize,
    pub rotation_steps: usize,
    pub rotation_phases: usize,
    pub min_resonant: usize,
    pub correlation_max: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig {
            epsilon0: None,
            m_bound_factor: 4,
            k_max: 50,
            dual_l: 801,
            theta_grid: 512,
            rotation_steps: 100_000,
            rotation_phases: 8,
            min_resonant: 3,
            correlation_max: -0.5,
        }
    }
}

impl ResonanceConfig {
    pub fn resolve_epsilon0(&self, freq: &Frequency) -> Result<f64> {
        match self.epsilon0 {
            Some(e) => Ok(e),
            None => Ok(beta_estimate(freq, DEFAULT_TAIL_WINDOW.min(freq.depth()))?.beta_hat),
        }
    }
}

/// Resonances of `theta_star`, the rotation number at `E`, and the best
/// multiple `m` with `|m| <= factor * |n_j|`.
pub fn covering_diagnostic(
    v: &PotentialSpec,
    freq: &Frequency,
    energy: f64,
    theta_star: f64,
    epsilon0: f64,
    cfg: &ResonanceConfig,
) -> CoveringDiagnostic {
    let theta = Real::from_f64(theta_star, freq.value().bits());
    let record = find_resonances(&theta, freq, epsilon0, cfg.k_max);
    let rho = rotation_number(v, freq, energy, cfg.rotation_steps, cfg.rotation_phases).rho;
    let bound = cfg.m_bound_factor * record.last().n.abs();
    let (m_best, rotation_residual) = if record.is_resonant() {
        best_multiple(2.0 * rho, freq.alpha(), bound)
    } else {
        (0, torus_distance(2.0 * rho))
    };
    CoveringDiagnostic {
        energy,
        theta_star,
        resonance_record: record,
        rho,
        m_best,
        m_search_bound: bound,
        rotation_residual,
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Dual phases, their resonances and rotation residuals at the given
/// energies; pass iff the residual falls with `|n_j|` (rank correlation) once
/// enough samples are resonant.
pub fn verify_rotation_resonance(
    v: &PotentialSpec,
    freq: &Frequency,
    energies: &[f64],
    cfg: &ResonanceConfig,
) -> Result<(Vec<CoveringDiagnostic>, ExperimentReport)> {
    let start = Instant::now();
    let epsilon0 = cfg.resolve_epsilon0(freq)?;
    let mut rep = ExperimentReport::new(
        "rotation_resonance",
        json!({ "setup": context(v, freq), "params": cfg, "epsilon0": epsilon0, "energies": energies }),
    );
    let mut diags = Vec::with_capacity(energies.len());
    for &e in energies {
        let sol = dual_bounded_solution(v, freq, e, cfg.dual_l, cfg.theta_grid)?;
        let d = covering_diagnostic(v, freq, e, sol.theta_star, epsilon0, cfg);
        rep.push(label("abs_n_j", e), d.n_j().abs() as f64);
        rep.push(label("neg_ln_residual", e), -d.rotation_residual.max(f64::MIN_POSITIVE).ln());
        diags.push(d);
    }
    let resonant: Vec<&CoveringDiagnostic> = diags.iter().filter(|d| d.resonance_record.is_resonant()).collect();
    rep.push("resonant_samples", resonant.len() as f64);
    if resonant.len() >= cfg.min_resonant {
        let n: Vec<f64> = resonant.iter().map(|d| d.n_j().abs() as f64).collect();
        let r: Vec<f64> = resonant
            .iter()
            .map(|d| d.rotation_residual.max(f64::MIN_POSITIVE).ln())
            .collect();
        let rho_s = spearman(&n, &r);
        rep.push("rank_correlation", rho_s);
        rep.verdict = verdict(rho_s <= cfg.correlation_max);
    }
    Ok((diags, rep.finish(start)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DualityConfig {
    pub sampling: SamplingConfig,
    pub compare_l: usize,
    pub compare_phases: usize,
    pub solution_l: usize,
    pub theta_grid: usize,
    pub hausdorff_max: f64,
    pub max_abs: f64,
    pub residual_max: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            sampling: SamplingConfig::new(20, 3),
            compare_l: 1000,
            compare_phases: 16,
            solution_l: 801,
            theta_grid: 512,
            hausdorff_max: 0.05,
            max_abs: 1.1,
            residual_max: 1e-4,
        }
    }
}

/// Dual spectra agree with direct spectra and dual solutions are bounded.
pub fn verify_duality(v: &PotentialSpec, freq: &Frequency, cfg: &DualityConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("duality", json!({ "setup": context(v, freq), "params": cfg }));
    let h = dual_spectrum_compare(v, freq, cfg.compare_l, cfg.compare_phases)?;
    rep.push("hausdorff", h);
    let mut ok = h <= cfg.hausdorff_max;
    let energies = cfg.sampling.draw(v, freq)?;
    let (mut worst_abs, mut worst_res): (f64, f64) = (0.0, 0.0);
    for &e in &energies {
        let s = dual_bounded_solution(v, freq, e, cfg.solution_l, cfg.theta_grid)?;
        rep.push(label("max_abs", e), s.max_abs);
        rep.push(label("residual", e), s.residual);
        worst_abs = worst_abs.max(s.max_abs);
        worst_res = worst_res.max(s.residual);
        ok &= s.coeff(0) == Some(1.0) && s.max_abs <= cfg.max_abs && s.residual <= cfg.residual_max;
    }
    rep.push("solutions", energies.len() as f64);
    rep.push("worst_max_abs", worst_abs);
    rep.push("worst_residual", worst_res);
    rep.verdict = verdict(ok);
    Ok(rep.finish(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxyConfig {
    pub sampling: SamplingConfig,
    /// Horizon `S` of the boundedness probe.
    pub horizon: usize,
    pub phase_count: usize,
    pub threshold_log: f64,
    pub fraction_min: f64,
    /// Window for the per-sample measure ratio.
    pub eps: f64,
    pub measure_l: usize,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig {
            sampling: SamplingConfig::new(20, 4),
            horizon: 100_000,
            phase_count: 16,
            threshold_log: 1000f64.ln(),
            fraction_min: 0.9,
            eps: 0.01,
            measure_l: 2000,
        }
    }
}

/// Fraction of spectral samples whose cocycle stays bounded up to the
/// horizon. A finite-volume proxy for absolute continuity, not a test of it.
pub fn ac_spectrum_proxy(v: &PotentialSpec, freq: &Frequency, cfg: &ProxyConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("ac_spectrum_proxy", json!({ "setup": context(v, freq), "params": cfg }));
    let energies = cfg.sampling.draw(v, freq)?;
    let (lo, hi) = spectral_range(v);
    let partition = uniform_grid(lo - 0.5, hi + 0.5, ((hi - lo + 1.0) / (cfg.eps / 4.0)).ceil() as usize + 1);
    let measure = spectral_measure(v, freq, 0.0, &partition, cfg.measure_l, MeasureMethod::EigenWeights)?;
    let mut bounded = 0;
    for &e in &energies {
        let p = growth_profile(v, freq, e, cfg.horizon, cfg.phase_count, 24);
        let (ok, max_log) = boundedness_probe(&p, cfg.threshold_log);
        if ok {
            bounded += 1;
        }
        rep.push(label("max_log_norm", e), max_log);
        rep.push(label("measure_ratio", e), measure_bound_check(&measure, &p, e, cfg.eps)?);
    }
    let fraction = bounded as f64 / energies.len() as f64;
    rep.push("bounded_fraction", fraction);
    rep.verdict = verdict(fraction >= cfg.fraction_min);
    Ok(rep.finish(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureBoundConfig {
    pub sampling: SamplingConfig,
    /// Decreasing windows; the empirical constant must not grow along them.
    pub eps_list: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    pub theta: f64,
    pub phase_count: usize,
}

impl Default for MeasureBoundConfig {
    fn default() -> Self {
        MeasureBoundConfig {
            sampling: SamplingConfig::new(10, 5),
            eps_list: vec![0.1, 0.05],
            l: 2000,
            theta: 0.0,
            phase_count: 256,
        }
    }
}

/// Empirical constant `max_E mu(E - eps, E + eps) / (eps ||A||^2)` per window;
/// pass iff finite and non-increasing as the window shrinks.
pub fn verify_measure_bound(v: &PotentialSpec, freq: &Frequency, cfg: &MeasureBoundConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("measure_bound", json!({ "setup": context(v, freq), "params": cfg }));
    let energies = cfg.sampling.draw(v, freq)?;
    let eps_min = cfg.eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let (lo, hi) = spectral_range(v);
    let partition = uniform_grid(lo - 0.5, hi + 0.5, ((hi - lo + 1.0) / (eps_min / 8.0)).ceil() as usize + 1);
    let measure = spectral_measure(v, freq, cfg.theta, &partition, cfg.l, MeasureMethod::EigenWeights)?;
    let horizon = (1.0 / eps_min).floor() as usize;
    let profiles: Vec<_> = energies
        .iter()
        .map(|&e| growth_profile(v, freq, e, horizon, cfg.phase_count, horizon.min(64)))
        .collect();
    let mut constants = Vec::new();
    for &eps in &cfg.eps_list {
        let mut c: f64 = 0.0;
        for (&e, p) in energies.iter().zip(&profiles) {
            c = c.max(measure_bound_check(&measure, p, e, eps)?);
        }
        rep.push(format!("constant[eps={eps}]"), c);
        constants.push(c);
    }
    let ok = constants.iter().all(|c| c.is_finite()) && constants.windows(2).all(|w| w[1] <= w[0]);
    rep.verdict = verdict(ok);
    Ok(rep.finish(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JohnsonMoserConfig {
    pub points: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub phases: usize,
    pub rotation_steps: usize,
    pub rotation_phases: usize,
    pub tolerance: f64,
}

impl Default for JohnsonMoserConfig {
    fn default() -> Self {
        JohnsonMoserConfig {
            points: 50,
            l: 2000,
            phases: 32,
            rotation_steps: 20_000,
            rotation_phases: 8,
            tolerance: 5e-3,
        }
    }
}

/// Eigenvalue-count IDS against `1 - 2 rho` on a uniform energy grid.
pub fn verify_johnson_moser(v: &PotentialSpec, freq: &Frequency, cfg: &JohnsonMoserConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut rep = ExperimentReport::new("johnson_moser", json!({ "setup": context(v, freq), "params": cfg }));
    let (lo, hi) = spectral_range(v);
    let grid = uniform_grid(lo - 0.2, hi + 0.2, cfg.points);
    let curve = ids(v, freq, &grid, cfg.l, cfg.phases);
    let mut worst: f64 = 0.0;
    for (&e, &n) in curve.grid.iter().zip(&curve.values) {
        let r = ids_from_rotation(&rotation_number(v, freq, e, cfg.rotation_steps, cfg.rotation_phases));
        worst = worst.max((n - r).abs());
    }
    rep.push("max_deviation", worst);
    rep.verdict = verdict(worst <= cfg.tolerance);
    Ok(rep.finish(start))
}

/// Configuration of the full suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub zero_lyapunov: ZeroLyapunovConfig,
    pub growth: GrowthConfig,
    pub growth_samples: SamplingConfig,
    pub holder: HolderConfig,
    pub resonance: ResonanceConfig,
    pub resonance_samples: SamplingConfig,
    pub duality: DualityConfig,
    pub proxy: ProxyConfig,
    pub measure_bound: MeasureBoundConfig,
    pub johnson_moser: JohnsonMoserConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            zero_lyapunov: ZeroLyapunovConfig::default(),
            growth: GrowthConfig::default(),
            growth_samples: SamplingConfig::new(5, 6),
            holder: HolderConfig::default(),
            resonance: ResonanceConfig::default(),
            resonance_samples: SamplingConfig::new(5, 7),
            duality: DualityConfig::default(),
            proxy: ProxyConfig::default(),
            measure_bound: MeasureBoundConfig::default(),
            johnson_moser: JohnsonMoserConfig::default(),
        }
    }
}

impl SuiteConfig {
    /// Assigns the sampler seeds `base, base + 1, ...` in a fixed order;
    /// `base = 1` reproduces the defaults.
    pub fn reseed(mut self, base: u64) -> Self {
        let samplers = [
            &mut self.zero_lyapunov.sampling,
            &mut self.holder.sampling,
            &mut self.duality.sampling,
            &mut self.proxy.sampling,
            &mut self.measure_bound.sampling,
            &mut self.growth_samples,
            &mut self.resonance_samples,
        ];
        for (i, s) in samplers.into_iter().enumerate() {
            s.seed = base.wrapping_add(i as u64);
        }
        self
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig::new(5, 6)
    }
}

pub const EXPERIMENTS: [&str; 8] = [
    "zero_lyapunov",
    "growth_bound",
    "holder",
    "rotation_resonance",
    "duality",
    "ac_spectrum_proxy",
    "measure_bound",
    "johnson_moser",
];

/// Runs one named experiment.
pub fn run_experiment(name: &str, v: &PotentialSpec, freq: &Frequency, cfg: &SuiteConfig) -> Result<ExperimentReport> {
    match name {
        "zero_lyapunov" => verify_zero_lyapunov(v, freq, &cfg.zero_lyapunov),
        "growth_bound" => {
            let energies = cfg.growth_samples.draw(v, freq)?;
            verify_growth_bound(v, freq, &energies, &cfg.growth)
        }
        "holder" => verify_holder(v, freq, &cfg.holder).map(|r| r.1),
        "rotation_resonance" => {
            let energies = cfg.resonance_samples.draw(v, freq)?;
            verify_rotation_resonance(v, freq, &energies, &cfg.resonance).map(|r| r.1)
        }
        "duality" => verify_duality(v, freq, &cfg.duality),
        "ac_spectrum_proxy" => ac_spectrum_proxy(v, freq, &cfg.proxy),
        "measure_bound" => verify_measure_bound(v, freq, &cfg.measure_bound),
        "johnson_moser" => verify_johnson_moser(v, freq, &cfg.johnson_moser),
        other => Err(Error::InvalidArgument(format!("unknown experiment {other:?}"))),
    }
}

/// Every experiment, run as independent jobs and reported in declaration order.
pub fn run_all(v: &PotentialSpec, freq: &Frequency, cfg: &SuiteConfig) -> Result<Vec<ExperimentReport>> {
    EXPERIMENTS.par_iter().map(|name| run_experiment(name, v, freq, cfg)).collect()
}
