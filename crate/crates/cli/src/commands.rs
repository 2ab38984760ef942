//! Subcommand execution.

use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use quasi_core::arithmetic::{
    beta_estimate, build_frequency_with_beta, diophantine_check, find_resonances, BetaConstruction, Real,
    DEFAULT_EPSILON0_FACTOR,
};
use quasi_core::cocycle::{growth_profile, lyapunov_exponent, LyapunovRow};
use quasi_core::duality::{dual_bounded_solution, dual_spectrum_compare};
use quasi_core::potential::PotentialJson;
use quasi_core::rotation::{rotation_number, RotationRow};
use quasi_core::spectrum::{
    ids, sample_spectrum, spectral_measure, spectrum_indicator, uniform_grid, MeasureMethod,
};
use quasi_core::verify::{self, spectral_range, HolderConfig, SamplingConfig, SuiteConfig, Verdict};
use quasi_core::{Frequency, PotentialSpec};

use crate::config::*;
use crate::output::Emitter;
use crate::svg::{Figure, Style};
use crate::sweep;

pub fn frequency(f: &FreqArgs) -> Result<Frequency> {
    if let Some(beta) = f.alpha_beta {
        let depth = f.depth.unwrap_or(6);
        return Ok(build_frequency_with_beta(&BetaConstruction::new(beta, depth))?);
    }
    let depth = f.depth.unwrap_or(30);
    Ok(match f.alpha.as_deref().unwrap_or("golden") {
        "golden" => Frequency::golden(depth),
        "silver" => Frequency::silver(depth),
        "e-2" => Frequency::e_minus_two(depth),
        s => Frequency::from_decimal(s, depth)?,
    })
}

pub fn potential(p: &PotentialArgs) -> Result<PotentialSpec> {
    if let Some(path) = &p.potential_file {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let j: PotentialJson =
            serde_json::from_str(&text).with_context(|| format!("invalid potential file {}", path.display()))?;
        let v = PotentialSpec::from_json(&j)?;
        return Ok(match p.lambda {
            Some(l) => v.with_lambda(l),
            None => v,
        });
    }
    match (p.potential, p.lambda) {
        (Some(PotentialKind::Zero), _) => Ok(PotentialSpec::zero()),
        (_, Some(l)) => Ok(PotentialSpec::amo(l)),
        (Some(PotentialKind::Amo), None) => bail!("--potential amo needs --lambda"),
        (None, None) => bail!("give --potential amo --lambda <value>, --potential zero, or --potential-file"),
    }
}

fn energies(g: &GridArgs, v: &PotentialSpec, default_points: usize) -> Result<Vec<f64>> {
    if let Some(e) = g.energy {
        return Ok(vec![e]);
    }
    let (lo, hi) = spectral_range(v);
    let emin = g.emin.unwrap_or(lo - 0.5);
    let emax = g.emax.unwrap_or(hi + 0.5);
    let points = g.points.unwrap_or(default_points);
    if !(emin < emax) || points == 0 {
        bail!("energy grid needs emin < emax and points >= 1");
    }
    Ok(if points == 1 { vec![emin] } else { uniform_grid(emin, emax, points) })
}

fn check_volume(l: usize) -> Result<()> {
    if l < 2 {
        bail!("--L must be at least 2");
    }
    Ok(())
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        bail!("--{name} must be positive");
    }
    Ok(())
}

/// Runs the command; `Ok(false)` means a pass/fail experiment failed.
pub fn run(cli: Cli) -> Result<bool> {
    let command = cli.command;
    if let Some(n) = command.run_args().threads {
        check_positive("threads", n)?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let config = serde_json::to_value(&command)?;
    let emit = Emitter::new(config, command.run_args())?;
    match &command {
        Command::Beta(a) => {
            let f = frequency(&a.freq)?;
            let est = beta_estimate(&f, a.window)?;
            emit.document(&json!({
                "alpha": f.alpha(),
                "frequency": f.to_json(),
                "truncated": f.is_truncated(),
                "estimate": est,
            }))?;
        }
        Command::Dioph(a) => {
            let f = frequency(&a.freq)?;
            let k: BigUint = a.k_max.parse().map_err(|_| anyhow!("--k-max must be a positive integer"))?;
            if a.kappa <= 0.0 || a.tau < 0.0 {
                bail!("need kappa > 0 and tau >= 0");
            }
            emit.document(&diophantine_check(&f, a.kappa, a.tau, &k))?;
        }
        Command::Resonances(a) => {
            let f = frequency(&a.freq)?;
            let theta = if a.theta == "alpha/2" {
                f.value().half()
            } else {
                Real::from_decimal(&a.theta, f.value().bits())?
            };
            let eps0 = match a.epsilon0 {
                Some(e) if e > 0.0 => e,
                Some(_) => bail!("--epsilon0 must be positive"),
                None => DEFAULT_EPSILON0_FACTOR * beta_estimate(&f, 5.min(f.depth()))?.beta_hat,
            };
            emit.document(&find_resonances(&theta, &f, eps0, a.k_max))?;
        }
        Command::Lyapunov(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_positive("steps", a.steps)?;
            let rows: Vec<LyapunovRow> = energies(&a.grid, &v, 101)?
                .into_iter()
                .map(|e| {
                    let l = lyapunov_exponent(&v, &f, e, a.steps, a.phases.max(1));
                    LyapunovRow { energy: e, value: l.value, stderr: l.stderr }
                })
                .collect();
            emit.table(&rows)?;
            emit.figure(|| {
                Figure::new("Lyapunov exponent", "E", "L(E)").with(Style::Line, rows.iter().map(|r| (r.energy, r.value)).collect())
            })?;
        }
        Command::Growth(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_positive("s-max", a.s_max)?;
            let p = growth_profile(&v, &f, a.energy, a.s_max, a.phases.max(1), a.checkpoints);
            emit.table(&p.checkpoints)?;
            emit.figure(|| {
                Figure::new("Transfer matrix growth", "ln s", "ln sup ||A_s||")
                    .with(Style::Line, p.checkpoints.iter().map(|c| ((c.s as f64).ln(), c.sup_log_norm)).collect())
            })?;
        }
        Command::Rotation(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_positive("steps", a.steps)?;
            let rows: Vec<RotationRow> = energies(&a.grid, &v, 101)?
                .into_iter()
                .map(|e| {
                    let r = rotation_number(&v, &f, e, a.steps, a.phases.max(1));
                    RotationRow { energy: e, rho: r.rho, spread: r.spread }
                })
                .collect();
            emit.table(&rows)?;
            emit.figure(|| {
                Figure::new("Rotation number", "E", "rho(E)").with(Style::Line, rows.iter().map(|r| (r.energy, r.rho)).collect())
            })?;
        }
        Command::Ids(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_volume(a.l)?;
            check_positive("phases", a.phases)?;
            let curve = ids(&v, &f, &energies(&a.grid, &v, 201)?, a.l, a.phases);
            emit.table(&curve.rows())?;
            emit.figure(|| {
                Figure::new("Integrated density of states", "E", "N(E)")
                    .with(Style::Step, curve.grid.iter().cloned().zip(curve.values.iter().cloned()).collect())
            })?;
        }
        Command::Spectrum(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_volume(a.l)?;
            check_positive("phases", a.phases)?;
            match a.energy {
                Some(e) => {
                    let m = spectrum_indicator(&v, &f, e, a.l, a.phases, None);
                    emit.document(&json!({ "E": e, "membership": m }))?;
                }
                None => {
                    #[derive(Serialize)]
                    struct Sample {
                        #[serde(rename = "E")]
                        energy: f64,
                    }
                    let samples = sample_spectrum(&v, &f, a.count, a.l, a.phases, spectral_range(&v), a.run.seed, 200 * a.count.max(1))?;
                    let rows: Vec<Sample> = samples.iter().map(|&e| Sample { energy: e }).collect();
                    emit.table(&rows)?;
                }
            }
        }
        Command::Measure(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            check_positive("cells", a.cells)?;
            let (lo, hi) = spectral_range(&v);
            let (emin, emax) = (a.emin.unwrap_or(lo - 0.5), a.emax.unwrap_or(hi + 0.5));
            if !(emin < emax) {
                bail!("need emin < emax");
            }
            let method = match a.method {
                MethodArg::EigenWeights => MeasureMethod::EigenWeights,
                MethodArg::Herglotz => MeasureMethod::Herglotz,
            };
            let m = spectral_measure(&v, &f, a.theta, &uniform_grid(emin, emax, a.cells + 1), a.l, method)?;
            let rows = m.rows();
            emit.table(&rows)?;
            emit.figure(|| {
                let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.left, r.mass / (r.right - r.left))).collect();
                if let Some(last) = rows.last() {
                    pts.push((last.right, last.mass / (last.right - last.left)));
                }
                Figure::new("Spectral measure density", "E", "mass / width").with(Style::Step, pts)
            })?;
        }
        Command::Holder(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            let cfg = HolderConfig {
                l: a.l,
                phases: a.phases,
                eps_list: a.eps.clone(),
                sampling: SamplingConfig::new(a.samples, a.run.seed),
                ..HolderConfig::default()
            };
            let (scan, _) = verify::verify_holder(&v, &f, &cfg)?;
            emit.table(&scan.rows)?;
        }
        Command::Dual(a) => {
            let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
            if a.compare {
                let h = dual_spectrum_compare(&v, &f, a.l, a.phases)?;
                emit.document(&json!({ "hausdorff": h }))?;
            } else {
                let e = a.energy.expect("clap requires --energy without --compare");
                let sol = dual_bounded_solution(&v, &f, e, a.l, a.grid)?;
                emit.document(&sol)?;
                emit.figure(|| {
                    let k0 = sol.half_width() as f64;
                    Figure::new("Dual solution", "k", "u_k")
                        .with(Style::Points, sol.coeffs.iter().enumerate().map(|(i, &u)| (i as f64 - k0, u)).collect())
                })?;
            }
        }
        Command::Verify(a) => return run_verify(a, &emit),
        Command::Sweep(a) => return sweep::run(a, &emit),
    }
    Ok(true)
}

fn run_verify(a: &VerifyArgs, emit: &Emitter) -> Result<bool> {
    let (v, f) = (potential(&a.potential)?, frequency(&a.freq)?);
    let suite = match &a.suite {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<SuiteConfig>(&text).with_context(|| format!("invalid suite file {}", path.display()))?
        }
        None => SuiteConfig::default().reseed(a.run.seed),
    };
    let reports = if a.experiment == "all" {
        verify::run_all(&v, &f, &suite)?
    } else if verify::EXPERIMENTS.contains(&a.experiment.as_str()) {
        vec![verify::run_experiment(&a.experiment, &v, &f, &suite)?]
    } else {
        bail!("unknown experiment `{}`; expected `all` or one of {}", a.experiment, verify::EXPERIMENTS.join(", "));
    };
    let timings = a.run.timings;
    let reports: Vec<_> = reports.into_iter().map(|r| if timings { r } else { r.without_runtime() }).collect();
    let passed = reports.iter().all(|r| r.passed());
    let table = summary_table(&reports);
    if emit.out().is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    emit.document(&json!({ "suite": suite, "reports": reports, "passed": passed }))?;
    Ok(passed)
}

fn summary_table(reports: &[verify::ExperimentReport]) -> String {
    let mut s = format!("{:<20} {:<14} {}\n", "experiment", "verdict", "headline");
    for r in reports {
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Informational => "informational",
        };
        let headline = r
            .measurements
            .iter()
            .rfind(|m| !m.0.contains('['))
            .or(r.measurements.last())
            .map(|(k, x)| format!("{k} = {x:.6}"))
            .unwrap_or_default();
        s.push_str(&format!("{:<20} {:<14} {}\n", r.name, verdict, headline));
    }
    s
}
