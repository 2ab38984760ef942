//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line with
//! its key measurements; the process exits nonzero if any criterion fails.
//! Runtime budgets are part of the criteria.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use quasi_core::arithmetic::{build_frequency_with_beta, torus_distance, BetaConstruction};
use quasi_core::cocycle::{conjugate_cocycle, lyapunov, product, RotationField};
use quasi_core::duality::center_eigenvalue;
use quasi_core::rotation::{rotation, rotation_number};
use quasi_core::spectrum::{ids, spectral_measure, spectrum_indicator, uniform_grid, MeasureMethod};
use quasi_core::verify::{self, HolderConfig, JohnsonMoserConfig, ResonanceConfig, SamplingConfig, SuiteConfig};
use quasi_core::{ExperimentReport, Frequency, PotentialSpec, SchrodingerCocycle, Verdict};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn golden() -> Frequency {
    Frequency::golden(30)
}

fn beta_half() -> Frequency {
    build_frequency_with_beta(&BetaConstruction::new(0.5, 6)).expect("constructed frequency")
}

fn m(rep: &ExperimentReport, label: &str) -> f64 {
    rep.measurement(label).unwrap_or(f64::NAN)
}

fn free_case() -> Outcome {
    let v = PotentialSpec::zero();
    let f = golden();
    let grid = uniform_grid(-1.9, 1.9, 381);
    let curve = ids(&v, &f, &grid, 2000, 64);
    let ids_err = grid
        .iter()
        .zip(&curve.values)
        .map(|(&e, &n)| (n - (1.0 - (e / 2.0).acos() / PI)).abs())
        .fold(0.0, f64::max);
    let rho_err = uniform_grid(-1.9, 1.9, 39)
        .into_iter()
        .map(|e| (rotation_number(&v, &f, e, 50_000, 4).rho - (e / 2.0).acos() / (2.0 * PI)).abs())
        .fold(0.0, f64::max);
    outcome(ids_err <= 2e-3 && rho_err <= 1e-3, format!("max |N - N_free| = {ids_err:.2e}, max |rho - rho_free| = {rho_err:.2e}"))
}

fn johnson_moser() -> Outcome {
    let rep = verify::verify_johnson_moser(&PotentialSpec::amo(0.5), &golden(), &JohnsonMoserConfig::default()).unwrap();
    let dev = m(&rep, "max_deviation");
    outcome(rep.verdict == Verdict::Pass && dev <= 5e-3, format!("max |N - (1 - 2 rho)| = {dev:.2e} over 50 energies"))
}

fn zero_lyapunov() -> Outcome {
    let suite = SuiteConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in [("golden", golden()), ("beta 0.5", beta_half())] {
        for lambda in [0.1, 0.25] {
            let rep = verify::verify_zero_lyapunov(&PotentialSpec::amo(lambda), &f, &suite.zero_lyapunov).unwrap();
            let worst = m(&rep, "max_L");
            ok &= rep.verdict == Verdict::Pass && worst <= 5e-3 && m(&rep, "samples") == 20.0;
            parts.push(format!("{name} l={lambda}: {worst:.1e}"));
        }
    }
    // Off-spectrum control: L = arccosh(3/2) for the free operator at E = 3.
    let (v, f) = (PotentialSpec::zero(), golden());
    let control = lyapunov(&SchrodingerCocycle::new(&v, &f, 3.0), 1_000_000, 4).value;
    let expected = (1.5f64).acosh();
    let excluded = !spectrum_indicator(&v, &f, 3.0, 1000, 8, None).in_spectrum;
    ok &= (control - expected).abs() <= 1e-3 && (control - 0.9624).abs() <= 1e-3 && excluded;
    parts.push(format!("control E=3: {control:.4}"));
    outcome(ok, format!("max L {}", parts.join(", ")))
}

fn holder() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in [("golden", golden()), ("beta 0.5", beta_half())] {
        let (scan, rep) = verify::verify_holder(&PotentialSpec::amo(0.5), &f, &HolderConfig::default()).unwrap();
        ok &= rep.verdict == Verdict::Pass;
        let uppers: Vec<String> = scan.rows.iter().map(|r| format!("{:.3}", r.upper)).collect();
        let lowest = scan.rows.iter().filter_map(|r| r.lower).fold(f64::INFINITY, f64::min);
        parts.push(format!("{name}: upper [{}], min lower {lowest:.2}", uppers.join(", ")));
    }
    // Free case: near the band edge N(2) - N(2 - x) ~ sqrt(x) / pi, so the
    // largest window ratio tends to sqrt(2) / pi.
    let cfg = HolderConfig { l: 4000, ..HolderConfig::default() };
    let (scan, rep) = verify::verify_holder(&PotentialSpec::zero(), &golden(), &cfg).unwrap();
    ok &= rep.verdict == Verdict::Pass;
    let edge = 2f64.sqrt() / PI;
    let worst = scan.rows.iter().map(|r| (r.upper / edge - 1.0).abs()).fold(0.0, f64::max);
    ok &= worst <= 0.2;
    parts.push(format!("free edge constant off by {:.1}%", 100.0 * worst));
    outcome(ok, parts.join("; "))
}

fn duality() -> Outcome {
    let rep = verify::verify_duality(&PotentialSpec::amo(0.5), &golden(), &SuiteConfig::default().duality).unwrap();
    let (h, a, r) = (m(&rep, "hausdorff"), m(&rep, "worst_max_abs"), m(&rep, "worst_residual"));
    let ok = rep.verdict == Verdict::Pass && h <= 0.05 && a <= 1.1 && r <= 1e-4 && m(&rep, "solutions") == 20.0;
    outcome(ok, format!("Hausdorff {h:.4}, max |u_k| {a:.4}, residual {r:.1e} over 20 solutions"))
}

fn measure_bound() -> Outcome {
    let cfg = SuiteConfig::default().measure_bound;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in [("golden", golden()), ("beta 0.5", beta_half())] {
        let rep = verify::verify_measure_bound(&PotentialSpec::amo(0.25), &f, &cfg).unwrap();
        let (c1, c2) = (m(&rep, "constant[eps=0.1]"), m(&rep, "constant[eps=0.05]"));
        ok &= rep.verdict == Verdict::Pass && c1.is_finite() && c2.is_finite() && c2 <= c1;
        parts.push(format!("{name}: C(0.1) = {c1:.4}, C(0.05) = {c2:.4}"));
    }
    outcome(ok, parts.join("; "))
}

fn rotation_resonance() -> Outcome {
    let (v, f) = (PotentialSpec::amo(0.25), beta_half());
    let cfg = ResonanceConfig::default();
    let energies = SamplingConfig::new(30, 7).draw(&v, &f).unwrap();
    let (_, rep) = verify::verify_rotation_resonance(&v, &f, &energies, &cfg).unwrap();
    let (resonant, rho_s) = (m(&rep, "resonant_samples"), m(&rep, "rank_correlation"));
    let mut ok = rep.verdict == Verdict::Pass && resonant >= 3.0 && rho_s <= -0.5;

    // The phase alpha/2 resonates exactly at n = 1; the rotation number of
    // the energy it carries must satisfy the relation with a small multiple.
    let alpha = f.alpha();
    let (energy, _) = center_eigenvalue(&v, &f, alpha / 2.0, cfg.dual_l).unwrap();
    let eps0 = cfg.resolve_epsilon0(&f).unwrap();
    let d = verify::covering_diagnostic(&v, &f, energy, alpha / 2.0, eps0, &cfg);
    let bound = cfg.m_bound_factor * d.n_j().abs();
    let exhaustive = (-bound..=bound)
        .map(|k| torus_distance(2.0 * d.rho - k as f64 * alpha))
        .fold(f64::INFINITY, f64::min);
    ok &= d.n_j().abs() == 1 && d.rotation_residual <= 1e-3 && (d.rotation_residual - exhaustive).abs() <= 1e-15;
    outcome(
        ok,
        format!(
            "{resonant} resonant of {}, rank correlation {rho_s:.3}; alpha/2: n = {}, m = {}, residual {:.1e}",
            energies.len(),
            d.n_j(),
            d.m_best,
            d.rotation_residual
        ),
    )
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn property(name: &str, result: Result<(), String>, failures: &mut Vec<String>) {
    if let Err(e) = result {
        failures.push(format!("{name}: {e}"));
    }
}

fn properties() -> Outcome {
    let mut failures = Vec::new();

    property(
        "continued-fraction determinant",
        runner(64)
            .run(&prop::collection::vec(1u32..5000, 1..40), |qs| {
                let f = Frequency::from_quotients(qs.iter().map(|&a| BigUint::from(a)).collect()).unwrap();
                let (mut p0, mut q0, mut p1, mut q1) = (BigInt::from(1), BigInt::from(0), BigInt::from(0), BigInt::from(1));
                for (k, &a) in qs.iter().enumerate() {
                    let (p2, q2) = (BigInt::from(a) * &p1 + &p0, BigInt::from(a) * &q1 + &q0);
                    (p0, q0, p1, q1) = (p1, q1, p2, q2);
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    prop_assert_eq!(&p1 * &q0 - &p0 * &q1, BigInt::from(sign));
                    let (p, q) = &f.convergents()[k];
                    prop_assert!(BigInt::from(p.clone()) == p1 && BigInt::from(q.clone()) == q1);
                    prop_assert_eq!(f.determinant(k + 1), BigInt::from(sign));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    let f = golden();
    property(
        "cocycle product identity",
        runner(48)
            .run(
                &(1usize..1000, 1usize..1000, 0.0f64..1.0, 0.0f64..3.0, -4.0f64..4.0),
                |(n, k, x, lambda, e)| {
                    let c = SchrodingerCocycle::new(&PotentialSpec::amo(lambda), &f, e);
                    let whole = product(&c, x, n + k);
                    let head = product(&c, x, n);
                    let tail = product(&c, (x + n as f64 * f.alpha()).rem_euclid(1.0), k);
                    let joined = (tail.matrix * head.matrix).scale((tail.log_scale + head.log_scale - whole.log_scale).exp());
                    let rel = joined.max_abs_diff(&whole.matrix) / whole.matrix.norm();
                    prop_assert!(rel < 1e-8, "relative deviation {}", rel);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    // Checked on every product, hyperbolic ones included.
    property(
        "SL(2) determinant",
        runner(48)
            .run(&(0usize..2000, 0.0f64..1.0, 0.0f64..3.0, -4.0f64..4.0), |(n, x, lambda, e)| {
                let p = product(&SchrodingerCocycle::new(&PotentialSpec::amo(lambda), &f, e), x, n);
                prop_assert!(
                    (p.det() - 1.0).abs() <= 1e-8,
                    "det {} with ln ||A_n|| = {:.1}",
                    p.det(),
                    p.log_norm()
                );
                Ok(())
            })
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    property(
        "IDS monotone",
        runner(16)
            .run(&(0.0f64..3.0, 20usize..300, 1usize..8), |(lambda, l, phases)| {
                // The grid covers the Gershgorin interval |E| <= 2 + 2 lambda.
                let c = ids(&PotentialSpec::amo(lambda), &f, &uniform_grid(-9.0, 9.0, 101), l, phases);
                prop_assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(c.values[0] == 0.0 && c.values[100] == 1.0);
                Ok(())
            })
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    property(
        "spectral measure normalization",
        runner(12)
            .run(&(0.0f64..2.0, 0.0f64..1.0, any::<bool>()), |(lambda, theta, herglotz)| {
                let method = if herglotz { MeasureMethod::Herglotz } else { MeasureMethod::EigenWeights };
                let partition = uniform_grid(-7.0, 7.0, 281);
                let mu = spectral_measure(&PotentialSpec::amo(lambda), &f, theta, &partition, 400, method).unwrap();
                let total: f64 = mu.masses.iter().sum();
                prop_assert!((total - 2.0).abs() <= 2e-2, "total mass {}", total);
                Ok(())
            })
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    property(
        "conjugacy invariance",
        runner(12)
            .run(
                &(0.0f64..1.5, -3.0f64..3.0, -0.3f64..0.3, 1i32..4),
                |(lambda, e, amplitude, harmonic)| {
                    let base = SchrodingerCocycle::new(&PotentialSpec::amo(lambda), &f, e);
                    let conj = conjugate_cocycle(RotationField { amplitude, harmonic }, base.clone()).unwrap();
                    let (l0, l1) = (lyapunov(&base, 20_000, 4).value, lyapunov(&conj, 20_000, 4).value);
                    let (r0, r1) = (rotation(&base, 20_000, 4).rho, rotation(&conj, 20_000, 4).rho);
                    prop_assert!((l0 - l1).abs() <= 2e-3, "L {} vs {}", l0, l1);
                    prop_assert!((r0 - r1).abs() <= 2e-3, "rho {} vs {}", r0, r1);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
        &mut failures,
    );

    // Reruns under a fixed seed serialize identically.
    let suite = SuiteConfig::default().reseed(11);
    let v = PotentialSpec::amo(0.25);
    let run = || {
        let rep = verify::run_experiment("measure_bound", &v, &f, &suite).unwrap().without_runtime();
        serde_json::to_string(&rep).unwrap()
    };
    if run() != run() {
        failures.push("rerun of measure_bound differs".into());
    }

    let detail = if failures.is_empty() {
        "continued fractions, product identity, determinant, IDS, normalization, conjugacy, reruns".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn contrast() -> Outcome {
    let cfg = SuiteConfig::default().proxy;
    let f = golden();
    let hot = verify::ac_spectrum_proxy(&PotentialSpec::amo(2.5), &f, &cfg).unwrap();
    let cold = verify::ac_spectrum_proxy(&PotentialSpec::amo(0.25), &f, &cfg).unwrap();
    let (fh, fc) = (m(&hot, "bounded_fraction"), m(&cold, "bounded_fraction"));
    let ok = hot.verdict == Verdict::Fail && fh <= 0.05 && cold.verdict == Verdict::Pass && fc >= 0.9;
    outcome(ok, format!("bounded fraction {fh:.2} at lambda 2.5 (fails), {fc:.2} at lambda 0.25"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("free-case oracle", 120, free_case),
        ("Johnson-Moser consistency", 300, johnson_moser),
        ("zero Lyapunov exponent on the spectrum", 600, zero_lyapunov),
        ("Hölder scans", 600, holder),
        ("Aubry duality", 300, duality),
        ("spectral measure bound", 300, measure_bound),
        ("rotation-resonance trend", 600, rotation_resonance),
        ("property suites", 300, properties),
        ("contrast control", 300, contrast),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.1}s of {budget}s{}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
