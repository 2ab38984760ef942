use quasi_core::verify::{self, JohnsonMoserConfig, SamplingConfig, SuiteConfig};
use quasi_core::{ExperimentReport, Frequency, PotentialSpec, Verdict};

fn small_jm() -> JohnsonMoserConfig {
    JohnsonMoserConfig {
        points: 8,
        l: 300,
        phases: 4,
        rotation_steps: 4000,
        rotation_phases: 4,
        ..JohnsonMoserConfig::default()
    }
}

#[test]
fn suite_config_round_trips_and_accepts_partial_files() {
    let suite = SuiteConfig::default().reseed(5);
    let text = serde_json::to_string(&suite).unwrap();
    let back: SuiteConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&suite).unwrap());

    let partial: SuiteConfig = serde_json::from_str(r#"{"holder": {"eps_list": [0.2, 0.1]}}"#).unwrap();
    assert_eq!(partial.holder.eps_list, vec![0.2, 0.1]);
    assert_eq!(partial.holder.l, SuiteConfig::default().holder.l);
}

#[test]
fn reseeding_is_ordered_and_base_one_is_the_default() {
    let d = serde_json::to_value(SuiteConfig::default()).unwrap();
    assert_eq!(serde_json::to_value(SuiteConfig::default().reseed(1)).unwrap(), d);
    let s = SuiteConfig::default().reseed(40);
    let seeds = [
        s.zero_lyapunov.sampling.seed,
        s.holder.sampling.seed,
        s.duality.sampling.seed,
        s.proxy.sampling.seed,
        s.measure_bound.sampling.seed,
        s.growth_samples.seed,
        s.resonance_samples.seed,
    ];
    assert_eq!(seeds, [40, 41, 42, 43, 44, 45, 46]);
}

#[test]
fn reports_serialize_without_runtime_and_round_trip() {
    let (v, f) = (PotentialSpec::amo(0.5), Frequency::golden(30));
    let rep = verify::verify_johnson_moser(&v, &f, &small_jm()).unwrap();
    assert!(rep.runtime_seconds.is_some());
    assert_eq!(rep.verdict, Verdict::Pass);
    let stripped = rep.without_runtime();
    let text = serde_json::to_string(&stripped).unwrap();
    assert!(!text.contains("runtime_seconds"));
    assert!(text.contains("\"verdict\":\"pass\""));
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, stripped);
}

#[test]
fn impossible_tolerance_fails_and_unknown_names_error() {
    let (v, f) = (PotentialSpec::amo(0.5), Frequency::golden(30));
    let cfg = JohnsonMoserConfig { tolerance: 1e-14, ..small_jm() };
    let rep = verify::verify_johnson_moser(&v, &f, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(!rep.passed());
    assert!(verify::run_experiment("no_such_experiment", &v, &f, &SuiteConfig::default()).is_err());
}

#[test]
fn sampling_is_seeded_and_stays_in_the_spectrum() {
    let (v, f) = (PotentialSpec::amo(1.0), Frequency::golden(30));
    let cfg = SamplingConfig { l: 300, phases: 4, ..SamplingConfig::new(4, 3) };
    let a = cfg.draw(&v, &f).unwrap();
    assert_eq!(a, cfg.draw(&v, &f).unwrap());
    assert_ne!(a, SamplingConfig { seed: 4, ..cfg.clone() }.draw(&v, &f).unwrap());
    // The critical spectrum lies in [-4, 4].
    assert!(a.iter().all(|e| e.abs() <= 4.0));
}
