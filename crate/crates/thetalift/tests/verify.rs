use thetalift::verify::{report_json, run_suite, run_suites, SuiteConfig, SUITES};

fn quiet() -> SuiteConfig {
    SuiteConfig { record_timing: false, ..SuiteConfig::default() }
}

#[test]
fn suite_list_is_complete_and_unknown_names_fail() {
    assert_eq!(SUITES.len(), 15);
    assert!(SUITES.contains(&"eichler"));
    assert!(run_suite("no-such-suite", &quiet()).is_err());
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let names = ["milgram", "kiefer", "local-splits", "representation-oracle", "eichler"];
    let first = run_suites(&names, &quiet()).unwrap();
    assert!(first.iter().all(|r| r.wall_time == 0.0));
    assert_eq!(report_json(&first), report_json(&run_suites(&names, &quiet()).unwrap()));
}

#[test]
fn seed_changes_random_samples_but_not_verdicts() {
    let other = SuiteConfig { seed: 7, ..quiet() };
    let a = run_suite("eichler", &quiet()).unwrap();
    let b = run_suite("eichler", &other).unwrap();
    assert!(a.iter().chain(&b).all(|r| r.passed));
    assert_ne!(a, b);
}

#[test]
fn config_round_trips_and_validates() {
    let c = SuiteConfig::default();
    let text = serde_json::to_string(&c).unwrap();
    let back: SuiteConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    let partial: SuiteConfig = serde_json::from_str(r#"{"eps": 1e-6}"#).unwrap();
    assert_eq!(partial.eps, 1e-6);
    assert_eq!(partial.tau_grid, c.tau_grid);
    assert!(SuiteConfig { eps: 0.0, ..c.clone() }.validate().is_err());
    assert!(SuiteConfig { tau_grid: vec![[[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]]], ..c }.validate().is_err());
}
