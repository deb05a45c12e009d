use weylcouple::nevanlinna::Tri;
use weylcouple::pipeline::{emit_grid, example_config, run_analyze, run_example, GridSpec, ScenarioConfig, Status};
use weylcouple::Error;

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = run_example("quarter-power-coupling").unwrap().to_json();
    let b = run_example("quarter-power-coupling").unwrap().to_json();
    assert_eq!(a, b);
    assert!(a.contains("\"schema_version\": \"1.0\""));
}

#[test]
fn singular_config_from_json() {
    let cfg = ScenarioConfig::from_json(
        r#"{
            "schema_version": "1.0",
            "label": "singular",
            "model": {
                "m_plus": {"catalog": "singular-at-zero"},
                "m_minus": {"expr": {"kind": "sum",
                    "left": {"kind": "power_law", "c": 1.0, "alpha": -0.5},
                    "right": {"kind": "stieltjes_form", "gamma": 0.0, "sigma": {"atoms": [{"t": 0.0, "weight": 1.0}]}}}},
                "kernel_condition": "KER_EQUAL_KER_SQ_TRUE"
            },
            "expect": {"zero_regular": "NO", "infinity_regular": "YES"}
        }"#,
    )
    .unwrap();
    let rep = run_analyze(&cfg).unwrap();
    assert_eq!(rep.status, Status::Pass);
    let v = rep.verdict.unwrap();
    assert!(v.justification.iter().any(|j| j.rule == "d-property-necessity"));
}

#[test]
fn identity_pair_has_empty_resolvent_set() {
    let cfg = ScenarioConfig::from_json(
        r#"{"schema_version": "1.0", "model": {
            "m_plus": {"expr": {"kind": "from_measure", "a": 0.0, "b": 1.0, "sigma": {}}},
            "m_minus": {"expr": {"kind": "from_measure", "a": 0.0, "b": 1.0, "sigma": {}}}}}"#,
    )
    .unwrap();
    let rep = run_analyze(&cfg).unwrap();
    assert!(rep.flags.iter().any(|f| f == "EMPTY_RESOLVENT_SET"));
    assert!(rep.verdict.is_none());
    assert!(rep.errors.contains_key("verdict"));
}

#[test]
fn config_errors() {
    assert!(matches!(ScenarioConfig::from_json("{"), Err(Error::Config(_))));
    let wrong_version =
        r#"{"schema_version": "2.0", "model": {"m_plus": {"catalog": "free-neumann"}, "m_minus": {"catalog": "free-neumann"}}}"#;
    assert!(matches!(ScenarioConfig::from_json(wrong_version), Err(Error::Config(_))));
    let bad_tol = r#"{"schema_version": "1.0", "certification": {"d_per_decade": 0},
        "model": {"m_plus": {"catalog": "free-neumann"}, "m_minus": {"catalog": "free-neumann"}}}"#;
    assert!(matches!(ScenarioConfig::from_json(bad_tol), Err(Error::Config(_))));
    assert!(matches!(run_example("no-such-example"), Err(Error::UnknownId(_))));
}

#[test]
fn failed_expectation_is_reported() {
    let mut cfg = example_config("singular-zero").unwrap();
    cfg.expect.insert("zero_regular".into(), Tri::Yes);
    let rep = run_analyze(&cfg).unwrap();
    assert_eq!(rep.status, Status::Fail);
}

fn grid(json: &str) -> GridSpec {
    serde_json::from_str(json).unwrap()
}

#[test]
fn mirror_ratio_grid_is_constant() {
    let g = grid(
        r#"{"kind": "d_ratio", "window": [1, 1e8], "per_decade": 4,
            "model": {"m_plus": {"expr": {"kind": "power_law", "c": -1.0, "alpha": 0.5}},
                      "m_minus": {"expr": {"kind": "power_law", "c": -1.0, "alpha": 0.5}}}}"#,
    );
    let csv = emit_grid(&g).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("y,ratio"));
    let mut n = 0;
    for l in lines {
        let r: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 33);
}

#[test]
fn function_grid_follows_inverse_square_root() {
    let g = grid(r#"{"kind": "function", "window": [1, 1e4], "function": {"catalog": "free-neumann"}}"#);
    let csv = emit_grid(&g).unwrap();
    for l in csv.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        let want = v[0].powf(-0.5) * std::f64::consts::FRAC_PI_4.sin();
        assert!((v[2] - want).abs() < 1e-12 * want.max(1.0));
    }
}

#[test]
fn empty_window_is_an_error() {
    let g = grid(r#"{"kind": "function", "window": [10, 10], "function": {"catalog": "free-neumann"}}"#);
    assert!(emit_grid(&g).is_err());
}
