use bellmag::feasibility::{
    analyze, compare_thermal, effective_couplings, load_config, parse_config, pump_amplitude, thermal_occupation,
    ExperimentParams, FrequencyConvention, ThermalSpec, HBAR, K_B,
};
use bellmag::optimizer::{optimize_settings, Objective, OptimizerBudget};
use bellmag::Error;
use std::f64::consts::{LN_2, TAU};
use std::path::Path;

fn preset_path() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/reference_preset.json"))
}

#[test]
fn preset_file_matches_builtin_preset() {
    let loaded = load_config(preset_path()).unwrap();
    assert_eq!(loaded.effective_couplings, ExperimentParams::reference_preset().effective_couplings);
    assert_eq!(loaded.kappa1(), 1e9);
    assert_eq!(loaded.thermal, ThermalSpec::Occupation(0.026));
}

#[test]
fn preset_conversion_pulse() {
    let report = analyze(&load_config(preset_path()).unwrap()).unwrap();
    assert!((report.g2tau - 1.5).abs() < 1e-12);
    assert!((report.t - 0.95).abs() < 0.005, "T = {}", report.t);
    assert!((report.t - (1.0 - (-3.0f64).exp())).abs() < 1e-12);
}

#[test]
fn preset_squeezing_pulse_is_flagged() {
    let report = analyze(&ExperimentParams::reference_preset()).unwrap();
    assert!((report.g1tau - 0.0248).abs() < 1e-12);
    assert!(report.warnings.iter().any(|w| w.contains("0.0248")));
    assert!((report.p - (1.0 - (-0.0496f64).exp())).abs() < 1e-12);
}

#[test]
fn preset_decoherence_margin() {
    let report = analyze(&ExperimentParams::reference_preset()).unwrap();
    assert!((report.decoherence_margin - 106e-9 * 1e6 * 0.026).abs() < 1e-15);
    assert!((report.decoherence_margin - 2.8e-3).abs() < 1e-4);
    assert!(report.flags.decoherence);
    assert!(report.flags.weak_coupling);
    assert!(report.flags.over_coupling);
    assert!(report.all_pass());
}

#[test]
fn quoted_coupling_chain() {
    // G = g |alpha| = 73 kHz from g = 10.4 Hz needs |alpha| ~ 7019, whatever
    // the 2 pi convention, since it cancels in the ratio
    let alpha: f64 = 73e3 / 10.4;
    assert!((alpha - 7019.23).abs() < 0.01);
    for scale in [1.0, TAU] {
        let kappa_ex = 1e9 * scale;
        let params = ExperimentParams {
            g: 10.4 * scale,
            kappa_ex1: kappa_ex,
            kappa_ex2: kappa_ex,
            eps1: alpha * kappa_ex / 2.0,
            eps2: alpha * kappa_ex / 2.0,
            effective_couplings: None,
            ..ExperimentParams::reference_preset()
        };
        let (g1, g2) = effective_couplings(&params).unwrap();
        assert!((g1 / scale - 73e3).abs() < 1e-6 * 73e3);
        assert!((g2 / scale - 73e3).abs() < 1e-6 * 73e3);
        let report = analyze(&params).unwrap();
        assert!((report.alpha1.unwrap() - alpha).abs() < 1e-9 * alpha);
    }
}

#[test]
fn pump_amplitude_examples() {
    assert!((pump_amplitude(3.0, 2.0, 0.0).unwrap().norm() - 3.0).abs() < 1e-15);
    assert_eq!(pump_amplitude(0.0, 2.0, 0.7).unwrap().norm(), 0.0);
    assert!((pump_amplitude(0.5, 1.0, 0.0).unwrap().norm() - 1.0).abs() < 1e-15);
    assert!(matches!(pump_amplitude(1.0, 0.0, 0.0), Err(Error::SingularDrive { .. })));
}

#[test]
fn thermal_occupation_anchors() {
    let omega = 1e10;
    let t = HBAR * omega / (K_B * LN_2);
    assert!((thermal_occupation(omega, t, FrequencyConvention::Angular).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(thermal_occupation(omega, 0.0, FrequencyConvention::Angular).unwrap(), 0.0);

    let cmp = compare_thermal(7.95e9, 0.010, 0.026).unwrap();
    assert!((cmp.angular - 2.311e-3).abs() < 1e-6, "{}", cmp.angular);
    assert!(cmp.ordinary < 1e-16);
    // neither convention gives the quoted value
    assert!((cmp.angular - cmp.quoted).abs() > 0.02);
}

#[test]
fn optimized_s_is_attached_on_request() {
    let report = analyze(&ExperimentParams::reference_preset()).unwrap();
    assert!(report.optimized_s.is_none());
    let report = report.with_optimized_s(&OptimizerBudget::default()).unwrap();
    let direct = optimize_settings(&Objective::ideal(report.p, report.t).unwrap(), &OptimizerBudget::default()).unwrap();
    assert_eq!(report.optimized_s, Some(direct.best_s));
    assert!(direct.best_s > 2.0 && direct.best_s < 2.45);
}

#[test]
fn schema_errors_are_collected() {
    let err = parse_config(r#"{"kappa1": "fast", "tau1_ns": -3, "bogus": 1, "G1": "1 MHz"}"#).unwrap_err();
    let Error::Schema { keys } = err else { panic!("{err:?}") };
    for needle in ["kappa1", "tau1_ns", "tau2_ns", "bogus", "G1, G2", "kappa2"] {
        assert!(keys.iter().any(|k| k.contains(needle)), "{needle} missing from {keys:?}");
    }
    assert!(matches!(parse_config("[1, 2]"), Err(Error::Schema { .. })));
    assert!(matches!(parse_config("{"), Err(Error::Schema { .. })));
}

#[test]
fn split_linewidths_must_add_up() {
    let base = r#""G1": "20 MHz", "G2": "100 MHz", "tau1_ns": 31, "tau2_ns": 75"#;
    let ok = parse_config(&format!(
        r#"{{ "kappa1": "1 GHz", "kappa_i1": "0.05 GHz", "kappa2": "1 GHz", {base} }}"#
    ))
    .unwrap();
    assert!((ok.kappa_ex1 - 0.95e9 * TAU).abs() < 1.0);
    assert!((ok.kappa1() - 1e9 * TAU).abs() < 1.0);
    let report = analyze(&ok).unwrap();
    assert!((report.over_coupling_ratio1 - 0.05 / 0.95).abs() < 1e-12);
    assert!(report.flags.over_coupling);

    let bad = parse_config(&format!(
        r#"{{ "kappa1": "1 GHz", "kappa_ex1": "0.5 GHz", "kappa2": "1 GHz", {base} }}"#
    ));
    assert!(matches!(bad, Err(Error::Schema { .. })));
}

#[test]
fn ordinary_convention_is_default() {
    let text = r#"{ "kappa1": "1 GHz", "kappa2": "1 GHz", "G1": "20 MHz", "G2": "100 MHz", "tau1_ns": 31, "tau2_ns": 75 }"#;
    let ordinary = analyze(&parse_config(text).unwrap()).unwrap();
    // all rates pick up the same 2 pi, so G~ tau doubles in angular units
    let angular = analyze(&ExperimentParams::reference_preset()).unwrap();
    assert!((ordinary.g2tau / angular.g2tau - TAU).abs() < 1e-9);
}
