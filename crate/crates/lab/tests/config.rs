mod common;

use bipolar_relax::config::{FieldOutput, LawConfig, SchemeChoice};
use bipolar_relax::RunConfig;
use bipolar_relax_core::GasLaw;

fn edited(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(common::SMALL).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn parses_with_defaults() {
    let c = RunConfig::from_json(common::SMALL).unwrap();
    assert_eq!(c.grid.cells, vec![64]);
    assert_eq!(c.single_eps().unwrap(), 0.1);
    assert!(c.well_prepared);
    assert_eq!(c.fields, FieldOutput::All);
    assert_eq!(c.drift_diffusion.scheme, SchemeChoice::Explicit);
    assert_eq!(c.tolerances.poisson, 1e-10);
    let spec = c.spec(0.03).unwrap();
    assert_eq!((spec.eps, spec.t_final, spec.grid.n(0)), (0.03, 0.02, 64));
}

#[test]
fn json_round_trip() {
    let c = RunConfig::from_json(common::SMALL).unwrap();
    assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
}

#[test]
fn law_serializes_as_three_numbers() {
    let law = LawConfig::from(GasLaw::new(2.0, 1.5, 0.5).unwrap());
    let v = serde_json::to_value(law).unwrap();
    assert_eq!(v, serde_json::json!({"k": 2.0, "gamma": 1.5, "khat": 0.5}));
    let back: LawConfig = serde_json::from_value(v).unwrap();
    assert_eq!(back.law().unwrap(), GasLaw::new(2.0, 1.5, 0.5).unwrap());
    let bad = LawConfig { k: 1.0, gamma: 0.5, khat: 1.0 };
    assert!(bad.law().is_err());
}

#[test]
fn rejects_unknown_fields() {
    let text = edited(|v| {
        v["colour"] = serde_json::json!("blue");
    });
    assert!(RunConfig::from_json(&text).is_err());
    let text = edited(|v| {
        v["grid"]["spacing"] = serde_json::json!(0.1);
    });
    assert!(RunConfig::from_json(&text).is_err());
}

#[test]
fn rejects_non_descending_eps_list() {
    let text = edited(|v| v["eps_list"] = serde_json::json!([0.1, 0.1, 0.01]));
    assert!(RunConfig::from_json(&text).is_err());
    let text = edited(|v| v["eps_list"] = serde_json::json!([0.01, 0.1, 0.03]));
    assert!(RunConfig::from_json(&text).is_err());
}

#[test]
fn rejects_mismatched_means() {
    let text = edited(|v| v["initial"]["n"]["mean"] = serde_json::json!(1.5));
    assert!(RunConfig::from_json(&text).is_err());
}

#[test]
fn sweep_overrides() {
    let c = RunConfig::from_json(common::SMALL).unwrap();
    assert_eq!(c.sweep_eps(&[]).unwrap(), vec![0.1, 0.03, 0.01]);
    assert_eq!(c.sweep_eps(&[0.5, 0.2]).unwrap(), vec![0.5, 0.2]);
    assert!(c.sweep_eps(&[0.2, 0.5]).is_err());
}

#[test]
fn rejects_bad_grid_and_time() {
    assert!(RunConfig::from_json(&edited(|v| v["grid"]["cells"] = serde_json::json!([2]))).is_err());
    assert!(RunConfig::from_json(&edited(|v| v["t_final"] = serde_json::json!(-1.0))).is_err());
    assert!(RunConfig::from_json(&edited(|v| v["cfl"] = serde_json::json!(1.5))).is_err());
    assert!(RunConfig::from_json("{").is_err());
}
