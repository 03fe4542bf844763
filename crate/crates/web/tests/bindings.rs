use pmc_helix_web::{compatibility_summary, frenet_rows, verify_summary};
use serde_json::Value;

#[test]
fn case5_summary_is_passing() {
    let s: Value =
        serde_json::from_str(&verify_summary("case5", 1.0, 4, r#"{"H":0.5,"T":0.6}"#, 6).unwrap())
            .unwrap();
    assert_eq!(s["class"], "case5");
    assert_eq!(s["all_pass"], true);
    assert!((s["t_norm"].as_f64().unwrap() - 0.6).abs() < 1e-6);
}

#[test]
fn torus_helix_summary_fails() {
    let json = verify_summary(
        "torus-helix",
        1.0,
        3,
        r#"{"r1":0.6,"r2":0.8,"slope":0.4}"#,
        6,
    )
    .unwrap();
    let s: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(s["class"], "not-pmc-helix");
    assert_eq!(s["all_pass"], false);
}

#[test]
fn case5_coordinate_curve_curvatures() {
    let r: Value =
        serde_json::from_str(&frenet_rows("case5", 1.0, 4, r#"{"H":0.5,"T":0.6}"#, 0, 4).unwrap())
            .unwrap();
    for k in r["kappa"].as_array().unwrap() {
        assert!((k[0].as_f64().unwrap() - 0.8).abs() < 1e-6);
        assert!((k[1].as_f64().unwrap() - 0.6).abs() < 1e-6);
    }
}

#[test]
fn compatibility_is_tiny_for_valid_data() {
    for (c, h, t) in [(1.0, 0.5, 0.6), (-1.0, 0.0, 0.5)] {
        let r: Value = serde_json::from_str(&compatibility_summary(c, h, t, 1.0).unwrap()).unwrap();
        for v in r.as_object().unwrap().values() {
            assert!(v.as_f64().unwrap() < 1e-10);
        }
    }
}

#[test]
fn bad_input_is_an_error_message() {
    assert!(verify_summary("case9", 1.0, 2, "{}", 4)
        .unwrap_err()
        .contains("unknown kind"));
    assert!(verify_summary("case5", 1.0, 4, r#"{"H":0.5}"#, 4)
        .unwrap_err()
        .contains("\"T\""));
    assert!(verify_summary("case5", 1.0, 4, "not json", 4).is_err());
    assert!(compatibility_summary(1.0, 0.5, 1.5, 1.0).is_err());
}
