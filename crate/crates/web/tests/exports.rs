use robin_web::{disk_spectrum_json, ellipse_effective_json, mode_profile_json};
use serde_json::Value;

#[test]
fn disk_spectrum_counts_edge_states() {
    let v: Value = serde_json::from_str(&disk_spectrum_json(1e-2).unwrap()).unwrap();
    let n = v["count"].as_u64().unwrap() as f64;
    assert!((n - 20.0).abs() <= 3.0);
    let first = &v["records"][0];
    assert_eq!(first["m"], 0);
    assert!(first["lambda"].as_f64().unwrap() < -1e-2);
}

#[test]
fn profile_decays_at_boundary_rate() {
    let v: Value = serde_json::from_str(&mode_profile_json(1e-3, 0, 200).unwrap()).unwrap();
    let u = v["u"].as_array().unwrap();
    assert_eq!(u.len(), 200);
    assert!(u[0].as_f64().unwrap() > u[199].as_f64().unwrap());
    let r = v["normalized_rate"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 0.05);
    assert!(mode_profile_json(1e-2, 40, 10).is_err());
}

#[test]
fn effective_bounds_are_ordered() {
    let v: Value = serde_json::from_str(&ellipse_effective_json(2.0, 1.0, 1e-3, 2.0, 6).unwrap()).unwrap();
    let lo = v["lower"].as_array().unwrap();
    let up = v["upper"].as_array().unwrap();
    for (a, b) in lo.iter().zip(up) {
        assert!(a.as_f64().unwrap() < b.as_f64().unwrap());
    }
    assert_eq!(v["outline"].as_array().unwrap().len(), 256);
}
