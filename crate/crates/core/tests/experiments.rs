use robin_core::experiments::{check, default_config, run, run_in_memory, ExperimentConfig, ExperimentId};
use robin_core::Error;

#[test]
fn written_summary_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    for id in [ExperimentId::Model1dLemmas, ExperimentId::Weyl, ExperimentId::Rozenblum] {
        let sub = dir.path().join(id.name());
        let (outcome, path) = run(&default_config(id), Some(&sub)).unwrap();
        for a in &outcome.summary.artifacts {
            assert!(sub.join(a).exists(), "{a}");
        }
        let report = check(&path).unwrap();
        assert!(report.consistent(), "{id}: {:?}", report.mismatches);
    }
}

#[test]
fn tampered_table_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let (_, path) = run(&default_config(ExperimentId::Weyl), Some(dir.path())).unwrap();
    let counts = dir.path().join("counts.csv");
    let text = std::fs::read_to_string(&counts).unwrap();
    // Inflate the first count far beyond the tolerance.
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
    fields[2] = "1000".into();
    lines[1] = fields.join(",");
    std::fs::write(&counts, lines.join("\n") + "\n").unwrap();
    let report = check(&path).unwrap();
    assert!(report.mismatches.contains(&"zero_threshold_deviation".to_string()));
}

#[test]
fn reruns_are_bit_identical() {
    let cfg = default_config(ExperimentId::DiskTheoremMain);
    let a = run_in_memory(&cfg).unwrap();
    let b = run_in_memory(&cfg).unwrap();
    for name in a.tables.names().filter(|n| *n != "timing") {
        assert_eq!(a.tables.csv(name), b.tables.csv(name), "{name}");
    }
}

#[test]
fn empty_h_list_rejected() {
    let text = r#"
experiment = "weyl"
h = []
[tolerances]
runtime_s = 1.0
"#;
    assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))));
}

#[test]
fn solver_failures_mark_partial() {
    let mut cfg = default_config(ExperimentId::Bracketing);
    // A collar wider than the disk radius allows is rejected per grid point.
    cfg.collar.as_mut().unwrap().delta = Some(0.9);
    cfg.h = vec![1e-2];
    let out = run_in_memory(&cfg).unwrap();
    assert!(out.summary.partial);
    assert_eq!(out.summary.errors.len(), 1);
    assert!(!out.summary.pass());
}

#[test]
fn annulus_collars_bracket_exact_values() {
    let out = run_in_memory(&default_config(ExperimentId::Annulus)).unwrap();
    for c in &out.summary.criteria {
        println!("{} {} {}", c.name, c.value, c.pass);
    }
    assert!(!out.summary.partial, "{:?}", out.summary.errors);
    assert!(out.summary.criterion("bracket_order").unwrap().pass);
    assert!(out.summary.criterion("count_deviation").unwrap().pass);
}

#[test]
fn shipped_configs_match_defaults() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for id in ExperimentId::ALL {
        let cfg = ExperimentConfig::load(&root.join(format!("{}.toml", id.name()))).unwrap();
        let mut expected = default_config(id);
        expected.output.dir = cfg.output.dir.clone();
        assert_eq!(cfg, expected, "{id}");
    }
}
