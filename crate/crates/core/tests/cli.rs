use std::process::Command;

fn lab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tractor-lab")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 output"))
}

fn write_config(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("tractor-lab-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn quadric_demo_passes_with_one_record_per_experiment() {
    let (code, out) = lab(&["quadric-demo"]);
    assert_eq!(code, 0, "{out}");
    let records: Vec<&str> = out.lines().filter(|l| l.starts_with('{')).collect();
    assert_eq!(records.len(), 6);
    assert!(out.contains("quadric conformal holonomy is -I"));
}

#[test]
fn json_flag_prints_only_records_in_fixed_field_order() {
    let (code, out) = lab(&["check-groups", "--json", "--seed", "3"]);
    assert_eq!(code, 0);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["status"] == "pass");
        let keys = ["\"id\"", "\"status\"", "\"proposition\"", "\"claim\"", "\"basis\"", "\"primary\"", "\"measured\"", "\"expected\""];
        let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = lab(&["curvature", "--seed", "5"]);
    let b = lab(&["curvature", "--seed", "5"]);
    assert_eq!(a, b);
}

#[test]
fn failing_record_gives_nonzero_exit() {
    let cfg = write_config(
        "fail.toml",
        "[[experiment]]\nid = \"quadric-holonomy-(1,2)\"\ntolerance = 1e-30\n",
    );
    let (code, out) = lab(&["all", "--config", cfg.to_str().unwrap()]);
    assert_ne!(code, 0);
    assert!(out.contains("\"violated\":{\"invariant\":\"holonomy_plus_identity\""), "{out}");
}

#[test]
fn config_with_steps_and_path() {
    let cfg = write_config(
        "path.toml",
        r#"
steps = 400
[[experiment]]
id = "transport-path"
[experiment.path]
[[experiment.path.segments]]
chart = "poly_generic(2,3)"
t_range = [0.0, 1.0]
curve = { kind = "line", from = [0.0, 0.0, 0.0, 0.0, 0.0], to = [0.3, -0.2, 0.1, 0.0, 0.2] }
"#,
    );
    let (code, out) = lab(&["transport", "--config", cfg.to_str().unwrap(), "--json"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(v["measured"]["steps"].as_f64(), Some(400.0));
    assert!(v["measured"]["metric_preservation"].as_f64().unwrap() < 1e-7);
}

#[test]
fn bad_config_exits_with_usage_error() {
    let cfg = write_config("bad.toml", "[[experiment]]\nid = \"no-such-experiment\"\n");
    let (code, _) = lab(&["all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
}
