// Run experiments from an inline TOML config and print the report.

use conformal_tractor::experiment::{emit_report, run_all, ConfigFile};

const CONFIG: &str = r#"
seed = 7

[[experiment]]
id = "quadric-holonomy-(1,2)"

[[experiment]]
id = "associated-holonomy-(1,2)"
variant = "P_line"
representation = "det_twisted_standard"

[[experiment]]
id = "transport-path"
[experiment.path]
closed = true
[[experiment.path.segments]]
chart = "sphere(3)"
t_range = [0.0, 1.0]
curve = { kind = "arc", center = [0.0, 0.0, 0.0], radius = 0.8, e1 = [1.0, 0.0, 0.0], e2 = [0.0, 1.0, 0.0], theta0 = 0.0, theta1 = 6.283185307179586 }
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfgs = ConfigFile::parse(CONFIG)?.resolved();
    let records = run_all(&cfgs, false)?;
    print!("{}", emit_report(&records));
    if records.iter().any(|r| !r.passed()) {
        return Err("an experiment failed".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
