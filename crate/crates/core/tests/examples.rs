macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(group_checks, "group_checks.rs");
example!(curvature, "curvature.rs");
example!(transport, "transport.rs");
example!(conformal_change, "conformal_change.rs");
example!(quadric_holonomy, "quadric_holonomy.rs");
example!(associated_bundle, "associated_bundle.rs");
example!(ambient, "ambient.rs");
example!(experiment_report, "experiment_report.rs");

#[test]
fn group_checks_runs() {
    group_checks::run_example().unwrap();
}

#[test]
fn curvature_runs() {
    curvature::run_example().unwrap();
}

#[test]
fn transport_runs() {
    transport::run_example().unwrap();
}

#[test]
fn conformal_change_runs() {
    conformal_change::run_example().unwrap();
}

#[test]
fn quadric_holonomy_runs() {
    quadric_holonomy::run_example().unwrap();
}

#[test]
fn associated_bundle_runs() {
    associated_bundle::run_example().unwrap();
}

#[test]
fn ambient_runs() {
    ambient::run_example().unwrap();
}

#[test]
fn experiment_report_runs() {
    experiment_report::run_example().unwrap();
}
