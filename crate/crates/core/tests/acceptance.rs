//! One line per acceptance criterion, with the gates it is held to.
//! Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use conformal_tractor::experiment::{run_all, ExperimentConfig, ReportRecord};

struct Criterion {
    number: u32,
    title: &'static str,
    ids: &'static [&'static str],
    /// Wall-time budget in seconds, where the criterion has one.
    budget: Option<f64>,
    /// Measured values to echo on the line, by gate name.
    show: &'static [&'static str],
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        number: 1,
        title: "metric preservation (drift < 1e-7, halving ratio >= 8)",
        ids: &[
            "metric-preservation-flat(2,3)",
            "metric-preservation-sphere(5)",
            "metric-preservation-product_sphere(2,3)",
            "metric-preservation-poly_generic(2,3)",
        ],
        budget: Some(30.0),
        show: &["max_drift", "halving_ratio", "min_path_ratio"],
    },
    Criterion {
        number: 2,
        title: "conformal invariance (10 pairs, < 1e-6)",
        ids: &["conformal-invariance-poly_generic(2,3)"],
        budget: Some(30.0),
        show: &["conjugation_residual"],
    },
    Criterion {
        number: 3,
        title: "flatness on sphere(3..5) (curvature < 1e-6, contractible holonomy within 1e-6 of I)",
        ids: &["sphere-flatness-3", "sphere-flatness-4", "sphere-flatness-5"],
        budget: None,
        show: &["max_tractor_curvature", "contractible_holonomy_minus_identity"],
    },
    Criterion {
        number: 4,
        title: "quadric tractor holonomy is -I (within 1e-5)",
        ids: &["quadric-holonomy-(1,2)", "quadric-holonomy-(2,3)"],
        budget: None,
        show: &["holonomy_plus_identity"],
    },
    Criterion {
        number: 5,
        title: "associated holonomy over O/P_line is I (within 1e-6) on the loop where tractor holonomy is -I",
        ids: &["associated-holonomy-(1,2)", "associated-holonomy-(2,3)"],
        budget: None,
        show: &["associated_minus_identity", "tractor_plus_identity"],
    },
    Criterion {
        number: 6,
        title: "tautological line monodromy (-1 antipodal, +1 controls)",
        ids: &["line-monodromy-(1,2)", "line-monodromy-(2,3)"],
        budget: None,
        show: &["antipodal_sign", "control-chart_sign", "control-excursion_sign"],
    },
    Criterion {
        number: 7,
        title: "ambient cross-validation (tangential Ricci and connection < 1e-6)",
        ids: &["ambient-vs-beg-flat-2-3", "ambient-vs-beg-sphere-4"],
        budget: Some(60.0),
        show: &["tangential_ricci", "connection_compare"],
    },
    Criterion {
        number: 8,
        title: "group suite (10^3 checks each, 1e-10/1e-12 gates)",
        ids: &["group-suite-(1,2)", "group-suite-(2,3)"],
        budget: Some(10.0),
        show: &["closure_residual", "ad_compatibility", "det_twist_homomorphism", "ad_minus_identity", "ad_levi_min_displacement"],
    },
    Criterion {
        number: 9,
        title: "tau compatibility on all registered charts (< 1e-8)",
        ids: &["tau-compatibility"],
        budget: None,
        show: &["tau_residual"],
    },
    Criterion {
        number: 10,
        title: "curvature structure (null part < 1e-7, Weyl and Cotton blocks < 1e-6)",
        ids: &["curvature-structure-product_sphere(2,2)", "curvature-structure-poly_generic(2,3)"],
        budget: None,
        show: &["first_column_bottom_row", "middle_block_vs_weyl", "strips_vs_cotton"],
    },
];

fn worst(records: &[ReportRecord], key: &str) -> Option<f64> {
    let vals: Vec<f64> = records.iter().filter_map(|r| r.measured.get(key).copied()).collect();
    if vals.is_empty() {
        return None;
    }
    // Ratios and displacements are lower bounds; everything else is a residual.
    let lower_bound = key.ends_with("ratio") || key.ends_with("displacement") || key.ends_with("_sign") && key.starts_with("control");
    Some(if lower_bound {
        vals.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    })
}

fn main() -> ExitCode {
    let mut all_pass = true;
    for c in &CRITERIA {
        let cfgs: Vec<ExperimentConfig> = c.ids.iter().map(|id| ExperimentConfig::new(*id)).collect();
        let start = Instant::now();
        let records = match run_all(&cfgs, false) {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {:>2} FAIL {}: {e}", c.number, c.title);
                all_pass = false;
                continue;
            }
        };
        let secs = start.elapsed().as_secs_f64();
        let in_budget = c.budget.is_none_or(|b| secs < b);
        let pass = in_budget && records.iter().all(|r| r.passed());
        all_pass &= pass;
        let shown: Vec<String> = c
            .show
            .iter()
            .filter_map(|k| worst(&records, k).map(|v| format!("{k}={v:.3e}")))
            .collect();
        let budget = c.budget.map(|b| format!(" (budget {b} s)")).unwrap_or_default();
        println!(
            "criterion {:>2} {} {}: {} time={secs:.2}s{budget}",
            c.number,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            shown.join(" ")
        );
        for r in records.iter().filter(|r| !r.passed()) {
            if let Some(v) = &r.violated {
                println!("    {} violated {}: measured {:e}, expected {}", r.id, v.invariant, v.measured, v.expected);
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
