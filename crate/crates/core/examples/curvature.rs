// Weyl, Cotton and the tractor curvature of a generic polynomial metric.

use conformal_tractor::geometry::{chart_by_name, curvature_pack};
use conformal_tractor::tractor::tractor_curvature;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let chart = chart_by_name("poly_generic(2,3)")?;
    let x = [0.1, -0.2, 0.05, 0.15, -0.1];
    let pack = curvature_pack(&chart, &x)?;
    println!("{} at {x:?}", chart.label);
    println!("  scalar curvature {:+.6}", pack.scalar);
    println!("  P_00 = {:+.6}, W^0_1_01 = {:+.6}, C_0_01 = {:+.6}", pack.schouten(0, 0), pack.weyl(0, 1, 0, 1), pack.cotton(0, 0, 1));

    let omega = tractor_curvature(&chart, &x, &[1.0, 0.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0, 0.0])?;
    println!("tractor curvature on the (0,1) plane, rows (rho, mu, sigma):");
    for r in 0..omega.nrows() {
        let row: Vec<String> = omega.row(r).iter().map(|v| format!("{v:+.4}")).collect();
        println!("  [{}]", row.join(" "));
    }

    let sphere = chart_by_name("sphere(4)")?;
    let flat_check = tractor_curvature(&sphere, &[0.3, 0.1, -0.2, 0.4], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0])?;
    println!("sphere(4) tractor curvature max entry {:.2e}", flat_check.abs().max());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
