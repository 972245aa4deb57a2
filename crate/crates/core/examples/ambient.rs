// The first-order ambient metric over a chart and its comparison with the
// tractor connection.

use conformal_tractor::ambient::{ambient_connection_compare, ambient_metric, frame_metric_residual, tangential_ricci_check};
use conformal_tractor::geometry::chart_by_name;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["flat(2,3)", "sphere(4)", "poly_generic(2,3)"] {
        let chart = chart_by_name(name)?;
        let amb = ambient_metric(&chart)?;
        let n = chart.dim();
        let x: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64) - 0.15).collect();
        let v: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect();
        let ricci = tangential_ricci_check(&amb, &x)?;
        println!(
            "{name}: tangential Ricci {:.2e}, Ric_rho_rho {:+.3e}, connection diff {:.2e}, frame metric {:.2e}",
            ricci.tangential,
            ricci.rho_rho,
            ambient_connection_compare(&amb, &x, &v)?,
            frame_metric_residual(&amb, &x)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
