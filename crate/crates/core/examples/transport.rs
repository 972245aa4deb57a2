// Parallel transport of a tractor along an arc, with the metric drift and
// the step-halving estimate.

use conformal_tractor::geometry::chart_by_name;
use conformal_tractor::tractor::{parallel_transport, tractor_metric, Curve, LoopPath, Segment, TractorVector, TransportOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let chart = chart_by_name("product_sphere(2,3)")?;
    let curve = Curve::Arc {
        center: vec![0.1, 0.0, -0.2, 0.3, 0.0],
        radius: 0.5,
        e1: vec![1.0, 0.0, 0.0, 0.0, 0.0],
        e2: vec![0.0, 0.0, 0.6, 0.8, 0.0],
        theta0: 0.0,
        theta1: 5.0,
    };
    let path = LoopPath::single(Segment::new(chart.clone(), curve, (0.0, 1.0))?);
    let u0 = TractorVector::new(0.4, vec![1.0, -0.3, 0.2, 0.5, 0.1], -0.7, path.start(), chart.label.clone());

    let (u1, report) = parallel_transport(&path, &u0, &TransportOptions::default())?;
    let end = path.segments[0].end();
    let h0 = tractor_metric(&chart.metric(&path.start()), &u0, &u0)?;
    let h1 = tractor_metric(&chart.metric(&end), &u1, &u1)?;
    println!("h(U,U): start {h0:+.12}, end {h1:+.12}");
    println!("max drift {:.2e}, with half step {:.2e}", report.drift, report.drift_halved.unwrap_or(f64::NAN));
    println!("halving estimate {:.2e} over {} steps", report.halving_estimate.unwrap_or(f64::NAN), report.steps);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
