// Transport for a rescaled metric agrees with the original transport
// conjugated by the change of splitting.

use std::sync::Arc;

use conformal_tractor::geometry::{chart_by_name, ConformalFactor, ScalarField};
use conformal_tractor::tractor::{change_matrix, transport_operator, Curve, LoopPath, Segment, TransportOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let chart = chart_by_name("poly_generic(2,3)")?;
    let factor = Arc::new(ConformalFactor::preset("wave", 5)?);
    let hat = chart.conformal_rescale(factor.clone());

    let (from, to) = (vec![-0.2, 0.1, 0.0, 0.2, -0.1], vec![0.3, -0.2, 0.25, 0.0, 0.1]);
    let curve = Curve::Line {
        from: from.clone(),
        to: to.clone(),
    };
    let opts = TransportOptions::default();
    let t_g = transport_operator(&LoopPath::single(Segment::new(chart.clone(), curve.clone(), (0.0, 1.0))?), &opts)?;
    let t_hat = transport_operator(&LoopPath::single(Segment::new(hat, curve.clone(), (0.0, 1.0))?), &opts)?;

    let change = |x: &[f64]| {
        let (u, grad) = factor.gradient(x);
        change_matrix(&chart.metric(x), u, &grad)
    };
    let m0_inv = change(&from).try_inverse().expect("invertible");
    let residual = (&t_hat.operator - change(&to) * &t_g.operator * m0_inv).abs().max();
    println!("|T_hat - M(x1) T M(x0)^-1| = {residual:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
