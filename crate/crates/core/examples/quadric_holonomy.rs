// Tractor holonomy of the quadric (S^p x S^q)/Z2 around its noncontractible
// loop, next to the contractible controls.

use conformal_tractor::homogeneous::{model_tractor_holonomy, quadric_tractor_holonomy, LoopId, ModelSpace};
use conformal_tractor::tractor::TransportOptions;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let opts = TransportOptions::default();
    for (p, q) in [(1, 2), (2, 3)] {
        let h = quadric_tractor_holonomy(p, q, &opts)?;
        println!("({p},{q}) antipodal loop: |H + I| = {:.2e}, |H^T h H - h| = {:.2e}", h.minus_identity_residual, h.orthogonality_residual);
    }
    let model = ModelSpace::quadric(1, 2)?;
    for id in [LoopId::ControlChart, LoopId::ControlExcursion] {
        let h = model_tractor_holonomy(&model, id, &opts)?;
        let d = h.matrix.nrows();
        let off = (&h.matrix - nalgebra::DMatrix::<f64>::identity(d, d)).abs().max();
        println!("(1,2) {}: |H - I| = {off:.2e}", id.name());
    }
    match quadric_tractor_holonomy(0, 3, &opts) {
        Err(e) => println!("(0,3): {e}"),
        Ok(_) => println!("(0,3): unexpectedly produced a holonomy"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
