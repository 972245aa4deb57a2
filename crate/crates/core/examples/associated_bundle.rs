// Maurer-Cartan transport on the associated bundle over O/P_line, and the
// sign of the tautological line around the same loop.

use conformal_tractor::homogeneous::{line_monodromy, mc_transport, LoopId, McOptions, ModelSpace};
use conformal_tractor::lie::{Representation, RepresentationKind, Variant};
use nalgebra::{DMatrix, DVector};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelSpace::quadric(2, 3)?;
    let path = model.loop_path(LoopId::Antipodal)?;
    let d = model.quad.dim();
    let v0 = DVector::from_fn(d, |i, _| 1.0 - 0.2 * i as f64);

    for kind in [RepresentationKind::Standard, RepresentationKind::DetTwistedStandard] {
        let rep = Representation::new(kind, model.signature);
        let r = mc_transport(&model, Variant::PLine, &rep, &path, &v0, &McOptions::default())?;
        let off = (&r.operator - DMatrix::<f64>::identity(d, d)).abs().max();
        println!("P_line, {kind:?}: |T - I| = {off:.2e}, J drift {:.2e}", r.j_drift);
    }

    let rep = Representation::new(RepresentationKind::Standard, model.signature);
    match mc_transport(&model, Variant::PRay, &rep, &path, &v0, &McOptions::default()) {
        Err(e) => println!("P_ray: {e}"),
        Ok(_) => println!("P_ray: transport closed up"),
    }

    for id in LoopId::ALL {
        println!("line monodromy around {}: {:+}", id.name(), line_monodromy(&model, &model.loop_path(id)?, 1000)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
