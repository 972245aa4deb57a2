// Parabolic subgroups of O(p+1,q+1), the det twist and Ad-compatibility.

use conformal_tractor::lie::{ad, det_twist, quadratic_form, AlgebraElement, GroupElement, Signature, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let quad = quadratic_form(Signature::new(1, 2)?);
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let a = GroupElement::new(&quad, quad.random_element(&mut rng, Variant::PRay))?;
    println!("sampled element of P_ray, det = {:+.3}", a.det());
    for v in Variant::ALL {
        println!("  {:<8} {}", v.name(), a.is(v));
    }

    // n = 3 is odd, so A -> sign(det A) A lands in SP_line.
    let twisted = det_twist(&quad, &a)?;
    println!("det twist: det = {:+.3}, in SP_line = {}", twisted.det(), twisted.is(Variant::SPLine));

    let z = AlgebraElement::new(&quad, quad.random_algebra(&mut rng, 1.0).matrix)?;
    let diff = (&ad(&a, &z)?.matrix - &ad(&twisted, &z)?.matrix).abs().max();
    println!("|Ad(A)Z - Ad(twist A)Z| = {diff:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
