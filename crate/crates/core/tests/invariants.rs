use conformal_tractor::geometry::{chart_by_name, ConformalFactor, ScalarField};
use conformal_tractor::lie::{quadratic_form, Representation, RepresentationKind, Signature, Variant};
use conformal_tractor::tractor::{change_matrix, tractor_metric_matrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn signatures() -> impl Strategy<Value = (usize, usize)> {
    (0usize..4, 0usize..4).prop_filter("n >= 1", |(p, q)| p + q >= 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parabolic_elements_fix_the_null_line((p, q) in signatures(), seed in any::<u64>(), vi in 0usize..10) {
        let quad = quadratic_form(Signature::new(p, q).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = Variant::ALL[vi];
        let a = quad.random_element(&mut rng, variant);
        prop_assert!(quad.group_residual(&a) < 1e-9 * a.norm_squared().max(1.0));
        if variant != Variant::O && variant != Variant::SO {
            let col = a.column(0);
            let off = col.rows(1, quad.dim() - 1).abs().max();
            prop_assert!(off < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn det_twisted_action_agrees_up_to_sign((p, q) in signatures(), seed in any::<u64>()) {
        let sig = Signature::new(p, q).unwrap();
        let quad = quadratic_form(sig);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = quad.random_element(&mut rng, Variant::O);
        let std = Representation::new(RepresentationKind::Standard, sig).group_matrix(&a);
        let tw = Representation::new(RepresentationKind::DetTwistedStandard, sig).group_matrix(&a);
        let sign = a.determinant().signum();
        prop_assert!((&tw - &std * sign).abs().max() == 0.0);
    }

    #[test]
    fn splitting_change_is_an_isometry(seed in any::<u64>(), x in prop::array::uniform5(-0.4f64..0.4)) {
        let chart = chart_by_name("poly_generic(2,3)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = ConformalFactor::random(&mut rng, 5);
        let (u, grad) = factor.gradient(&x);
        let g = chart.metric(&x);
        let g_hat = &g * (2.0 * u).exp();
        let m = change_matrix(&g, u, &grad);
        let pulled = m.transpose() * tractor_metric_matrix(&g_hat) * &m;
        prop_assert!((pulled - tractor_metric_matrix(&g)).abs().max() < 1e-12);
    }

    #[test]
    fn tractor_metric_has_signature_p1_q1((p, q) in (0usize..4, 0usize..4).prop_filter("n >= 3", |(p, q)| p + q >= 3)) {
        let chart = chart_by_name(&format!("flat({p},{q})")).unwrap();
        let x = vec![0.0; p + q];
        let eig = tractor_metric_matrix(&chart.metric(&x)).symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|e| **e > 0.0).count();
        prop_assert_eq!((pos, eig.len() - pos), (p + 1, q + 1));
    }
}

// det(-I) = -1 for odd n, so the twist undoes the sign.
#[test]
fn minus_identity_in_the_twisted_representation_for_odd_n() {
    let sig = Signature::new(2, 3).unwrap();
    let d = sig.dim();
    let v = DVector::from_fn(d, |i, _| i as f64 + 1.0);
    let minus = -DMatrix::<f64>::identity(d, d);
    let standard = Representation::new(RepresentationKind::Standard, sig).group_matrix(&minus) * &v;
    assert_eq!(standard, -&v);
    let twisted = Representation::new(RepresentationKind::DetTwistedStandard, sig).group_matrix(&minus) * &v;
    assert_eq!(twisted, v);
}
