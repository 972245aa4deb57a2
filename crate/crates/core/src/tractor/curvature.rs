//! Curvature of the tractor connection and the compatibility map `τ`.

use nalgebra::DMatrix;

use super::{connection_matrix, TractorError};
use crate::geometry::curvature::{christoffel, ricci_from_gamma, scalar_curvature, schouten};
use crate::geometry::{GeometryError, MetricChart};
use crate::jet::{Jet, Scalar};

/// `A_i` for each coordinate direction as jets carrying `order` derivatives,
/// row-major `(n+2)×(n+2)`.
pub fn connection_jets(chart: &MetricChart, x: &[f64], order: usize) -> Result<Vec<Vec<Jet>>, TractorError> {
    let n = chart.dim();
    if n < 3 {
        return Err(GeometryError::DimensionTooSmall(n).into());
    }
    chart.check_point(x)?;
    let g = chart.metric_jets(x, order + 2);
    let (ginv, gamma) = christoffel(n, &g).ok_or_else(|| GeometryError::Degenerate {
        chart: chart.label.clone(),
        point: x.to_vec(),
    })?;
    let ric = ricci_from_gamma(n, &gamma);
    let g_o: Vec<Jet> = g.iter().map(|e| e.truncate(order)).collect();
    let ginv_o: Vec<Jet> = ginv.iter().map(|e| e.truncate(order)).collect();
    let gamma_o: Vec<Jet> = gamma.iter().map(|e| e.truncate(order)).collect();
    let scalar = scalar_curvature(n, &ginv_o, &ric);
    let p = schouten(n, &g_o, &ric, &scalar);
    let p_up = crate::geometry::curvature::raise_first(n, &ginv_o, &p);

    let d = n + 2;
    let zero = g_o[0].zero_like();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = vec![zero.clone(); d * d];
        for j in 0..n {
            if i == j {
                a[(j + 1) * d] = zero.lift(1.0);
            }
            a[j + 1] = -p[i * n + j].clone();
            a[(n + 1) * d + j + 1] = -g_o[i * n + j].clone();
            // P_i^j = g^{jl} P_{li}
            a[(j + 1) * d + n + 1] = p_up[j * n + i].clone();
            for k in 0..n {
                a[(j + 1) * d + k + 1] = gamma_o[(j * n + i) * n + k].clone();
            }
        }
        out.push(a);
    }
    Ok(out)
}

/// `Ω(X, Y) = X^i Y^j (∂_i A_j − ∂_j A_i + [A_i, A_j])`.
pub fn tractor_curvature(chart: &MetricChart, x: &[f64], xv: &[f64], yv: &[f64]) -> Result<DMatrix<f64>, TractorError> {
    let n = chart.dim();
    let a = connection_jets(chart, x, 1)?;
    let d = n + 2;
    let value = |i: usize| DMatrix::from_fn(d, d, |r, c| a[i][r * d + c].value());
    let deriv = |i: usize, k: usize| DMatrix::from_fn(d, d, |r, c| a[i][r * d + c].d1(k));
    let vals: Vec<DMatrix<f64>> = (0..n).map(value).collect();
    let mut omega = DMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            let c = xv[i] * yv[j];
            if c == 0.0 {
                continue;
            }
            let term = deriv(j, i) - deriv(i, j) + &vals[i] * &vals[j] - &vals[j] * &vals[i];
            omega += term * c;
        }
    }
    Ok(omega)
}

/// `τ(v ⊗ ρ) = ∇_v(ρ, 0, 0) mod 𝒯¹` with `ρ = 1` in the chart scale;
/// returns the worst of `|h₀(τv, τw) − g(v, w)|` over coordinate vectors
/// and of the σ-components (which must vanish so `τv ∈ 𝒯¹⊥`).
pub fn compatibility_tau(chart: &MetricChart, x: &[f64]) -> Result<f64, TractorError> {
    let n = chart.dim();
    if n < 3 {
        return Err(GeometryError::DimensionTooSmall(n).into());
    }
    let g = chart.metric(x);
    let mut images = Vec::with_capacity(n);
    let mut residual = 0.0f64;
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        let a = connection_matrix(chart, x, &v)?.total();
        let col = a.column(0);
        residual = residual.max(col[n + 1].abs());
        images.push(col.rows(1, n).into_owned());
    }
    for i in 0..n {
        for j in 0..n {
            let h0 = (images[i].transpose() * &g * &images[j])[(0, 0)];
            residual = residual.max((h0 - g[(i, j)]).abs());
        }
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{curvature_pack, flat, poly_generic, sphere};
    use crate::lie::Signature;

    #[test]
    fn flat_and_sphere_are_flat() {
        let f = flat(Signature::new(2, 3).unwrap());
        let x = [0.1, 0.2, 0.3, -0.1, 0.0];
        let e = |i: usize| (0..5).map(|k| if k == i { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        assert_eq!(tractor_curvature(&f, &x, &e(0), &e(3)).unwrap().norm(), 0.0);
        let s = sphere(4).unwrap();
        let om = tractor_curvature(&s, &[0.3, -0.2, 0.5, 0.1], &[1.0, 0.2, 0.0, -0.3], &[0.0, 1.0, 0.4, 0.2]).unwrap();
        assert!(om.abs().max() < 1e-10);
    }

    #[test]
    fn generic_blocks_are_weyl_and_cotton() {
        let chart = poly_generic(Signature::new(2, 3).unwrap());
        let x = [0.1, -0.15, 0.2, 0.05, -0.1];
        let pack = curvature_pack(&chart, &x).unwrap();
        let n = 5;
        for i in 0..n {
            for j in 0..n {
                let e = |k: usize| (0..n).map(|m| if m == k { 1.0 } else { 0.0 }).collect::<Vec<_>>();
                let om = tractor_curvature(&chart, &x, &e(i), &e(j)).unwrap();
                for a in 0..n {
                    for b in 0..n {
                        assert!((om[(a + 1, b + 1)] - pack.weyl(a, b, i, j)).abs() < 1e-9);
                    }
                    let c_up: f64 = (0..n).map(|k| pack.ginv[a * n + k] * pack.cotton(k, i, j)).sum();
                    assert!((om[(a + 1, n + 1)] - c_up).abs() < 1e-9);
                    assert!((om[(0, a + 1)] + pack.cotton(a, i, j)).abs() < 1e-9);
                }
                for r in 0..n + 2 {
                    assert!(om[(r, 0)].abs() < 1e-10);
                    assert!(om[(n + 1, r)].abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn tau_flat_and_curved() {
        let f = flat(Signature::new(1, 2).unwrap());
        assert!(compatibility_tau(&f, &[0.1, 0.2, 0.3]).unwrap() < 1e-12);
        let s = sphere(3).unwrap();
        assert!(compatibility_tau(&s, &[0.5, 0.2, -0.1]).unwrap() < 1e-12);
    }
}
