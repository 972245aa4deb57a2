//! Christoffel symbols, Riemann, Ricci, Schouten, Weyl and Cotton tensors.
//!
//! Conventions (index layout row-major in the order written):
//!
//! * `Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk})`
//! * `R^i_{jkl} = ∂_kΓ^i_{lj} − ∂_lΓ^i_{kj} + Γ^i_{km}Γ^m_{lj} − Γ^i_{lm}Γ^m_{kj}`
//! * `Ric_{jl} = R^k_{jkl}`, `R = g^{jl} Ric_{jl}`
//! * `P = (Ric − R g / (2(n−1))) / (n−2)`
//! * `W^a_{bkl} = R^a_{bkl} − (δ^a_k P_{bl} − δ^a_l P_{bk} + g_{bl} P^a_k − g_{bk} P^a_l)`
//! * `C_{ijk} = ∇_j P_{ki} − ∇_k P_{ji}`
//!
//! With these signs the round unit sphere has `Ric = (n−1) g` and `P = ½ g`.

use crate::jet::{dot, invert, Jet, Scalar};

use super::{GeometryError, MetricChart};

/// Inverse metric and `Γ^i_{jk}` from metric jets; the results carry one
/// derivative order less than the input.
pub fn christoffel(n: usize, g: &[Jet]) -> Option<(Vec<Jet>, Vec<Jet>)> {
    let ginv = invert(n, g)?;
    // dg[l][j*n+k] = ∂_l g_{jk}
    let dg: Vec<Vec<Jet>> = (0..n)
        .map(|l| g.iter().map(|e| e.derivative(l)).collect())
        .collect();
    let mut lowered = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                lowered.push((dg[j][l * n + k].clone() + dg[k][l * n + j].clone() - dg[l][j * n + k].clone()).scaled(0.5));
            }
        }
    }
    let ginv_low: Vec<Jet> = ginv.iter().map(|e| e.truncate(lowered[0].order())).collect();
    let mut gamma = Vec::with_capacity(n * n * n);
    for i in 0..n {
        let row: Vec<Jet> = (0..n).map(|l| ginv_low[i * n + l].clone()).collect();
        for j in 0..n {
            for k in 0..n {
                let col: Vec<Jet> = (0..n).map(|l| lowered[(l * n + j) * n + k].clone()).collect();
                gamma.push(dot(&row, &col));
            }
        }
    }
    Some((ginv, gamma))
}

/// `R^i_{jkl}` from Christoffel jets of order at least one.
pub fn riemann(n: usize, gamma: &[Jet]) -> Vec<Jet> {
    let g3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let dgamma: Vec<Vec<Jet>> = (0..n)
        .map(|v| gamma.iter().map(|e| e.derivative(v)).collect())
        .collect();
    let low: Vec<Jet> = gamma.iter().map(|e| e.truncate(dgamma[0][0].order())).collect();
    let mut r = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = dgamma[k][g3(i, l, j)].clone() - dgamma[l][g3(i, k, j)].clone();
                    for m in 0..n {
                        acc = acc + low[g3(i, k, m)].clone() * low[g3(m, l, j)].clone()
                            - low[g3(i, l, m)].clone() * low[g3(m, k, j)].clone();
                    }
                    r.push(acc);
                }
            }
        }
    }
    r
}

/// `Ric_{jl}` directly from Christoffel jets, skipping the full Riemann tensor.
pub fn ricci_from_gamma(n: usize, gamma: &[Jet]) -> Vec<Jet> {
    let g3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let low: Vec<Jet> = gamma.iter().map(|e| e.truncate(gamma[0].order() - 1)).collect();
    let mut ric = Vec::with_capacity(n * n);
    for j in 0..n {
        for l in 0..n {
            let mut acc = low[0].zero_like();
            for k in 0..n {
                acc = acc + gamma[g3(k, l, j)].derivative(k) - gamma[g3(k, k, j)].derivative(l);
                for m in 0..n {
                    acc = acc + low[g3(k, k, m)].clone() * low[g3(m, l, j)].clone()
                        - low[g3(k, l, m)].clone() * low[g3(m, k, j)].clone();
                }
            }
            ric.push(acc);
        }
    }
    ric
}

pub fn ricci<S: Scalar>(n: usize, riem: &[S]) -> Vec<S> {
    let mut ric = Vec::with_capacity(n * n);
    for j in 0..n {
        for l in 0..n {
            let mut acc = riem[0].zero_like();
            for k in 0..n {
                acc = acc + riem[((k * n + j) * n + k) * n + l].clone();
            }
            ric.push(acc);
        }
    }
    ric
}

pub fn scalar_curvature<S: Scalar>(n: usize, ginv: &[S], ric: &[S]) -> S {
    let mut acc = ric[0].zero_like();
    for j in 0..n * n {
        acc = acc + ginv[j].clone() * ric[j].clone();
    }
    acc
}

pub fn schouten<S: Scalar>(n: usize, g: &[S], ric: &[S], scalar: &S) -> Vec<S> {
    let nf = n as f64;
    let c = scalar.scaled(1.0 / (2.0 * (nf - 1.0)));
    ric.iter()
        .zip(g)
        .map(|(r, gij)| (r.clone() - c.clone() * gij.clone()).scaled(1.0 / (nf - 2.0)))
        .collect()
}

/// `P^a_k = g^{ab} P_{bk}`.
pub fn raise_first<S: Scalar>(n: usize, ginv: &[S], t: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        let row: Vec<S> = (0..n).map(|b| ginv[a * n + b].clone()).collect();
        for k in 0..n {
            let col: Vec<S> = (0..n).map(|b| t[b * n + k].clone()).collect();
            out.push(dot(&row, &col));
        }
    }
    out
}

pub fn weyl(n: usize, riem: &[f64], g: &[f64], p: &[f64], p_up: &[f64]) -> Vec<f64> {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut w = Vec::with_capacity(riem.len());
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let kn = delta(a, k) * p[b * n + l] - delta(a, l) * p[b * n + k] + g[b * n + l] * p_up[a * n + k]
                        - g[b * n + k] * p_up[a * n + l];
                    w.push(riem[((a * n + b) * n + k) * n + l] - kn);
                }
            }
        }
    }
    w
}

/// `C_{ijk}` from Schouten jets of order at least one and Christoffel values.
pub fn cotton(n: usize, p: &[Jet], gamma: &[f64]) -> Vec<f64> {
    let pv: Vec<f64> = p.iter().map(|e| e.value()).collect();
    let g3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    // nabla[(j, k, i)] = ∇_j P_{ki}
    let mut nabla = vec![0.0; n * n * n];
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                let mut v = p[k * n + i].d1(j);
                for m in 0..n {
                    v -= gamma[g3(m, j, k)] * pv[m * n + i] + gamma[g3(m, j, i)] * pv[k * n + m];
                }
                nabla[g3(j, k, i)] = v;
            }
        }
    }
    let mut c = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c.push(nabla[g3(j, k, i)] - nabla[g3(k, j, i)]);
            }
        }
    }
    c
}

/// All curvature quantities at one point, as flat row-major arrays.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub n: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    /// `Γ^i_{jk}` at `(i*n + j)*n + k`.
    pub gamma: Vec<f64>,
    /// `R^i_{jkl}`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    pub schouten: Vec<f64>,
    /// `W^a_{bkl}`.
    pub weyl: Vec<f64>,
    /// `C_{ijk}`.
    pub cotton: Vec<f64>,
}

impl CurvaturePack {
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.n + j) * self.n + k]
    }
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann[((i * self.n + j) * self.n + k) * self.n + l]
    }
    pub fn weyl(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.weyl[((i * self.n + j) * self.n + k) * self.n + l]
    }
    pub fn cotton(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cotton[(i * self.n + j) * self.n + k]
    }
    pub fn schouten(&self, i: usize, j: usize) -> f64 {
        self.schouten[i * self.n + j]
    }

    /// Largest absolute entry over every tensor in the pack except `g`.
    pub fn max_abs_curvature(&self) -> f64 {
        [&self.riemann, &self.ricci, &self.schouten, &self.weyl, &self.cotton]
            .iter()
            .flat_map(|t| t.iter())
            .chain(std::iter::once(&self.scalar))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn check_dim(chart: &MetricChart, x: &[f64]) -> Result<usize, GeometryError> {
    let n = chart.dim();
    if n < 3 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    chart.check_point(x)?;
    Ok(n)
}

fn degenerate(chart: &MetricChart, x: &[f64]) -> GeometryError {
    GeometryError::Degenerate {
        chart: chart.label.clone(),
        point: x.to_vec(),
    }
}

pub fn curvature_pack(chart: &MetricChart, x: &[f64]) -> Result<CurvaturePack, GeometryError> {
    let n = check_dim(chart, x)?;
    let g = chart.metric_jets(x, 3);
    let (ginv, gamma) = christoffel(n, &g).ok_or_else(|| degenerate(chart, x))?;
    let riem = riemann(n, &gamma);
    let g1: Vec<Jet> = g.iter().map(|e| e.truncate(1)).collect();
    let ginv1: Vec<Jet> = ginv.iter().map(|e| e.truncate(1)).collect();
    let ric = ricci(n, &riem);
    let scalar = scalar_curvature(n, &ginv1, &ric);
    let p = schouten(n, &g1, &ric, &scalar);

    let values = |v: &[Jet]| v.iter().map(|e| e.value()).collect::<Vec<f64>>();
    let gv = values(&g);
    let ginvv = values(&ginv);
    let gammav = values(&gamma);
    let riemv = values(&riem);
    let pv = values(&p);
    let p_up = raise_first(n, &ginvv, &pv);
    let w = weyl(n, &riemv, &gv, &pv, &p_up);
    let c = cotton(n, &p, &gammav);
    Ok(CurvaturePack {
        n,
        g: gv,
        ginv: ginvv,
        gamma: gammav,
        riemann: riemv,
        ricci: values(&ric),
        scalar: scalar.value(),
        schouten: pv,
        weyl: w,
        cotton: c,
    })
}

/// The data the tractor connection needs at a point: `g`, `g⁻¹`, `Γ`, `P`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub n: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub gamma: Vec<f64>,
    pub schouten: Vec<f64>,
}

/// Cheaper than [`curvature_pack`]: one second-order jet evaluation of the
/// metric, then plain `f64` tensor algebra. Skips the domain check so
/// transport can run up to the chart boundary.
pub fn point_geometry(chart: &MetricChart, x: &[f64]) -> Result<PointGeometry, GeometryError> {
    let n = chart.dim();
    if n < 3 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    if x.len() != n {
        return Err(GeometryError::PointDimension { expected: n, got: x.len() });
    }
    let jets = chart.metric_jets(x, 2);
    let space = jets[0].space().clone();
    let mut e = vec![0u8; n];
    let mut first = vec![0usize; n];
    let mut second = vec![0usize; n * n];
    for a in 0..n {
        e[a] += 1;
        first[a] = space.index_of(&e).expect("order-1 monomial");
        for b in 0..n {
            e[b] += 1;
            second[a * n + b] = space.index_of(&e).expect("order-2 monomial");
            e[b] -= 1;
        }
        e[a] -= 1;
    }
    let nn = n * n;
    let g: Vec<f64> = jets.iter().map(|j| j.value()).collect();
    // dg[k*nn + ij] = ∂_k g_ij, ddg[(k*n + l)*nn + ij] = ∂_k∂_l g_ij
    let mut dg = vec![0.0; n * nn];
    let mut ddg = vec![0.0; n * n * nn];
    for (ij, jet) in jets.iter().enumerate() {
        let c = jet.coeffs();
        for k in 0..n {
            dg[k * nn + ij] = c[first[k]];
            for l in 0..n {
                let factor = if k == l { 2.0 } else { 1.0 };
                ddg[(k * n + l) * nn + ij] = factor * c[second[k * n + l]];
            }
        }
    }
    let ginv = nalgebra::DMatrix::from_row_slice(n, n, &g)
        .try_inverse()
        .ok_or_else(|| degenerate(chart, x))?;
    let ginv: Vec<f64> = (0..nn).map(|k| ginv[(k / n, k % n)]).collect();

    let i3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    // Lowered symbols Γ_{l,jk} and their derivatives ∂_m Γ_{l,jk}.
    let mut low = vec![0.0; n * nn];
    let mut dlow = vec![0.0; n * n * nn];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                low[i3(l, j, k)] = 0.5 * (dg[j * nn + l * n + k] + dg[k * nn + l * n + j] - dg[l * nn + j * n + k]);
                for m in 0..n {
                    let dd = |a: usize, b: usize| ddg[(m * n + a) * nn + b];
                    dlow[m * n * nn + i3(l, j, k)] = 0.5 * (dd(j, l * n + k) + dd(k, l * n + j) - dd(l, j * n + k));
                }
            }
        }
    }
    // ∂_m g^{il} = −g^{ia} ∂_m g_{ab} g^{bl}
    let mut dginv = vec![0.0; n * nn];
    for m in 0..n {
        for i in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += ginv[i * n + a] * dg[m * nn + a * n + b] * ginv[b * n + l];
                    }
                }
                dginv[m * nn + i * n + l] = -s;
            }
        }
    }
    let mut gamma = vec![0.0; n * nn];
    let mut dgamma = vec![0.0; n * n * nn];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[i * n + l] * low[i3(l, j, k)];
                }
                gamma[i3(i, j, k)] = s;
                for m in 0..n {
                    let mut d = 0.0;
                    for l in 0..n {
                        d += dginv[m * nn + i * n + l] * low[i3(l, j, k)] + ginv[i * n + l] * dlow[m * n * nn + i3(l, j, k)];
                    }
                    dgamma[m * n * nn + i3(i, j, k)] = d;
                }
            }
        }
    }
    let mut ric = vec![0.0; nn];
    for j in 0..n {
        for l in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += dgamma[k * n * nn + i3(k, l, j)] - dgamma[l * n * nn + i3(k, k, j)];
                for m in 0..n {
                    acc += gamma[i3(k, k, m)] * gamma[i3(m, l, j)] - gamma[i3(k, l, m)] * gamma[i3(m, k, j)];
                }
            }
            ric[j * n + l] = acc;
        }
    }
    let scalar = scalar_curvature(n, &ginv, &ric);
    let p = schouten(n, &g, &ric, &scalar);
    Ok(PointGeometry {
        n,
        g,
        ginv,
        gamma,
        schouten: p,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{charts::*, ConformalFactor};
    use super::*;
    use crate::lie::Signature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn flat_pack_vanishes() {
        let chart = flat(Signature::new(2, 3).unwrap());
        let pack = curvature_pack(&chart, &[0.1, 0.2, -0.3, 0.4, 0.0]).unwrap();
        assert_eq!(pack.max_abs_curvature(), 0.0);
        assert_eq!(max_abs(&pack.gamma), 0.0);
    }

    #[test]
    fn sphere_schouten_is_half_metric() {
        let chart = sphere(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for x in chart.sample_points(&mut rng, 10, 0.5) {
            let pack = curvature_pack(&chart, &x).unwrap();
            for k in 0..16 {
                assert!((pack.schouten[k] - 0.5 * pack.g[k]).abs() < 1e-10);
                assert!((pack.ricci[k] - 3.0 * pack.g[k]).abs() < 1e-10);
            }
            assert!((pack.scalar - 12.0).abs() < 1e-10);
            assert!(max_abs(&pack.weyl) < 1e-10);
            assert!(max_abs(&pack.cotton) < 1e-10);
        }
    }

    #[test]
    fn split_signature_product_is_conformally_flat() {
        // g_{S^p} − g_{S^q} is curved but its Weyl and Cotton tensors vanish.
        let chart = product_sphere(2, 3).unwrap();
        for x in [[0.1, 0.3, -0.2, 0.5, 0.1], [-0.7, 0.2, 0.4, -0.1, 0.9]] {
            let pack = curvature_pack(&chart, &x).unwrap();
            assert!(max_abs(&pack.riemann) > 0.1);
            assert!(max_abs(&pack.weyl) < 1e-10);
            assert!(max_abs(&pack.cotton) < 1e-10);
        }
    }

    #[test]
    fn pack_symmetries_on_generic_metric() {
        let chart = poly_generic(Signature::new(2, 3).unwrap());
        let pack = curvature_pack(&chart, &[0.1, -0.2, 0.15, 0.05, -0.1]).unwrap();
        let n = 5;
        for i in 0..n {
            for j in 0..n {
                assert!((pack.ricci[i * n + j] - pack.ricci[j * n + i]).abs() < 1e-10);
                for k in 0..n {
                    for l in 0..n {
                        let bianchi = pack.riemann(i, j, k, l) + pack.riemann(i, k, l, j) + pack.riemann(i, l, j, k);
                        assert!(bianchi.abs() < 1e-9);
                    }
                }
            }
        }
        // Weyl trace-free: W^a_{bal} = 0.
        for b in 0..n {
            for l in 0..n {
                let tr: f64 = (0..n).map(|a| pack.weyl(a, b, a, l)).sum();
                assert!(tr.abs() < 1e-9);
            }
        }
        assert!(max_abs(&pack.weyl) > 1e-3);
        assert!(max_abs(&pack.cotton) > 1e-3);
    }

    #[test]
    fn point_geometry_agrees_with_pack() {
        let chart = poly_generic(Signature::new(2, 3).unwrap());
        let x = [0.2, -0.1, 0.05, 0.3, -0.25];
        let pack = curvature_pack(&chart, &x).unwrap();
        let pg = point_geometry(&chart, &x).unwrap();
        for (a, b) in pack.schouten.iter().zip(&pg.schouten) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in pack.gamma.iter().zip(&pg.gamma) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_to_sphere_rescale_matches_sphere_chart() {
        let n = 4;
        let hat = flat(Signature::new(n, 0).unwrap()).conformal_rescale(Arc::new(ConformalFactor::Sphere));
        let s = sphere(n).unwrap();
        let x = [0.3, -0.4, 0.1, 0.2];
        let a = curvature_pack(&hat, &x).unwrap();
        let b = curvature_pack(&s, &x).unwrap();
        for (u, v) in a.riemann.iter().zip(&b.riemann) {
            assert!((u - v).abs() < 1e-10);
        }
        for (u, v) in a.schouten.iter().zip(&b.schouten) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn small_dimension_rejected() {
        let chart = flat(Signature::new(1, 1).unwrap());
        assert!(matches!(
            curvature_pack(&chart, &[0.0, 0.0]),
            Err(GeometryError::DimensionTooSmall(2))
        ));
        let s = sphere(3).unwrap();
        assert!(matches!(
            curvature_pack(&s, &[0.0, 0.0, 5.0]),
            Err(GeometryError::OutsideDomain { .. })
        ));
    }
}
