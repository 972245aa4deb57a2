//! First-order ambient metric over a chart and the ambient realization of
//! the tractor connection.
//!
//! Coordinates are `(t, x¹…xⁿ, ρ)` and
//! `g̃ = 2ρ dt² + 2t dt dρ + t²(g + 2ρP)_{ij} dxⁱ dxʲ`.
//! Tractors at `x` are identified with homogeneity `−1` vector fields along
//! the fiber `{(t, x, 0)}` through their values at `t = 1`: `∂_t` is the
//! `ρ`-slot, `∂_i` the `μ`-slots and `∂_ρ` the `σ`-slot. In that frame the
//! ambient Christoffel symbols `Γ̃^C_{iB}` at `(1, x, 0)` should reproduce
//! the splitting connection matrices `(A_i)_{CB}` entry by entry.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::curvature::{christoffel, ricci_from_gamma, scalar_curvature, schouten};
use crate::geometry::{curvature_pack, GeometryError, MetricChart};
use crate::jet::{Jet, JetSpace, Scalar};
use crate::tractor::{connection_matrix, tractor_metric_matrix, TractorError};

/// Default half-width of the `ρ` band.
pub const RHO_MAX: f64 = 0.1;

#[derive(Debug, Error)]
pub enum AmbientError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tractor(#[from] TractorError),
    #[error("ambient point needs t > 0 and |ρ| < {rho_max}, got t = {t}, ρ = {rho}")]
    OutsideBand { t: f64, rho: f64, rho_max: f64 },
    #[error("ambient point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("ambient metric degenerate at {0:?}")]
    Degenerate(Vec<f64>),
}

/// `g̃` over a base chart.
#[derive(Debug, Clone)]
pub struct AmbientChart {
    pub base: MetricChart,
    pub rho_max: f64,
}

/// Ricci of `g̃` on the `ρ = 0` slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientRicci {
    /// Largest `|Ric_{AB}|` over index pairs other than `(ρ, ρ)`.
    pub tangential: f64,
    /// `Ric_{ρρ}`, which the first-order form does not control.
    pub rho_rho: f64,
}

pub fn ambient_metric(chart: &MetricChart) -> Result<AmbientChart, AmbientError> {
    let n = chart.dim();
    if n < 3 {
        return Err(GeometryError::DimensionTooSmall(n).into());
    }
    Ok(AmbientChart {
        base: chart.clone(),
        rho_max: RHO_MAX,
    })
}

impl AmbientChart {
    /// Ambient dimension `n + 2`.
    pub fn dim(&self) -> usize {
        self.base.dim() + 2
    }

    fn split<'a>(&self, y: &'a [f64]) -> Result<(f64, &'a [f64], f64), AmbientError> {
        let d = self.dim();
        if y.len() != d {
            return Err(AmbientError::PointDimension { expected: d, got: y.len() });
        }
        let (t, rho) = (y[0], y[d - 1]);
        if t <= 0.0 || rho.abs() >= self.rho_max {
            return Err(AmbientError::OutsideBand {
                t,
                rho,
                rho_max: self.rho_max,
            });
        }
        Ok((t, &y[1..d - 1], rho))
    }

    /// `g̃` at `y = (t, x, ρ)`.
    pub fn metric(&self, y: &[f64]) -> Result<DMatrix<f64>, AmbientError> {
        let (t, x, rho) = self.split(y)?;
        let pack = curvature_pack(&self.base, x)?;
        let n = pack.n;
        let mut m = DMatrix::zeros(n + 2, n + 2);
        m[(0, 0)] = 2.0 * rho;
        m[(0, n + 1)] = t;
        m[(n + 1, 0)] = t;
        for i in 0..n {
            for j in 0..n {
                m[(i + 1, j + 1)] = t * t * (pack.g[i * n + j] + 2.0 * rho * pack.schouten(i, j));
            }
        }
        Ok(m)
    }

    /// Jets of `g̃` at `y` carrying `order` derivatives in all `n + 2`
    /// coordinates. Needs base-metric jets of order `order + 2` for `P`.
    pub fn metric_jets(&self, y: &[f64], order: usize) -> Result<Vec<Jet>, AmbientError> {
        let (t, x, rho) = self.split(y)?;
        self.base.check_point(x)?;
        let n = self.base.dim();
        let g = self.base.metric_jets(x, order + 2);
        let (ginv, gamma) = christoffel(n, &g).ok_or_else(|| AmbientError::Degenerate(y.to_vec()))?;
        let ric = ricci_from_gamma(n, &gamma);
        let g_o: Vec<Jet> = g.iter().map(|e| e.truncate(order)).collect();
        let ginv_o: Vec<Jet> = ginv.iter().map(|e| e.truncate(order)).collect();
        let scalar = scalar_curvature(n, &ginv_o, &ric);
        let p = schouten(n, &g_o, &ric, &scalar);

        let d = n + 2;
        let space = JetSpace::shared(d, order);
        let var_map: Vec<usize> = (1..=n).collect();
        let tj = Jet::variable(&space, 0, t);
        let rj = Jet::variable(&space, d - 1, rho);
        let zero = Jet::constant(&space, 0.0);
        let mut out = vec![zero; d * d];
        out[0] = rj.scaled(2.0);
        out[d - 1] = tj.clone();
        out[(d - 1) * d] = tj.clone();
        let t2 = &tj * &tj;
        for i in 0..n {
            for j in 0..n {
                let gij = g_o[i * n + j].embed(&space, &var_map);
                let pij = p[i * n + j].embed(&space, &var_map);
                out[(i + 1) * d + j + 1] = &t2 * &(gij + &rj * &pij.scaled(2.0));
            }
        }
        Ok(out)
    }

    /// `|δ_s*g̃ − s²g̃|` at `y`, entrywise maximum.
    pub fn homogeneity_residual(&self, y: &[f64], s: f64) -> Result<f64, AmbientError> {
        let mut ys = y.to_vec();
        ys[0] *= s;
        let d = self.dim();
        let mut jac = DMatrix::identity(d, d);
        jac[(0, 0)] = s;
        let pulled = jac.transpose() * self.metric(&ys)? * &jac;
        Ok((pulled - self.metric(y)? * (s * s)).abs().max())
    }

    /// `Γ̃^C_{AB}` at `y`, layout `(C·d + A)·d + B`.
    pub fn christoffel(&self, y: &[f64]) -> Result<Vec<f64>, AmbientError> {
        let d = self.dim();
        let g = self.metric_jets(y, 1)?;
        let (_, gamma) = christoffel(d, &g).ok_or_else(|| AmbientError::Degenerate(y.to_vec()))?;
        Ok(gamma.iter().map(Jet::value).collect())
    }
}

fn slice_point(x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len() + 2);
    y.push(1.0);
    y.extend_from_slice(x);
    y.push(0.0);
    y
}

/// Ricci of `g̃` at `(1, x, 0)`.
pub fn tangential_ricci_check(amb: &AmbientChart, x: &[f64]) -> Result<AmbientRicci, AmbientError> {
    let d = amb.dim();
    let y = slice_point(x);
    let g = amb.metric_jets(&y, 2)?;
    let (_, gamma) = christoffel(d, &g).ok_or_else(|| AmbientError::Degenerate(y.clone()))?;
    let ric = ricci_from_gamma(d, &gamma);
    let mut tangential = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            if a == d - 1 && b == d - 1 {
                continue;
            }
            tangential = tangential.max(ric[a * d + b].value().abs());
        }
    }
    Ok(AmbientRicci {
        tangential,
        rho_rho: ric[d * d - 1].value(),
    })
}

/// `Σ_i vⁱ Γ̃^C_{iB}` at `(1, x, 0)` as an `(n+2)×(n+2)` matrix in the
/// identified frame.
pub fn ambient_connection_matrix(amb: &AmbientChart, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>, AmbientError> {
    let d = amb.dim();
    let gamma = amb.christoffel(&slice_point(x))?;
    Ok(contract_direction(d, &gamma, v))
}

fn contract_direction(d: usize, gamma: &[f64], v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |c, b| {
        v.iter()
            .enumerate()
            .map(|(i, vi)| vi * gamma[(c * d + i + 1) * d + b])
            .sum()
    })
}

/// Largest entry of `ambient_connection_matrix − A(v)`.
pub fn ambient_connection_compare(amb: &AmbientChart, x: &[f64], v: &[f64]) -> Result<f64, AmbientError> {
    let ambient = ambient_connection_matrix(amb, x, v)?;
    let beg = connection_matrix(&amb.base, x, v)?.total();
    Ok((ambient - beg).abs().max())
}

/// Same comparison with `Γ̃` from plain central differences of `g̃` with
/// step `h`; the residual shrinks like `h²`.
pub fn ambient_connection_compare_fd(amb: &AmbientChart, x: &[f64], v: &[f64], h: f64) -> Result<f64, AmbientError> {
    let d = amb.dim();
    let y = slice_point(x);
    let g = amb.metric(&y)?;
    let ginv = g.clone().try_inverse().ok_or_else(|| AmbientError::Degenerate(y.clone()))?;
    let mut dg = Vec::with_capacity(d);
    for l in 0..d {
        let (mut yp, mut ym) = (y.clone(), y.clone());
        yp[l] += h;
        ym[l] -= h;
        dg.push((amb.metric(&yp)? - amb.metric(&ym)?) / (2.0 * h));
    }
    let mut gamma = vec![0.0; d * d * d];
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                gamma[(c * d + a) * d + b] = (0..d)
                    .map(|l| 0.5 * ginv[(c, l)] * (dg[a][(l, b)] + dg[b][(l, a)] - dg[l][(a, b)]))
                    .sum();
            }
        }
    }
    let beg = connection_matrix(&amb.base, x, v)?.total();
    Ok((contract_direction(d, &gamma, v) - beg).abs().max())
}

/// `|g̃(1, x, 0) − h|` with `h` the splitting tractor metric.
pub fn frame_metric_residual(amb: &AmbientChart, x: &[f64]) -> Result<f64, AmbientError> {
    let gt = amb.metric(&slice_point(x))?;
    let h = tractor_metric_matrix(&amb.base.metric(x));
    Ok((gt - h).abs().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat, poly_generic, sphere};
    use crate::lie::Signature;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    #[test]
    fn flat_base_is_ricci_flat() {
        let amb = ambient_metric(&flat(sig(2, 3))).unwrap();
        let x = [0.2, -0.1, 0.3, 0.0, 0.4];
        let r = tangential_ricci_check(&amb, &x).unwrap();
        assert!(r.tangential < 1e-10 && r.rho_rho.abs() < 1e-10);
        assert!(ambient_connection_compare(&amb, &x, &[0.3, 1.0, -0.2, 0.5, 0.1]).unwrap() < 1e-9);
    }

    #[test]
    fn slice_signature_and_frame_metric() {
        let amb = ambient_metric(&sphere(4).unwrap()).unwrap();
        let x = [0.3, -0.2, 0.1, 0.5];
        let m = amb.metric(&slice_point(&x)).unwrap();
        let eig = m.symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|e| **e > 0.0).count();
        assert_eq!((pos, eig.len() - pos), (5, 1));
        assert!(frame_metric_residual(&amb, &x).unwrap() < 1e-12);
        assert!(amb.homogeneity_residual(&[0.7, 0.3, -0.2, 0.1, 0.5, 0.05], 2.0).unwrap() < 1e-12);
    }

    #[test]
    fn sphere_connection_matches_splitting() {
        let amb = ambient_metric(&sphere(4).unwrap()).unwrap();
        let x = [0.3, -0.2, 0.1, 0.5];
        let v = [1.0, 0.2, -0.4, 0.3];
        assert!(tangential_ricci_check(&amb, &x).unwrap().tangential < 1e-10);
        assert!(ambient_connection_compare(&amb, &x, &v).unwrap() < 1e-12);
    }

    #[test]
    fn generic_base_tangential_only() {
        let amb = ambient_metric(&poly_generic(sig(2, 3))).unwrap();
        let x = [0.1, -0.05, 0.12, 0.0, -0.08];
        let r = tangential_ricci_check(&amb, &x).unwrap();
        assert!(r.tangential < 1e-9, "{r:?}");
        assert!(r.rho_rho.abs() > 1e-6, "{r:?}");
        assert!(ambient_connection_compare(&amb, &x, &[0.2, 0.4, -1.0, 0.3, 0.7]).unwrap() < 1e-10);
    }

    #[test]
    fn finite_difference_residual_is_second_order() {
        let amb = ambient_metric(&sphere(3).unwrap()).unwrap();
        let (x, v) = ([0.4, -0.3, 0.2], [0.5, 1.0, -0.7]);
        let coarse = ambient_connection_compare_fd(&amb, &x, &v, 2e-2).unwrap();
        let fine = ambient_connection_compare_fd(&amb, &x, &v, 1e-2).unwrap();
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn band_is_enforced() {
        let amb = ambient_metric(&sphere(3).unwrap()).unwrap();
        assert!(matches!(
            amb.metric(&[1.0, 0.0, 0.0, 0.0, 0.5]),
            Err(AmbientError::OutsideBand { .. })
        ));
        assert!(ambient_metric(&flat(sig(1, 1))).is_err());
    }
}
