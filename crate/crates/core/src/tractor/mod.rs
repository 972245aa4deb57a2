//! The standard tractor bundle in the splitting determined by a metric of the
//! conformal class.
//!
//! A tractor is stacked as `(ρ, μ¹..μⁿ, σ)`: slot `0` is the weight `−1`
//! density `ρ`, slots `1..=n` the weighted tangent vector `μ`, slot `n+1` the
//! weight `1` density `σ`. Densities are trivialized by the chart metric, so
//! in a fixed scale the density derivative is the plain partial derivative.
//!
//! The normal connection is `∇_i = ∂_i + A_i` with
//!
//! ```text
//!        ρ       μ^k        σ
//! ρ   [  0     −P_{ik}      0    ]
//! μ^j [ δ_i^j   Γ^j_{ik}   P_i^j ]
//! σ   [  0     −g_{ik}      0    ]
//! ```

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{GeometryError, MetricChart, PointGeometry};

mod curvature;
mod path;
mod transport;

pub use curvature::{compatibility_tau, connection_jets, tractor_curvature};
pub use path::{Curve, Handoff, LoopPath, PathSpec, Segment, SegmentSpec};
pub use transport::{holonomy, parallel_transport, transport_operator, TransportOptions, TransportReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TractorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("tractors expressed in different scales: `{0}` vs `{1}`")]
    ScaleMismatch(String, String),
    #[error("tractors at different basepoints")]
    BasepointMismatch,
    #[error("expected tractor length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("step halving changed the result by {estimate:e}, above the limit {limit:e}")]
    StepValidation { estimate: f64, limit: f64 },
    #[error("path has no segments")]
    EmptyPath,
    #[error("gap of {gap:e} after segment {segment}")]
    PathGap { segment: usize, gap: f64 },
    #[error("loop does not close: gap {gap:e}")]
    NotClosed { gap: f64 },
    #[error("transition `{name}` is not an isometry: residual {residual:e}")]
    NonIsometric { name: String, residual: f64 },
    #[error("unknown chart `{0}` in path spec")]
    UnknownChart(String),
    #[error("curve parameters do not match chart dimension {0}")]
    CurveDimension(usize),
}

/// `(ρ, μ, σ)` at a basepoint, in the splitting of the named scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TractorVector {
    pub rho: f64,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub basepoint: Vec<f64>,
    pub scale_ref: String,
}

impl TractorVector {
    pub fn new(rho: f64, mu: Vec<f64>, sigma: f64, basepoint: Vec<f64>, scale_ref: impl Into<String>) -> Self {
        Self {
            rho,
            mu,
            sigma,
            basepoint,
            scale_ref: scale_ref.into(),
        }
    }

    pub fn from_stacked(v: &DVector<f64>, basepoint: Vec<f64>, scale_ref: impl Into<String>) -> Self {
        let d = v.len();
        Self::new(v[0], v.as_slice()[1..d - 1].to_vec(), v[d - 1], basepoint, scale_ref)
    }

    pub fn stacked(&self) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.mu.len() + 2);
        v.push(self.rho);
        v.extend_from_slice(&self.mu);
        v.push(self.sigma);
        DVector::from_vec(v)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Gram matrix of the tractor metric `h(U, U) = 2ρσ + g(μ, μ)`.
pub fn tractor_metric_matrix(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut h = DMatrix::zeros(n + 2, n + 2);
    h[(0, n + 1)] = 1.0;
    h[(n + 1, 0)] = 1.0;
    h.view_mut((1, 1), (n, n)).copy_from(g);
    h
}

/// `h(U, V)` with `g` the metric of the common scale at the common basepoint.
pub fn tractor_metric(g: &DMatrix<f64>, u: &TractorVector, v: &TractorVector) -> Result<f64, TractorError> {
    if u.scale_ref != v.scale_ref {
        return Err(TractorError::ScaleMismatch(u.scale_ref.clone(), v.scale_ref.clone()));
    }
    if u.basepoint != v.basepoint {
        return Err(TractorError::BasepointMismatch);
    }
    let n = g.nrows();
    for w in [u, v] {
        if w.dim() != n {
            return Err(TractorError::Length {
                expected: n + 2,
                got: w.dim() + 2,
            });
        }
    }
    let (su, sv) = (u.stacked(), v.stacked());
    Ok((su.transpose() * tractor_metric_matrix(g) * sv)[(0, 0)])
}

/// Matrix taking `(ρ, μ, σ)` in the splitting of `g` to the splitting of
/// `ĝ = e^{2Υ} g`, each side trivialized by its own scale:
/// `σ̂ = e^Υ σ`, `μ̂ = e^{−Υ}(μ + Υ^♯ σ)`, `ρ̂ = e^{−Υ}(ρ − Υ_j μ^j − ½|dΥ|²_g σ)`.
/// `g` is the base metric at `x`, `upsilon` and `grad` are `Υ(x)` and `dΥ(x)`.
pub fn change_matrix(g: &DMatrix<f64>, upsilon: f64, grad: &[f64]) -> DMatrix<f64> {
    let n = g.nrows();
    let ginv = g.clone().try_inverse().expect("metric is nondegenerate");
    let dv = DVector::from_column_slice(grad);
    let up = &ginv * &dv;
    let sq = dv.dot(&up);
    let mut m = DMatrix::identity(n + 2, n + 2);
    for j in 0..n {
        m[(0, j + 1)] = -grad[j];
        m[(j + 1, n + 1)] = up[j];
    }
    m[(0, n + 1)] = -0.5 * sq;
    let (down, upf) = ((-upsilon).exp(), upsilon.exp());
    for c in 0..n + 2 {
        for r in 0..=n {
            m[(r, c)] *= down;
        }
        m[(n + 1, c)] *= upf;
    }
    m
}

/// `A_v = v^i A_i` split into the Levi-Civita part (`Γ` block) and the
/// algebraic part (`δ`, `P`, `g` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    pub direction: Vec<f64>,
    pub levi_civita: DMatrix<f64>,
    pub algebraic: DMatrix<f64>,
}

impl ConnectionMatrix {
    pub fn total(&self) -> DMatrix<f64> {
        &self.levi_civita + &self.algebraic
    }
}

pub fn connection_from_geometry(geom: &PointGeometry, v: &[f64]) -> ConnectionMatrix {
    let n = geom.n;
    let mut lc = DMatrix::zeros(n + 2, n + 2);
    let mut alg = DMatrix::zeros(n + 2, n + 2);
    // P_v^j = g^{jl} P_{il} v^i
    let pv: Vec<f64> = (0..n).map(|k| (0..n).map(|i| v[i] * geom.schouten[i * n + k]).sum()).collect();
    let gv: Vec<f64> = (0..n).map(|k| (0..n).map(|i| v[i] * geom.g[i * n + k]).sum()).collect();
    for j in 0..n {
        alg[(j + 1, 0)] = v[j];
        alg[(0, j + 1)] = -pv[j];
        alg[(n + 1, j + 1)] = -gv[j];
        alg[(j + 1, n + 1)] = (0..n).map(|l| geom.ginv[j * n + l] * pv[l]).sum();
        for k in 0..n {
            lc[(j + 1, k + 1)] = (0..n).map(|i| v[i] * geom.gamma[(j * n + i) * n + k]).sum();
        }
    }
    ConnectionMatrix {
        direction: v.to_vec(),
        levi_civita: lc,
        algebraic: alg,
    }
}

/// The connection matrix of the chart scale at `x` in direction `v`.
pub fn connection_matrix(chart: &MetricChart, x: &[f64], v: &[f64]) -> Result<ConnectionMatrix, TractorError> {
    chart.check_point(x)?;
    let geom = crate::geometry::point_geometry(chart, x)?;
    Ok(connection_from_geometry(&geom, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat, sphere};
    use crate::lie::Signature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tv(rho: f64, mu: Vec<f64>, sigma: f64) -> TractorVector {
        let n = mu.len();
        TractorVector::new(rho, mu, sigma, vec![0.0; n], "g")
    }

    #[test]
    fn metric_examples() {
        let g = DMatrix::identity(3, 3);
        let u = tv(1.0, vec![0.0; 3], 0.0);
        assert_eq!(tractor_metric(&g, &u, &u).unwrap(), 0.0);
        let u = tv(1.0, vec![0.0; 3], 1.0);
        assert_eq!(tractor_metric(&g, &u, &u).unwrap(), 2.0);
        let u = tv(0.0, vec![1.0, 2.0, -1.0], 0.0);
        assert_eq!(tractor_metric(&g, &u, &u).unwrap(), 6.0);
        let mut w = u.clone();
        w.scale_ref = "other".into();
        assert!(matches!(tractor_metric(&g, &u, &w), Err(TractorError::ScaleMismatch(..))));
    }

    #[test]
    fn change_matrix_identity_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = DMatrix::from_fn(4, 4, |i, j| if i == j { [1.0, 2.0, -1.0, -0.5][i] } else { 0.1 });
        assert_eq!(change_matrix(&g, 0.0, &[0.0; 4]), DMatrix::identity(6, 6));
        for _ in 0..50 {
            let ups = rng.random_range(-1.0..1.0);
            let grad: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = change_matrix(&g, ups, &grad);
            let ghat = &g * (2.0 * ups).exp();
            let lhs = m.transpose() * tractor_metric_matrix(&ghat) * &m;
            assert!((lhs - tractor_metric_matrix(&g)).norm() < 1e-12);
            // Back from ĝ with −Υ: the gradient of −Υ is −dΥ.
            let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
            let back = change_matrix(&ghat, -ups, &neg) * &m;
            assert!((back - DMatrix::identity(6, 6)).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_connection_shape() {
        let chart = flat(Signature::new(2, 1).unwrap());
        let a = connection_matrix(&chart, &[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0]).unwrap().total();
        let mut expect = DMatrix::zeros(5, 5);
        expect[(1, 0)] = 1.0;
        expect[(4, 1)] = -1.0;
        assert_eq!(a, expect);
    }

    #[test]
    fn sphere_sigma_column_is_half_direction() {
        let chart = sphere(3).unwrap();
        let v = [0.3, -0.2, 0.5];
        let a = connection_matrix(&chart, &[0.2, 0.1, -0.3], &v).unwrap().algebraic;
        for j in 0..3 {
            assert!((a[(j + 1, 4)] - 0.5 * v[j]).abs() < 1e-12);
        }
    }
}
