//! Pseudo-Riemannian metrics on coordinate boxes, their curvature, conformal
//! rescaling and density bookkeeping.
//!
//! Metric and scalar evaluators are written once against [`Scalar`] so the
//! same formula produces plain values and arbitrarily deep derivative jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::jet::{Jet, Scalar};
use crate::lie::Signature;

mod charts;
pub mod curvature;
mod density;
pub mod fd;
mod transition;

pub use charts::{
    chart_by_name, conformally_flat, flat, poly_generic, product_sphere, sphere, ConformalFactor,
    EntrySpec, FlatMetric, MetricSpec, Polynomial, Term, ProductSphereMetric, RationalMetric,
    SphereMetric,
};
pub use curvature::{
    christoffel, curvature_pack, point_geometry, CurvaturePack, PointGeometry};
pub use density::WeightedScalar;
pub use transition::{
    product_sphere_atlas, sphere_atlas, transition_pushforward, Atlas, ChartTransition, CoordMap,
};

/// Interior margin for open coordinate boxes.
pub const DOMAIN_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curvature needs dimension at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("point {point:?} is outside the domain of chart `{chart}`")]
    OutsideDomain { chart: String, point: Vec<f64> },
    #[error("expected a point of dimension {expected}, got {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("metric of chart `{chart}` is degenerate at {point:?}")]
    Degenerate { chart: String, point: Vec<f64> },
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("malformed chart name `{0}`")]
    BadChartName(String),
    #[error("unknown conformal factor preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid metric specification: {0}")]
    BadSpec(String),
    #[error("point {point:?} is outside the overlap of transition `{transition}`")]
    OutsideOverlap { transition: String, point: Vec<f64> },
    #[error(transparent)]
    Lie(#[from] crate::lie::LieError),
}

/// Open box `lower < x < upper`, shrunk by [`DOMAIN_MARGIN`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoordBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CoordBox {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Self {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v > lo + DOMAIN_MARGIN && v < hi - DOMAIN_MARGIN)
    }
}

/// A symmetric matrix-valued field, `n×n` row-major.
pub trait MetricField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn metric_f64(&self, x: &[f64]) -> Vec<f64>;
    fn metric_jet(&self, x: &[Jet]) -> Vec<Jet>;
}

/// Convenience for metrics written as one generic formula.
pub trait GenericMetric: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn metric<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

impl<T: GenericMetric> MetricField for T {
    fn dim(&self) -> usize {
        GenericMetric::dim(self)
    }
    fn metric_f64(&self, x: &[f64]) -> Vec<f64> {
        self.metric(x)
    }
    fn metric_jet(&self, x: &[Jet]) -> Vec<Jet> {
        self.metric(x)
    }
}

/// A smooth real function on a chart.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn value_f64(&self, x: &[f64]) -> f64;
    fn value_jet(&self, x: &[Jet]) -> Jet;

    /// Value and gradient at `x`.
    fn gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let space = crate::jet::JetSpace::shared(x.len(), 1);
        let f = self.value_jet(&Jet::point(&space, x));
        (f.value(), (0..x.len()).map(|i| f.d1(i)).collect())
    }
}

/// A chart: a box, a metric evaluator of fixed signature and a label.
#[derive(Debug, Clone)]
pub struct MetricChart {
    pub label: String,
    pub signature: Signature,
    pub domain: CoordBox,
    pub field: Arc<dyn MetricField>,
}

impl MetricChart {
    pub fn new(
        label: impl Into<String>,
        signature: Signature,
        domain: CoordBox,
        field: Arc<dyn MetricField>,
    ) -> Self {
        Self {
            label: label.into(),
            signature,
            domain,
            field,
        }
    }

    pub fn dim(&self) -> usize {
        self.signature.n()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::PointDimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(GeometryError::OutsideDomain {
                chart: self.label.clone(),
                point: x.to_vec(),
            });
        }
        Ok(())
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.field.metric_f64(x))
    }

    /// Metric jets at `x` up to the given derivative order.
    pub fn metric_jets(&self, x: &[f64], order: usize) -> Vec<Jet> {
        let space = crate::jet::JetSpace::shared(self.dim(), order);
        self.field.metric_jet(&Jet::point(&space, x))
    }

    /// Counts of positive and negative eigenvalues of `g(x)`.
    pub fn signature_at(&self, x: &[f64]) -> (usize, usize) {
        let eig = self.metric(x).symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|&&e| e > 0.0).count();
        let neg = eig.iter().filter(|&&e| e < 0.0).count();
        (pos, neg)
    }

    /// `ĝ = e^{2Υ} g` on the same domain.
    pub fn conformal_rescale(&self, upsilon: Arc<dyn ScalarField>) -> MetricChart {
        MetricChart {
            label: format!("{}*e^(2Y)", self.label),
            signature: self.signature,
            domain: self.domain.clone(),
            field: Arc::new(Rescaled {
                base: self.field.clone(),
                upsilon,
            }),
        }
    }

    /// Deterministic interior sample points for sweeps, on a shrunken box.
    pub fn sample_points<R: rand::Rng>(&self, rng: &mut R, count: usize, shrink: f64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                self.domain
                    .lower
                    .iter()
                    .zip(&self.domain.upper)
                    .map(|(&lo, &hi)| {
                        let mid = 0.5 * (lo + hi);
                        let half = 0.5 * (hi - lo) * shrink;
                        rng.random_range(mid - half..mid + half)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Free-function form of [`MetricChart::conformal_rescale`].
pub fn conformal_rescale(chart: &MetricChart, upsilon: Arc<dyn ScalarField>) -> MetricChart {
    chart.conformal_rescale(upsilon)
}

#[derive(Debug)]
struct Rescaled {
    base: Arc<dyn MetricField>,
    upsilon: Arc<dyn ScalarField>,
}

impl MetricField for Rescaled {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn metric_f64(&self, x: &[f64]) -> Vec<f64> {
        let f = (2.0 * self.upsilon.value_f64(x)).exp();
        self.base.metric_f64(x).into_iter().map(|g| g * f).collect()
    }
    fn metric_jet(&self, x: &[Jet]) -> Vec<Jet> {
        let f = (self.upsilon.value_jet(x) * 2.0).exp();
        self.base
            .metric_jet(x)
            .into_iter()
            .map(|g| g * f.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_is_open_with_margin() {
        let b = CoordBox::cube(2, 1.0);
        assert!(b.contains(&[0.0, 0.999]));
        assert!(!b.contains(&[0.0, 1.0 - 1e-7]));
        assert!(!b.contains(&[0.0]));
    }

    #[test]
    fn zero_rescale_keeps_metric() {
        let chart = sphere(3).unwrap();
        let hat = chart.conformal_rescale(Arc::new(ConformalFactor::Constant(0.0)));
        let x = [0.1, -0.2, 0.3];
        assert_eq!(chart.metric(&x), hat.metric(&x));
    }

    #[test]
    fn constant_log_two_rescale_quadruples() {
        let chart = flat(Signature::new(2, 3).unwrap());
        let hat = chart.conformal_rescale(Arc::new(ConformalFactor::Constant(2f64.ln())));
        let x = [0.1, -0.2, 0.3, 0.0, 0.2];
        let diff = hat.metric(&x) - chart.metric(&x) * 4.0;
        assert!(diff.norm() < 1e-14);
    }
}
