//! Homogeneous models: `S^p × S^q` as the space of null rays of
//! `ℝ^{p+1,q+1}`, the quadric of null lines, and the round sphere.
//!
//! Points are given in the stereographic charts of the geometry atlases.
//! A chart point `(u, w)` maps to `(a, b) ∈ S^p × S^q` and from there to the
//! null vector `Z = L(a, b)` written in the null-adapted basis
//! `(e₀, e₁…eₙ, e_∞)` of the quadratic form: `x⁰ = (a₀ + b₀)/2`,
//! `x^∞ = (a₀ − b₀)/2`, middle `(a′, b′)/√2`. The base point `(N, N)` goes to
//! `e₀` and the antipodal point to `−Z`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{product_sphere_atlas, sphere_atlas, Atlas, GeometryError, MetricChart};
use crate::jet::Scalar;
use crate::lie::{quadratic_form, LieError, QuadForm, Signature, Variant};
use crate::tractor::TractorError;

mod mc;
mod quadric;
mod section;

pub use mc::{line_monodromy, mc_transport, McOptions, McReport};
pub use quadric::{model_tractor_holonomy, quadric_tractor_holonomy, QuadricHolonomy};
pub use section::LocalSection;

#[derive(Debug, Error)]
pub enum HomogeneousError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tractor(#[from] TractorError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("chart {0} is not part of this model")]
    UnknownChart(String),
    #[error("section pivot degenerates on chart {chart} at {point:?}")]
    PivotDegenerate { chart: String, point: Vec<f64> },
    #[error("{0} is not a parabolic subgroup variant")]
    NotParabolic(Variant),
    #[error("gauge change at {at} is not in {variant}")]
    GaugeOutsideGroup { variant: Variant, at: String },
    #[error("topology: {0}")]
    Topology(String),
    #[error("sign tracking stayed ambiguous after {refinements} refinements")]
    SignAmbiguity { refinements: usize },
    #[error("step-halving change {estimate:.3e} exceeds {limit:.3e}")]
    StepValidation { estimate: f64, limit: f64 },
    #[error("path does not close in the model (gap {0:.3e})")]
    NotClosed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    ProductSphere { p: usize, q: usize },
    Quadric { p: usize, q: usize },
    RoundSphere { n: usize },
}

/// Which pole each stereographic chart is centered at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Poles {
    pub a_north: bool,
    pub b_north: bool,
}

/// A model space with its chart atlas.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub kind: ModelKind,
    pub signature: Signature,
    pub quad: QuadForm,
    pub atlas: Atlas,
    /// Sizes of the two sphere factors' coordinate blocks.
    pub blocks: (usize, usize),
    poles: Vec<(String, Poles)>,
    embed: DMatrix<f64>,
}

/// Canonical loops; see [`ModelSpace::loop_path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopId {
    /// Great circles in both factors from the base point to its antipode,
    /// closed by the deck identification on the quadric.
    Antipodal,
    /// A triangle inside the base chart.
    ControlChart,
    /// Out through the opposite chart and back without the deck map.
    ControlExcursion,
}

impl LoopId {
    pub const ALL: [LoopId; 3] = [LoopId::Antipodal, LoopId::ControlChart, LoopId::ControlExcursion];

    pub fn name(self) -> &'static str {
        match self {
            LoopId::Antipodal => "antipodal",
            LoopId::ControlChart => "control-chart",
            LoopId::ControlExcursion => "control-excursion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// `L`: coordinates `(a₀, a′, b₀, b′)` to the null-adapted basis.
fn embedding_matrix(p: usize, q: usize) -> DMatrix<f64> {
    let n = p + q;
    let d = n + 2;
    let (a0, b0) = (0, p + 1);
    let mut l = DMatrix::zeros(d, d);
    l[(0, a0)] = 0.5;
    l[(0, b0)] = 0.5;
    l[(n + 1, a0)] = 0.5;
    l[(n + 1, b0)] = -0.5;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..p {
        l[(1 + i, a0 + 1 + i)] = r;
    }
    for i in 0..q {
        l[(1 + p + i, b0 + 1 + i)] = r;
    }
    l
}

/// Inverse stereographic projection onto `S^k ⊂ ℝ^{k+1}`, pole coordinate
/// first; `north = false` is the chart centered at the opposite pole.
pub(crate) fn stereo<S: Scalar>(u: &[S], north: bool, unit: &S) -> Vec<S> {
    let mut r2 = unit.zero_like();
    for c in u {
        r2 = r2 + c.clone() * c.clone();
    }
    let inv = (unit.clone() + r2.clone()).recip();
    let pole = (unit.clone() - r2) * inv.clone();
    let mut out = Vec::with_capacity(u.len() + 1);
    out.push(if north { pole } else { pole.scaled(-1.0) });
    out.extend(u.iter().map(|c| (c.clone() * inv.clone()).scaled(2.0)));
    out
}

impl ModelSpace {
    /// `S^p × S^q`, the space of null rays.
    pub fn product_sphere(p: usize, q: usize) -> Result<Self, HomogeneousError> {
        Self::from_product(ModelKind::ProductSphere { p, q }, p, q)
    }

    /// Null lines: `S^p × S^q` modulo `z ↦ −z`. With `p` or `q` zero this
    /// is the round sphere.
    pub fn quadric(p: usize, q: usize) -> Result<Self, HomogeneousError> {
        if p == 0 || q == 0 {
            return Self::round_sphere(p + q);
        }
        Self::from_product(ModelKind::Quadric { p, q }, p, q)
    }

    pub fn round_sphere(n: usize) -> Result<Self, HomogeneousError> {
        let signature = Signature::new(n, 0)?;
        let atlas = sphere_atlas(n)?;
        let poles = atlas
            .charts
            .iter()
            .map(|c| {
                let north = c.label.ends_with("/N");
                (c.label.clone(), Poles { a_north: north, b_north: true })
            })
            .collect();
        Ok(Self {
            kind: ModelKind::RoundSphere { n },
            signature,
            quad: quadratic_form(signature),
            atlas,
            blocks: (n, 0),
            poles,
            embed: embedding_matrix(n, 0),
        })
    }

    fn from_product(kind: ModelKind, p: usize, q: usize) -> Result<Self, HomogeneousError> {
        if p == 0 || q == 0 {
            return Err(HomogeneousError::Topology(format!(
                "S^{p} x S^{q} needs both factors of positive dimension"
            )));
        }
        let signature = Signature::new(p, q)?;
        let atlas = product_sphere_atlas(p, q)?;
        let poles = atlas
            .charts
            .iter()
            .map(|c| {
                let tag: Vec<char> = c.label.chars().rev().take(2).collect();
                (
                    c.label.clone(),
                    Poles {
                        a_north: tag[1] == 'N',
                        b_north: tag[0] == 'N',
                    },
                )
            })
            .collect();
        Ok(Self {
            kind,
            signature,
            quad: quadratic_form(signature),
            atlas,
            blocks: (p, q),
            poles,
            embed: embedding_matrix(p, q),
        })
    }

    pub fn is_quadric(&self) -> bool {
        matches!(self.kind, ModelKind::Quadric { .. })
    }

    pub fn poles(&self, chart: &str) -> Result<Poles, HomogeneousError> {
        self.poles
            .iter()
            .find(|(l, _)| l == chart)
            .map(|(_, p)| *p)
            .ok_or_else(|| HomogeneousError::UnknownChart(chart.to_string()))
    }

    pub fn chart(&self, label: &str) -> Result<&MetricChart, HomogeneousError> {
        self.atlas
            .chart(label)
            .ok_or_else(|| HomogeneousError::UnknownChart(label.to_string()))
    }

    /// Label of the chart centered at the base point.
    pub fn base_chart(&self) -> &str {
        &self.atlas.charts[0].label
    }

    /// Label of the chart centered at the antipode of the base point.
    pub fn antipodal_chart(&self) -> &str {
        &self.atlas.charts.last().expect("atlas has charts").label
    }

    pub(crate) fn embedding(&self) -> &DMatrix<f64> {
        &self.embed
    }

    /// `(a, b) ∈ S^p × S^q` for a chart point (`b = (1)` on the round sphere).
    pub fn sphere_point(&self, chart: &str, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), HomogeneousError> {
        let poles = self.poles(chart)?;
        let (p, q) = self.blocks;
        if x.len() != p + q {
            return Err(GeometryError::PointDimension {
                expected: p + q,
                got: x.len(),
            }
            .into());
        }
        let a = stereo(&x[..p], poles.a_north, &1.0);
        let b = if q == 0 {
            vec![if poles.b_north { 1.0 } else { -1.0 }]
        } else {
            stereo(&x[p..], poles.b_north, &1.0)
        };
        Ok((a, b))
    }
}

/// The null vector `Z` of a chart point (a ray representative).
pub fn null_ray_of(model: &ModelSpace, chart: &str, x: &[f64]) -> Result<DVector<f64>, HomogeneousError> {
    let (a, b) = model.sphere_point(chart, x)?;
    let ab = DVector::from_iterator(a.len() + b.len(), a.into_iter().chain(b));
    Ok(model.embedding() * ab)
}

/// Unit representative of the null line of a chart point, signed so that
/// its first nonzero coordinate is positive.
pub fn null_line_of(model: &ModelSpace, chart: &str, x: &[f64]) -> Result<DVector<f64>, HomogeneousError> {
    let z = null_ray_of(model, chart, x)?;
    let z = &z / z.norm();
    let lead = z.iter().copied().find(|c| c.abs() > 1e-12).unwrap_or(1.0);
    Ok(if lead < 0.0 { -z } else { z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn base_point_and_antipode() {
        let m = ModelSpace::quadric(2, 3).unwrap();
        let z = null_ray_of(&m, m.base_chart(), &[0.0; 5]).unwrap();
        let mut e0 = DVector::zeros(7);
        e0[0] = 1.0;
        assert!((z - &e0).norm() < 1e-15);
        let x = [0.3, -0.2, 0.5, 0.1, -0.4];
        let z = null_ray_of(&m, "product_sphere(2,3)/NN", &x).unwrap();
        let minus: Vec<f64> = x.iter().map(|v| -v).collect();
        let w = null_ray_of(&m, "product_sphere(2,3)/SS", &minus).unwrap();
        assert!((z + w).norm() < 1e-14);
    }

    #[test]
    fn returned_vectors_are_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in [ModelSpace::quadric(2, 3).unwrap(), ModelSpace::round_sphere(4).unwrap()] {
            for chart in &model.atlas.charts {
                for _ in 0..25 {
                    let x: Vec<f64> = (0..chart.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let z = null_ray_of(&model, &chart.label, &x).unwrap();
                    assert!(model.quad.inner(&z, &z).abs() < 1e-12);
                    let l = null_line_of(&model, &chart.label, &x).unwrap();
                    assert!((l.norm() - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn transitions_preserve_the_point() {
        let m = ModelSpace::product_sphere(2, 2).unwrap();
        let x = [0.7, -0.4, 1.2, 0.3];
        let t = m.atlas.transition("product_sphere(2,2)/NN", "product_sphere(2,2)/SN").unwrap();
        let y = t.map.apply(&x);
        let z1 = null_ray_of(&m, "product_sphere(2,2)/NN", &x).unwrap();
        let z2 = null_ray_of(&m, "product_sphere(2,2)/SN", &y).unwrap();
        assert!((z1 - z2).norm() < 1e-14);
    }

    #[test]
    fn degenerate_products_rejected() {
        assert!(matches!(ModelSpace::product_sphere(0, 3), Err(HomogeneousError::Topology(_))));
        assert!(matches!(ModelSpace::quadric(0, 3).unwrap().kind, ModelKind::RoundSphere { n: 3 }));
    }
}
