//! Coordinate changes between charts and the stereographic atlases of
//! `S^n` and `S^p × S^q`.

use nalgebra::DMatrix;

use super::charts::{ProductSphereMetric, SphereMetric};
use super::{CoordBox, GeometryError, MetricChart};
use crate::jet::{Jet, JetSpace, Scalar};
use crate::lie::Signature;
use std::sync::Arc;

/// Smallest block norm accepted in an inverted block.
const INVERSION_MARGIN: f64 = 1e-3;

/// Coordinate maps used by the atlases. Blocks are `(start, len)` ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordMap {
    Identity,
    /// `x_B ↦ x_B / |x_B|²` on each listed block: the change between
    /// stereographic charts centered at opposite poles.
    Inversion { blocks: Vec<(usize, usize)> },
    /// `x ↦ −x`: the antipodal map written between charts centered at
    /// opposite poles.
    Negate,
}

impl CoordMap {
    pub fn apply<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self {
            CoordMap::Identity => x.to_vec(),
            CoordMap::Negate => x.iter().map(|v| -v.clone()).collect(),
            CoordMap::Inversion { blocks } => {
                let mut out = x.to_vec();
                for &(start, len) in blocks {
                    let block = &x[start..start + len];
                    let mut r2 = block[0].zero_like();
                    for v in block {
                        r2 = r2 + v.clone() * v.clone();
                    }
                    let inv = r2.recip();
                    for k in start..start + len {
                        out[k] = x[k].clone() * inv.clone();
                    }
                }
                out
            }
        }
    }

    /// Every map in use is an involution.
    pub fn inverse(&self) -> CoordMap {
        self.clone()
    }

    fn defined_at(&self, x: &[f64]) -> bool {
        match self {
            CoordMap::Inversion { blocks } => blocks.iter().all(|&(s, l)| {
                x[s..s + l].iter().map(|v| v * v).sum::<f64>().sqrt() > INVERSION_MARGIN
            }),
            _ => true,
        }
    }

    /// Value and Jacobian `∂φ^a/∂x^b` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let n = x.len();
        let space = JetSpace::shared(n, 1);
        let y = self.apply(&Jet::point(&space, x));
        let jac = DMatrix::from_fn(n, n, |a, b| y[a].d1(b));
        (y.iter().map(|e| e.value()).collect(), jac)
    }
}

/// A coordinate change from `source` to `target`, both carrying metrics of
/// the same conformal structure; the atlases here use isometric charts.
#[derive(Debug, Clone)]
pub struct ChartTransition {
    pub name: String,
    pub source: MetricChart,
    pub target: MetricChart,
    pub map: CoordMap,
}

impl ChartTransition {
    pub fn identity(chart: &MetricChart) -> Self {
        Self {
            name: format!("id:{}", chart.label),
            source: chart.clone(),
            target: chart.clone(),
            map: CoordMap::Identity,
        }
    }

    pub fn in_overlap(&self, x: &[f64]) -> bool {
        x.len() == self.source.dim()
            && self.source.domain.contains(x)
            && self.map.defined_at(x)
            && self.target.domain.contains(&self.map.apply(x))
    }

    pub fn reversed(&self) -> Self {
        Self {
            name: format!("{}^-1", self.name),
            source: self.target.clone(),
            target: self.source.clone(),
            map: self.map.inverse(),
        }
    }

    /// Worst `|g_t(Dφv, Dφw) − g_s(v, w)|` over coordinate vectors at `x`.
    pub fn metric_residual(&self, x: &[f64]) -> f64 {
        let (y, jac) = self.map.jacobian(x);
        let pulled = jac.transpose() * self.target.metric(&y) * &jac;
        (pulled - self.source.metric(x)).abs().max()
    }
}

/// `(φ(x), Dφ(x) v)`.
pub fn transition_pushforward(
    t: &ChartTransition,
    x: &[f64],
    v: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
    if !t.in_overlap(x) {
        return Err(GeometryError::OutsideOverlap {
            transition: t.name.clone(),
            point: x.to_vec(),
        });
    }
    let (y, jac) = t.map.jacobian(x);
    let w = jac * nalgebra::DVector::from_column_slice(v);
    Ok((y, w.iter().copied().collect()))
}

/// Charts and transitions between them.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub charts: Vec<MetricChart>,
    pub transitions: Vec<ChartTransition>,
    /// Antipodal map between charts centered at opposite poles.
    pub deck: Vec<ChartTransition>,
}

impl Atlas {
    pub fn chart(&self, label: &str) -> Option<&MetricChart> {
        self.charts.iter().find(|c| c.label == label)
    }

    pub fn transition(&self, source: &str, target: &str) -> Option<&ChartTransition> {
        self.transitions
            .iter()
            .find(|t| t.source.label == source && t.target.label == target)
    }

    pub fn deck_from(&self, source: &str) -> Option<&ChartTransition> {
        self.deck.iter().find(|t| t.source.label == source)
    }
}

fn pole_name(north: bool) -> char {
    if north {
        'N'
    } else {
        'S'
    }
}

/// Stereographic charts of `S^n` centered at `N` and `S = −N`.
pub fn sphere_atlas(n: usize) -> Result<Atlas, GeometryError> {
    let sig = Signature::new(n, 0)?;
    let make = |north: bool| {
        MetricChart::new(
            format!("sphere({n})/{}", pole_name(north)),
            sig,
            CoordBox::cube(n, 3.0),
            Arc::new(SphereMetric { n }),
        )
    };
    let (cn, cs) = (make(true), make(false));
    let inv = CoordMap::Inversion { blocks: vec![(0, n)] };
    let mk = |a: &MetricChart, b: &MetricChart, map: CoordMap| ChartTransition {
        name: format!("{}->{}", a.label, b.label),
        source: a.clone(),
        target: b.clone(),
        map,
    };
    Ok(Atlas {
        transitions: vec![mk(&cn, &cs, inv.clone()), mk(&cs, &cn, inv)],
        deck: vec![mk(&cn, &cs, CoordMap::Negate), mk(&cs, &cn, CoordMap::Negate)],
        charts: vec![cn, cs],
    })
}

/// Four charts of `S^p × S^q`, one per choice of pole in each factor,
/// labelled `product_sphere(p,q)/XY` with `X, Y ∈ {N, S}`.
pub fn product_sphere_atlas(p: usize, q: usize) -> Result<Atlas, GeometryError> {
    let sig = Signature::new(p, q)?;
    let n = sig.n();
    let poles = [(true, true), (true, false), (false, true), (false, false)];
    let charts: Vec<MetricChart> = poles
        .iter()
        .map(|&(a, b)| {
            MetricChart::new(
                format!("product_sphere({p},{q})/{}{}", pole_name(a), pole_name(b)),
                sig,
                CoordBox::cube(n, 3.0),
                Arc::new(ProductSphereMetric { p, q }),
            )
        })
        .collect();
    let mut transitions = Vec::new();
    let mut deck = Vec::new();
    for (i, &(a1, b1)) in poles.iter().enumerate() {
        for (j, &(a2, b2)) in poles.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut blocks = Vec::new();
            if a1 != a2 && p > 0 {
                blocks.push((0, p));
            }
            if b1 != b2 && q > 0 {
                blocks.push((p, q));
            }
            let (s, t) = (&charts[i], &charts[j]);
            if a1 != a2 && b1 != b2 {
                deck.push(ChartTransition {
                    name: format!("deck:{}->{}", s.label, t.label),
                    source: s.clone(),
                    target: t.clone(),
                    map: CoordMap::Negate,
                });
            }
            transitions.push(ChartTransition {
                name: format!("{}->{}", s.label, t.label),
                source: s.clone(),
                target: t.clone(),
                map: CoordMap::Inversion { blocks },
            });
        }
    }
    Ok(Atlas {
        charts,
        transitions,
        deck,
    })
}
