//! Canonical loops on the model atlases and the tractor holonomy of the
//! quadric.

use nalgebra::DMatrix;

use super::{HomogeneousError, LoopId, ModelKind, ModelSpace};
use crate::geometry::GeometryError;
use crate::tractor::{holonomy, tractor_metric_matrix, Curve, Handoff, LoopPath, Segment, TransportOptions, TransportReport};

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn add(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

impl ModelSpace {
    fn line(&self, chart: &str, from: Vec<f64>, to: Vec<f64>) -> Result<Segment, HomogeneousError> {
        Ok(Segment::new(self.chart(chart)?.clone(), Curve::Line { from, to }, (0.0, 1.0))?)
    }

    fn handoff(&self, from: &str, to: &str) -> Result<Handoff, HomogeneousError> {
        let t = self
            .atlas
            .transition(from, to)
            .ok_or_else(|| HomogeneousError::UnknownChart(format!("{from} -> {to}")))?;
        Ok(Handoff { transition: t.clone() })
    }

    /// Equator points used by the loops: one on the first axis of each
    /// factor, and one on a second axis where the factor has one.
    fn equator_points(&self) -> (Vec<f64>, Vec<f64>) {
        let (p, q) = self.blocks;
        let n = p + q;
        let mut w = unit(n, 0);
        let mut w2 = unit(n, if p >= 2 { 1 } else { 0 });
        if q > 0 {
            w[p] = 1.0;
            w2[if q >= 2 { p + 1 } else { p }] = 1.0;
        }
        (w, w2)
    }

    /// The canonical loop `id`, starting at the base point. On the product
    /// of spheres the antipodal path is returned open.
    pub fn loop_path(&self, id: LoopId) -> Result<LoopPath, HomogeneousError> {
        let n = self.blocks.0 + self.blocks.1;
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n).into());
        }
        let (base, anti) = (self.base_chart().to_string(), self.antipodal_chart().to_string());
        let origin = vec![0.0; n];
        let (w, w2) = self.equator_points();
        match id {
            LoopId::Antipodal => {
                if matches!(self.kind, ModelKind::RoundSphere { .. }) {
                    return Err(HomogeneousError::Topology(
                        "the sphere is simply connected; there is no antipodal loop".into(),
                    ));
                }
                let segments = vec![self.line(&base, origin.clone(), w.clone())?, self.line(&anti, w, origin)?];
                let handoffs = vec![Some(self.handoff(&base, &anti)?)];
                let closing = if self.is_quadric() {
                    let deck = self
                        .atlas
                        .deck_from(&anti)
                        .filter(|t| t.target.label == base)
                        .ok_or_else(|| HomogeneousError::UnknownChart(format!("deck {anti} -> {base}")))?;
                    Some(Handoff { transition: deck.clone() })
                } else {
                    None
                };
                let path = LoopPath {
                    segments,
                    handoffs,
                    closed: closing.is_some(),
                    closing,
                };
                path.validate()?;
                Ok(path)
            }
            LoopId::ControlChart => {
                let c1 = add(&unit(n, 0), &unit(n, n - 1), -0.4);
                let c1: Vec<f64> = c1.iter().map(|v| 0.6 * v).collect();
                let c2 = add(&add(&unit(n, 1), &unit(n, 0), -0.6), &unit(n, n - 1), 1.0);
                let c2: Vec<f64> = c2.iter().map(|v| 0.5 * v).collect();
                Ok(LoopPath::closed_in_chart(vec![
                    self.line(&base, origin.clone(), c1.clone())?,
                    self.line(&base, c1, c2.clone())?,
                    self.line(&base, c2, origin)?,
                ])?)
            }
            LoopId::ControlExcursion => {
                let mid: Vec<f64> = w2.iter().map(|v| 0.3 * v).collect();
                let path = LoopPath {
                    segments: vec![
                        self.line(&base, origin.clone(), w.clone())?,
                        self.line(&anti, w, mid.clone())?,
                        self.line(&anti, mid, w2.clone())?,
                        self.line(&base, w2, origin)?,
                    ],
                    handoffs: vec![Some(self.handoff(&base, &anti)?), None, Some(self.handoff(&anti, &base)?)],
                    closing: None,
                    closed: true,
                };
                path.validate()?;
                Ok(path)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadricHolonomy {
    pub matrix: DMatrix<f64>,
    pub report: TransportReport,
    /// `|H + I|`, entrywise maximum.
    pub minus_identity_residual: f64,
    /// `|HᵀhH − h|` with `h` the tractor metric at the base point.
    pub orthogonality_residual: f64,
}

/// Tractor holonomy of a model loop in the splitting frame at the base
/// point.
pub fn model_tractor_holonomy(model: &ModelSpace, id: LoopId, opts: &TransportOptions) -> Result<QuadricHolonomy, HomogeneousError> {
    let path = model.loop_path(id)?;
    let (matrix, report) = holonomy(&path, opts)?;
    let d = matrix.nrows();
    let h = tractor_metric_matrix(&path.start_chart().metric(&path.start()));
    Ok(QuadricHolonomy {
        minus_identity_residual: (&matrix + DMatrix::identity(d, d)).abs().max(),
        orthogonality_residual: (matrix.transpose() * &h * &matrix - &h).abs().max(),
        matrix,
        report,
    })
}

/// Tractor holonomy around the antipodal loop of the quadric of signature
/// `(p, q)`.
pub fn quadric_tractor_holonomy(p: usize, q: usize, opts: &TransportOptions) -> Result<QuadricHolonomy, HomogeneousError> {
    if p == 0 || q == 0 {
        return Err(HomogeneousError::Topology(format!(
            "the quadric of signature ({p},{q}) is a sphere and has no noncontractible loop"
        )));
    }
    if p + q < 3 {
        return Err(GeometryError::DimensionTooSmall(p + q).into());
    }
    model_tractor_holonomy(&ModelSpace::quadric(p, q)?, LoopId::Antipodal, opts)
}
