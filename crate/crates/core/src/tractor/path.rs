//! Piecewise chart curves with hand-offs between charts.

use serde::{Deserialize, Serialize};

use super::TractorError;
use crate::geometry::{chart_by_name, Atlas, ChartTransition, MetricChart};

/// Tolerance for matching segment endpoints across hand-offs.
pub const JOIN_TOL: f64 = 1e-10;

/// A curve in chart coordinates, parametrized over `t_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// Affine from `from` (at `t0`) to `to` (at `t1`).
    Line { from: Vec<f64>, to: Vec<f64> },
    /// `center + radius (cos θ e1 + sin θ e2)` with `θ` affine from `theta0` to `theta1`.
    Arc {
        center: Vec<f64>,
        radius: f64,
        e1: Vec<f64>,
        e2: Vec<f64>,
        theta0: f64,
        theta1: f64,
    },
    /// `x(t) = Σ_k coeffs[k] tᵏ` in the raw parameter.
    ParamPoly { coeffs: Vec<Vec<f64>> },
}

impl Curve {
    fn dim(&self) -> usize {
        match self {
            Curve::Line { from, .. } => from.len(),
            Curve::Arc { center, .. } => center.len(),
            Curve::ParamPoly { coeffs } => coeffs.first().map_or(0, Vec::len),
        }
    }

    fn consistent(&self) -> bool {
        let n = self.dim();
        match self {
            Curve::Line { to, .. } => to.len() == n,
            Curve::Arc { e1, e2, .. } => e1.len() == n && e2.len() == n,
            Curve::ParamPoly { coeffs } => !coeffs.is_empty() && coeffs.iter().all(|c| c.len() == n),
        }
    }

    /// Position and velocity at raw parameter `t` for range `(t0, t1)`.
    pub fn eval(&self, t: f64, range: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        let (t0, t1) = range;
        let span = t1 - t0;
        let s = (t - t0) / span;
        match self {
            Curve::Line { from, to } => (
                from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect(),
                from.iter().zip(to).map(|(a, b)| (b - a) / span).collect(),
            ),
            Curve::Arc {
                center,
                radius,
                e1,
                e2,
                theta0,
                theta1,
            } => {
                let th = theta0 + s * (theta1 - theta0);
                let dth = (theta1 - theta0) / span;
                let (sn, cs) = th.sin_cos();
                (
                    (0..center.len()).map(|i| center[i] + radius * (cs * e1[i] + sn * e2[i])).collect(),
                    (0..center.len()).map(|i| radius * dth * (-sn * e1[i] + cs * e2[i])).collect(),
                )
            }
            Curve::ParamPoly { coeffs } => {
                let n = self.dim();
                let mut x = vec![0.0; n];
                let mut v = vec![0.0; n];
                for i in 0..n {
                    for k in (0..coeffs.len()).rev() {
                        x[i] = x[i] * t + coeffs[k][i];
                    }
                    for k in (1..coeffs.len()).rev() {
                        v[i] = v[i] * t + k as f64 * coeffs[k][i];
                    }
                }
                (x, v)
            }
        }
    }
}

/// One curve in one chart.
#[derive(Debug, Clone)]
pub struct Segment {
    pub chart: MetricChart,
    pub curve: Curve,
    pub t_range: (f64, f64),
}

impl Segment {
    pub fn new(chart: MetricChart, curve: Curve, t_range: (f64, f64)) -> Result<Self, TractorError> {
        if curve.dim() != chart.dim() || !curve.consistent() {
            return Err(TractorError::CurveDimension(chart.dim()));
        }
        Ok(Self { chart, curve, t_range })
    }

    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        self.curve.eval(t, self.t_range)
    }

    pub fn start(&self) -> Vec<f64> {
        self.eval(self.t_range.0).0
    }

    pub fn end(&self) -> Vec<f64> {
        self.eval(self.t_range.1).0
    }

    pub fn length(&self) -> f64 {
        (self.t_range.1 - self.t_range.0).abs()
    }
}

/// Coordinate change applied between two segments or when closing a loop.
#[derive(Debug, Clone)]
pub struct Handoff {
    pub transition: ChartTransition,
}

/// Segments joined by hand-offs; `closing` identifies the last chart with
/// the first when the loop closes through a chart change or deck map.
#[derive(Debug, Clone)]
pub struct LoopPath {
    pub segments: Vec<Segment>,
    /// `handoffs[k]` joins segment `k` to `k + 1`; `None` keeps the chart.
    pub handoffs: Vec<Option<Handoff>>,
    pub closing: Option<Handoff>,
    pub closed: bool,
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl LoopPath {
    pub fn single(segment: Segment) -> Self {
        Self {
            segments: vec![segment],
            handoffs: Vec::new(),
            closing: None,
            closed: false,
        }
    }

    /// Closed loop made of segments in one chart.
    pub fn closed_in_chart(segments: Vec<Segment>) -> Result<Self, TractorError> {
        let k = segments.len();
        let path = Self {
            segments,
            handoffs: vec![None; k.saturating_sub(1)],
            closing: None,
            closed: true,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), TractorError> {
        if self.segments.is_empty() {
            return Err(TractorError::EmptyPath);
        }
        if self.handoffs.len() + 1 != self.segments.len() {
            return Err(TractorError::PathGap {
                segment: self.handoffs.len(),
                gap: f64::INFINITY,
            });
        }
        for (k, h) in self.handoffs.iter().enumerate() {
            let end = self.segments[k].end();
            let mapped = match h {
                Some(h) => h.transition.map.apply(&end),
                None => end,
            };
            let g = gap(&mapped, &self.segments[k + 1].start());
            if g > JOIN_TOL {
                return Err(TractorError::PathGap { segment: k, gap: g });
            }
        }
        if self.closed {
            let end = self.segments.last().expect("non-empty").end();
            let mapped = match &self.closing {
                Some(h) => h.transition.map.apply(&end),
                None => end,
            };
            let g = gap(&mapped, &self.segments[0].start());
            if g > JOIN_TOL {
                return Err(TractorError::NotClosed { gap: g });
            }
        }
        Ok(())
    }

    pub fn start(&self) -> Vec<f64> {
        self.segments[0].start()
    }

    pub fn start_chart(&self) -> &MetricChart {
        &self.segments[0].chart
    }

    pub fn end_chart(&self) -> &MetricChart {
        &self.segments.last().expect("non-empty").chart
    }
}

/// Config form of a path: charts by name (or by atlas label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub chart: String,
    pub curve: Curve,
    pub t_range: [f64; 2],
}

impl PathSpec {
    /// Resolve chart names; consecutive segments in different charts are
    /// joined through the atlas transition between them.
    pub fn build(&self, atlas: Option<&Atlas>) -> Result<LoopPath, TractorError> {
        let resolve = |name: &str| -> Result<MetricChart, TractorError> {
            if let Some(c) = atlas.and_then(|a| a.chart(name)) {
                return Ok(c.clone());
            }
            chart_by_name(name).map_err(|_| TractorError::UnknownChart(name.to_string()))
        };
        let mut segments = Vec::new();
        for s in &self.segments {
            segments.push(Segment::new(resolve(&s.chart)?, s.curve.clone(), (s.t_range[0], s.t_range[1]))?);
        }
        let mut handoffs = Vec::new();
        for w in self.segments.windows(2) {
            if w[0].chart == w[1].chart {
                handoffs.push(None);
            } else {
                let t = atlas
                    .and_then(|a| a.transition(&w[0].chart, &w[1].chart))
                    .ok_or_else(|| TractorError::UnknownChart(format!("{} -> {}", w[0].chart, w[1].chart)))?;
                handoffs.push(Some(Handoff { transition: t.clone() }));
            }
        }
        let path = LoopPath {
            segments,
            handoffs,
            closing: None,
            closed: self.closed,
        };
        path.validate()?;
        Ok(path)
    }
}
