//! Parallel transport `U′ = −γ̇^i A_i U` by fixed-step RK4, and holonomy.

use nalgebra::{DMatrix, DVector};

use super::path::{Handoff, LoopPath, Segment};
use super::{connection_from_geometry, tractor_metric_matrix, TractorError, TractorVector};
use crate::geometry::point_geometry;

/// Largest metric residual accepted for an isometric hand-off.
const ISOMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportOptions {
    /// RK4 steps per unit of curve parameter.
    pub steps_per_unit: usize,
    /// Also integrate with half the step and compare.
    pub validate: bool,
    /// Step-halving changes above `10 × tolerance` are errors.
    pub tolerance: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            steps_per_unit: 1000,
            validate: true,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransportReport {
    /// Transport operator from the start fiber to the end fiber, in the
    /// splitting frames of the first and last charts.
    pub operator: DMatrix<f64>,
    /// Largest `|h(U(t), U(t)) − h(U₀, U₀)|` over step points (zero when no
    /// vector was transported).
    pub drift: f64,
    /// Same with half the step, when validating.
    pub drift_halved: Option<f64>,
    /// Largest entry of the operator change under step halving.
    pub halving_estimate: Option<f64>,
    pub steps: usize,
}

/// Connection matrix along the curve and tractor metric, at grid points.
struct Samples {
    a: Vec<DMatrix<f64>>,
    h: Vec<DMatrix<f64>>,
}

fn sample_segment(seg: &Segment, grid: usize) -> Result<Samples, TractorError> {
    let (t0, t1) = seg.t_range;
    let mut a = Vec::with_capacity(grid + 1);
    let mut h = Vec::with_capacity(grid + 1);
    for k in 0..=grid {
        let t = t0 + (t1 - t0) * k as f64 / grid as f64;
        let (x, v) = seg.eval(t);
        let geom = point_geometry(&seg.chart, &x)?;
        a.push(connection_from_geometry(&geom, &v).total());
        let n = geom.n;
        h.push(tractor_metric_matrix(&DMatrix::from_row_slice(n, n, &geom.g)));
    }
    Ok(Samples { a, h })
}

/// RK4 over `steps` steps; step `k` reads samples `2k·stride` (start),
/// `(2k+1)·stride` (midpoint) and `(2k+2)·stride` (end). Returns the
/// operator and the drift of `u0` if given.
fn integrate(
    samples: &Samples,
    steps: usize,
    stride: usize,
    dt: f64,
    start: &DMatrix<f64>,
    u0: Option<(&DVector<f64>, f64)>,
) -> (DMatrix<f64>, f64) {
    let mut t = start.clone();
    let mut drift = 0.0f64;
    let measure = |t: &DMatrix<f64>, h: &DMatrix<f64>, drift: &mut f64| {
        if let Some((u, h0)) = u0 {
            let w = t * u;
            *drift = drift.max(((w.transpose() * h * &w)[(0, 0)] - h0).abs());
        }
    };
    measure(&t, &samples.h[0], &mut drift);
    for k in 0..steps {
        let i0 = 2 * k * stride;
        let (a0, am, a1) = (&samples.a[i0], &samples.a[i0 + stride], &samples.a[i0 + 2 * stride]);
        let k1 = -(a0 * &t);
        let k2 = -(am * (&t + &k1 * (0.5 * dt)));
        let k3 = -(am * (&t + &k2 * (0.5 * dt)));
        let k4 = -(a1 * (&t + &k3 * dt));
        t += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        measure(&t, &samples.h[i0 + 2 * stride], &mut drift);
    }
    (t, drift)
}

/// `diag(1, Dφ, 1)` for an isometric chart change at `x`.
fn handoff_frame(h: &Handoff, x: &[f64]) -> Result<DMatrix<f64>, TractorError> {
    let t = &h.transition;
    let residual = t.metric_residual(x);
    if residual > ISOMETRY_TOL {
        return Err(TractorError::NonIsometric {
            name: t.name.clone(),
            residual,
        });
    }
    let (_, jac) = t.map.jacobian(x);
    let n = x.len();
    let mut f = DMatrix::identity(n + 2, n + 2);
    f.view_mut((1, 1), (n, n)).copy_from(&jac);
    Ok(f)
}

fn run(path: &LoopPath, opts: &TransportOptions, u0: Option<&DVector<f64>>) -> Result<TransportReport, TractorError> {
    path.validate()?;
    let d = path.start_chart().dim() + 2;
    let mut op = DMatrix::identity(d, d);
    let mut op_fine = DMatrix::identity(d, d);
    let h0 = {
        let g = path.start_chart().metric(&path.start());
        tractor_metric_matrix(&g)
    };
    let u_h0 = u0.map(|u| (u, (u.transpose() * &h0 * u)[(0, 0)]));
    let (mut drift, mut drift_fine) = (0.0f64, 0.0f64);
    let mut total_steps = 0;
    for (k, seg) in path.segments.iter().enumerate() {
        let steps = ((opts.steps_per_unit as f64) * seg.length()).ceil().max(1.0) as usize;
        total_steps += steps;
        let dt = (seg.t_range.1 - seg.t_range.0) / steps as f64;
        if opts.validate {
            let samples = sample_segment(seg, 4 * steps)?;
            let (a, da) = integrate(&samples, steps, 2, dt, &op, u_h0);
            let (b, db) = integrate(&samples, 2 * steps, 1, dt / 2.0, &op_fine, u_h0);
            op = a;
            op_fine = b;
            drift = drift.max(da);
            drift_fine = drift_fine.max(db);
        } else {
            let samples = sample_segment(seg, 2 * steps)?;
            let (a, da) = integrate(&samples, steps, 1, dt, &op, u_h0);
            op = a;
            drift = drift.max(da);
        }
        if let Some(Some(h)) = path.handoffs.get(k) {
            let f = handoff_frame(h, &seg.end())?;
            op = &f * op;
            op_fine = &f * op_fine;
        }
    }
    let halving = opts.validate.then(|| (&op - &op_fine).abs().max());
    if let Some(est) = halving {
        let limit = 10.0 * opts.tolerance;
        if est > limit {
            return Err(TractorError::StepValidation { estimate: est, limit });
        }
    }
    Ok(TransportReport {
        operator: op,
        drift,
        drift_halved: opts.validate.then_some(drift_fine),
        halving_estimate: halving,
        steps: total_steps,
    })
}

/// Transport operator along `path` (start fiber to end fiber).
pub fn transport_operator(path: &LoopPath, opts: &TransportOptions) -> Result<TransportReport, TractorError> {
    run(path, opts, None)
}

/// Transport `u0` (given at the path start, in the start chart's scale).
pub fn parallel_transport(
    path: &LoopPath,
    u0: &TractorVector,
    opts: &TransportOptions,
) -> Result<(TractorVector, TransportReport), TractorError> {
    let d = path.start_chart().dim() + 2;
    let v = u0.stacked();
    if v.len() != d {
        return Err(TractorError::Length {
            expected: d,
            got: v.len(),
        });
    }
    let report = run(path, opts, Some(&v))?;
    let end = &report.operator * v;
    let last = path.segments.last().expect("validated");
    Ok((
        TractorVector::from_stacked(&end, last.end(), last.chart.label.clone()),
        report,
    ))
}

/// Holonomy of a closed loop in the splitting frame at the basepoint; the
/// closing hand-off (chart change or deck identification) is applied last.
pub fn holonomy(path: &LoopPath, opts: &TransportOptions) -> Result<(DMatrix<f64>, TransportReport), TractorError> {
    if !path.closed {
        let start = path.start();
        let end = path.segments.last().map(|s| s.end()).unwrap_or_default();
        let gap = start.iter().zip(&end).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        return Err(TractorError::NotClosed { gap });
    }
    let report = transport_operator(path, opts)?;
    let mut hol = report.operator.clone();
    if let Some(h) = &path.closing {
        let end = path.segments.last().expect("validated").end();
        hol = handoff_frame(h, &end)? * hol;
    }
    Ok((hol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat, sphere};
    use crate::lie::Signature;
    use crate::tractor::path::Curve;

    fn line(chart: &crate::geometry::MetricChart, from: Vec<f64>, to: Vec<f64>) -> Segment {
        Segment::new(chart.clone(), Curve::Line { from, to }, (0.0, 1.0)).unwrap()
    }

    #[test]
    fn constant_curve_is_identity() {
        let chart = sphere(3).unwrap();
        let p = vec![0.2, 0.1, -0.3];
        let path = LoopPath::single(line(&chart, p.clone(), p.clone()));
        let u0 = TractorVector::new(0.3, vec![1.0, -2.0, 0.5], 0.7, p, chart.label.clone());
        let (u, _) = parallel_transport(&path, &u0, &TransportOptions::default()).unwrap();
        assert_eq!(u.stacked(), u0.stacked());
    }

    #[test]
    fn flat_straight_line_closed_form() {
        // A = v^i A_i is constant and nilpotent: exp(−tA) is exact quadratic.
        let chart = flat(Signature::new(2, 1).unwrap());
        let v = [0.3, -0.4, 0.5];
        let path = LoopPath::single(line(&chart, vec![0.0; 3], v.to_vec()));
        let start = TractorVector::new(1.0, vec![0.0; 3], 0.0, vec![0.0; 3], chart.label.clone());
        let (u, rep) = parallel_transport(&path, &start, &TransportOptions::default()).unwrap();
        let vv = 0.09 + 0.16 - 0.25;
        assert!((u.rho - 1.0).abs() < 1e-13);
        for i in 0..3 {
            assert!((u.mu[i] + v[i]).abs() < 1e-13);
        }
        assert!((u.sigma + 0.5 * vv).abs() < 1e-13);
        assert!(rep.drift < 1e-13);

        let sig = TractorVector::new(0.0, vec![0.0; 3], 1.0, vec![0.0; 3], chart.label.clone());
        let (u, _) = parallel_transport(&path, &sig, &TransportOptions::default()).unwrap();
        assert_eq!(u.stacked(), sig.stacked());
    }

    #[test]
    fn open_path_has_no_holonomy() {
        let chart = sphere(3).unwrap();
        let path = LoopPath::single(line(&chart, vec![0.0; 3], vec![0.1, 0.0, 0.0]));
        assert!(matches!(
            holonomy(&path, &TransportOptions::default()),
            Err(TractorError::NotClosed { .. })
        ));
    }

    #[test]
    fn sphere_triangle_holonomy_is_identity() {
        let chart = sphere(3).unwrap();
        let (a, b, c) = (vec![0.0, 0.0, 0.0], vec![0.8, 0.0, 0.1], vec![0.0, 0.7, -0.4]);
        let path = LoopPath::closed_in_chart(vec![
            line(&chart, a.clone(), b.clone()),
            line(&chart, b, c.clone()),
            line(&chart, c, a),
        ])
        .unwrap();
        let (hol, rep) = holonomy(&path, &TransportOptions::default()).unwrap();
        assert!((hol - DMatrix::identity(5, 5)).abs().max() < 1e-9);
        assert!(rep.halving_estimate.unwrap() < 1e-10);
    }
}
