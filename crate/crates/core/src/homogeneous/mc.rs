//! Associated-bundle transport through the Maurer–Cartan form, and sign
//! tracking of the tautological line.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{null_line_of, HomogeneousError, LocalSection, ModelSpace};
use crate::geometry::CoordMap;
use crate::lie::{membership, Representation, Variant};
use crate::tractor::{LoopPath, Segment};

/// Largest `|dot|` of consecutive unit line representatives treated as a
/// sign ambiguity.
const AMBIGUITY: f64 = 0.5;
/// Refinement rounds (each ×4 samples) before giving up on sign tracking.
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub steps_per_unit: usize,
    pub validate: bool,
    pub tolerance: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            steps_per_unit: 1000,
            validate: true,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct McReport {
    /// `v` at the end, in the end trivialization (for closed loops, the
    /// start trivialization after the closing gauge change).
    pub vector: DVector<f64>,
    /// Accumulated transport operator.
    pub operator: DMatrix<f64>,
    /// `|operator − ρ(s_end⁻¹ s_start)|`, the flatness oracle.
    pub oracle_residual: f64,
    /// Largest `|TᵀJT − J|` over step points.
    pub j_drift: f64,
    pub halving_estimate: Option<f64>,
    pub determinant: f64,
    pub steps: usize,
}

struct Sections<'a> {
    model: &'a ModelSpace,
    variant: Variant,
    cache: HashMap<String, LocalSection>,
}

impl Sections<'_> {
    fn get(&mut self, chart: &str) -> Result<&LocalSection, HomogeneousError> {
        if !self.cache.contains_key(chart) {
            let s = LocalSection::over_chart(self.model, chart, self.variant)?;
            self.cache.insert(chart.to_string(), s);
        }
        Ok(&self.cache[chart])
    }
}

fn j_inverse(model: &ModelSpace, a: &DMatrix<f64>) -> DMatrix<f64> {
    &model.quad.j * a.transpose() * &model.quad.j
}

/// `ρ(p⁻¹)` for `p = s_from⁻¹ s_to`, after checking `p` lies in the variant.
fn gauge(
    model: &ModelSpace,
    variant: Variant,
    rep: &Representation,
    s_from: &DMatrix<f64>,
    s_to: &DMatrix<f64>,
    at: &str,
) -> Result<DMatrix<f64>, HomogeneousError> {
    let p = j_inverse(model, s_from) * s_to;
    if !membership(&model.quad, &p, variant)? {
        return Err(HomogeneousError::GaugeOutsideGroup {
            variant,
            at: at.to_string(),
        });
    }
    Ok(rep.group_matrix(&j_inverse(model, &p)))
}

/// RK4 for `T′ = −ω T` over samples of `ω` on a uniform grid.
fn rk4(omega: &[DMatrix<f64>], steps: usize, stride: usize, dt: f64, start: &DMatrix<f64>, j: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let mut t = start.clone();
    let mut drift = 0.0f64;
    for k in 0..steps {
        let i0 = 2 * k * stride;
        let (a0, am, a1) = (&omega[i0], &omega[i0 + stride], &omega[i0 + 2 * stride]);
        let k1 = -(a0 * &t);
        let k2 = -(am * (&t + &k1 * (0.5 * dt)));
        let k3 = -(am * (&t + &k2 * (0.5 * dt)));
        let k4 = -(a1 * (&t + &k3 * dt));
        t += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        drift = drift.max((t.transpose() * j * &t - j).abs().max());
    }
    (t, drift)
}

fn sample_omega(section: &LocalSection, seg: &Segment, grid: usize) -> Result<Vec<DMatrix<f64>>, HomogeneousError> {
    let (t0, t1) = seg.t_range;
    (0..=grid)
        .map(|k| {
            let (x, v) = seg.eval(t0 + (t1 - t0) * k as f64 / grid as f64);
            Ok(section.with_mc_form(&x, &v)?.1)
        })
        .collect()
}

/// Transport `v0` along `path` with `v′ = −ρ(s⁻¹ṡ) v`, changing gauge at
/// hand-offs and, for closed loops, at the closing identification.
pub fn mc_transport(
    model: &ModelSpace,
    variant: Variant,
    rep: &Representation,
    path: &LoopPath,
    v0: &DVector<f64>,
    opts: &McOptions,
) -> Result<McReport, HomogeneousError> {
    path.validate()?;
    let d = model.quad.dim();
    if v0.len() != d {
        return Err(crate::lie::LieError::VectorLength { expected: d, got: v0.len() }.into());
    }
    let mut sections = Sections {
        model,
        variant,
        cache: HashMap::new(),
    };
    let j = &model.quad.j;
    let mut op = DMatrix::identity(d, d);
    let mut op_fine = DMatrix::identity(d, d);
    let (mut drift, mut steps_total) = (0.0f64, 0);
    let n_seg = path.segments.len();
    for (k, seg) in path.segments.iter().enumerate() {
        let steps = ((opts.steps_per_unit as f64) * seg.length()).ceil().max(1.0) as usize;
        steps_total += steps;
        let dt = (seg.t_range.1 - seg.t_range.0) / steps as f64;
        let section = sections.get(&seg.chart.label)?.clone();
        if opts.validate {
            let omega = sample_omega(&section, seg, 4 * steps)?;
            let (a, da) = rk4(&omega, steps, 2, dt, &op, j);
            let (b, _) = rk4(&omega, 2 * steps, 1, dt / 2.0, &op_fine, j);
            op = a;
            op_fine = b;
            drift = drift.max(da);
        } else {
            let omega = sample_omega(&section, seg, 2 * steps)?;
            let (a, da) = rk4(&omega, steps, 1, dt, &op, j);
            op = a;
            drift = drift.max(da);
        }
        let x_end = seg.end();
        let s_end = section.matrix(&x_end)?;
        let next = if k + 1 < n_seg {
            Some((path.segments[k + 1].chart.label.clone(), path.segments[k + 1].start()))
        } else if path.closed {
            if let Some(h) = &path.closing {
                if h.transition.map == CoordMap::Negate && !model.is_quadric() {
                    return Err(HomogeneousError::Topology(
                        "the antipodal identification only exists on the quadric".into(),
                    ));
                }
            }
            Some((path.segments[0].chart.label.clone(), path.start()))
        } else {
            None
        };
        if let Some((chart, y)) = next {
            let s_next = sections.get(&chart)?.matrix(&y)?;
            let at = format!("{} -> {}", seg.chart.label, chart);
            let g = gauge(model, variant, rep, &s_end, &s_next, &at)?;
            op = &g * op;
            op_fine = &g * op_fine;
        }
    }
    let halving = opts.validate.then(|| (&op - &op_fine).abs().max());
    if let Some(est) = halving {
        let limit = 10.0 * opts.tolerance;
        if est > limit {
            return Err(HomogeneousError::StepValidation { estimate: est, limit });
        }
    }
    let first = &path.segments[0];
    let s_first = sections.get(&first.chart.label)?.matrix(&first.start())?;
    let s_final = if path.closed {
        s_first.clone()
    } else {
        let last = path.segments.last().expect("validated");
        sections.get(&last.chart.label)?.matrix(&last.end())?
    };
    let oracle = rep.group_matrix(&(j_inverse(model, &s_final) * &s_first));
    Ok(McReport {
        vector: &op * v0,
        oracle_residual: (&op - oracle).abs().max(),
        determinant: op.determinant(),
        operator: op,
        j_drift: drift,
        halving_estimate: halving,
        steps: steps_total,
    })
}

fn line_samples(model: &ModelSpace, path: &LoopPath, total: usize) -> Result<Vec<DVector<f64>>, HomogeneousError> {
    let length: f64 = path.segments.iter().map(Segment::length).sum();
    let mut out = Vec::new();
    for seg in &path.segments {
        let m = ((total as f64) * seg.length() / length).ceil().max(2.0) as usize;
        let (t0, t1) = seg.t_range;
        for k in 0..=m {
            let (x, _) = seg.eval(t0 + (t1 - t0) * k as f64 / m as f64);
            out.push(null_line_of(model, &seg.chart.label, &x)?);
        }
    }
    Ok(out)
}

/// Follow a unit vector spanning the null line continuously around the
/// closed loop and return the sign relating the final vector to the first.
pub fn line_monodromy(model: &ModelSpace, path: &LoopPath, samples: usize) -> Result<i8, HomogeneousError> {
    path.validate()?;
    if !path.closed {
        return Err(HomogeneousError::NotClosed(f64::INFINITY));
    }
    let mut total = samples.max(2);
    for _ in 0..=MAX_REFINEMENTS {
        let reps = line_samples(model, path, total)?;
        let mut cur = reps[0].clone();
        let mut ambiguous = false;
        for next in &reps[1..] {
            let dot = cur.dot(next);
            if dot.abs() < AMBIGUITY {
                ambiguous = true;
                break;
            }
            cur = if dot < 0.0 { -next } else { next.clone() };
        }
        if ambiguous {
            total *= 4;
            continue;
        }
        let closing = cur.dot(&reps[0]);
        if (closing.abs() - 1.0).abs() > 1e-9 {
            return Err(HomogeneousError::NotClosed(1.0 - closing.abs()));
        }
        return Ok(if closing < 0.0 { -1 } else { 1 });
    }
    Err(HomogeneousError::SignAmbiguity {
        refinements: MAX_REFINEMENTS,
    })
}
