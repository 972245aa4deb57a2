//! Built-in chart library and config-loaded polynomial/rational metrics.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CoordBox, GenericMetric, GeometryError, MetricChart, ScalarField};
use crate::jet::{Jet, Scalar};
use crate::lie::Signature;

fn norm_sq<S: Scalar>(x: &[S]) -> S {
    let mut acc = x[0].zero_like();
    for v in x {
        acc = acc + v.clone() * v.clone();
    }
    acc
}

/// `h = diag(+1^p, −1^q)`.
#[derive(Debug, Clone)]
pub struct FlatMetric {
    pub signature: Signature,
}

impl GenericMetric for FlatMetric {
    fn dim(&self) -> usize {
        self.signature.n()
    }
    fn metric<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.signature.n();
        let mut g = vec![x[0].zero_like(); n * n];
        for i in 0..n {
            g[i * n + i] = x[0].lift(self.signature.h_sign(i));
        }
        g
    }
}

/// Unit round sphere in a stereographic chart: `4 δ / (1 + |x|²)²`.
#[derive(Debug, Clone)]
pub struct SphereMetric {
    pub n: usize,
}

fn stereo_factor<S: Scalar>(x: &[S]) -> S {
    let d = norm_sq(x) + x[0].lift(1.0);
    (d.clone() * d).recip().scaled(4.0)
}

impl GenericMetric for SphereMetric {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.n;
        let f = stereo_factor(x);
        let mut g = vec![x[0].zero_like(); n * n];
        for i in 0..n {
            g[i * n + i] = f.clone();
        }
        g
    }
}

/// `g_{S^p} − g_{S^q}` with each factor in a stereographic chart; the first
/// `p` coordinates belong to `S^p`.
#[derive(Debug, Clone)]
pub struct ProductSphereMetric {
    pub p: usize,
    pub q: usize,
}

impl GenericMetric for ProductSphereMetric {
    fn dim(&self) -> usize {
        self.p + self.q
    }
    fn metric<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.p + self.q;
        let mut g = vec![x[0].zero_like(); n * n];
        if self.p > 0 {
            let fa = stereo_factor(&x[..self.p]);
            for i in 0..self.p {
                g[i * n + i] = fa.clone();
            }
        }
        if self.q > 0 {
            let fb = -stereo_factor(&x[self.p..]);
            for i in self.p..n {
                g[i * n + i] = fb.clone();
            }
        }
        g
    }
}

/// Conformal factors `Υ`, used both for rescaling and as presets for
/// conformally flat charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConformalFactor {
    Constant(f64),
    /// `c0 + b·x`.
    Linear { c0: f64, b: Vec<f64> },
    /// `c0 + b·x + ½ xᵀ a x` with `a` row-major symmetric.
    Quadratic { c0: f64, b: Vec<f64>, a: Vec<f64> },
    /// `log(2 / (1 + |x|²))`: pulls flat space back to the round sphere.
    Sphere,
    /// `amp · exp(−|x − center|² / width²)`.
    Bump { amp: f64, center: Vec<f64>, width: f64 },
    /// `amp · sin(k·x + phase)`.
    Wave { amp: f64, k: Vec<f64>, phase: f64 },
    Sum(Vec<ConformalFactor>),
}

impl ConformalFactor {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let zero = x[0].zero_like();
        let affine = |c0: f64, b: &[f64]| {
            let mut acc = zero.lift(c0);
            for (xi, &bi) in x.iter().zip(b) {
                acc = acc + xi.scaled(bi);
            }
            acc
        };
        match self {
            ConformalFactor::Constant(c) => zero.lift(*c),
            ConformalFactor::Linear { c0, b } => affine(*c0, b),
            ConformalFactor::Quadratic { c0, b, a } => {
                let n = x.len();
                let mut acc = affine(*c0, b);
                for i in 0..n {
                    for j in 0..n {
                        let aij = a[i * n + j];
                        if aij != 0.0 {
                            acc = acc + (x[i].clone() * x[j].clone()).scaled(0.5 * aij);
                        }
                    }
                }
                acc
            }
            ConformalFactor::Sphere => (norm_sq(x) + zero.lift(1.0)).recip().scaled(2.0).ln(),
            ConformalFactor::Bump { amp, center, width } => {
                let shifted: Vec<S> = x.iter().zip(center).map(|(v, &c)| v.clone() - v.lift(c)).collect();
                norm_sq(&shifted).scaled(-1.0 / (width * width)).exp().scaled(*amp)
            }
            ConformalFactor::Wave { amp, k, phase } => affine(*phase, k).sin().scaled(*amp),
            ConformalFactor::Sum(parts) => {
                let mut acc = zero;
                for part in parts {
                    acc = acc + part.eval(x);
                }
                acc
            }
        }
    }

    /// Named presets for `conformally_flat(...)` charts in dimension `n`.
    pub fn preset(name: &str, n: usize) -> Result<Self, GeometryError> {
        let ramp = |scale: f64| (0..n).map(|i| scale * (1.0 + i as f64) / n as f64).collect::<Vec<_>>();
        match name {
            "sphere" => Ok(ConformalFactor::Sphere),
            "bump" => Ok(ConformalFactor::Bump {
                amp: 0.4,
                center: ramp(0.2),
                width: 0.9,
            }),
            "wave" => Ok(ConformalFactor::Wave {
                amp: 0.3,
                k: ramp(1.5),
                phase: 0.2,
            }),
            other => Err(GeometryError::UnknownPreset(other.to_string())),
        }
    }

    /// Random smooth factor of moderate size for conformal-invariance sweeps.
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
        let mut v = |s: f64| -> Vec<f64> { (0..n).map(|_| rng.random_range(-s..s)).collect() };
        let b = v(0.4);
        let mut a = vec![0.0; n * n];
        let raw = v(0.3);
        let raw2 = v(0.3);
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = raw[i] * raw2[j] + raw[j] * raw2[i];
            }
        }
        let k = v(1.2);
        let center = v(0.3);
        ConformalFactor::Sum(vec![
            ConformalFactor::Quadratic {
                c0: rng.random_range(-0.3..0.3),
                b,
                a,
            },
            ConformalFactor::Wave {
                amp: rng.random_range(0.05..0.25),
                k,
                phase: rng.random_range(0.0..6.0),
            },
            ConformalFactor::Bump {
                amp: rng.random_range(-0.3..0.3),
                center,
                width: rng.random_range(0.6..1.2),
            },
        ])
    }
}

impl ScalarField for ConformalFactor {
    fn value_f64(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
    fn value_jet(&self, x: &[Jet]) -> Jet {
        self.eval(x)
    }
}

/// `Σ c · xᵉ` over sparse terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u8>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![Term {
                coeff: c,
                powers: Vec::new(),
            }],
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].zero_like();
        for t in &self.terms {
            let mut m = x[0].lift(t.coeff);
            for (v, &k) in x.iter().zip(&t.powers) {
                for _ in 0..k {
                    m = m * v.clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    fn check(&self, n: usize) -> Result<(), GeometryError> {
        match self.terms.iter().find(|t| t.powers.len() > n) {
            Some(t) => Err(GeometryError::BadSpec(format!(
                "term has {} powers for a {n}-dimensional chart",
                t.powers.len()
            ))),
            None => Ok(()),
        }
    }
}

/// `g_ij = h_ij + N_ij(x) / D_ij(x)`; entries not listed are `h_ij`.
#[derive(Debug, Clone)]
pub struct RationalMetric {
    pub signature: Signature,
    /// Upper-triangular entries `(i, j, numerator, denominator)`.
    pub entries: Vec<(usize, usize, Polynomial, Option<Polynomial>)>,
}

impl GenericMetric for RationalMetric {
    fn dim(&self) -> usize {
        self.signature.n()
    }
    fn metric<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.signature.n();
        let mut g = FlatMetric {
            signature: self.signature,
        }
        .metric(x);
        for (i, j, num, den) in &self.entries {
            let mut v = num.eval(x);
            if let Some(den) = den {
                v = v / den.eval(x);
            }
            g[i * n + j] = g[i * n + j].clone() + v.clone();
            if i != j {
                g[j * n + i] = g[j * n + i].clone() + v;
            }
        }
        g
    }
}

/// Config form of a custom metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub label: String,
    pub p: usize,
    pub q: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    pub entries: Vec<EntrySpec>,
}

fn default_half_width() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub i: usize,
    pub j: usize,
    pub numerator: Vec<Term>,
    #[serde(default)]
    pub denominator: Option<Vec<Term>>,
}

impl MetricSpec {
    pub fn build(&self) -> Result<MetricChart, GeometryError> {
        let sig = Signature::new(self.p, self.q)?;
        let n = sig.n();
        let mut entries = Vec::new();
        for e in &self.entries {
            if e.i >= n || e.j >= n {
                return Err(GeometryError::BadSpec(format!("entry ({}, {}) out of range", e.i, e.j)));
            }
            let num = Polynomial {
                terms: e.numerator.clone(),
            };
            num.check(n)?;
            let den = e.denominator.as_ref().map(|t| Polynomial { terms: t.clone() });
            if let Some(d) = &den {
                d.check(n)?;
            }
            entries.push((e.i.min(e.j), e.i.max(e.j), num, den));
        }
        if !(self.half_width > 0.0) {
            return Err(GeometryError::BadSpec("half_width must be positive".into()));
        }
        let chart = MetricChart::new(
            self.label.clone(),
            sig,
            CoordBox::cube(n, self.half_width),
            Arc::new(RationalMetric {
                signature: sig,
                entries,
            }),
        );
        let origin = vec![0.0; n];
        if chart.signature_at(&origin) != (self.p, self.q) {
            return Err(GeometryError::Degenerate {
                chart: self.label.clone(),
                point: origin,
            });
        }
        Ok(chart)
    }
}

pub fn flat(sig: Signature) -> MetricChart {
    MetricChart::new(
        format!("flat({},{})", sig.p, sig.q),
        sig,
        CoordBox::cube(sig.n(), 2.0),
        Arc::new(FlatMetric { signature: sig }),
    )
}

pub fn sphere(n: usize) -> Result<MetricChart, GeometryError> {
    let sig = Signature::new(n, 0)?;
    Ok(MetricChart::new(
        format!("sphere({n})"),
        sig,
        CoordBox::cube(n, 3.0),
        Arc::new(SphereMetric { n }),
    ))
}

pub fn product_sphere(p: usize, q: usize) -> Result<MetricChart, GeometryError> {
    let sig = Signature::new(p, q)?;
    Ok(MetricChart::new(
        format!("product_sphere({p},{q})"),
        sig,
        CoordBox::cube(sig.n(), 3.0),
        Arc::new(ProductSphereMetric { p, q }),
    ))
}

pub fn conformally_flat(preset: &str, sig: Signature) -> Result<MetricChart, GeometryError> {
    let factor = ConformalFactor::preset(preset, sig.n())?;
    let mut chart = flat(sig).conformal_rescale(Arc::new(factor));
    chart.label = format!("conformally_flat({preset},{},{})", sig.p, sig.q);
    chart.domain = CoordBox::cube(sig.n(), 1.5);
    Ok(chart)
}

/// A fixed non-conformally-flat metric `h + (linear + quadratic + cubic)`
/// with small seeded coefficients.
pub fn poly_generic(sig: Signature) -> MetricChart {
    let n = sig.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut terms = Vec::new();
            let monomial = |degree: usize, rng: &mut ChaCha8Rng, scale: f64| {
                let mut powers = vec![0u8; n];
                for _ in 0..degree {
                    powers[rng.random_range(0..n)] += 1;
                }
                Term {
                    coeff: rng.random_range(-scale..scale),
                    powers,
                }
            };
            terms.push(monomial(1, &mut rng, 0.12));
            terms.push(monomial(2, &mut rng, 0.25));
            terms.push(monomial(2, &mut rng, 0.25));
            terms.push(monomial(3, &mut rng, 0.3));
            entries.push((i, j, Polynomial { terms }, None));
        }
    }
    MetricChart::new(
        format!("poly_generic({},{})", sig.p, sig.q),
        sig,
        CoordBox::cube(n, 0.5),
        Arc::new(RationalMetric { signature: sig, entries }),
    )
}

/// Resolve names such as `flat(2,3)`, `sphere(5)`, `product_sphere(2,3)`,
/// `conformally_flat(bump)`, `conformally_flat(wave,1,3)`, `poly_generic(2,3)`.
pub fn chart_by_name(name: &str) -> Result<MetricChart, GeometryError> {
    let bad = || GeometryError::BadChartName(name.to_string());
    let trimmed = name.trim();
    let open = trimmed.find('(').ok_or_else(bad)?;
    if !trimmed.ends_with(')') {
        return Err(bad());
    }
    let head = &trimmed[..open];
    let args: Vec<&str> = trimmed[open + 1..trimmed.len() - 1]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let ints = |from: usize| -> Result<Vec<usize>, GeometryError> {
        args[from..].iter().map(|a| a.parse::<usize>().map_err(|_| bad())).collect()
    };
    let pair = |v: Vec<usize>| -> Result<Signature, GeometryError> {
        match v.as_slice() {
            [p, q] => Ok(Signature::new(*p, *q)?),
            _ => Err(bad()),
        }
    };
    match head {
        "flat" => Ok(flat(pair(ints(0)?)?)),
        "sphere" => match ints(0)?.as_slice() {
            [n] => sphere(*n),
            _ => Err(bad()),
        },
        "product_sphere" => {
            let sig = pair(ints(0)?)?;
            product_sphere(sig.p, sig.q)
        }
        "poly_generic" => Ok(poly_generic(pair(ints(0)?)?)),
        "conformally_flat" => {
            let preset = args.first().ok_or_else(bad)?;
            let sig = if args.len() == 1 {
                Signature::new(2, 3)?
            } else {
                pair(ints(1)?)?
            };
            conformally_flat(preset, sig)
        }
        _ => Err(GeometryError::UnknownChart(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in [
            "flat(2,3)",
            "sphere(5)",
            "product_sphere(2,3)",
            "conformally_flat(bump)",
            "conformally_flat(wave,1,3)",
            "poly_generic(2,3)",
        ] {
            let chart = chart_by_name(name).unwrap();
            assert_eq!(chart.label, name.replace("(bump)", "(bump,2,3)"));
        }
        assert!(matches!(chart_by_name("torus(2)"), Err(GeometryError::UnknownChart(_))));
        assert!(matches!(chart_by_name("flat(2"), Err(GeometryError::BadChartName(_))));
        assert!(matches!(
            chart_by_name("conformally_flat(spiral)"),
            Err(GeometryError::UnknownPreset(_))
        ));
    }

    #[test]
    fn library_signatures_hold_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in ["flat(2,3)", "sphere(4)", "product_sphere(2,3)", "poly_generic(2,3)", "poly_generic(2,2)"] {
            let chart = chart_by_name(name).unwrap();
            for x in chart.sample_points(&mut rng, 100, 1.0) {
                assert_eq!(chart.signature_at(&x), (chart.signature.p, chart.signature.q), "{name} at {x:?}");
            }
        }
    }

    #[test]
    fn spec_round_trip_from_toml() {
        let text = r#"
            label = "warped"
            p = 1
            q = 2
            half_width = 0.4
            [[entries]]
            i = 0
            j = 1
            numerator = [{ coeff = 0.2, powers = [0, 0, 1] }]
            [[entries]]
            i = 2
            j = 2
            numerator = [{ coeff = 0.1, powers = [1] }]
            denominator = [{ coeff = 1.0, powers = [] }, { coeff = 0.5, powers = [0, 2] }]
        "#;
        let spec: MetricSpec = toml::from_str(text).unwrap();
        let chart = spec.build().unwrap();
        let g = chart.metric(&[0.3, 0.2, 0.1]);
        assert!((g[(0, 1)] - 0.02).abs() < 1e-15);
        assert!((g[(1, 0)] - 0.02).abs() < 1e-15);
        assert!((g[(2, 2)] - (-1.0 + 0.03 / 1.02)).abs() < 1e-15);
    }

    #[test]
    fn spec_rejects_out_of_range_entries() {
        let spec = MetricSpec {
            label: "bad".into(),
            p: 2,
            q: 1,
            half_width: 0.5,
            entries: vec![EntrySpec {
                i: 3,
                j: 0,
                numerator: vec![],
                denominator: None,
            }],
        };
        assert!(matches!(spec.build(), Err(GeometryError::BadSpec(_))));
    }
}
