//! Local sections `s : chart → SO₀(J)` with `s(x)·e₀ = Z(x)`.
//!
//! On each sphere factor the rotation taking the chart's pivot pole to the
//! point is the minimal rotation in their common plane,
//! `R = I + K + K²/(1 + c)` with `K = a eᵀ − e aᵀ` and `c = e·a`. Charts centered
//! at the south pole pivot on `−e` and precompose with the half turn in the
//! `(e, e₁)` plane, so `R e = a` and `det R = 1` in both cases. The product
//! rotation is carried to the null-adapted basis by `L`.

use nalgebra::DMatrix;

use super::{stereo, HomogeneousError, ModelSpace, Poles};
use crate::geometry::CoordBox;
use crate::jet::{Jet, JetSpace, Scalar};
use crate::lie::Variant;

/// Smallest `1 + c` accepted by the pivot.
const PIVOT_MARGIN: f64 = 1e-6;

/// A section over one chart of a model.
#[derive(Debug, Clone)]
pub struct LocalSection {
    pub chart: String,
    pub variant: Variant,
    pub region: CoordBox,
    poles: Poles,
    blocks: (usize, usize),
    l: DMatrix<f64>,
    l_inv: DMatrix<f64>,
}

/// `k×k` rotation (row-major) taking the pivot pole to `a`, plus `1 + c`.
fn pivot_rotation<S: Scalar>(a: &[S], north: bool) -> (Vec<S>, f64) {
    let k = a.len();
    if k == 1 {
        return (vec![a[0].clone()], 2.0);
    }
    let sign = if north { 1.0 } else { -1.0 };
    let unit = a[0].lift(1.0);
    let c = a[0].scaled(sign);
    let one_plus = unit.clone() + c.clone();
    let inv = one_plus.recip();
    // K = a eᵀ − e aᵀ with e = sign·e₀.
    let mut kmat = vec![a[0].zero_like(); k * k];
    for r in 0..k {
        kmat[r * k] = kmat[r * k].clone() + a[r].scaled(sign);
        kmat[r] = kmat[r].clone() - a[r].scaled(sign);
    }
    let mut rot = vec![a[0].zero_like(); k * k];
    for r in 0..k {
        for col in 0..k {
            let mut k2 = a[0].zero_like();
            for m in 0..k {
                k2 = k2 + kmat[r * k + m].clone() * kmat[m * k + col].clone();
            }
            let id = if r == col { unit.clone() } else { a[0].zero_like() };
            rot[r * k + col] = id + kmat[r * k + col].clone() + k2 * inv.clone();
        }
    }
    if !north {
        // Half turn in the (e₀, e₁) plane: negate the first two columns.
        for r in 0..k {
            rot[r * k] = -rot[r * k].clone();
            rot[r * k + 1] = -rot[r * k + 1].clone();
        }
    }
    (rot, one_plus.value())
}

impl LocalSection {
    /// Section over `region` of `chart`. Only the parabolic variants define
    /// a model; the pivot must stay away from the opposite pole on the
    /// whole region.
    pub fn new(model: &ModelSpace, chart: &str, variant: Variant, region: CoordBox) -> Result<Self, HomogeneousError> {
        if !matches!(variant, Variant::PRay | Variant::PLine | Variant::SPRay | Variant::SPLine) {
            return Err(HomogeneousError::NotParabolic(variant));
        }
        let poles = model.poles(chart)?;
        let l = model.embedding().clone();
        let l_inv = l.clone().try_inverse().expect("embedding is invertible");
        let section = Self {
            chart: chart.to_string(),
            variant,
            region,
            poles,
            blocks: model.blocks,
            l,
            l_inv,
        };
        // The pivot margin is worst at the corner farthest from the origin.
        let corner: Vec<f64> = section
            .region
            .lower
            .iter()
            .zip(&section.region.upper)
            .map(|(lo, hi)| if lo.abs() > hi.abs() { *lo } else { *hi })
            .collect();
        section.blocks_at(&corner)?;
        Ok(section)
    }

    /// Section over the whole chart.
    pub fn over_chart(model: &ModelSpace, chart: &str, variant: Variant) -> Result<Self, HomogeneousError> {
        let region = model.chart(chart)?.domain.clone();
        Self::new(model, chart, variant, region)
    }

    fn blocks_at<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, HomogeneousError> {
        let (p, q) = self.blocks;
        let unit = x[0].lift(1.0);
        let a = stereo(&x[..p], self.poles.a_north, &unit);
        let b = if q == 0 {
            vec![unit.scaled(if self.poles.b_north { 1.0 } else { -1.0 })]
        } else {
            stereo(&x[p..], self.poles.b_north, &unit)
        };
        let (ra, ma) = pivot_rotation(&a, self.poles.a_north);
        let (rb, mb) = pivot_rotation(&b, self.poles.b_north);
        if ma.min(mb) < PIVOT_MARGIN {
            return Err(HomogeneousError::PivotDegenerate {
                chart: self.chart.clone(),
                point: x.iter().map(Scalar::value).collect(),
            });
        }
        let (ka, kb) = (p + 1, b.len());
        let d = ka + kb;
        let mut out = vec![x[0].zero_like(); d * d];
        for r in 0..ka {
            for c in 0..ka {
                out[r * d + c] = ra[r * ka + c].clone();
            }
        }
        for r in 0..kb {
            for c in 0..kb {
                out[(ka + r) * d + ka + c] = rb[r * kb + c].clone();
            }
        }
        Ok(out)
    }

    fn conjugate(&self, block: &DMatrix<f64>) -> DMatrix<f64> {
        &self.l * block * &self.l_inv
    }

    /// `s(x)`.
    pub fn matrix(&self, x: &[f64]) -> Result<DMatrix<f64>, HomogeneousError> {
        let d = self.l.nrows();
        let blocks = self.blocks_at(x)?;
        Ok(self.conjugate(&DMatrix::from_row_slice(d, d, &blocks)))
    }

    /// `s(x)` and the Maurer–Cartan form `s⁻¹ ∂_v s` at `x`.
    pub fn with_mc_form(&self, x: &[f64], v: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), HomogeneousError> {
        let n = x.len();
        let d = self.l.nrows();
        let space = JetSpace::shared(n, 1);
        let jets: Vec<Jet> = self.blocks_at(&Jet::point(&space, x))?;
        let value = DMatrix::from_fn(d, d, |r, c| jets[r * d + c].value());
        let dv = DMatrix::from_fn(d, d, |r, c| (0..n).map(|i| v[i] * jets[r * d + c].d1(i)).sum());
        // The block matrix is orthogonal, so its inverse is its transpose.
        let omega = self.conjugate(&(value.transpose() * dv));
        Ok((self.conjugate(&value), omega))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::null_ray_of;
    use crate::lie::membership;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn base_point_is_identity() {
        let m = ModelSpace::quadric(2, 3).unwrap();
        let s = LocalSection::over_chart(&m, m.base_chart(), Variant::PLine).unwrap();
        let e = s.matrix(&[0.0; 5]).unwrap();
        assert!((e - DMatrix::identity(7, 7)).abs().max() < 1e-15);
    }

    #[test]
    fn sections_are_orthogonal_and_hit_the_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for model in [ModelSpace::quadric(2, 3).unwrap(), ModelSpace::quadric(1, 2).unwrap(), ModelSpace::round_sphere(3).unwrap()] {
            for chart in model.atlas.charts.clone() {
                let s = LocalSection::over_chart(&model, &chart.label, Variant::SPLine).unwrap();
                for _ in 0..100 {
                    let x: Vec<f64> = (0..chart.dim()).map(|_| rng.random_range(-2.5..2.5)).collect();
                    let a = s.matrix(&x).unwrap();
                    assert!(model.quad.group_residual(&a) < 1e-10);
                    let same_sheet = model.quad.signature.q > 0 || chart.label.ends_with("/N");
                    assert!(membership(&model.quad, &a, Variant::SO).unwrap() || !same_sheet);
                    let z = null_ray_of(&model, &chart.label, &x).unwrap();
                    assert!((a.column(0) - z).abs().max() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn mc_form_matches_difference_quotient() {
        let m = ModelSpace::quadric(2, 2).unwrap();
        let s = LocalSection::over_chart(&m, "product_sphere(2,2)/SN", Variant::PLine).unwrap();
        let (x, v) = ([0.4, -0.7, 0.2, 1.1], [0.3, 1.0, -0.5, 0.2]);
        let (a, omega) = s.with_mc_form(&x, &v).unwrap();
        let h = 1e-6;
        let shift = |t: f64| x.iter().zip(&v).map(|(a, b)| a + t * b).collect::<Vec<_>>();
        let fd = (s.matrix(&shift(h)).unwrap() - s.matrix(&shift(-h)).unwrap()) / (2.0 * h);
        let omega_fd = a.try_inverse().unwrap() * fd;
        assert!((&omega - omega_fd).abs().max() < 1e-8);
        assert!(m.quad.algebra_residual(&omega) < 1e-12);
    }

    #[test]
    fn levi_variants_are_not_models() {
        let m = ModelSpace::quadric(1, 2).unwrap();
        assert!(matches!(
            LocalSection::over_chart(&m, m.base_chart(), Variant::PLine0),
            Err(HomogeneousError::NotParabolic(_))
        ));
    }
}
