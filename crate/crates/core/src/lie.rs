//! Matrix model of `so(p+1,q+1)`: the quadratic form `2x⁰x^∞ + h(x,x)`, its
//! |1|-grading, the parabolic subgroup variants and their Levi factors, the
//! adjoint action and the two representations used for associated bundles.
//!
//! Matrices are `(n+2)×(n+2)` in the basis `(e₀, e₁..eₙ, e_∞)`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Frobenius tolerance for quadratic relations (`AᵀJA = J`, `ZᵀJ + JZ = 0`).
pub const QUADRATIC_TOL: f64 = 1e-10;
/// Tolerance for determinant conditions.
pub const DET_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("signature components must be non-negative, got ({p}, {q})")]
    NegativeSignature { p: i64, q: i64 },
    #[error("signature ({p}, {q}) has dimension zero")]
    EmptySignature { p: usize, q: usize },
    #[error("expected a {expected}×{expected} matrix, got {rows}×{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected a vector of length {expected}, got {got}")]
    VectorLength { expected: usize, got: usize },
    #[error("matrix is not in O(J): ‖AᵀJA − J‖ = {residual:e}")]
    NotInGroup { residual: f64 },
    #[error("matrix is not in so(J): ‖ZᵀJ + JZ‖ = {residual:e}")]
    NotInAlgebra { residual: f64 },
    #[error("group element is not invertible")]
    Singular,
    #[error("det twist requires odd n, got n = {n}")]
    EvenDimension { n: usize },
    #[error("det twist expects an element of P^ray")]
    NotInRayParabolic,
}

/// The pair `(p, q)`; `n = p + q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self, LieError> {
        if p + q == 0 {
            return Err(LieError::EmptySignature { p, q });
        }
        Ok(Self { p, q })
    }

    /// Validating constructor for externally supplied integers.
    pub fn from_ints(p: i64, q: i64) -> Result<Self, LieError> {
        if p < 0 || q < 0 {
            return Err(LieError::NegativeSignature { p, q });
        }
        Self::new(p as usize, q as usize)
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Size of the ambient matrices, `n + 2`.
    pub fn dim(&self) -> usize {
        self.n() + 2
    }

    /// `h_ii`: `+1` for the first `p` slots, `-1` after.
    pub fn h_sign(&self, i: usize) -> f64 {
        if i < self.p {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// `J` together with its middle `n×n` block `h = diag(+1^p, −1^q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub signature: Signature,
    pub j: DMatrix<f64>,
    pub h_block: DMatrix<f64>,
}

pub fn quadratic_form(sig: Signature) -> QuadForm {
    let n = sig.n();
    let h_block = DMatrix::from_fn(n, n, |i, k| if i == k { sig.h_sign(i) } else { 0.0 });
    let mut j = DMatrix::zeros(n + 2, n + 2);
    j[(0, n + 1)] = 1.0;
    j[(n + 1, 0)] = 1.0;
    j.view_mut((1, 1), (n, n)).copy_from(&h_block);
    QuadForm {
        signature: sig,
        j,
        h_block,
    }
}

impl QuadForm {
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    /// `⟨v, w⟩_J`.
    pub fn inner(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let n = self.signature.n();
        let mut s = v[0] * w[n + 1] + v[n + 1] * w[0];
        for i in 0..n {
            s += self.signature.h_sign(i) * v[i + 1] * w[i + 1];
        }
        s
    }

    pub fn group_residual(&self, a: &DMatrix<f64>) -> f64 {
        (a.transpose() * &self.j * a - &self.j).norm()
    }

    pub fn algebra_residual(&self, z: &DMatrix<f64>) -> f64 {
        (z.transpose() * &self.j + &self.j * z).norm()
    }

    fn check_square(&self, a: &DMatrix<f64>) -> Result<(), LieError> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(LieError::DimensionMismatch {
                expected: d,
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        Ok(())
    }

    /// Random element of `so(J)` as `J S` for antisymmetric `S` with entries
    /// in `[-scale, scale]`.
    pub fn random_algebra<R: Rng>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let d = self.dim();
        let mut s = DMatrix::zeros(d, d);
        for i in 0..d {
            for k in (i + 1)..d {
                let v = rng.random_range(-scale..scale);
                s[(i, k)] = v;
                s[(k, i)] = -v;
            }
        }
        AlgebraElement {
            matrix: &self.j * s,
        }
    }

    /// `𝔤₋` element with data `x`: `x` in column 0, `−xᵀh` in the last row.
    pub fn g_minus(&self, x: &[f64]) -> AlgebraElement {
        let n = self.signature.n();
        assert_eq!(x.len(), n);
        let mut z = DMatrix::zeros(n + 2, n + 2);
        for i in 0..n {
            z[(i + 1, 0)] = x[i];
            z[(n + 1, i + 1)] = -self.signature.h_sign(i) * x[i];
        }
        AlgebraElement { matrix: z }
    }

    /// `𝔤₁` element with data `y`: `y` in row 0, `−h y` in the last column.
    pub fn g_plus(&self, y: &[f64]) -> AlgebraElement {
        let n = self.signature.n();
        assert_eq!(y.len(), n);
        let mut z = DMatrix::zeros(n + 2, n + 2);
        for i in 0..n {
            z[(0, i + 1)] = y[i];
            z[(i + 1, n + 1)] = -self.signature.h_sign(i) * y[i];
        }
        AlgebraElement { matrix: z }
    }

    /// Levi element `diag(λ, m, λ⁻¹)`.
    pub fn levi(&self, lambda: f64, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.signature.n();
        let mut p = DMatrix::zeros(n + 2, n + 2);
        p[(0, 0)] = lambda;
        p[(n + 1, n + 1)] = 1.0 / lambda;
        p.view_mut((1, 1), (n, n)).copy_from(m);
        p
    }

    /// Random `m ∈ O(p,q)`: exponential of a random `so(p,q)` element, with
    /// a coordinate reflection when `orientation_reversing`.
    pub fn random_opq<R: Rng>(&self, rng: &mut R, scale: f64, orientation_reversing: bool) -> DMatrix<f64> {
        let n = self.signature.n();
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in (i + 1)..n {
                let v = rng.random_range(-scale..scale);
                s[(i, k)] = v;
                s[(k, i)] = -v;
            }
        }
        let x = &self.h_block * s;
        let mut m = x.exp();
        if orientation_reversing && n > 0 {
            let col = rng.random_range(0..n);
            for r in 0..n {
                m[(r, col)] = -m[(r, col)];
            }
        }
        m
    }

    /// Random element of the requested subgroup variant, as
    /// `exp(𝔤₁ element) · Levi element` (or a general `O(J)` element for the
    /// non-parabolic variants).
    pub fn random_element<R: Rng>(&self, rng: &mut R, variant: Variant) -> DMatrix<f64> {
        use Variant::*;
        let n = self.signature.n();
        match variant {
            O | SO => {
                let z = self.random_algebra(rng, 0.6);
                let mut a = z.matrix.exp();
                let flip = rng.random_bool(0.5);
                if flip {
                    // −I has determinant (−1)^{n+2}; a reflection is used to
                    // reach the other component.
                    a = -a;
                }
                let want_det_one = variant == SO;
                let reflect = if want_det_one {
                    a.determinant() < 0.0
                } else {
                    rng.random_bool(0.5)
                };
                if reflect {
                    let r = self.levi(1.0, &self.reflection(0));
                    a = r * a;
                }
                a
            }
            _ => {
                let lambda_mag = rng.random_range(0.5..2.0);
                let negative_lambda = matches!(variant, PLine | SPLine | PLine0 | SPLine0) && rng.random_bool(0.5);
                let lambda = if negative_lambda { -lambda_mag } else { lambda_mag };
                let special = matches!(variant, SPRay | SPLine | SPRay0 | SPLine0);
                let reversing = if special {
                    // det = det(m) for the Levi element.
                    false
                } else {
                    rng.random_bool(0.5)
                };
                let m = self.random_opq(rng, 0.6, reversing && n > 0);
                let levi = self.levi(lambda, &m);
                if variant.is_levi() {
                    levi
                } else {
                    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
                    nilpotent_exp(&self.g_plus(&y).matrix) * levi
                }
            }
        }
    }

    /// Reflection `x_k ↦ −x_k` in `O(p,q)`.
    pub fn reflection(&self, k: usize) -> DMatrix<f64> {
        let n = self.signature.n();
        let mut m = DMatrix::identity(n, n);
        if n > 0 {
            m[(k, k)] = -1.0;
        }
        m
    }
}

/// `exp(Z)` for `Z` with `Z³ = 0` (elements of `𝔤₋` or `𝔤₁`).
pub fn nilpotent_exp(z: &DMatrix<f64>) -> DMatrix<f64> {
    let d = z.nrows();
    DMatrix::identity(d, d) + z + z * z * 0.5
}

/// Subgroups of `O(p+1,q+1)` distinguished by their action on `e₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "O")]
    O,
    #[serde(rename = "SO")]
    SO,
    #[serde(rename = "P_ray")]
    PRay,
    #[serde(rename = "P_line")]
    PLine,
    #[serde(rename = "SP_ray")]
    SPRay,
    #[serde(rename = "SP_line")]
    SPLine,
    #[serde(rename = "P_ray_0")]
    PRay0,
    #[serde(rename = "P_line_0")]
    PLine0,
    #[serde(rename = "SP_ray_0")]
    SPRay0,
    #[serde(rename = "SP_line_0")]
    SPLine0,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::O,
        Variant::SO,
        Variant::PRay,
        Variant::PLine,
        Variant::SPRay,
        Variant::SPLine,
        Variant::PRay0,
        Variant::PLine0,
        Variant::SPRay0,
        Variant::SPLine0,
    ];

    pub fn is_levi(self) -> bool {
        matches!(self, Variant::PRay0 | Variant::PLine0 | Variant::SPRay0 | Variant::SPLine0)
    }

    fn is_special(self) -> bool {
        matches!(
            self,
            Variant::SO | Variant::SPRay | Variant::SPLine | Variant::SPRay0 | Variant::SPLine0
        )
    }

    fn is_ray(self) -> bool {
        matches!(self, Variant::PRay | Variant::SPRay | Variant::PRay0 | Variant::SPRay0)
    }

    fn is_line(self) -> bool {
        matches!(self, Variant::PLine | Variant::SPLine | Variant::PLine0 | Variant::SPLine0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::O => "O",
            Variant::SO => "SO",
            Variant::PRay => "P_ray",
            Variant::PLine => "P_line",
            Variant::SPRay => "SP_ray",
            Variant::SPLine => "SP_line",
            Variant::PRay0 => "P_ray_0",
            Variant::PLine0 => "P_line_0",
            Variant::SPRay0 => "SP_ray_0",
            Variant::SPLine0 => "SP_line_0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn membership(quad: &QuadForm, a: &DMatrix<f64>, variant: Variant) -> Result<bool, LieError> {
    quad.check_square(a)?;
    if quad.group_residual(a) >= QUADRATIC_TOL {
        return Ok(false);
    }
    if variant.is_special() && (a.determinant() - 1.0).abs() >= DET_TOL {
        return Ok(false);
    }
    if variant == Variant::O || variant == Variant::SO {
        return Ok(true);
    }
    let d = quad.dim();
    let scale = a.norm().max(1.0);
    let off_line = (1..d).map(|r| a[(r, 0)].abs()).fold(0.0, f64::max);
    if off_line >= QUADRATIC_TOL * scale {
        return Ok(false);
    }
    let lambda = a[(0, 0)];
    if variant.is_ray() && lambda <= 0.0 {
        return Ok(false);
    }
    debug_assert!(variant.is_ray() || variant.is_line());
    if variant.is_levi() {
        // Block diagonal: nothing in row 0 or column n+1 except the corners.
        let upper = (1..d)
            .map(|c| a[(0, c)].abs())
            .chain((0..d - 1).map(|r| a[(r, d - 1)].abs()))
            .fold(0.0, f64::max);
        if upper >= QUADRATIC_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A matrix certified to lie in `O(J)`, with the variants it belongs to.
#[derive(Debug, Clone)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    tags: BTreeSet<Variant>,
}

impl GroupElement {
    pub fn new(quad: &QuadForm, matrix: DMatrix<f64>) -> Result<Self, LieError> {
        quad.check_square(&matrix)?;
        let residual = quad.group_residual(&matrix);
        if residual >= QUADRATIC_TOL {
            return Err(LieError::NotInGroup { residual });
        }
        let mut tags = BTreeSet::new();
        for v in Variant::ALL {
            if membership(quad, &matrix, v)? {
                tags.insert(v);
            }
        }
        Ok(Self { matrix, tags })
    }

    pub fn identity(quad: &QuadForm) -> Self {
        Self::new(quad, DMatrix::identity(quad.dim(), quad.dim())).expect("identity is in O(J)")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn tags(&self) -> &BTreeSet<Variant> {
        &self.tags
    }

    pub fn is(&self, v: Variant) -> bool {
        self.tags.contains(&v)
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>, LieError> {
        self.matrix.clone().try_inverse().ok_or(LieError::Singular)
    }
}

/// A matrix certified to lie in `so(J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub matrix: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(quad: &QuadForm, matrix: DMatrix<f64>) -> Result<Self, LieError> {
        quad.check_square(&matrix)?;
        let residual = quad.algebra_residual(&matrix);
        if residual >= QUADRATIC_TOL * matrix.norm().max(1.0) {
            return Err(LieError::NotInAlgebra { residual });
        }
        Ok(Self { matrix })
    }

    /// Data `x` of the `𝔤₋` part (column 0, rows `1..=n`).
    pub fn g_minus_data(&self) -> Vec<f64> {
        let d = self.matrix.nrows();
        (1..d - 1).map(|r| self.matrix[(r, 0)]).collect()
    }
}

/// Grade parts `(Z₋₁, Z₀, Z₁)`: strictly lower-left blocks, block diagonal,
/// strictly upper-right blocks.
pub fn grade_decompose(
    quad: &QuadForm,
    z: &AlgebraElement,
) -> Result<(AlgebraElement, AlgebraElement, AlgebraElement), LieError> {
    let m = &z.matrix;
    quad.check_square(m)?;
    let residual = quad.algebra_residual(m);
    if residual >= QUADRATIC_TOL * m.norm().max(1.0) {
        return Err(LieError::NotInAlgebra { residual });
    }
    let d = quad.dim();
    let block = |i: usize| -> usize {
        if i == 0 {
            0
        } else if i == d - 1 {
            2
        } else {
            1
        }
    };
    let mut parts = [DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
    for r in 0..d {
        for c in 0..d {
            let grade = block(c) as i32 - block(r) as i32;
            match grade {
                -2..=-1 => parts[0][(r, c)] = m[(r, c)],
                0 => parts[1][(r, c)] = m[(r, c)],
                _ => parts[2][(r, c)] = m[(r, c)],
            }
        }
    }
    let [lo, mid, hi] = parts;
    Ok((
        AlgebraElement { matrix: lo },
        AlgebraElement { matrix: mid },
        AlgebraElement { matrix: hi },
    ))
}

/// `Ad(p)Z = p Z p⁻¹`.
pub fn ad(p: &GroupElement, z: &AlgebraElement) -> Result<AlgebraElement, LieError> {
    let inv = p.inverse()?;
    Ok(AlgebraElement {
        matrix: p.matrix() * &z.matrix * inv,
    })
}

/// `A ↦ det(A)·A`, from `P^ray` onto `SP^line` when `n` is odd.
pub fn det_twist(quad: &QuadForm, a: &GroupElement) -> Result<GroupElement, LieError> {
    let n = quad.signature.n();
    if n % 2 == 0 {
        return Err(LieError::EvenDimension { n });
    }
    if !a.is(Variant::PRay) {
        return Err(LieError::NotInRayParabolic);
    }
    let det = a.det();
    GroupElement::new(quad, a.matrix() * det.signum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    Standard,
    DetTwistedStandard,
}

/// `𝕍 = ℝ^{n+2}` with either the standard action or `det ⊗ 𝕍`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Representation {
    pub kind: RepresentationKind,
    pub dim: usize,
}

impl Representation {
    pub fn new(kind: RepresentationKind, sig: Signature) -> Self {
        Self { kind, dim: sig.dim() }
    }

    /// Matrix of the group action.
    pub fn group_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self.kind {
            RepresentationKind::Standard => a.clone(),
            RepresentationKind::DetTwistedStandard => a * a.determinant().signum(),
        }
    }

    /// Matrix of the algebra action; the determinant twist is trivial
    /// infinitesimally.
    pub fn algebra_matrix<'a>(&self, z: &'a DMatrix<f64>) -> &'a DMatrix<f64> {
        z
    }

    pub fn apply_group(&self, a: &GroupElement, v: &DVector<f64>) -> Result<DVector<f64>, LieError> {
        self.check_vec(v)?;
        Ok(self.group_matrix(a.matrix()) * v)
    }

    pub fn apply_algebra(&self, z: &AlgebraElement, v: &DVector<f64>) -> Result<DVector<f64>, LieError> {
        self.check_vec(v)?;
        Ok(self.algebra_matrix(&z.matrix) * v)
    }

    fn check_vec(&self, v: &DVector<f64>) -> Result<(), LieError> {
        if v.len() != self.dim {
            return Err(LieError::VectorLength {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    #[test]
    fn form_for_one_dimension() {
        let j = quadratic_form(sig(1, 0)).j;
        assert_eq!(j.nrows(), 3);
        assert_eq!(j[(0, 2)], 1.0);
        assert_eq!(j[(2, 0)], 1.0);
        assert_eq!(j[(1, 1)], 1.0);
        assert_eq!(j[(0, 0)], 0.0);
    }

    #[test]
    fn negative_signature_rejected() {
        assert!(matches!(
            Signature::from_ints(-1, 3),
            Err(LieError::NegativeSignature { .. })
        ));
        assert!(Signature::new(0, 0).is_err());
    }

    #[test]
    fn middle_block_for_definite_negative() {
        let qf = quadratic_form(sig(0, 3));
        assert_eq!(qf.h_block, -DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn form_signature_from_eigenvalues() {
        let qf = quadratic_form(sig(2, 3));
        let eig = qf.j.clone().symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|&&e| e > 0.0).count();
        let neg = eig.iter().filter(|&&e| e < 0.0).count();
        assert_eq!((pos, neg), (3, 4));
    }

    #[test]
    fn identity_in_every_variant() {
        let qf = quadratic_form(sig(2, 3));
        let id = DMatrix::identity(7, 7);
        for v in Variant::ALL {
            assert!(membership(&qf, &id, v).unwrap(), "{v}");
        }
    }

    #[test]
    fn minus_one_corner_element() {
        // diag(−1, I, −1) for n = 4: det = 1.
        let qf = quadratic_form(sig(2, 2));
        let mut a = DMatrix::identity(6, 6);
        a[(0, 0)] = -1.0;
        a[(5, 5)] = -1.0;
        assert!(membership(&qf, &a, Variant::PLine).unwrap());
        assert!(membership(&qf, &a, Variant::SPLine).unwrap());
        assert!(!membership(&qf, &a, Variant::PRay).unwrap());
    }

    #[test]
    fn g_minus_exponential_leaves_parabolics() {
        let qf = quadratic_form(sig(2, 3));
        let z = qf.g_minus(&[0.3, -0.2, 0.0, 0.5, 0.1]);
        let z3 = &z.matrix * &z.matrix * &z.matrix;
        assert!(z3.norm() < 1e-15);
        let a = nilpotent_exp(&z.matrix);
        assert!(membership(&qf, &a, Variant::O).unwrap());
        for v in [Variant::PRay, Variant::PLine, Variant::SPRay, Variant::SPLine, Variant::PLine0] {
            assert!(!membership(&qf, &a, v).unwrap(), "{v}");
        }
    }

    #[test]
    fn membership_rejects_wrong_size() {
        let qf = quadratic_form(sig(1, 2));
        assert!(matches!(
            membership(&qf, &DMatrix::identity(4, 4), Variant::O),
            Err(LieError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grade_parts_of_simple_elements() {
        let qf = quadratic_form(sig(2, 1));
        let zero = AlgebraElement::new(&qf, DMatrix::zeros(5, 5)).unwrap();
        let (a, b, c) = grade_decompose(&qf, &zero).unwrap();
        assert_eq!(a.matrix.norm() + b.matrix.norm() + c.matrix.norm(), 0.0);

        // m ∈ so(2,1) in the middle block.
        let mut z = DMatrix::zeros(5, 5);
        z[(1, 2)] = 0.4;
        z[(2, 1)] = -0.4;
        z[(1, 3)] = 0.7;
        z[(3, 1)] = 0.7;
        let z = AlgebraElement::new(&qf, z).unwrap();
        let (lo, mid, hi) = grade_decompose(&qf, &z).unwrap();
        assert_eq!(lo.matrix.norm(), 0.0);
        assert_eq!(hi.matrix.norm(), 0.0);
        assert_eq!(mid, z);
    }

    #[test]
    fn grade_decompose_rejects_non_algebra() {
        let qf = quadratic_form(sig(2, 1));
        let z = AlgebraElement {
            matrix: DMatrix::identity(5, 5),
        };
        assert!(matches!(grade_decompose(&qf, &z), Err(LieError::NotInAlgebra { .. })));
    }

    #[test]
    fn dilation_scales_g_minus() {
        let qf = quadratic_form(sig(2, 3));
        let lambda = 1.7;
        let p = GroupElement::new(&qf, qf.levi(lambda, &DMatrix::identity(5, 5))).unwrap();
        let x = [0.3, -0.2, 1.0, 0.5, 0.1];
        let out = ad(&p, &qf.g_minus(&x)).unwrap();
        let expect = qf.g_minus(&x.map(|v| v / lambda));
        assert!((out.matrix - expect.matrix).norm() < 1e-14);
    }

    #[test]
    fn levi_action_on_g_minus() {
        let qf = quadratic_form(sig(2, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = qf.random_opq(&mut rng, 0.5, true);
        let lambda = -0.8;
        let p = GroupElement::new(&qf, qf.levi(lambda, &m)).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.2, 1.0, 0.5, 0.1]);
        let out = ad(&p, &qf.g_minus(x.as_slice())).unwrap();
        let mx: DVector<f64> = &m * &x / lambda;
        let expect = qf.g_minus(mx.as_slice());
        assert!((out.matrix - expect.matrix).norm() < 1e-13);
    }

    #[test]
    fn minus_identity_acts_trivially() {
        let qf = quadratic_form(sig(2, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = qf.random_algebra(&mut rng, 1.0);
        let minus = GroupElement::new(&qf, -DMatrix::identity(7, 7)).unwrap();
        assert_eq!(ad(&minus, &z).unwrap(), z);
    }

    #[test]
    fn det_twist_examples() {
        let qf = quadratic_form(sig(1, 2));
        let id = GroupElement::identity(&qf);
        assert_eq!(det_twist(&qf, &id).unwrap().matrix(), id.matrix());

        // P^ray element with determinant −1: reflect one middle coordinate.
        let a = GroupElement::new(&qf, qf.levi(1.0, &qf.reflection(1))).unwrap();
        assert!((a.det() + 1.0).abs() < 1e-12);
        let t = det_twist(&qf, &a).unwrap();
        assert_eq!(t.matrix(), &(-a.matrix()));
        assert!((t.det() - 1.0).abs() < 1e-12);
        assert!(t.is(Variant::SPLine));

        let even = quadratic_form(sig(2, 2));
        assert!(matches!(
            det_twist(&even, &GroupElement::identity(&even)),
            Err(LieError::EvenDimension { n: 4 })
        ));
    }

    #[test]
    fn det_twisted_minus_identity_fixes_vectors_in_odd_dimension() {
        // det(−I) = (−1)^{n+2} = −1 for n = 3, so det(−I)·(−v) = v.
        let s = sig(1, 2);
        let qf = quadratic_form(s);
        let rep = Representation::new(RepresentationKind::DetTwistedStandard, s);
        let minus = GroupElement::new(&qf, -DMatrix::identity(5, 5)).unwrap();
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, 0.25]);
        assert_eq!(rep.apply_group(&minus, &v).unwrap(), v);
        let std = Representation::new(RepresentationKind::Standard, s);
        assert_eq!(std.apply_group(&GroupElement::identity(&qf), &v).unwrap(), v);
        assert!(std.apply_group(&minus, &DVector::zeros(4)).is_err());
    }

    #[test]
    fn sampled_elements_have_requested_tags() {
        let qf = quadratic_form(sig(2, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for v in Variant::ALL {
            for _ in 0..20 {
                let a = qf.random_element(&mut rng, v);
                let g = GroupElement::new(&qf, a).unwrap();
                assert!(g.is(v), "{v} sample missing tag: {:?}", g.tags());
            }
        }
    }
}
