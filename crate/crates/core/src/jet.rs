//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] is a polynomial in `nvars` variables truncated at some total
//! degree. Its coefficients are Taylor coefficients `∂^α f / α!` of a smooth
//! function at the expansion point, so evaluating a formula on jets built from
//! [`Jet::variable`] yields all partial derivatives of that formula up to the
//! truncation order (nested forward mode). [`Jet::derivative`] lowers the
//! order by one, which lets curvature formulas be written once and applied to
//! derivative data of any depth.
//!
//! Monomials are stored in graded order, so a jet of order `k` in a space of
//! order `K >= k` keeps only the prefix of coefficients with degree `<= k`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping shared by every jet of a given shape.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    /// `degree_end[d]` = number of monomials with degree `<= d`.
    degree_end: Vec<usize>,
    /// `(a, b, out)` triples sorted by the degree of `out`.
    mul_table: Vec<(u32, u32, u32)>,
    /// `mul_end[d]` = number of triples whose output degree is `<= d`.
    mul_end: Vec<usize>,
    /// `shift[v][i]` = index of monomial `i + e_v`, if within the order.
    shift: Vec<Vec<Option<u32>>>,
    lookup: HashMap<Vec<u8>, usize>,
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<Self> {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut current = vec![0u8; nvars];
            push_monomials(&mut exponents, &mut current, 0, d);
            degree_end.push(exponents.len());
        }
        let lookup: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul_table = Vec::new();
        for (ia, ea) in exponents.iter().enumerate() {
            for (ib, eb) in exponents.iter().enumerate() {
                if degree(ea) + degree(eb) > order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let out = lookup[&sum];
                mul_table.push((ia as u32, ib as u32, out as u32));
            }
        }
        mul_table.sort_by_key(|&(_, _, out)| (degree(&exponents[out as usize]), out));
        let mut mul_end = vec![0; order + 1];
        for (d, end) in mul_end.iter_mut().enumerate() {
            *end = mul_table
                .iter()
                .take_while(|t| degree(&exponents[t.2 as usize]) <= d)
                .count();
        }

        let shift = (0..nvars)
            .map(|v| {
                exponents
                    .iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[v] += 1;
                        lookup.get(&up).map(|&i| i as u32)
                    })
                    .collect()
            })
            .collect();

        Arc::new(Self {
            nvars,
            order,
            exponents,
            degree_end,
            mul_table,
            mul_end,
            shift,
            lookup,
        })
    }

    /// Process-wide cached space; building the product table is the
    /// expensive part of jet arithmetic setup.
    pub fn shared(nvars: usize, order: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry((nvars, order))
            .or_insert_with(|| Self::new(nvars, order))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    /// Index of the monomial with the given exponents.
    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.lookup.get(exponents).copied()
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, current: &mut [u8], var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.to_vec());
        current[var] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_monomials(out, current, var + 1, remaining - k);
    }
    current[var] = 0;
}

/// Truncated Taylor polynomial; see the module docs.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let order = space.order;
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = value;
        Self {
            space: space.clone(),
            order,
            coeffs,
        }
    }

    /// The coordinate function `x_var` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(space, value);
        if space.order >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            jet.coeffs[space.lookup[&e]] = 1.0;
        }
        jet
    }

    /// Expansion variables for a point: `x_i + ε_i`.
    pub fn point(space: &Arc<JetSpace>, x: &[f64]) -> Vec<Self> {
        assert_eq!(x.len(), space.nvars, "point dimension must match jet space");
        x.iter()
            .enumerate()
            .map(|(i, &v)| Self::variable(space, i, v))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Number of orders for which the coefficients are exact.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Raw coefficients in the space's graded monomial order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficient for a monomial (zero beyond the order).
    pub fn coeff(&self, exponents: &[u8]) -> f64 {
        self.space
            .index_of(exponents)
            .and_then(|i| self.coeffs.get(i).copied())
            .unwrap_or(0.0)
    }

    /// First partial derivative `∂f/∂x_var` at the expansion point.
    pub fn d1(&self, var: usize) -> f64 {
        let mut e = vec![0u8; self.space.nvars];
        e[var] = 1;
        self.coeff(&e)
    }

    /// Second partial derivative `∂²f/∂x_a∂x_b` at the expansion point.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        let mut e = vec![0u8; self.space.nvars];
        e[a] += 1;
        e[b] += 1;
        let factor = if a == b { 2.0 } else { 1.0 };
        factor * self.coeff(&e)
    }

    /// Partial derivative as a jet of one lower order.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.space.len(order);
        let mut coeffs = vec![0.0; len];
        for (i, c) in coeffs.iter_mut().enumerate() {
            if let Some(up) = self.space.shift[var][i] {
                let k = self.space.exponents[i][var] as f64 + 1.0;
                *c = k * self.coeffs[up as usize];
            }
        }
        Self {
            space: self.space.clone(),
            order,
            coeffs,
        }
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            space: self.space.clone(),
            order,
            coeffs: self.coeffs[..self.space.len(order)].to_vec(),
        }
    }

    /// Re-express this jet in a larger space. `var_map[i]` is the index in
    /// `target` of this jet's variable `i`.
    pub fn embed(&self, target: &Arc<JetSpace>, var_map: &[usize]) -> Self {
        assert_eq!(var_map.len(), self.space.nvars);
        let order = self.order.min(target.order);
        let mut coeffs = vec![0.0; target.len(order)];
        for (i, e) in self.space.exponents[..self.space.len(order)].iter().enumerate() {
            let mut te = vec![0u8; target.nvars];
            for (v, &k) in e.iter().enumerate() {
                te[var_map[v]] += k;
            }
            coeffs[target.lookup[&te]] = self.coeffs[i];
        }
        Self {
            space: target.clone(),
            order,
            coeffs,
        }
    }

    fn check_space(&self, other: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces"
        );
    }

    fn binary_linear(&self, other: &Self, sign: f64) -> Self {
        self.check_space(other);
        let order = self.order.min(other.order);
        let len = self.space.len(order);
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&other.coeffs[..len])
            .map(|(a, b)| a + sign * b)
            .collect();
        Self {
            space: self.space.clone(),
            order,
            coeffs,
        }
    }

    fn product(&self, other: &Self) -> Self {
        self.check_space(other);
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.space.len(order)];
        for &(a, b, out) in &self.space.mul_table[..self.space.mul_end[order]] {
            coeffs[out as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Self {
            space: self.space.clone(),
            order,
            coeffs,
        }
    }

    fn scale(&self, k: f64) -> Self {
        Self {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// `f(self)` given the Taylor coefficients `f^(k)(c)/k!` of `f` at the
    /// value `c` of this jet, for `k = 0..=order`.
    pub fn compose(&self, taylor: &[f64]) -> Self {
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let top = self.order.min(taylor.len() - 1);
        let mut acc = Self::constant_like(self, taylor[top]);
        for k in (0..top).rev() {
            acc = acc.product(&shifted);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    fn constant_like(like: &Self, value: f64) -> Self {
        let mut coeffs = vec![0.0; like.coeffs.len()];
        coeffs[0] = value;
        Self {
            space: like.space.clone(),
            order: like.order,
            coeffs,
        }
    }

    pub fn recip(&self) -> Self {
        let c = self.value();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut term = 1.0 / c;
        for _ in 0..=self.order {
            t.push(term);
            term *= -1.0 / c;
        }
        self.compose(&t)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            t.push(e / fact);
        }
        self.compose(&t)
    }

    pub fn ln(&self) -> Self {
        let c = self.value();
        let mut t = vec![c.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * c.powi(k as i32)));
        }
        self.compose(&t)
    }

    /// `self^a` for real `a`; requires a positive value unless `a` is integral.
    pub fn powf(&self, a: f64) -> Self {
        let c = self.value();
        let mut t = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            t.push(binom * c.powf(a - k as f64));
            binom *= (a - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&t)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&trig_taylor(&cycle, self.order))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&trig_taylor(&cycle, self.order))
    }
}

fn trig_taylor(cycle: &[f64; 4], order: usize) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}

macro_rules! jet_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for &'a Jet {
            type Output = Jet;
            fn $method(self, rhs: &'a Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                let rhs = Jet::constant_like(&self, rhs);
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(&self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.binary_linear(b, 1.0));
jet_binop!(Sub, sub, |a, b| a.binary_linear(b, -1.0));
jet_binop!(Mul, mul, |a, b| a.product(b));
jet_binop!(Div, div, |a, b| a.product(&b.recip()));

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Field-like numbers that geometric formulas are written against: plain
/// `f64` for values, [`Jet`] when derivatives must be carried along.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn scaled(&self, k: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn recip(&self) -> Self;
    /// Exactly zero, including all carried derivatives.
    fn is_zero(&self) -> bool;

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scaled(&self, k: f64) -> Self {
        self * k
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::constant_like(self, c)
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn scaled(&self, k: f64) -> Self {
        self.scale(k)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Sum of products without intermediate clones of the accumulator seed.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].clone() * b[0].clone();
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

/// Inverse of a row-major `n×n` matrix by Gauss-Jordan elimination, pivoting
/// on the magnitude of the constant terms. Returns `None` when singular.
pub fn invert<S: Scalar>(n: usize, m: &[S]) -> Option<Vec<S>> {
    let zero = m[0].zero_like();
    let one = m[0].lift(1.0);
    let mut a: Vec<S> = m.to_vec();
    let mut inv: Vec<S> = (0..n * n)
        .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
        .collect();
    let scale = m.iter().map(|x| x.value().abs()).fold(0.0, f64::max).max(1e-300);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| {
                a[r1 * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[r2 * n + col].value().abs())
            })
            .expect("non-empty range");
        if a[pivot * n + col].value().abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].recip();
        for k in 0..n {
            a[col * n + k] = a[col * n + k].clone() * p.clone();
            inv[col * n + k] = inv[col * n + k].clone() * p.clone();
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                a[r * n + k] = a[r * n + k].clone() - f.clone() * a[col * n + k].clone();
                inv[r * n + k] = inv[r * n + k].clone() - f.clone() * inv[col * n + k].clone();
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_counts_match_binomials() {
        let s = JetSpace::new(5, 4);
        assert_eq!(s.len(4), 126);
        assert_eq!(s.len(2), 21);
        assert_eq!(s.len(0), 1);
        let s = JetSpace::new(1, 3);
        assert_eq!(s.len(3), 4);
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f(x, y) = x^3 y + 2 x y^2 - y
        let s = JetSpace::new(2, 3);
        let p = Jet::point(&s, &[0.7, -1.3]);
        let (x, y) = (p[0].clone(), p[1].clone());
        let f = x.clone() * x.clone() * x.clone() * y.clone() + x.clone() * y.clone() * y.clone() * 2.0 - y;
        let (xv, yv) = (0.7f64, -1.3f64);
        assert_relative_eq!(f.value(), xv.powi(3) * yv + 2.0 * xv * yv * yv - yv, epsilon = 1e-14);
        assert_relative_eq!(f.d1(0), 3.0 * xv * xv * yv + 2.0 * yv * yv, epsilon = 1e-14);
        assert_relative_eq!(f.d1(1), xv.powi(3) + 4.0 * xv * yv - 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.d2(0, 0), 6.0 * xv * yv, epsilon = 1e-14);
        assert_relative_eq!(f.d2(0, 1), 3.0 * xv * xv + 4.0 * yv, epsilon = 1e-14);
        assert_relative_eq!(f.d2(1, 1), 4.0 * xv, epsilon = 1e-14);
        let fxxy = f.derivative(0).derivative(0).derivative(1);
        assert_relative_eq!(fxxy.value(), 6.0 * xv, epsilon = 1e-14);
        assert_eq!(fxxy.order(), 0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let s = JetSpace::new(1, 4);
        let x = Jet::variable(&s, 0, 0.4);
        let e = x.exp();
        for k in 0..=4u8 {
            let fact: f64 = (1..=k as u32).map(f64::from).product();
            assert_relative_eq!(e.coeff(&[k]) * fact, 0.4f64.exp(), epsilon = 1e-14);
        }
        let l = x.ln();
        assert_relative_eq!(l.d1(0), 1.0 / 0.4, epsilon = 1e-13);
        assert_relative_eq!(l.d2(0, 0), -1.0 / 0.16, epsilon = 1e-12);
        let sn = x.sin();
        assert_relative_eq!(sn.d2(0, 0), -(0.4f64).sin(), epsilon = 1e-14);
        let r = x.recip();
        assert_relative_eq!(r.d2(0, 0), 2.0 / 0.4f64.powi(3), epsilon = 1e-11);
        let q = x.sqrt();
        assert_relative_eq!(q.d1(0), 0.5 / 0.4f64.sqrt(), epsilon = 1e-14);
        let c = x.cos();
        let one = c.clone() * c + sn.clone() * sn;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-15);
        assert!(one.d1(0).abs() < 1e-15 && one.d2(0, 0).abs() < 1e-14);
    }

    #[test]
    fn matrix_inverse_carries_derivatives() {
        let s = JetSpace::new(1, 2);
        let t = Jet::variable(&s, 0, 0.3);
        let one = t.lift(1.0);
        // [[1, t], [t, 2]]^{-1} = [[2, -t], [-t, 1]] / (2 - t^2)
        let m = vec![one.clone(), t.clone(), t.clone(), one.lift(2.0)];
        let inv = invert(2, &m).unwrap();
        let det = one.lift(2.0) - t.clone() * t.clone();
        let expect = one.lift(2.0) / det;
        assert_relative_eq!(inv[0].value(), expect.value(), epsilon = 1e-14);
        assert_relative_eq!(inv[0].d1(0), expect.d1(0), epsilon = 1e-13);
        assert_relative_eq!(inv[0].d2(0, 0), expect.d2(0, 0), epsilon = 1e-12);
    }

    #[test]
    fn embed_relabels_variables() {
        let small = JetSpace::new(2, 2);
        let big = JetSpace::new(4, 2);
        let p = Jet::point(&small, &[1.0, 2.0]);
        let f = p[0].clone() * p[1].clone();
        let g = f.embed(&big, &[1, 3]);
        assert_relative_eq!(g.value(), 2.0);
        assert_relative_eq!(g.d1(1), 2.0);
        assert_relative_eq!(g.d1(3), 1.0);
        assert_relative_eq!(g.d2(1, 3), 1.0);
        assert_eq!(g.d1(0), 0.0);
    }
}
