//! Truncated multivariate polynomials.
//!
//! A [`TruncatedPolynomial`] is a jet: a polynomial in `n_vars` variables
//! modulo all monomials of total degree greater than `max_order`. Storage is
//! sparse (a `BTreeMap` keyed by exponent vector) with no explicit zeros, so
//! two jets are equal exactly when their coefficient maps are equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{MkitError, Result};
use crate::scalar::{Backend, Rational, Scalar};

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiIndex(vec![0; n_vars])
    }

    pub fn unit(n_vars: usize, var: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[var] = 1;
        MultiIndex(e)
    }

    /// Monomial of the ordered index tuple `(i, j, k, ...)`, e.g. `[0, 0, 1]`
    /// gives the exponent vector of `x_1^2 x_2`.
    pub fn from_slots(n_vars: usize, slots: &[usize]) -> Self {
        let mut e = vec![0; n_vars];
        for &s in slots {
            e[s] += 1;
        }
        MultiIndex(e)
    }

    /// Every exponent vector of total degree `degree` in `n_vars` variables,
    /// lexicographically descending.
    pub fn all_of_degree(n_vars: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(prefix: &mut Vec<u32>, left: usize, rest: u32, out: &mut Vec<MultiIndex>) {
            if left == 1 {
                prefix.push(rest);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=rest).rev() {
                prefix.push(e);
                rec(prefix, left - 1, rest - e, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n_vars > 0 {
            rec(&mut Vec::with_capacity(n_vars), n_vars, degree, &mut out);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Number of ordered index tuples that collapse onto this monomial,
    /// `degree! / prod(e_i!)`.
    pub fn multinomial(&self) -> u64 {
        let mut num = 1u64;
        let mut k = 0u64;
        for &e in &self.0 {
            for j in 1..=e as u64 {
                k += 1;
                num = num * k / j;
            }
        }
        num
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// Jet of a polynomial in `n_vars` variables, truncated above total degree
/// `max_order` (inclusive bound).
///
/// Equality compares variable count and coefficients; the truncation order is
/// bookkeeping and does not take part.
#[derive(Clone, Debug)]
pub struct TruncatedPolynomial<S> {
    n_vars: usize,
    max_order: u32,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> PartialEq for TruncatedPolynomial<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> TruncatedPolynomial<S> {
    pub fn zero(n_vars: usize, max_order: u32) -> Self {
        TruncatedPolynomial { n_vars, max_order, coeffs: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, max_order: u32, c: S) -> Self {
        Self::monomial(n_vars, max_order, MultiIndex::zero(n_vars), c)
    }

    /// The coordinate function `x_{var}` (0-based).
    pub fn var(n_vars: usize, max_order: u32, var: usize) -> Self {
        assert!(var < n_vars, "variable {var} out of range for {n_vars} variables");
        Self::monomial(n_vars, max_order, MultiIndex::unit(n_vars, var), S::one())
    }

    pub fn monomial(n_vars: usize, max_order: u32, idx: MultiIndex, c: S) -> Self {
        let mut p = Self::zero(n_vars, max_order);
        p.add_term(idx, c);
        p
    }

    /// Sums the given terms; terms above `max_order` are dropped.
    pub fn from_terms<I, M>(n_vars: usize, max_order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (M, S)>,
        M: Into<MultiIndex>,
    {
        let mut p = Self::zero(n_vars, max_order);
        for (idx, c) in terms {
            let idx = idx.into();
            assert_eq!(idx.len(), n_vars, "multi-index length does not match variable count");
            p.add_term(idx, c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    /// Highest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(MultiIndex::degree).max()
    }

    /// Stored coefficient of `idx`, zero when absent.
    pub fn coefficient(&self, idx: &[u32]) -> S {
        assert_eq!(idx.len(), self.n_vars, "multi-index length does not match variable count");
        self.coeffs.get(&MultiIndex::from(idx)).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coefficient(&vec![0; self.n_vars])
    }

    /// Adds `c * x^idx` in place, honouring truncation and canonical form.
    pub fn add_term(&mut self, idx: MultiIndex, c: S) {
        if idx.degree() > self.max_order || c.is_zero() {
            return;
        }
        match self.coeffs.remove(&idx) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.coeffs.insert(idx, sum);
                }
            }
            None => {
                self.coeffs.insert(idx, c);
            }
        }
    }

    /// Homogeneous part of exactly the given total degree.
    pub fn jet_part(&self, degree: u32) -> Self {
        TruncatedPolynomial {
            n_vars: self.n_vars,
            max_order: self.max_order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.degree() == degree)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Re-truncates at `order`. Raising the order declares the stored
    /// polynomial exact up to the new bound.
    pub fn with_max_order(&self, order: u32) -> Self {
        TruncatedPolynomial {
            n_vars: self.n_vars,
            max_order: order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.degree() <= order)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruncatedPolynomial<T> {
        let mut out = TruncatedPolynomial::zero(self.n_vars, self.max_order);
        for (k, v) in &self.coeffs {
            out.add_term(k.clone(), f(v));
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map_coeffs(|v| v.clone() * c.clone())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(MkitError::VariableCountMismatch { left: self.n_vars, right: other.n_vars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.with_max_order(self.max_order.min(other.max_order));
        for (k, v) in &other.coeffs {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let order = self.max_order.min(other.max_order);
        let mut acc: BTreeMap<MultiIndex, S> = BTreeMap::new();
        let rhs: Vec<(&MultiIndex, u32, &S)> =
            other.coeffs.iter().map(|(k, v)| (k, k.degree(), v)).filter(|(_, d, _)| *d <= order).collect();
        for (ka, va) in &self.coeffs {
            let da = ka.degree();
            if da > order {
                continue;
            }
            for &(kb, db, vb) in &rhs {
                if da + db > order {
                    continue;
                }
                let prod = va.clone() * vb.clone();
                let key = ka.plus(kb);
                match acc.get_mut(&key) {
                    Some(slot) => {
                        let old = std::mem::replace(slot, S::zero());
                        *slot = old + prod;
                    }
                    None => {
                        acc.insert(key, prod);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(TruncatedPolynomial { n_vars: self.n_vars, max_order: order, coeffs: acc })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.n_vars, self.max_order, S::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Partial derivative in variable `var`; the truncation order drops by one.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.n_vars, self.max_order.saturating_sub(1));
        for (k, v) in &self.coeffs {
            let e = k.exponents()[var];
            if e == 0 {
                continue;
            }
            let mut idx = k.exponents().to_vec();
            idx[var] -= 1;
            out.add_term(MultiIndex(idx), v.clone() * S::from_int(e as i64));
        }
        out
    }

    pub fn evaluate(&self, point: &[S]) -> S {
        assert_eq!(point.len(), self.n_vars, "point dimension does not match variable count");
        let mut total = S::zero();
        for (k, v) in &self.coeffs {
            let mut term = v.clone();
            for (x, &e) in point.iter().zip(k.exponents()) {
                for _ in 0..e {
                    term = term * x.clone();
                }
            }
            total = total + term;
        }
        total
    }

    /// Evaluates the polynomial at the tuple `subs`, one entry per variable.
    ///
    /// The result lives in the variables of `subs` and is truncated at the
    /// smallest `max_order` among them. Substitutions with a nonzero constant
    /// term are refused unless `allow_constant` is set, because then terms
    /// beyond this polynomial's truncation would feed low degrees.
    pub fn compose(&self, subs: &[Self], allow_constant: bool) -> Result<Self> {
        if subs.len() != self.n_vars {
            return Err(MkitError::ArityMismatch { expected: self.n_vars, got: subs.len() });
        }
        let Some(first) = subs.first() else {
            return Err(MkitError::ArityMismatch { expected: 0, got: 0 });
        };
        let out_vars = first.n_vars;
        let mut order = first.max_order;
        for (i, s) in subs.iter().enumerate() {
            if s.n_vars != out_vars {
                return Err(MkitError::VariableCountMismatch { left: out_vars, right: s.n_vars });
            }
            if !allow_constant && !s.constant_term().is_zero() {
                return Err(MkitError::ConstantTermSubstitution { index: i });
            }
            order = order.min(s.max_order);
        }

        // powers[i][e] = subs[i]^e, built lazily up to the largest exponent used.
        let mut max_exp = vec![0u32; self.n_vars];
        for k in self.coeffs.keys() {
            for (m, &e) in max_exp.iter_mut().zip(k.exponents()) {
                *m = (*m).max(e);
            }
        }
        let powers: Vec<Vec<Self>> = subs
            .iter()
            .zip(&max_exp)
            .map(|(s, &m)| {
                let s = s.with_max_order(order);
                let mut v = vec![Self::constant(out_vars, order, S::one())];
                for e in 1..=m {
                    if !allow_constant && e > order {
                        break;
                    }
                    let next = &v[(e - 1) as usize] * &s;
                    v.push(next);
                }
                v
            })
            .collect();

        let mut out = Self::zero(out_vars, order);
        for (k, c) in &self.coeffs {
            if !allow_constant && k.degree() > order {
                continue;
            }
            let mut term = Self::constant(out_vars, order, c.clone());
            for (i, &e) in k.exponents().iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[i][e as usize];
                }
                if term.is_zero() {
                    break;
                }
            }
            for (tk, tv) in term.coeffs {
                out.add_term(tk, tv);
            }
        }
        Ok(out)
    }

    /// Solves `g(x, y) = 0` for `y = f(x)` with `f(0) = 0`, where `self` is
    /// `g` with `y` as its last variable.
    ///
    /// Fixed-point iteration `y <- -(g - a y)(x, y) / a` with `a = dg/dy(0)`;
    /// every pass fixes at least one more degree, so `order + 1` passes reach
    /// the truncated solution. The result is exact on the rational backend.
    pub fn implicit_graph_solve(&self, order: u32) -> Result<Self> {
        if self.n_vars < 2 {
            return Err(MkitError::Dimension("implicit_graph_solve needs at least one x variable and y".into()));
        }
        if !self.constant_term().is_zero() {
            return Err(MkitError::NonzeroConstant);
        }
        let n = self.n_vars - 1;
        let y_idx = MultiIndex::unit(self.n_vars, n);
        let a = self.coeffs.get(&y_idx).cloned().unwrap_or_else(S::zero);
        if a.is_zero() {
            return Err(MkitError::ImplicitFunctionFails);
        }
        let order = order.min(self.max_order);
        let mut rest = self.clone();
        rest.coeffs.remove(&y_idx);
        let neg_inv_a = -(S::one() / a);

        let xs: Vec<Self> = (0..n).map(|i| Self::var(n, order, i)).collect();
        let mut y = Self::zero(n, order);
        for _ in 0..=order {
            let mut subs = xs.clone();
            subs.push(y.clone());
            let next = rest.compose(&subs, false)?.scale(&neg_inv_a);
            if next == y {
                break;
            }
            y = next;
        }
        Ok(y)
    }

    /// Substitutes `x_var = 0`, dropping that variable.
    pub fn restrict_zero(&self, var: usize) -> Self {
        let mut out = Self::zero(self.n_vars - 1, self.max_order);
        for (k, v) in &self.coeffs {
            if k.exponents()[var] != 0 {
                continue;
            }
            let mut e = k.exponents().to_vec();
            e.remove(var);
            out.add_term(MultiIndex(e), v.clone());
        }
        out
    }

    /// Largest absolute coefficient (as `f64`), zero for the zero polynomial.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Exact equality on rationals; on floats every coefficient of the
    /// difference must be within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.n_vars != other.n_vars {
            return false;
        }
        match S::BACKEND {
            Backend::Exact => self == other,
            Backend::Float => (self - other).max_abs() <= tol,
        }
    }

    /// Coefficient of `x_var^power` as a polynomial in the other variables
    /// (the variable count is kept, with `x_var` absent).
    pub fn coefficient_in(&self, var: usize, power: u32) -> Self {
        let mut out = Self::zero(self.n_vars, self.max_order);
        for (k, v) in &self.coeffs {
            if k.exponents()[var] == power {
                let mut e = k.exponents().to_vec();
                e[var] = 0;
                out.add_term(MultiIndex(e), v.clone());
            }
        }
        out
    }
}

impl TruncatedPolynomial<Rational> {
    pub fn to_float(&self) -> TruncatedPolynomial<f64> {
        self.map_coeffs(<f64 as Scalar>::from_rational)
    }
}

impl<S: Scalar> Neg for &TruncatedPolynomial<S> {
    type Output = TruncatedPolynomial<S>;

    fn neg(self) -> Self::Output {
        self.map_coeffs(|v| -v.clone())
    }
}

impl<S: Scalar> Neg for TruncatedPolynomial<S> {
    type Output = TruncatedPolynomial<S>;

    fn neg(self) -> Self::Output {
        -&self
    }
}

// Operator forms panic on a variable-count mismatch, like shape errors in
// ndarray; the `try_*` methods report it instead.
impl<S: Scalar> Add for &TruncatedPolynomial<S> {
    type Output = TruncatedPolynomial<S>;

    fn add(self, rhs: Self) -> Self::Output {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl<S: Scalar> Sub for &TruncatedPolynomial<S> {
    type Output = TruncatedPolynomial<S>;

    fn sub(self, rhs: Self) -> Self::Output {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl<S: Scalar> Mul for &TruncatedPolynomial<S> {
    type Output = TruncatedPolynomial<S>;

    fn mul(self, rhs: Self) -> Self::Output {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

impl<S: Scalar> fmt::Display for TruncatedPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 + O({})", self.max_order + 1);
        }
        let mut first = true;
        for (k, v) in &self.coeffs {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})", v.to_json().to_string().trim_matches('"'))?;
            for (i, &e) in k.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        write!(f, " + O({})", self.max_order + 1)
    }
}

/// A polynomial whose backend is chosen at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoly {
    Exact(TruncatedPolynomial<Rational>),
    Float(TruncatedPolynomial<f64>),
}

impl AnyPoly {
    pub fn backend(&self) -> Backend {
        match self {
            AnyPoly::Exact(_) => Backend::Exact,
            AnyPoly::Float(_) => Backend::Float,
        }
    }

    pub fn try_add(&self, other: &AnyPoly) -> Result<AnyPoly> {
        match (self, other) {
            (AnyPoly::Exact(a), AnyPoly::Exact(b)) => Ok(AnyPoly::Exact(a.try_add(b)?)),
            (AnyPoly::Float(a), AnyPoly::Float(b)) => Ok(AnyPoly::Float(a.try_add(b)?)),
            _ => Err(MkitError::BackendMismatch),
        }
    }

    pub fn try_mul(&self, other: &AnyPoly) -> Result<AnyPoly> {
        match (self, other) {
            (AnyPoly::Exact(a), AnyPoly::Exact(b)) => Ok(AnyPoly::Exact(a.try_mul(b)?)),
            (AnyPoly::Float(a), AnyPoly::Float(b)) => Ok(AnyPoly::Float(a.try_mul(b)?)),
            _ => Err(MkitError::BackendMismatch),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    type P = TruncatedPolynomial<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn x(n: usize, order: u32, i: usize) -> P {
        P::var(n, order, i)
    }

    fn term(n: usize, order: u32, e: &[u32], c: Rational) -> P {
        P::monomial(n, order, MultiIndex::from(e), c)
    }

    #[test]
    fn additive_inverse_is_zero() {
        let a = x(2, 3, 0);
        assert!((&a + &-&a).is_zero());
    }

    #[test]
    fn disjoint_supports_add() {
        let s = &term(2, 4, &[2, 0], q(1, 1)) + &term(2, 4, &[0, 2], q(1, 1));
        assert_eq!(s.coefficient(&[2, 0]), q(1, 1));
        assert_eq!(s.coefficient(&[0, 2]), q(1, 1));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn add_takes_min_order() {
        let a = term(1, 4, &[2], q(1, 2));
        let b = term(1, 2, &[2], q(1, 3));
        let s = a.try_add(&b).unwrap();
        assert_eq!(s.coefficient(&[2]), q(5, 6));
        assert_eq!(s.max_order(), 2);
    }

    #[test]
    fn mismatched_variables_error() {
        let a = x(2, 3, 0);
        let b = x(3, 3, 0);
        assert!(matches!(a.try_add(&b), Err(MkitError::VariableCountMismatch { .. })));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn backend_mismatch_error() {
        let a = AnyPoly::Exact(x(1, 2, 0));
        let b = AnyPoly::Float(TruncatedPolynomial::<f64>::var(1, 2, 0));
        assert_eq!(a.try_add(&b), Err(MkitError::BackendMismatch));
        assert_eq!(a.try_mul(&b), Err(MkitError::BackendMismatch));
        assert!(a.try_add(&a).is_ok());
    }

    #[test]
    fn products() {
        let (x1, x2) = (x(2, 2, 0), x(2, 2, 1));
        let p = &(&x1 + &x2) * &(&x1 - &x2);
        assert_eq!(p, &(&x1 * &x1) - &(&x2 * &x2));

        let sq = term(1, 3, &[2], q(1, 1));
        assert!((&sq * &sq).is_zero());

        let one_plus = &P::constant(1, 2, q(1, 1)) + &x(1, 2, 0);
        let p = one_plus.pow(2);
        assert_eq!(p.coefficient(&[0]), q(1, 1));
        assert_eq!(p.coefficient(&[1]), q(2, 1));
        assert_eq!(p.coefficient(&[2]), q(1, 1));
    }

    #[test]
    fn compose_projection_and_expansion() {
        let f = &term(2, 4, &[2, 0], q(1, 2)) + &term(2, 4, &[1, 1], q(3, 1));
        let y = x(1, 4, 0);
        assert_eq!(y.compose(std::slice::from_ref(&f), false).unwrap(), f);

        let p = term(1, 3, &[2], q(1, 1));
        let s = &x(1, 3, 0) + &term(1, 3, &[2], q(1, 1));
        let r = p.compose(&[s], false).unwrap();
        assert_eq!(r, &term(1, 3, &[2], q(1, 1)) + &term(1, 3, &[3], q(2, 1)));
    }

    #[test]
    fn compose_refuses_constant_terms_unless_asked() {
        let p = term(1, 2, &[2], q(1, 1));
        let s = &P::constant(1, 2, q(1, 1)) + &x(1, 2, 0);
        assert_eq!(p.compose(std::slice::from_ref(&s), false), Err(MkitError::ConstantTermSubstitution { index: 0 }));
        let r = p.compose(&[s], true).unwrap();
        assert_eq!(r.coefficient(&[0]), q(1, 1));
        assert_eq!(r.coefficient(&[1]), q(2, 1));
        assert!(p.compose(&[], false).is_err());
    }

    #[test]
    fn paraboloid_lies_on_its_quadric() {
        // g = -y + (x1^2 + x2^2)/2 composed with f = (x1^2 + x2^2)/2.
        let f = &term(2, 4, &[2, 0], q(1, 2)) + &term(2, 4, &[0, 2], q(1, 2));
        let g = P::from_terms(3, 2, [(vec![0, 0, 1], q(-1, 1)), (vec![2, 0, 0], q(1, 2)), (vec![0, 2, 0], q(1, 2))]);
        let phi = g.compose(&[x(2, 4, 0), x(2, 4, 1), f], false).unwrap();
        assert!(phi.is_zero());
        assert_eq!(phi.max_order(), 4);
    }

    #[test]
    fn implicit_solve_examples() {
        let g = &-&x(2, 4, 1) + &term(2, 4, &[2, 0], q(1, 1));
        assert_eq!(g.implicit_graph_solve(4).unwrap(), term(1, 4, &[2], q(1, 1)));

        let g = P::from_terms(2, 4, [(vec![0, 1], q(-1, 1)), (vec![2, 0], q(1, 2)), (vec![0, 2], q(1, 1))]);
        let f = g.implicit_graph_solve(4).unwrap();
        assert_eq!(f, &term(1, 4, &[2], q(1, 2)) + &term(1, 4, &[4], q(1, 4)));
        let back = g.compose(&[x(1, 4, 0), f], false).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn implicit_solve_errors() {
        let g = term(2, 3, &[2, 0], q(1, 1));
        assert_eq!(g.implicit_graph_solve(3), Err(MkitError::ImplicitFunctionFails));
        let g = &P::constant(2, 3, q(1, 1)) - &x(2, 3, 1);
        assert_eq!(g.implicit_graph_solve(3), Err(MkitError::NonzeroConstant));
    }

    #[test]
    fn coefficient_and_jet_part() {
        let p = &term(2, 3, &[2, 0], q(1, 1)) - &term(2, 3, &[0, 2], q(1, 1));
        assert_eq!(p.coefficient(&[2, 0]), q(1, 1));
        assert_eq!(p.coefficient(&[0, 2]), q(-1, 1));
        assert!(P::zero(2, 3).coefficient(&[1, 1]).is_zero());

        let r = &x(1, 3, 0) + &term(1, 3, &[2], q(1, 1));
        assert_eq!(r.jet_part(2), term(1, 3, &[2], q(1, 1)));
        let c = term(2, 3, &[1, 2], q(1, 1));
        assert_eq!(c.jet_part(3), c);
    }

    #[test]
    fn monomials_of_degree() {
        let m = MultiIndex::all_of_degree(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], MultiIndex::new(vec![2, 0, 0]));
        assert_eq!(m[5], MultiIndex::new(vec![0, 0, 2]));
        assert_eq!(MultiIndex::all_of_degree(4, 4).len(), 35);
    }

    #[test]
    fn multinomial_counts() {
        assert_eq!(MultiIndex::new(vec![3, 0]).multinomial(), 1);
        assert_eq!(MultiIndex::new(vec![2, 1]).multinomial(), 3);
        assert_eq!(MultiIndex::new(vec![1, 1, 1]).multinomial(), 6);
        assert_eq!(MultiIndex::new(vec![2, 2]).multinomial(), 6);
        assert_eq!(MultiIndex::new(vec![3, 1]).multinomial(), 4);
    }

    fn arb_poly(n: usize, order: u32) -> impl Strategy<Value = P> {
        prop::collection::vec((prop::collection::vec(0u32..=order, n), -4i64..=4, 1i64..=3), 0..6)
            .prop_map(move |terms| P::from_terms(n, order, terms.into_iter().map(|(e, a, b)| (e, q(a, b)))))
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(2, 4), b in arb_poly(2, 4), c in arb_poly(2, 4)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!(a.terms().all(|(k, v)| k.degree() <= 4 && !v.is_zero()));
        }

        #[test]
        fn implicit_solution_satisfies_equation(r in arb_poly(3, 4), a in 1i64..=3) {
            // Drop the constant and linear y parts of r, then force g_y(0) = -a.
            let mut g = P::zero(3, 4);
            for (k, v) in r.terms() {
                if k.degree() >= 1 && k.exponents() != [0, 0, 1] {
                    g.add_term(k.clone(), v.clone());
                }
            }
            g.add_term(MultiIndex::new(vec![0, 0, 1]), q(-a, 1));
            let f = g.implicit_graph_solve(4).unwrap();
            let subs = vec![x(2, 4, 0), x(2, 4, 1), f];
            prop_assert!(g.compose(&subs, false).unwrap().is_zero());
        }
    }
}
