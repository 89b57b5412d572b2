//! Moutard pencil and Moutard hyperquadric along the x1-axis.
//!
//! Polynomials describing quadrics and sections use the ambient variables
//! `(x_1, ..., x_n, y)` with `y = x_{n+1}` last. Quadrics are stored scaled so
//! that the coefficient of `y` is `-1`, which turns "equal up to scale" into
//! plain equality.

use crate::error::{MkitError, Result};
use crate::jetalgebra::{MultiIndex, TruncatedPolynomial};
use crate::linalg::Matrix;
use crate::normalform::{HypersurfaceGerm, Signature};
use crate::scalar::Scalar;

/// Float comparisons inside consistency checks.
const FLOAT_CHECK_TOL: f64 = 1e-9;

fn check_tol(scale: f64) -> f64 {
    FLOAT_CHECK_TOL * (1.0 + scale)
}

/// Quadric `Q(x, y) = 0` in `n + 1` variables, `y` last.
#[derive(Clone, Debug)]
pub struct Quadric<S> {
    poly: TruncatedPolynomial<S>,
}

impl<S: Scalar> PartialEq for Quadric<S> {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}

impl<S: Scalar> Quadric<S> {
    /// Wraps a polynomial of degree at most two, rescaled so the `y`
    /// coefficient is `-1`.
    pub fn new(poly: TruncatedPolynomial<S>) -> Result<Self> {
        Self::raw(poly)?.normalized()
    }

    fn raw(poly: TruncatedPolynomial<S>) -> Result<Self> {
        if poly.n_vars() < 2 {
            return Err(MkitError::Dimension("a quadric needs at least two variables".into()));
        }
        if poly.degree().unwrap_or(0) > 2 {
            return Err(MkitError::Dimension("quadric polynomial has degree above 2".into()));
        }
        Ok(Quadric { poly: poly.with_max_order(2) })
    }

    fn normalized(self) -> Result<Self> {
        let a = self.y_coefficient();
        if a.is_zero() {
            return Err(MkitError::UnscalableQuadric);
        }
        let s = -(S::one() / a);
        Ok(Quadric { poly: self.poly.scale(&s) })
    }

    /// Builds a quadric from its symmetric homogeneous matrix in
    /// `(x_1, ..., x_n, y, 1)`.
    pub fn from_matrix(m: &Matrix<S>) -> Result<Self> {
        let size = m.len();
        if size < 3 || m.iter().any(|r| r.len() != size) {
            return Err(MkitError::Dimension("homogeneous matrix must be square, size >= 3".into()));
        }
        let nv = size - 1;
        let mut p = TruncatedPolynomial::zero(nv, 2);
        let two = S::from_int(2);
        for i in 0..size {
            for j in i..size {
                let mut e = vec![0u32; nv];
                if i < nv {
                    e[i] += 1;
                }
                if j < nv {
                    e[j] += 1;
                }
                let c = if i == j { m[i][j].clone() } else { two.clone() * m[i][j].clone() };
                p.add_term(MultiIndex::new(e), c);
            }
        }
        Self::new(p)
    }

    /// Number of variables, `n + 1`.
    pub fn n_vars(&self) -> usize {
        self.poly.n_vars()
    }

    pub fn poly(&self) -> &TruncatedPolynomial<S> {
        &self.poly
    }

    pub fn coefficient(&self, exponents: &[u32]) -> S {
        self.poly.coefficient(exponents)
    }

    fn y_index(&self) -> MultiIndex {
        MultiIndex::unit(self.n_vars(), self.n_vars() - 1)
    }

    pub fn y_coefficient(&self) -> S {
        self.poly.coefficient(self.y_index().exponents())
    }

    /// Coefficient of `y^2`.
    pub fn yy_coefficient(&self) -> S {
        let nv = self.n_vars();
        self.poly.coefficient(MultiIndex::from_slots(nv, &[nv - 1, nv - 1]).exponents())
    }

    /// Symmetric homogeneous matrix in `(x_1, ..., x_n, y, 1)`.
    pub fn matrix(&self) -> Matrix<S> {
        let nv = self.n_vars();
        let mut m = vec![vec![S::zero(); nv + 1]; nv + 1];
        let half = S::from_ratio(1, 2);
        for (k, v) in self.poly.terms() {
            let slots: Vec<usize> =
                k.exponents().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect();
            let (i, j) = match slots.as_slice() {
                [] => (nv, nv),
                [i] => (*i, nv),
                [i, j] => (*i, *j),
                _ => unreachable!("quadric degree is at most 2"),
            };
            if i == j {
                m[i][i] = v.clone();
            } else {
                m[i][j] = half.clone() * v.clone();
                m[j][i] = half.clone() * v.clone();
            }
        }
        m
    }

    /// The quadric as a graph `y = h(x)` near the origin, to `order`.
    pub fn graph(&self, order: u32) -> Result<TruncatedPolynomial<S>> {
        self.poly.with_max_order(order).implicit_graph_solve(order)
    }

    /// Section by the 2-plane `x_s = lambda_s y` (`s = 2..n`), as a graph
    /// `y = y(x_1)` to `order`.
    pub fn section_graph(&self, lambda: &[S], order: u32) -> Result<TruncatedPolynomial<S>> {
        let n = self.n_vars() - 1;
        if lambda.len() + 1 != n {
            return Err(MkitError::Dimension(format!("expected {} section parameters, got {}", n - 1, lambda.len())));
        }
        let x1 = TruncatedPolynomial::var(2, order, 0);
        let y = TruncatedPolynomial::var(2, order, 1);
        let mut subs = vec![x1];
        subs.extend(lambda.iter().map(|l| y.scale(l)));
        subs.push(y);
        self.poly.with_max_order(order).compose(&subs, false)?.implicit_graph_solve(order)
    }

    /// Intersection with the `k`-space `x_s = lambda_s y` (`s` in the spec),
    /// in the coordinates of the remaining `x`s followed by `y`.
    pub fn restrict(&self, spec: &SectionSpec<S>) -> Result<Quadric<S>> {
        let n = self.n_vars() - 1;
        spec.check(n)?;
        let kept = spec.kept(n);
        let nv = kept.len() + 1;
        let y = TruncatedPolynomial::var(nv, 2, nv - 1);
        let mut subs = Vec::with_capacity(n + 1);
        for i in 0..n {
            match spec.indices.iter().position(|&s| s == i) {
                Some(p) => subs.push(y.scale(&spec.lambdas[p])),
                None => {
                    let pos = kept.iter().position(|&k| k == i).expect("kept index");
                    subs.push(TruncatedPolynomial::var(nv, 2, pos));
                }
            }
        }
        subs.push(y);
        Quadric::new(self.poly.compose(&subs, false)?)
    }
}

impl<S: Scalar> std::fmt::Display for Quadric<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = 0", self.poly)
    }
}

/// `member(beta) = base + beta * y^2`.
#[derive(Clone, Debug)]
pub struct QuadricPencil<S> {
    base: Quadric<S>,
}

impl<S: Scalar> PartialEq for QuadricPencil<S> {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl<S: Scalar> QuadricPencil<S> {
    /// The pencil through `q`, with the `y^2` coefficient of `q` moved into
    /// the parameter.
    pub fn through(q: &Quadric<S>) -> Self {
        let mut poly = q.poly.clone();
        let nv = q.n_vars();
        poly.add_term(MultiIndex::from_slots(nv, &[nv - 1, nv - 1]), -q.yy_coefficient());
        QuadricPencil { base: Quadric { poly } }
    }

    pub fn base(&self) -> &Quadric<S> {
        &self.base
    }

    pub fn n_vars(&self) -> usize {
        self.base.n_vars()
    }

    pub fn member(&self, beta: &S) -> Quadric<S> {
        let nv = self.n_vars();
        let mut poly = self.base.poly.clone();
        poly.add_term(MultiIndex::from_slots(nv, &[nv - 1, nv - 1]), beta.clone());
        Quadric { poly }
    }

    /// Parameter of `q` in this pencil, if `q` belongs to it.
    pub fn parameter_of(&self, q: &Quadric<S>) -> Option<S> {
        let beta = q.yy_coefficient();
        (self.member(&beta) == *q).then_some(beta)
    }
}

/// Graph `y = a_2 x^2 + a_3 x^3 + a_4 x^4 + ...` of a planar curve.
#[derive(Clone, Debug)]
pub struct PlanarCurveJet<S> {
    graph: TruncatedPolynomial<S>,
}

impl<S: Scalar> PartialEq for PlanarCurveJet<S> {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
    }
}

impl<S: Scalar> PlanarCurveJet<S> {
    pub fn from_graph(graph: TruncatedPolynomial<S>) -> Result<Self> {
        if graph.n_vars() != 1 {
            return Err(MkitError::Dimension("planar curve graph must be univariate".into()));
        }
        if !graph.coefficient(&[0]).is_zero() || !graph.coefficient(&[1]).is_zero() {
            return Err(MkitError::InvalidInput("curve graph must be tangent to the x-axis".into()));
        }
        Ok(PlanarCurveJet { graph })
    }

    /// `a_2, a_3, a_4, ...` in order.
    pub fn from_coefficients(a: &[S]) -> Self {
        let order = (a.len() as u32 + 1).max(4);
        let graph = TruncatedPolynomial::from_terms(
            1,
            order,
            a.iter().enumerate().map(|(i, c)| (vec![i as u32 + 2], c.clone())),
        );
        PlanarCurveJet { graph }
    }

    pub fn a(&self, k: u32) -> S {
        self.graph.coefficient(&[k])
    }

    pub fn a2(&self) -> S {
        self.a(2)
    }

    pub fn a3(&self) -> S {
        self.a(3)
    }

    pub fn a4(&self) -> S {
        self.a(4)
    }

    pub fn graph(&self) -> &TruncatedPolynomial<S> {
        &self.graph
    }
}

/// The `k`-space `x_s = lambda_s y` for the listed (0-based) indices, all in
/// `1..n` so the x1-axis is always contained.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionSpec<S> {
    pub indices: Vec<usize>,
    pub lambdas: Vec<S>,
}

impl<S: Scalar> SectionSpec<S> {
    pub fn new(n: usize, indices: Vec<usize>, lambdas: Vec<S>) -> Result<Self> {
        let spec = SectionSpec { indices, lambdas };
        spec.check(n)?;
        Ok(spec)
    }

    pub fn empty() -> Self {
        SectionSpec { indices: Vec::new(), lambdas: Vec::new() }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.indices.len() != self.lambdas.len() {
            return Err(MkitError::Dimension("section indices and values differ in length".into()));
        }
        for (i, &s) in self.indices.iter().enumerate() {
            if s == 0 || s >= n {
                return Err(MkitError::InvalidInput(format!("section index {} is outside 2..{n}", s + 1)));
            }
            if self.indices[..i].contains(&s) {
                return Err(MkitError::InvalidInput(format!("section index {} repeated", s + 1)));
            }
        }
        Ok(())
    }

    /// Indices of the coordinates that survive, in increasing order.
    pub fn kept(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.indices.contains(i)).collect()
    }

    /// `lambda_i` if the spec fixes coordinate `i`.
    pub fn lambda_of(&self, i: usize) -> Option<&S> {
        self.indices.iter().position(|&s| s == i).map(|p| &self.lambdas[p])
    }
}

/// `y` as a series in `x_1` on the section of the germ by `x_s = lambda_s y`,
/// `s = 2..n`. Computed by solving `-y + f(x_1, lambda y) = 0`.
pub fn section_graph<S: Scalar>(
    germ: &HypersurfaceGerm<S>,
    lambda: &[S],
    order: u32,
) -> Result<TruncatedPolynomial<S>> {
    let n = germ.n();
    if lambda.len() + 1 != n {
        return Err(MkitError::Dimension(format!("expected {} section parameters, got {}", n - 1, lambda.len())));
    }
    let order = order.min(germ.order());
    let x1 = TruncatedPolynomial::var(2, order, 0);
    let y = TruncatedPolynomial::var(2, order, 1);
    let mut subs = vec![x1];
    subs.extend(lambda.iter().map(|l| y.scale(l)));
    let fy = germ.f().with_max_order(order).compose(&subs, false)?;
    let g = &fy - &y;
    g.implicit_graph_solve(order)
}

/// Closed-form `(a_2, a_3, a_4)` of the section through the x1-axis.
pub fn section_coefficients_closed<S: Scalar>(germ: &HypersurfaceGerm<S>, lambda: &[S]) -> [S; 3] {
    let e1 = germ.eps(0);
    let a2 = e1.clone() * S::from_ratio(1, 2);
    let a3 = germ.k(0, 0, 0) / S::from_int(3);
    let mut a4 = germ.h4(0, 0, 0, 0) / S::from_int(12);
    for (i, l) in lambda.iter().enumerate() {
        let s = i + 1;
        a4 = a4
            + e1.clone() * S::from_ratio(1, 2) * germ.k(0, 0, s) * l.clone()
            + S::from_ratio(1, 8) * germ.eps(s) * l.clone() * l.clone();
    }
    [a2, a3, a4]
}

/// 4-jet of the section curve; the constructive series is checked against
/// the closed formulas.
pub fn section_curve<S: Scalar>(germ: &HypersurfaceGerm<S>, lambda: &[S]) -> Result<PlanarCurveJet<S>> {
    let graph = section_graph(germ, lambda, 4)?;
    let curve = PlanarCurveJet::from_graph(graph)?;
    let closed = section_coefficients_closed(germ, lambda);
    let tol = check_tol(curve.graph.max_abs());
    for (k, c) in (2..=4).zip(&closed) {
        if !(curve.a(k) - c.clone()).is_negligible(tol) {
            return Err(MkitError::InternalMismatch(format!(
                "section coefficient a{k}: series gives {}, closed form {}",
                curve.a(k).show(),
                c.show()
            )));
        }
    }
    Ok(curve)
}

/// `y = a_2 x^2 + (a_3/a_2) x y + ((a_2 a_4 - a_3^2)/a_2^3) y^2` in `(x, y)`.
pub fn osculating_conic_unchecked<S: Scalar>(c: &PlanarCurveJet<S>) -> Result<Quadric<S>> {
    let (a2, a3, a4) = (c.a2(), c.a3(), c.a4());
    if a2.is_zero() {
        return Err(MkitError::Inflection);
    }
    let xy = a3.clone() / a2.clone();
    let yy = (a2.clone() * a4 - a3.clone() * a3) / (a2.clone() * a2.clone() * a2.clone());
    let poly = TruncatedPolynomial::from_terms(
        2,
        2,
        [(vec![0, 1], -S::one()), (vec![2, 0], a2), (vec![1, 1], xy), (vec![0, 2], yy)],
    );
    Quadric::new(poly)
}

/// Osculating conic of a planar curve, verified to have contact of order at
/// least 4 with it.
pub fn osculating_conic<S: Scalar>(c: &PlanarCurveJet<S>) -> Result<Quadric<S>> {
    let q = osculating_conic_unchecked(c)?;
    let conic = q.graph(4)?;
    let curve = c.graph.with_max_order(4);
    if !conic.approx_eq(&curve, check_tol(curve.max_abs())) {
        return Err(MkitError::InternalMismatch(format!(
            "osculating conic graph {conic} differs from the curve {curve} through degree 4"
        )));
    }
    Ok(q)
}

/// `beta = (3 H_1111 - 8 eps_1 K_111^2) / 9`.
pub fn moutard_beta<S: Scalar>(germ: &HypersurfaceGerm<S>) -> S {
    let k = germ.k(0, 0, 0);
    (S::from_int(3) * germ.h4(0, 0, 0, 0) - S::from_int(8) * germ.eps(0) * k.clone() * k) / S::from_int(9)
}

/// Closed-form pencil
/// `-y + 1/2 sum eps x^2 + 2/3 K_111 eps_1 x_1 y + 2 eps_1 sum_{s>=2} K_11s x_s y + beta y^2`.
pub fn moutard_pencil<S: Scalar>(germ: &HypersurfaceGerm<S>) -> QuadricPencil<S> {
    let n = germ.n();
    let nv = n + 1;
    let e1 = germ.eps(0);
    let mut p = TruncatedPolynomial::zero(nv, 2);
    p.add_term(MultiIndex::unit(nv, n), -S::one());
    for i in 0..n {
        p.add_term(MultiIndex::from_slots(nv, &[i, i]), germ.eps(i) * S::from_ratio(1, 2));
    }
    p.add_term(MultiIndex::from_slots(nv, &[0, n]), S::from_ratio(2, 3) * germ.k(0, 0, 0) * e1.clone());
    for s in 1..n {
        p.add_term(MultiIndex::from_slots(nv, &[s, n]), S::from_int(2) * e1.clone() * germ.k(0, 0, s));
    }
    QuadricPencil { base: Quadric { poly: p } }
}

/// The Moutard hyperquadric, `moutard_pencil(germ).member(moutard_beta(germ))`.
pub fn moutard_quadric<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Quadric<S> {
    moutard_pencil(germ).member(&moutard_beta(germ))
}

/// The quadric obtained from the osculating conics of all sections through
/// the x1-axis, with `lambda_s` eliminated via `lambda_s = x_s / y`.
///
/// The section is solved once with the `lambda_s` as extra variables. In that
/// ring every term of `y(x_1, lambda)` has `lambda`-degree at most its
/// `x_1`-degree minus two, so order 6 captures the full 4-jet in `x_1`.
/// Returns the quadric itself; its `y^2` coefficient is the distinguished
/// member of the pencil.
pub fn osculating_hyperquadric<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<Quadric<S>> {
    let n = germ.n();
    // Ring: x_1, lambda_2..lambda_n, y.
    let nv = n + 1;
    let order = 6;
    let y = TruncatedPolynomial::var(nv, order, n);
    let mut subs = vec![TruncatedPolynomial::var(nv, order, 0)];
    for s in 1..n {
        subs.push(&TruncatedPolynomial::var(nv, order, s) * &y);
    }
    let fy = germ.f().with_max_order(4).with_max_order(order).compose(&subs, false)?;
    let sol = (&fy - &y).implicit_graph_solve(order)?;

    let coeff = |k: u32| sol.coefficient_in(0, k);
    let (a2, a3, a4) = (coeff(2), coeff(3), coeff(4));
    let lambda_free = |p: &TruncatedPolynomial<S>, name: &str| -> Result<S> {
        let c = p.constant_term();
        if p.terms().any(|(k, v)| k.degree() > 0 && !v.is_negligible(check_tol(1.0))) {
            return Err(MkitError::InternalMismatch(format!("{name} depends on the section parameters")));
        }
        Ok(c)
    };
    let a2 = lambda_free(&a2, "a2")?;
    let a3 = lambda_free(&a3, "a3")?;
    if a2.is_zero() {
        return Err(MkitError::Inflection);
    }
    // B(lambda) = (a2 a4 - a3^2) / a2^3, a polynomial of degree <= 2 in lambda.
    let a2_cubed = a2.clone() * a2.clone() * a2.clone();
    let shift = TruncatedPolynomial::constant(n, order, a3.clone() * a3.clone());
    let b = (&a4.scale(&a2) - &shift).scale(&(S::one() / a2_cubed));

    let mut g = TruncatedPolynomial::zero(nv, 2);
    g.add_term(MultiIndex::unit(nv, n), -S::one());
    g.add_term(MultiIndex::from_slots(nv, &[0, 0]), a2.clone());
    g.add_term(MultiIndex::from_slots(nv, &[0, n]), a3 / a2);
    for (k, v) in b.terms() {
        // Variables of the solution: x_1, lambda_2..lambda_n.
        let e = k.exponents();
        let deg: u32 = e[1..].iter().sum();
        if e[0] != 0 || deg > 2 {
            if v.is_negligible(check_tol(1.0)) {
                continue;
            }
            return Err(MkitError::InternalMismatch(format!(
                "conic coefficient has a term {:?} beyond quadratic order in the section parameters",
                k.exponents()
            )));
        }
        // lambda^m y^2 = x^m y^(2 - |m|)
        let mut out = e.to_vec();
        out.push(2 - deg);
        g.add_term(MultiIndex::new(out), v.clone());
    }
    Quadric::new(g)
}

/// Pencil through the constructive osculating hyperquadric, and the
/// parameter that hyperquadric sits at.
pub fn pencil_constructive<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<(QuadricPencil<S>, S)> {
    let q = osculating_hyperquadric(germ)?;
    let beta = q.yy_coefficient();
    Ok((QuadricPencil::through(&q), beta))
}

/// Intersection of a hyperquadric with the `k`-space of `spec`.
pub fn restrict_quadric<S: Scalar>(q: &Quadric<S>, spec: &SectionSpec<S>) -> Result<Quadric<S>> {
    q.restrict(spec)
}

/// The section `M_lambda` of the germ by the `k`-space of `spec`, as a germ in
/// the remaining `x` coordinates. Solves `y = f(x_kept, lambda y)`.
pub fn section_germ<S: Scalar>(germ: &HypersurfaceGerm<S>, spec: &SectionSpec<S>) -> Result<HypersurfaceGerm<S>> {
    let n = germ.n();
    spec.check(n)?;
    let kept = spec.kept(n);
    let k = kept.len();
    let order = germ.order();
    let nv = k + 1;
    let y = TruncatedPolynomial::var(nv, order, k);
    let subs: Vec<TruncatedPolynomial<S>> = (0..n)
        .map(|i| match spec.lambda_of(i) {
            Some(l) => y.scale(l),
            None => {
                let pos = kept.iter().position(|&j| j == i).expect("kept index");
                TruncatedPolynomial::var(nv, order, pos)
            }
        })
        .collect();
    let fy = germ.f().compose(&subs, false)?;
    let graph = (&fy - &y).implicit_graph_solve(order)?;
    let sig = Signature::new(kept.iter().map(|&i| germ.signature().get(i)).collect())?;
    HypersurfaceGerm::with_signature(graph, &sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn sig(e: &[i8]) -> Signature {
        Signature::new(e.to_vec()).unwrap()
    }

    fn paraboloid(e: &[i8]) -> HypersurfaceGerm<Rational> {
        HypersurfaceGerm::builder(sig(e), 4).build().unwrap()
    }

    fn sample_germ() -> HypersurfaceGerm<Rational> {
        HypersurfaceGerm::builder(sig(&[1, 1, -1]), 5)
            .cubic([0, 0, 0], q(2, 3))
            .cubic([0, 0, 1], q(-1, 2))
            .cubic([0, 0, 2], q(3, 4))
            .cubic([0, 1, 2], q(1, 1))
            .cubic([1, 2, 2], q(-2, 1))
            .cubic([2, 2, 2], q(1, 3))
            .quartic([0, 0, 0, 0], q(5, 2))
            .quartic([0, 0, 0, 2], q(-1, 1))
            .quartic([0, 1, 1, 2], q(3, 1))
            .term(vec![5, 0, 0], q(7, 1))
            .build()
            .unwrap()
    }

    #[test]
    fn section_curve_examples() {
        let g = paraboloid(&[1, 1, 1]);
        let c = section_curve(&g, &[q(1, 1), q(2, 1)]).unwrap();
        assert_eq!((c.a2(), c.a3(), c.a4()), (q(1, 2), q(0, 1), q(5, 8)));

        let g = sample_germ();
        let c = section_curve(&g, &[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(c.a4(), g.h4(0, 0, 0, 0) / q(12, 1));
        let c = section_curve(&g, &[q(-3, 2), q(1, 4)]).unwrap();
        assert_eq!(c.a2(), q(1, 2));
        assert_eq!(c.a3(), q(2, 9));
    }

    #[test]
    fn osculating_conic_examples() {
        let c = PlanarCurveJet::from_coefficients(&[q(1, 2), q(0, 1), q(0, 1)]);
        let conic = osculating_conic(&c).unwrap();
        assert_eq!(
            conic.poly(),
            &TruncatedPolynomial::from_terms(2, 2, [(vec![0, 1], q(-1, 1)), (vec![2, 0], q(1, 2))])
        );

        let c = PlanarCurveJet::from_coefficients(&[q(1, 2), q(1, 3), q(1, 4)]);
        let conic = osculating_conic(&c).unwrap();
        assert_eq!(conic.coefficient(&[1, 1]), q(2, 3));
        assert_eq!(conic.coefficient(&[0, 2]), q(1, 9));

        // Circle of radius 1 through the origin: y = x^2/2 + x^4/8 + ...
        let c = PlanarCurveJet::from_coefficients(&[q(1, 2), q(0, 1), q(1, 8)]);
        let conic = osculating_conic(&c).unwrap();
        assert_eq!(conic.coefficient(&[0, 2]), q(1, 2));
        assert_eq!(conic.coefficient(&[2, 0]), q(1, 2));

        let c = PlanarCurveJet::from_coefficients(&[q(0, 1), q(1, 1), q(0, 1)]);
        assert_eq!(osculating_conic(&c).unwrap_err(), MkitError::Inflection);
    }

    #[test]
    fn pencil_examples() {
        let g = paraboloid(&[1, -1]);
        let p = moutard_pencil(&g);
        let m = p.member(&q(3, 1));
        assert_eq!(m.coefficient(&[0, 0, 1]), q(-1, 1));
        assert_eq!(m.coefficient(&[0, 2, 0]), q(-1, 2));
        assert_eq!(m.coefficient(&[0, 0, 2]), q(3, 1));

        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4).cubic([0, 0, 0], q(3, 1)).build().unwrap();
        assert_eq!(moutard_pencil(&g).base().coefficient(&[1, 0, 1]), q(2, 1));

        let g = HypersurfaceGerm::builder(sig(&[-1, 1, 1]), 4).cubic([0, 0, 1], q(1, 1)).build().unwrap();
        assert_eq!(moutard_pencil(&g).base().coefficient(&[0, 1, 0, 1]), q(-2, 1));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(moutard_beta(&paraboloid(&[1, 1])), q(0, 1));
        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4)
            .cubic([0, 0, 0], q(3, 1))
            .quartic([0, 0, 0, 0], q(6, 1))
            .build()
            .unwrap();
        assert_eq!(moutard_beta(&g), q(-6, 1));
        let g = HypersurfaceGerm::builder(sig(&[1, -1]), 4).quartic([0, 0, 0, 0], q(3, 1)).build().unwrap();
        assert_eq!(moutard_beta(&g), q(1, 1));
    }

    #[test]
    fn constructive_pencil_matches_closed_form() {
        let g = paraboloid(&[1, 1, 1]);
        let (p, beta) = pencil_constructive(&g).unwrap();
        assert_eq!(p, moutard_pencil(&g));
        assert_eq!(beta, q(0, 1));

        let g = sample_germ();
        let (p, beta) = pencil_constructive(&g).unwrap();
        assert_eq!(p, moutard_pencil(&g));
        assert_eq!(beta, moutard_beta(&g));
    }

    #[test]
    fn constructive_pencil_on_floats() {
        let g = sample_germ().to_float();
        let (p, beta) = pencil_constructive(&g).unwrap();
        assert!(p.base().poly().approx_eq(moutard_pencil(&g).base().poly(), 1e-12));
        assert!((beta - moutard_beta(&g)).abs() < 1e-12);
    }

    #[test]
    fn restriction_examples() {
        let g = paraboloid(&[1, 1, 1]);
        let mq = moutard_quadric(&g);
        assert_eq!(restrict_quadric(&mq, &SectionSpec::empty()).unwrap(), mq);

        let spec = SectionSpec::new(3, vec![2], vec![q(2, 1)]).unwrap();
        let r = restrict_quadric(&mq, &spec).unwrap();
        let expect = TruncatedPolynomial::from_terms(
            3,
            2,
            [(vec![0, 0, 1], q(-1, 1)), (vec![2, 0, 0], q(1, 2)), (vec![0, 2, 0], q(1, 2)), (vec![0, 0, 2], q(2, 1))],
        );
        assert_eq!(r.poly(), &expect);

        let spec = SectionSpec::new(3, vec![1, 2], vec![q(0, 1), q(0, 1)]).unwrap();
        let r = restrict_quadric(&mq, &spec).unwrap();
        assert_eq!(r.poly(), &TruncatedPolynomial::from_terms(2, 2, [(vec![0, 1], q(-1, 1)), (vec![2, 0], q(1, 2))]));

        assert!(SectionSpec::new(3, vec![0], vec![q(1, 1)]).is_err());
        assert!(SectionSpec::new(3, vec![1, 1], vec![q(1, 1), q(1, 1)]).is_err());
    }

    #[test]
    fn sectional_property_on_sample() {
        let g = sample_germ();
        let spec = SectionSpec::new(3, vec![2], vec![q(-2, 3)]).unwrap();
        let restricted = restrict_quadric(&moutard_quadric(&g), &spec).unwrap();
        let sec = section_germ(&g, &spec).unwrap();
        assert_eq!(moutard_quadric(&sec), restricted);
        assert_eq!(osculating_hyperquadric(&sec).unwrap(), restricted);
    }

    #[test]
    fn matrix_round_trip() {
        let mq = moutard_quadric(&sample_germ());
        let m = mq.matrix();
        assert_eq!(m.len(), 5);
        assert_eq!(m[3][4], q(-1, 2));
        assert_eq!(Quadric::from_matrix(&m).unwrap(), mq);
    }

    #[test]
    fn pencil_membership() {
        let p = moutard_pencil(&sample_germ());
        let m = p.member(&q(7, 3));
        assert_eq!(p.parameter_of(&m), Some(q(7, 3)));
        let diff = m.poly() - p.member(&q(0, 1)).poly();
        assert_eq!(diff, TruncatedPolynomial::from_terms(4, 2, [(vec![0, 0, 0, 2], q(7, 3))]));
    }
}
