//! Normal form of a non-degenerate hypersurface germ.
//!
//! A germ is the jet of `x_{n+1} = f(x)` at the origin with
//! `f = 1/2 sum eps_s x_s^2 + 1/3 sum K_{str} x_s x_t x_r + 1/12 sum H_{strm} x_s x_t x_r x_m + ...`,
//! where the sums run over ordered index tuples. The raw coefficient of a
//! cubic monomial is therefore `K * multinomial / 3`, of a quartic one
//! `H * multinomial / 12`. Indices in this API are 0-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MkitError, Result};
use crate::jetalgebra::{MultiIndex, TruncatedPolynomial};
use crate::linalg::{self, Matrix};
use crate::scalar::{Backend, Rational, Scalar};

/// Relative tolerance used when a float computation must decide whether a
/// quantity that is zero in exact arithmetic vanished.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

/// Diagonal of the normalized Hessian, entries `+1` or `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(MkitError::InvalidInput("empty signature".into()));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(MkitError::InvalidInput(format!("signature entries must be +-1: {entries:?}")));
        }
        Ok(Signature(entries))
    }

    pub fn positive(n: usize) -> Self {
        Signature(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn scalar<S: Scalar>(&self, i: usize) -> S {
        S::from_int(self.0[i] as i64)
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&e| e > 0).count()
    }

    pub fn product(&self) -> i8 {
        self.0.iter().product()
    }

    /// `h(u, v) = sum eps_s u_s v_s`.
    pub fn inner<S: Scalar>(&self, u: &[S], v: &[S]) -> S {
        self.0
            .iter()
            .zip(u.iter().zip(v))
            .fold(S::zero(), |acc, (&e, (a, b))| acc + S::from_int(e as i64) * a.clone() * b.clone())
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = MkitError;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.0
    }
}

/// Jet of a hypersurface in normal form at the origin.
#[derive(Clone, Debug)]
pub struct HypersurfaceGerm<S> {
    f: TruncatedPolynomial<S>,
    signature: Signature,
}

impl<S: Scalar> PartialEq for HypersurfaceGerm<S> {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.f == other.f
    }
}

impl<S: Scalar> HypersurfaceGerm<S> {
    /// Validates a jet: no constant or linear part, quadratic part exactly
    /// `1/2 sum eps_s x_s^2`, truncation order at least 4.
    pub fn from_jet(f: TruncatedPolynomial<S>) -> Result<Self> {
        let n = f.n_vars();
        if n == 0 {
            return Err(MkitError::NotNormalForm("no variables".into()));
        }
        if f.max_order() < 4 {
            return Err(MkitError::NotNormalForm(format!("truncation order {} is below 4", f.max_order())));
        }
        if !f.jet_part(0).is_zero() || !f.jet_part(1).is_zero() {
            return Err(MkitError::NotNormalForm("constant or linear part present".into()));
        }
        let half = S::from_ratio(1, 2);
        let mut eps = Vec::with_capacity(n);
        for i in 0..n {
            let c = f.coefficient(MultiIndex::from_slots(n, &[i, i]).exponents());
            if c == half {
                eps.push(1);
            } else if c == -half.clone() {
                eps.push(-1);
            } else {
                return Err(MkitError::NotNormalForm(format!(
                    "coefficient of x{}^2 is {}, expected +-1/2",
                    i + 1,
                    c.show()
                )));
            }
        }
        if f.jet_part(2).len() != n {
            return Err(MkitError::NotNormalForm("Hessian is not diagonal".into()));
        }
        Ok(HypersurfaceGerm { f, signature: Signature(eps) })
    }

    /// Like [`from_jet`](Self::from_jet) but also checks the signature.
    pub fn with_signature(f: TruncatedPolynomial<S>, signature: &Signature) -> Result<Self> {
        let germ = Self::from_jet(f)?;
        if &germ.signature != signature {
            return Err(MkitError::NotNormalForm(format!(
                "quadratic part has signature {:?}, document claims {:?}",
                germ.signature.entries(),
                signature.entries()
            )));
        }
        Ok(germ)
    }

    /// Replaces the quadratic part by exactly `1/2 sum eps x^2` after checking
    /// it is within `tol` of that (always exact on the rational backend).
    pub(crate) fn snapped(f: TruncatedPolynomial<S>, signature: Signature, tol: f64) -> Result<Self> {
        let n = f.n_vars();
        let mut g = TruncatedPolynomial::zero(n, f.max_order());
        for (k, v) in f.terms() {
            match k.degree() {
                0 | 1 => {
                    if !v.is_negligible(tol) {
                        return Err(MkitError::NotNormalForm("constant or linear part present".into()));
                    }
                }
                2 => {
                    let diag = k.exponents().iter().position(|&e| e == 2);
                    let target = match diag {
                        Some(i) => S::from_ratio(signature.get(i) as i64, 2),
                        None => S::zero(),
                    };
                    if !(v.clone() - target).is_negligible(tol) {
                        return Err(MkitError::InternalMismatch(format!(
                            "quadratic coefficient {:?} = {} is not normalized",
                            k.exponents(),
                            v.show()
                        )));
                    }
                }
                _ => g.add_term(k.clone(), v.clone()),
            }
        }
        for i in 0..n {
            g.add_term(MultiIndex::from_slots(n, &[i, i]), S::from_ratio(signature.get(i) as i64, 2));
        }
        Self::with_signature(g, &signature)
    }

    pub fn builder(signature: Signature, order: u32) -> GermBuilder<S> {
        GermBuilder { signature, order, coeffs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.f.n_vars()
    }

    pub fn order(&self) -> u32 {
        self.f.max_order()
    }

    pub fn f(&self) -> &TruncatedPolynomial<S> {
        &self.f
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn eps(&self, i: usize) -> S {
        self.signature.scalar(i)
    }

    /// Cubic tensor entry `K_{ijk}` (symmetric in its indices).
    pub fn k(&self, i: usize, j: usize, l: usize) -> S {
        let idx = MultiIndex::from_slots(self.n(), &[i, j, l]);
        self.f.coefficient(idx.exponents()) * S::from_int(3) / S::from_int(idx.multinomial() as i64)
    }

    /// Quartic tensor entry `H_{ijkl}` (symmetric in its indices).
    pub fn h4(&self, i: usize, j: usize, k: usize, l: usize) -> S {
        let idx = MultiIndex::from_slots(self.n(), &[i, j, k, l]);
        self.f.coefficient(idx.exponents()) * S::from_int(12) / S::from_int(idx.multinomial() as i64)
    }

    /// Largest `|K_{ijk}|`.
    pub fn cubic_magnitude(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                for l in j..n {
                    m = m.max(self.k(i, j, l).magnitude());
                }
            }
        }
        m
    }

    /// The germ in coordinates `x = L u` where `L` preserves the normal form,
    /// i.e. `L^T diag(eps) L = diag(new_signature)`.
    pub(crate) fn pulled_back(&self, l: &Matrix<S>, new_signature: Signature) -> Result<Self> {
        let n = self.n();
        let order = self.order();
        let subs: Vec<TruncatedPolynomial<S>> = (0..n)
            .map(|row| {
                TruncatedPolynomial::from_terms(
                    n,
                    order,
                    (0..n).map(|col| (MultiIndex::unit(n, col), l[row][col].clone())),
                )
            })
            .collect();
        let g = self.f.compose(&subs, false)?;
        let scale = l.iter().flatten().map(Scalar::magnitude).fold(1.0, f64::max);
        Self::snapped(g, new_signature, 1e-9 * scale * scale)
    }
}

impl<S: Scalar> HypersurfaceGerm<S> {
    /// The same germ on the float backend.
    pub fn as_float(&self) -> HypersurfaceGerm<f64> {
        HypersurfaceGerm { f: self.f.map_coeffs(Scalar::to_f64), signature: self.signature.clone() }
    }

    /// The germ in coordinates `x = L u` for any `L` with
    /// `L^T diag(eps) L` diagonal with entries `+-1`.
    pub fn linear_change(&self, l: &Matrix<S>) -> Result<Self> {
        let n = self.n();
        if l.len() != n || l.iter().any(|r| r.len() != n) {
            return Err(MkitError::Dimension(format!("frame matrix must be {n} x {n}")));
        }
        let eps: Vec<S> = (0..n).map(|i| self.eps(i)).collect();
        let g = linalg::mat_mul(&linalg::transpose(l), &linalg::mat_mul(&linalg::diagonal(&eps), l));
        let tol = 1e-9 * (1.0 + l.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max)).powi(2);
        let mut sig = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                let target = if i == j {
                    if g[i][i].is_negative() {
                        -S::one()
                    } else {
                        S::one()
                    }
                } else {
                    S::zero()
                };
                if !(g[i][j].clone() - target).is_negligible(tol) {
                    return Err(MkitError::NotNormalForm("frame does not preserve the metric".into()));
                }
            }
            sig.push(if g[i][i].is_negative() { -1 } else { 1 });
        }
        self.pulled_back(l, Signature(sig))
    }
}

impl HypersurfaceGerm<Rational> {
    pub fn to_float(&self) -> HypersurfaceGerm<f64> {
        self.as_float()
    }
}

/// Assembles a normal-form germ from tensor entries.
#[derive(Clone, Debug)]
pub struct GermBuilder<S> {
    signature: Signature,
    order: u32,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> GermBuilder<S> {
    /// Sets `K_{ijk}` (and all its permutations).
    pub fn cubic(mut self, slots: [usize; 3], value: S) -> Self {
        let idx = MultiIndex::from_slots(self.signature.len(), &slots);
        let c = value * S::from_int(idx.multinomial() as i64) / S::from_int(3);
        self.coeffs.insert(idx, c);
        self
    }

    /// Sets `H_{ijkl}` (and all its permutations).
    pub fn quartic(mut self, slots: [usize; 4], value: S) -> Self {
        let idx = MultiIndex::from_slots(self.signature.len(), &slots);
        let c = value * S::from_int(idx.multinomial() as i64) / S::from_int(12);
        self.coeffs.insert(idx, c);
        self
    }

    /// Sets a raw monomial coefficient of degree at least 3.
    pub fn term(mut self, exponents: Vec<u32>, value: S) -> Self {
        self.coeffs.insert(MultiIndex::new(exponents), value);
        self
    }

    pub fn build(self) -> Result<HypersurfaceGerm<S>> {
        let n = self.signature.len();
        let mut f = TruncatedPolynomial::zero(n, self.order);
        for i in 0..n {
            f.add_term(MultiIndex::from_slots(n, &[i, i]), S::from_ratio(self.signature.get(i) as i64, 2));
        }
        for (k, v) in self.coeffs {
            if k.len() != n {
                return Err(MkitError::Dimension(format!("term {:?} has wrong length for n = {n}", k.exponents())));
            }
            if k.degree() < 3 {
                return Err(MkitError::InvalidInput(format!("term {:?} would break the normal form", k.exponents())));
            }
            f.add_term(k, v);
        }
        HypersurfaceGerm::with_signature(f, &self.signature)
    }
}

/// Affine change of frame between ambient coordinates `(x, y)` and germ
/// coordinates `(u, w)`:
///
/// `x = origin + linear * u`, `y = height + shear . u + w`.
///
/// `shear` is expressed in germ coordinates; it removes the linear part of
/// the graph at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameChange<S> {
    pub origin: Vec<S>,
    pub height: S,
    pub linear: Matrix<S>,
    pub shear: Vec<S>,
}

impl<S: Scalar> FrameChange<S> {
    pub fn identity(n: usize) -> Self {
        FrameChange {
            origin: vec![S::zero(); n],
            height: S::zero(),
            linear: linalg::identity(n),
            shear: vec![S::zero(); n],
        }
    }

    pub fn linear_only(linear: Matrix<S>) -> Self {
        let n = linear.len();
        FrameChange { linear, ..Self::identity(n) }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.origin.len())
    }

    /// The frame obtained by applying `next` in the coordinates produced by
    /// `self`.
    pub fn then(&self, next: &FrameChange<S>) -> FrameChange<S> {
        let lo = linalg::mat_vec(&self.linear, &next.origin);
        let origin = self.origin.iter().zip(&lo).map(|(a, b)| a.clone() + b.clone()).collect();
        let height = self.height.clone() + linalg::dot(&self.shear, &next.origin) + next.height.clone();
        let linear = linalg::mat_mul(&self.linear, &next.linear);
        let pulled = linalg::mat_vec(&linalg::transpose(&next.linear), &self.shear);
        let shear = pulled.into_iter().zip(&next.shear).map(|(a, b)| a + b.clone()).collect();
        FrameChange { origin, height, linear, shear }
    }

    pub fn to_ambient(&self, u: &[S], w: S) -> (Vec<S>, S) {
        let lu = linalg::mat_vec(&self.linear, u);
        let x = self.origin.iter().zip(lu).map(|(a, b)| a.clone() + b).collect();
        let y = self.height.clone() + linalg::dot(&self.shear, u) + w;
        (x, y)
    }

    pub fn determinant(&self) -> S {
        linalg::determinant(&self.linear)
    }
}

/// Hessian of a jet at the origin, read off its quadratic part.
pub fn hessian_at_origin<S: Scalar>(f: &TruncatedPolynomial<S>) -> Matrix<S> {
    let n = f.n_vars();
    let mut h = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = f.coefficient(MultiIndex::from_slots(n, &[i, j]).exponents());
            h[i][j] = if i == j { c * S::from_int(2) } else { c };
        }
    }
    h
}

/// Taylor expansion of a global graph `F` at `p` with the affine part removed.
pub fn recenter<S: Scalar>(
    big_f: &TruncatedPolynomial<S>,
    p: &[S],
    order: u32,
) -> Result<(TruncatedPolynomial<S>, FrameChange<S>)> {
    let n = big_f.n_vars();
    if p.len() != n {
        return Err(MkitError::Dimension(format!("point has {} coordinates, F has {n} variables", p.len())));
    }
    let subs: Vec<TruncatedPolynomial<S>> = (0..n)
        .map(|i| &TruncatedPolynomial::constant(n, order, p[i].clone()) + &TruncatedPolynomial::var(n, order, i))
        .collect();
    let shifted = big_f.with_max_order(big_f.max_order().max(order)).compose(&subs, true)?;
    let height = shifted.constant_term();
    let shear: Vec<S> = (0..n).map(|i| shifted.coefficient(MultiIndex::unit(n, i).exponents())).collect();
    let mut jet = TruncatedPolynomial::zero(n, order);
    for (k, v) in shifted.terms() {
        if k.degree() >= 2 {
            jet.add_term(k.clone(), v.clone());
        }
    }
    let frame = FrameChange { origin: p.to_vec(), height, shear, ..FrameChange::identity(n) };
    Ok((jet, frame))
}

fn swap_congruent<S: Scalar>(a: &mut Matrix<S>, t: &mut Matrix<S>, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
    for row in t.iter_mut() {
        row.swap(i, j);
    }
}

/// Replaces columns `(k, j)` by `(m00 c_k + m10 c_j, m01 c_k + m11 c_j)` on `t`
/// and applies the matching congruence to `a`.
fn mix_congruent<S: Scalar>(a: &mut Matrix<S>, t: &mut Matrix<S>, k: usize, j: usize, m: [[S; 2]; 2]) {
    let col_op = |rows: &mut Matrix<S>| {
        for row in rows.iter_mut() {
            let (ck, cj) = (row[k].clone(), row[j].clone());
            row[k] = m[0][0].clone() * ck.clone() + m[1][0].clone() * cj.clone();
            row[j] = m[0][1].clone() * ck + m[1][1].clone() * cj;
        }
    };
    col_op(a);
    col_op(t);
    let n = a.len();
    for c in 0..n {
        let (rk, rj) = (a[k][c].clone(), a[j][c].clone());
        a[k][c] = m[0][0].clone() * rk.clone() + m[1][0].clone() * rj.clone();
        a[j][c] = m[0][1].clone() * rk + m[1][1].clone() * rj;
    }
}

/// Congruence diagonalization `L^T H L = diag(eps)`, `+1` entries first.
///
/// Symmetric elimination with diagonal pivoting; a zero diagonal block
/// `[[0, b], [b, 0]]` is split rationally into `diag(1, -1)`. The final column
/// scaling by `1/sqrt|pivot|` is exact only for perfect-square pivots.
pub fn diagonalize_hessian<S: Scalar>(hess: &Matrix<S>) -> Result<(Matrix<S>, Signature)> {
    let n = hess.len();
    if n == 0 || !linalg::is_symmetric(hess) && S::BACKEND == Backend::Exact {
        return Err(MkitError::InvalidInput("Hessian must be a nonempty symmetric matrix".into()));
    }
    let scale = hess.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max);
    let tol = FLOAT_ZERO_TOL * scale.max(f64::MIN_POSITIVE);
    let nonzero = |v: &S| !v.is_zero() && !v.is_negligible(tol);

    let mut a = hess.clone();
    let mut t = linalg::identity::<S>(n);
    for k in 0..n {
        let diag_pivot = match S::BACKEND {
            Backend::Exact => (k..n).find(|&j| nonzero(&a[j][j])),
            Backend::Float => (k..n).filter(|&j| nonzero(&a[j][j])).fold(None, |best: Option<usize>, j| match best {
                Some(b) if a[b][b].magnitude() >= a[j][j].magnitude() => Some(b),
                _ => Some(j),
            }),
        };
        match diag_pivot {
            Some(j) => swap_congruent(&mut a, &mut t, k, j),
            None => {
                let mut pair = None;
                let mut best = 0.0;
                for i in k..n {
                    for j in i + 1..n {
                        if nonzero(&a[i][j]) && a[i][j].magnitude() > best {
                            best = a[i][j].magnitude();
                            pair = Some((i, j));
                            if S::BACKEND == Backend::Exact {
                                break;
                            }
                        }
                    }
                    if pair.is_some() && S::BACKEND == Backend::Exact {
                        break;
                    }
                }
                let (i, j) = pair.ok_or(MkitError::DegeneratePoint)?;
                swap_congruent(&mut a, &mut t, k, i);
                let b = a[k][j].clone();
                let half = S::from_ratio(1, 2);
                let inv_b = S::one() / b;
                mix_congruent(&mut a, &mut t, k, j, [[half.clone(), half], [inv_b.clone(), -inv_b]]);
            }
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = a[i][k].clone() / pivot.clone();
            for row in a.iter_mut() {
                let delta = factor.clone() * row[k].clone();
                row[i] = row[i].clone() - delta;
            }
            for row in t.iter_mut() {
                let delta = factor.clone() * row[k].clone();
                row[i] = row[i].clone() - delta;
            }
            for c in 0..n {
                let delta = factor.clone() * a[k][c].clone();
                a[i][c] = a[i][c].clone() - delta;
            }
            a[i][k] = S::zero();
            a[k][i] = S::zero();
        }
    }

    let mut cols: Vec<(i8, Vec<S>)> = Vec::with_capacity(n);
    for k in 0..n {
        let d = a[k][k].clone();
        if !nonzero(&d) {
            return Err(MkitError::DegeneratePoint);
        }
        let sign: i8 = if d.is_negative() { -1 } else { 1 };
        let abs = if sign < 0 { -d } else { d };
        let root = abs.sqrt().ok_or_else(|| MkitError::NonSquarePivot(abs.show()))?;
        let inv = S::one() / root;
        cols.push((sign, t.iter().map(|row| row[k].clone() * inv.clone()).collect()));
    }
    cols.sort_by_key(|(s, _)| -s);
    let eps = Signature(cols.iter().map(|(s, _)| *s).collect());
    let l = (0..n).map(|r| cols.iter().map(|(_, c)| c[r].clone()).collect()).collect();
    Ok((l, eps))
}

/// Frame whose first axis is `v / sqrt|h(v,v)|`, completed to an
/// `h`-orthonormal basis by indefinite Gram-Schmidt over the standard basis.
///
/// `v` is given in the germ's current coordinates. The complement keeps `+1`
/// entries first; the first signature entry is the sign of `h(v, v)`.
pub fn align_direction<S: Scalar>(
    germ: &HypersurfaceGerm<S>,
    v: &[S],
) -> Result<(HypersurfaceGerm<S>, FrameChange<S>)> {
    let n = germ.n();
    if v.len() != n {
        return Err(MkitError::Dimension(format!("direction has {} entries, germ has n = {n}", v.len())));
    }
    let l = orthonormal_frame(germ.signature(), v)?;
    let new_sig = Signature(
        (0..n)
            .map(|c| {
                let col: Vec<S> = l.iter().map(|r| r[c].clone()).collect();
                if germ.signature().inner(&col, &col).is_negative() {
                    -1
                } else {
                    1
                }
            })
            .collect(),
    );
    let aligned = germ.pulled_back(&l, new_sig)?;
    Ok((aligned, FrameChange::linear_only(l)))
}

/// Columns of the returned matrix are the normalized frame `(v, v_2, ..., v_n)`.
pub fn orthonormal_frame<S: Scalar>(sig: &Signature, v: &[S]) -> Result<Matrix<S>> {
    let n = sig.len();
    let norm2 = v.iter().map(|x| x.to_f64() * x.to_f64()).sum::<f64>();
    if v.iter().all(|x| x.is_zero()) || norm2 == 0.0 && S::BACKEND == Backend::Float {
        return Err(MkitError::ZeroVector);
    }
    let tol = FLOAT_ZERO_TOL * 1e3;
    let hv = sig.inner(v, v);
    if hv.is_zero() || hv.is_negligible(tol * norm2) {
        return Err(MkitError::NullDirection);
    }

    let mut chosen: Vec<Vec<S>> = vec![v.to_vec()];
    let mut cands: Vec<Vec<S>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
    let project = |c: &mut Vec<S>, w: &[S]| {
        let coef = sig.inner(c, w) / sig.inner(w, w);
        for (ci, wi) in c.iter_mut().zip(w) {
            *ci = ci.clone() - coef.clone() * wi.clone();
        }
    };
    let rel = |c: &[S], val: &S| {
        let cn = c.iter().map(|x| x.to_f64() * x.to_f64()).sum::<f64>();
        if val.is_zero() || cn == 0.0 {
            0.0
        } else {
            val.magnitude() / cn
        }
    };
    let mut complement: Vec<Vec<S>> = Vec::new();
    while complement.len() + 1 < n {
        let last = chosen.last().expect("nonempty").clone();
        for c in cands.iter_mut() {
            project(c, &last);
        }
        cands.retain(|c| {
            let cn = c.iter().map(|x| x.to_f64() * x.to_f64()).sum::<f64>();
            !(c.iter().all(|x| x.is_zero()) || S::BACKEND == Backend::Float && cn < tol)
        });
        let scored: Vec<f64> = cands.iter().map(|c| rel(c, &sig.inner(c, c))).collect();
        let pick = match S::BACKEND {
            Backend::Exact => scored.iter().position(|&s| s > 0.0),
            Backend::Float => {
                scored.iter().enumerate().filter(|(_, &s)| s > tol).max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)
            }
        };
        let next = match pick {
            Some(i) => cands.remove(i),
            None => {
                // Every remaining candidate is null; a pair with h(a, b) != 0
                // exists because the complement of a non-null v is non-degenerate.
                let mut found = None;
                'outer: for i in 0..cands.len() {
                    for j in i + 1..cands.len() {
                        let hij = sig.inner(&cands[i], &cands[j]);
                        if !hij.is_zero() && !hij.is_negligible(tol) {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                let (i, j) =
                    found.ok_or_else(|| MkitError::InternalMismatch("metric complement is degenerate".into()))?;
                cands[i].iter().zip(&cands[j]).map(|(a, b)| a.clone() + b.clone()).collect()
            }
        };
        chosen.push(next.clone());
        complement.push(next);
    }

    let normalize = |w: &[S]| -> Result<(i8, Vec<S>)> {
        let hw = sig.inner(w, w);
        let sign: i8 = if hw.is_negative() { -1 } else { 1 };
        let abs = if sign < 0 { -hw } else { hw };
        let root = abs.sqrt().ok_or_else(|| MkitError::NonSquarePivot(abs.show()))?;
        let inv = S::one() / root;
        Ok((sign, w.iter().map(|x| x.clone() * inv.clone()).collect()))
    };
    let mut cols = vec![normalize(v)?];
    let mut rest = complement.iter().map(|w| normalize(w)).collect::<Result<Vec<_>>>()?;
    rest.sort_by_key(|(s, _)| -s);
    cols.extend(rest);
    Ok((0..n).map(|r| cols.iter().map(|(_, c)| c[r].clone()).collect()).collect())
}

/// Recenters `F` at `p` and diagonalizes its Hessian, composing both frame
/// changes into one.
pub fn normalize<S: Scalar>(
    big_f: &TruncatedPolynomial<S>,
    p: &[S],
    order: u32,
) -> Result<(HypersurfaceGerm<S>, FrameChange<S>)> {
    let (jet, frame) = recenter(big_f, p, order)?;
    let hess = hessian_at_origin(&jet);
    let (l, eps) = diagonalize_hessian(&hess)?;
    let n = jet.n_vars();
    let subs: Vec<TruncatedPolynomial<S>> = (0..n)
        .map(|row| {
            TruncatedPolynomial::from_terms(n, order, (0..n).map(|col| (MultiIndex::unit(n, col), l[row][col].clone())))
        })
        .collect();
    let g = jet.compose(&subs, false)?;
    let germ = HypersurfaceGerm::snapped(g, eps, 1e-9)?;
    Ok((germ, frame.then(&FrameChange::linear_only(l))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = TruncatedPolynomial<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qm(rows: &[&[(i64, i64)]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&(a, b)| q(a, b)).collect()).collect()
    }

    fn poly(n: usize, order: u32, terms: &[(&[u32], Rational)]) -> P {
        P::from_terms(n, order, terms.iter().map(|(e, c)| (e.to_vec(), c.clone())))
    }

    #[test]
    fn k_and_h_conventions() {
        let g = HypersurfaceGerm::builder(Signature::positive(2), 4)
            .cubic([0, 0, 1], q(5, 1))
            .quartic([0, 0, 0, 1], q(3, 1))
            .build()
            .unwrap();
        // K_112 x1^2 x2 appears with multiplicity 3 and weight 1/3.
        assert_eq!(g.f().coefficient(&[2, 1]), q(5, 1));
        assert_eq!(g.k(1, 0, 0), q(5, 1));
        assert_eq!(g.f().coefficient(&[3, 1]), q(1, 1));
        assert_eq!(g.h4(0, 1, 0, 0), q(3, 1));
    }

    #[test]
    fn from_jet_rejects_bad_quadratic_part() {
        let f = poly(2, 4, &[(&[2, 0], q(1, 2)), (&[0, 2], q(1, 1))]);
        assert!(matches!(HypersurfaceGerm::from_jet(f), Err(MkitError::NotNormalForm(_))));
        let f = poly(2, 4, &[(&[2, 0], q(1, 2)), (&[0, 2], q(1, 2)), (&[1, 1], q(1, 1))]);
        assert!(HypersurfaceGerm::from_jet(f).is_err());
        let f = poly(1, 3, &[(&[2], q(1, 2))]);
        assert!(HypersurfaceGerm::from_jet(f).is_err());
    }

    #[test]
    fn recenter_examples() {
        let f = poly(2, 4, &[(&[2, 0], q(1, 2)), (&[0, 2], q(1, 2))]);
        let (jet, frame) = recenter(&f, &[q(0, 1), q(0, 1)], 4).unwrap();
        assert_eq!(jet, f);
        assert!(frame.is_identity());

        let f = poly(2, 2, &[(&[2, 0], q(1, 2))]);
        let (jet, frame) = recenter(&f, &[q(1, 1), q(0, 1)], 4).unwrap();
        assert_eq!(jet, poly(2, 4, &[(&[2, 0], q(1, 2))]));
        assert_eq!(frame.shear, vec![q(1, 1), q(0, 1)]);
        assert_eq!(frame.height, q(1, 2));

        let f = poly(1, 3, &[(&[3], q(1, 1))]);
        let (jet, _) = recenter(&f, &[q(1, 1)], 4).unwrap();
        assert_eq!(jet, poly(1, 4, &[(&[2], q(3, 1)), (&[3], q(1, 1))]));
    }

    #[test]
    fn diagonalize_examples() {
        let (l, eps) = diagonalize_hessian(&linalg::identity::<Rational>(3)).unwrap();
        assert_eq!(l, linalg::identity(3));
        assert_eq!(eps.entries(), &[1, 1, 1]);

        let (l, eps) = diagonalize_hessian(&qm(&[&[(4, 1), (0, 1)], &[(0, 1), (-9, 1)]])).unwrap();
        assert_eq!(l, qm(&[&[(1, 2), (0, 1)], &[(0, 1), (1, 3)]]));
        assert_eq!(eps.entries(), &[1, -1]);

        let (l, eps) = diagonalize_hessian(&vec![vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((l[0][0] - r).abs() < 1e-15 && (l[1][1] - r).abs() < 1e-15);
        assert_eq!(l[0][1], 0.0);
        assert_eq!(eps.entries(), &[1, 1]);

        assert!(matches!(
            diagonalize_hessian(&qm(&[&[(2, 1), (0, 1)], &[(0, 1), (2, 1)]])),
            Err(MkitError::NonSquarePivot(_))
        ));
        assert_eq!(diagonalize_hessian(&qm(&[&[(1, 1), (1, 1)], &[(1, 1), (1, 1)]])), Err(MkitError::DegeneratePoint));
    }

    #[test]
    fn hyperbolic_block_is_split_rationally() {
        let h = qm(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        let (l, eps) = diagonalize_hessian(&h).unwrap();
        assert_eq!(eps.entries(), &[1, -1]);
        let d = linalg::mat_mul(&linalg::transpose(&l), &linalg::mat_mul(&h, &l));
        assert_eq!(d, linalg::diagonal(&[q(1, 1), q(-1, 1)]));
    }

    #[test]
    fn normalize_examples() {
        let f = poly(2, 4, &[(&[2, 0], q(1, 2)), (&[0, 2], q(-1, 2))]);
        let (g, frame) = normalize(&f, &[q(0, 1), q(0, 1)], 4).unwrap();
        assert_eq!(g.f(), &f);
        assert!(frame.is_identity());

        let f = poly(2, 2, &[(&[1, 1], q(1, 1))]);
        let (g, _) = normalize(&f, &[q(0, 1), q(0, 1)], 4).unwrap();
        assert_eq!(g.signature().entries(), &[1, -1]);
        assert_eq!(g.f(), &poly(2, 4, &[(&[2, 0], q(1, 2)), (&[0, 2], q(-1, 2))]));

        let f = TruncatedPolynomial::<f64>::from_terms(2, 2, [(vec![2, 0], 2.0), (vec![0, 2], 1.0)]);
        let (g, frame) = normalize(&f, &[0.0, 0.0], 4).unwrap();
        assert_eq!(g.signature().entries(), &[1, 1]);
        assert!((frame.linear[0][0] - 0.5).abs() < 1e-15);
        assert!((frame.linear[1][1] - 1.0 / 2f64.sqrt()).abs() < 1e-15);

        let f = poly(2, 2, &[(&[2, 0], q(1, 1))]);
        assert_eq!(normalize(&f, &[q(0, 1), q(0, 1)], 4).unwrap_err(), MkitError::DegeneratePoint);
    }

    #[test]
    fn align_examples() {
        let germ = HypersurfaceGerm::builder(Signature::positive(2), 4).cubic([0, 0, 0], q(1, 1)).build().unwrap();
        let (same, frame) = align_direction(&germ, &[q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(same, germ);
        assert!(frame.is_identity());

        let (rot, _) = align_direction(&germ, &[q(3, 5), q(4, 5)]).unwrap();
        assert_eq!(rot.k(0, 0, 0), q(27, 125));

        let hyp = HypersurfaceGerm::<Rational>::builder(Signature::new(vec![1, -1]).unwrap(), 4).build().unwrap();
        assert_eq!(align_direction(&hyp, &[q(1, 1), q(1, 1)]).unwrap_err(), MkitError::NullDirection);
        assert_eq!(align_direction(&hyp, &[q(0, 1), q(0, 1)]).unwrap_err(), MkitError::ZeroVector);
    }

    #[test]
    fn align_preserves_the_hypersurface() {
        let germ = HypersurfaceGerm::builder(Signature::new(vec![1, -1]).unwrap(), 4)
            .cubic([0, 0, 1], q(2, 1))
            .cubic([1, 1, 1], q(-1, 3))
            .quartic([0, 1, 1, 1], q(1, 2))
            .build()
            .unwrap();
        // h(v, v) = 25 - 16 = 9 and the complement has |h| = 9/... square too.
        let (aligned, frame) = align_direction(&germ, &[q(5, 1), q(4, 1)]).unwrap();
        assert_eq!(aligned.signature().entries(), &[1, -1]);
        let inv = linalg::inverse(&frame.linear).unwrap();
        let subs: Vec<P> =
            (0..2).map(|r| P::from_terms(2, 4, (0..2).map(|c| (MultiIndex::unit(2, c), inv[r][c].clone())))).collect();
        assert_eq!(aligned.f().compose(&subs, false).unwrap(), *germ.f());
    }

    #[test]
    fn frame_composition_matches_sequential_maps() {
        let a = FrameChange {
            origin: vec![q(1, 1), q(2, 1)],
            height: q(3, 1),
            linear: qm(&[&[(2, 1), (1, 1)], &[(0, 1), (1, 1)]]),
            shear: vec![q(1, 2), q(-1, 1)],
        };
        let b = FrameChange {
            origin: vec![q(-1, 1), q(1, 3)],
            height: q(1, 5),
            linear: qm(&[&[(1, 1), (0, 1)], &[(3, 1), (1, 1)]]),
            shear: vec![q(2, 1), q(0, 1)],
        };
        let v = vec![q(7, 1), q(-2, 1)];
        let z = q(11, 1);
        let (u, w) = b.to_ambient(&v, z.clone());
        let seq = a.to_ambient(&u, w);
        assert_eq!(a.then(&b).to_ambient(&v, z), seq);
    }

    proptest! {
        #[test]
        fn sylvester_signature_is_congruence_invariant(
            pos in 1usize..=3,
            neg in 0usize..=2,
            entries in prop::collection::vec(-3i64..=3, 25),
        ) {
            let n = pos + neg;
            let d: Vec<Rational> = (0..n).map(|i| q(if i < pos { 1 } else { -1 }, 1)).collect();
            let m: Matrix<Rational> =
                (0..n).map(|i| (0..n).map(|j| q(entries[i * 5 + j], 1)).collect()).collect();
            prop_assume!(linalg::determinant(&m) != q(0, 1));
            let h = linalg::mat_mul(&linalg::transpose(&m), &linalg::mat_mul(&linalg::diagonal(&d), &m));
            let hf: Matrix<f64> = h.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
            let (l, eps) = diagonalize_hessian(&hf).unwrap();
            prop_assert_eq!(eps.positives(), pos);
            let back = linalg::mat_mul(&linalg::transpose(&l), &linalg::mat_mul(&hf, &l));
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { eps.get(i) as f64 } else { 0.0 };
                    prop_assert!((back[i][j] - target).abs() < 1e-8);
                }
            }
            if let Ok((l, eps)) = diagonalize_hessian(&h) {
                prop_assert_eq!(eps.positives(), pos);
                let back = linalg::mat_mul(&linalg::transpose(&l), &linalg::mat_mul(&h, &l));
                let target: Vec<Rational> = eps.entries().iter().map(|&e| q(e as i64, 1)).collect();
                prop_assert_eq!(back, linalg::diagonal(&target));
            }
        }
    }
}
