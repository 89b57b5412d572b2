//! Affine cubic form at the origin of a normal-form germ.
//!
//! Two routes: [`cubic_tensor_appendix`] evaluates the Blaschke normal and
//! induced connection from derivatives of `f`; [`cubic_tensor_closed`] uses
//! the closed formulas in `K`. Summation ranges in the closed formulas:
//!
//! * `C_sss = 2(n-1)/(n+2) K_sss - 6/(n+2) sum_{t != s} eps_s eps_t K_stt`
//! * `C_stt = 2(n+1)/(n+2) K_stt - 2 eps_s eps_t/(n+2) K_sss
//!   - 2 eps_t/(n+2) sum_{r not in {s, t}} eps_r K_srr`
//! * `C_str = 2 K_str` for distinct indices.

use std::collections::BTreeMap;

use crate::error::{MkitError, Result};
use crate::jetalgebra::{MultiIndex, TruncatedPolynomial};
use crate::linalg::{self, Matrix};
use crate::normalform::{HypersurfaceGerm, Signature};
use crate::scalar::Scalar;

const FLOAT_CHECK_TOL: f64 = 1e-9;

fn sorted3(i: usize, j: usize, k: usize) -> [usize; 3] {
    let mut a = [i, j, k];
    a.sort_unstable();
    a
}

/// Fully symmetric 3-tensor, stored on sorted index triples.
#[derive(Clone, Debug)]
pub struct CubicTensor<S> {
    n: usize,
    entries: BTreeMap<[usize; 3], S>,
}

impl<S: Scalar> PartialEq for CubicTensor<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries == other.entries
    }
}

impl<S: Scalar> CubicTensor<S> {
    pub fn zero(n: usize) -> Self {
        let mut entries = BTreeMap::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    entries.insert([i, j, k], S::zero());
                }
            }
        }
        CubicTensor { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> S {
        self.entries[&sorted3(i, j, k)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: S) {
        self.entries.insert(sorted3(i, j, k), v);
    }

    /// Sorted triples and their values.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize; 3], &S)> {
        self.entries.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries.values().all(|v| v.is_negligible(tol))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n && self.entries.iter().all(|(k, v)| (v.clone() - other.entries[k].clone()).is_negligible(tol))
    }

    /// `C(L., L., L.)`.
    pub fn pullback(&self, l: &Matrix<S>) -> CubicTensor<S> {
        let n = self.n;
        let mut out = CubicTensor::zero(n);
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let mut acc = S::zero();
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                acc = acc + self.get(i, j, k) * l[i][a].clone() * l[j][b].clone() * l[k][c].clone();
                            }
                        }
                    }
                    out.set(a, b, c, acc);
                }
            }
        }
        out
    }
}

/// Blaschke normal data at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeData<S> {
    /// Normal scale `phi(0)`, with `phi^{n+2} = |det D^2 f|`.
    pub phi0: S,
    pub grad_phi: Vec<S>,
    /// Tangential components of the affine normal.
    pub z: Vec<S>,
    pub h: Signature,
}

/// Determinant of a matrix of truncated polynomials by cofactor expansion.
fn poly_determinant<S: Scalar>(m: &[Vec<TruncatedPolynomial<S>>]) -> TruncatedPolynomial<S> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let nv = m[0][0].n_vars();
    let order = m[0][0].max_order();
    let mut acc = TruncatedPolynomial::zero(nv, order);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<TruncatedPolynomial<S>>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = entry * &poly_determinant(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Gradient of the normal scale at the origin, from
/// `(n+2) d phi = d(eps det D^2 f)` at a point where `eps det D^2 f = 1`.
fn grad_phi_from_determinant<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<(S, Vec<S>)> {
    let n = germ.n();
    let f3 = germ.f().with_max_order(3);
    let hess: Vec<Vec<TruncatedPolynomial<S>>> =
        (0..n).map(|i| (0..n).map(|j| f3.derivative(i).derivative(j).with_max_order(1)).collect()).collect();
    let det = poly_determinant(&hess);
    let eps = S::from_int(germ.signature().product() as i64);
    let normalized = det.scale(&eps);
    let value = normalized.constant_term();
    if !(value.clone() - S::one()).is_negligible(FLOAT_CHECK_TOL) {
        return Err(MkitError::NotNormalForm(format!("eps * det D^2 f(0) = {}, expected 1", value.show())));
    }
    let np2 = S::from_int(n as i64 + 2);
    let grad = (0..n).map(|s| normalized.coefficient(MultiIndex::unit(n, s).exponents()) / np2.clone()).collect();
    Ok((S::one(), grad))
}

/// `phi_s(0) = 2/(n+2) sum_t eps_t K_stt` (all `t`).
pub fn grad_phi_closed<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Vec<S> {
    let n = germ.n();
    let c = S::from_ratio(2, n as i64 + 2);
    (0..n).map(|s| (0..n).fold(S::zero(), |acc, t| acc + germ.eps(t) * germ.k(s, t, t)) * c.clone()).collect()
}

/// `Z_s = -2/(n+2) (K_sss + sum_{t != s} eps_s eps_t K_stt)`.
pub fn z_closed<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Vec<S> {
    let n = germ.n();
    let c = S::from_ratio(2, n as i64 + 2);
    (0..n)
        .map(|s| {
            let sum = (0..n)
                .filter(|&t| t != s)
                .fold(germ.k(s, s, s), |acc, t| acc + germ.eps(s) * germ.eps(t) * germ.k(s, t, t));
            -(c.clone() * sum)
        })
        .collect()
}

/// Normal scale and tangential normal components. The gradient comes from
/// differentiating the Hessian determinant and is checked against the closed
/// form; `Z` solves `D^2 f(0) Z = -grad phi` and is checked likewise.
pub fn blaschke_data<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<BlaschkeData<S>> {
    let n = germ.n();
    let (phi0, grad_phi) = grad_phi_from_determinant(germ)?;
    let closed = grad_phi_closed(germ);
    let scale = 1.0 + germ.cubic_magnitude();
    for (s, (a, b)) in grad_phi.iter().zip(&closed).enumerate() {
        if !(a.clone() - b.clone()).is_negligible(FLOAT_CHECK_TOL * scale) {
            return Err(MkitError::InternalMismatch(format!(
                "phi_{}(0): determinant route {}, closed form {}",
                s + 1,
                a.show(),
                b.show()
            )));
        }
    }
    let h: Matrix<S> = linalg::diagonal(&(0..n).map(|i| germ.eps(i)).collect::<Vec<_>>());
    let rhs: Vec<S> = grad_phi.iter().map(|g| -g.clone()).collect();
    let z = linalg::solve_vec(&h, &rhs)?;
    for (s, (a, b)) in z.iter().zip(z_closed(germ)).enumerate() {
        if !(a.clone() - b.clone()).is_negligible(FLOAT_CHECK_TOL * scale) {
            return Err(MkitError::InternalMismatch(format!(
                "Z_{}: solve {}, closed form {}",
                s + 1,
                a.show(),
                b.show()
            )));
        }
    }
    Ok(BlaschkeData { phi0, grad_phi, z, h: germ.signature().clone() })
}

/// `C_abc = d_c h_ab - h(nabla_c X_a, X_b) - h(X_a, nabla_c X_b)` at the origin,
/// with `h = D^2 f / phi`, `nabla_c X_a = -f_ca(0) sum_i Z_i X_i` and
/// `h(X_i, X_b) = f_ib(0)`.
pub fn cubic_tensor_appendix<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<CubicTensor<S>> {
    let n = germ.n();
    let bd = blaschke_data(germ)?;
    // Only derivatives up to third order at the origin enter.
    let f = germ.f().with_max_order(3);
    let d1: Vec<TruncatedPolynomial<S>> = (0..n).map(|i| f.derivative(i)).collect();
    let d2: Vec<Vec<TruncatedPolynomial<S>>> = d1.iter().map(|p| (0..n).map(|j| p.derivative(j)).collect()).collect();
    let d3: Vec<Vec<Vec<S>>> = d2
        .iter()
        .map(|row| row.iter().map(|p| (0..n).map(|c| p.derivative(c).constant_term()).collect()).collect())
        .collect();
    let d2: Vec<Vec<S>> = d2.iter().map(|row| row.iter().map(|p| p.constant_term()).collect()).collect();
    let f2 = |a: usize, b: usize| d2[a][b].clone();
    let f3 = |a: usize, b: usize, c: usize| d3[a][b][c].clone();
    let zx: Vec<S> = (0..n).map(|b| (0..n).fold(S::zero(), |acc, i| acc + bd.z[i].clone() * f2(i, b))).collect();
    // h(nabla_c X_a, X_b) = -f_ca sum_i Z_i f_ib
    let conn = |c: usize, a: usize, b: usize| -(f2(c, a) * zx[b].clone());
    let mut full = vec![vec![vec![S::zero(); n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let dh = (f3(a, b, c) * bd.phi0.clone() - f2(a, b) * bd.grad_phi[c].clone())
                    / (bd.phi0.clone() * bd.phi0.clone());
                full[a][b][c] = dh - conn(c, a, b) - conn(c, b, a);
            }
        }
    }
    let tol = FLOAT_CHECK_TOL * (1.0 + germ.cubic_magnitude());
    let mut out = CubicTensor::zero(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let s = sorted3(a, b, c);
                if !(full[a][b][c].clone() - full[s[0]][s[1]][s[2]].clone()).is_negligible(tol) {
                    return Err(MkitError::InternalMismatch(format!("cubic form is not symmetric at {:?}", [a, b, c])));
                }
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                out.set(a, b, c, full[a][b][c].clone());
            }
        }
    }
    Ok(out)
}

/// Closed formulas in `K`; see the module documentation for the ranges.
pub fn cubic_tensor_closed<S: Scalar>(germ: &HypersurfaceGerm<S>) -> CubicTensor<S> {
    let n = germ.n();
    let np2 = S::from_int(n as i64 + 2);
    let two = S::from_int(2);
    let e = |i: usize| germ.eps(i);
    let k = |i: usize, j: usize, l: usize| germ.k(i, j, l);
    let mut out = CubicTensor::zero(n);
    for s in 0..n {
        let sum = (0..n).filter(|&t| t != s).fold(S::zero(), |acc, t| acc + e(s) * e(t) * k(s, t, t));
        let v = S::from_int(2 * (n as i64 - 1)) / np2.clone() * k(s, s, s) - S::from_int(6) / np2.clone() * sum;
        out.set(s, s, s, v);
        for t in 0..n {
            if t == s {
                continue;
            }
            let sum = (0..n).filter(|&r| r != s && r != t).fold(S::zero(), |acc, r| acc + e(r) * k(s, r, r));
            let v = S::from_int(2 * (n as i64 + 1)) / np2.clone() * k(s, t, t)
                - two.clone() * e(s) * e(t) / np2.clone() * k(s, s, s)
                - two.clone() * e(t) / np2.clone() * sum;
            out.set(s, t, t, v);
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.set(a, b, c, two.clone() * k(a, b, c));
            }
        }
    }
    out
}

/// `eps_s C_sss + sum_{t != s} eps_t C_stt` for every `s`.
pub fn apolarity_residual<S: Scalar>(c: &CubicTensor<S>, eps: &Signature) -> Result<Vec<S>> {
    let n = c.n();
    if eps.len() != n {
        return Err(MkitError::Dimension(format!("signature has length {}, tensor n = {n}", eps.len())));
    }
    Ok((0..n)
        .map(|s| {
            (0..n)
                .filter(|&t| t != s)
                .fold(eps.scalar::<S>(s) * c.get(s, s, s), |acc, t| acc + eps.scalar::<S>(t) * c.get(s, t, t))
        })
        .collect())
}

/// `sum_{ijk} C_ijk u_i v_j w_k` over all ordered index triples.
pub fn cubic_evaluate<S: Scalar>(c: &CubicTensor<S>, u: &[S], v: &[S], w: &[S]) -> Result<S> {
    let n = c.n();
    if u.len() != n || v.len() != n || w.len() != n {
        return Err(MkitError::Dimension(format!("cubic form needs vectors of length {n}")));
    }
    let mut acc = S::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                acc = acc + c.get(i, j, k) * u[i].clone() * v[j].clone() * w[k].clone();
            }
        }
    }
    Ok(acc)
}

/// Binary cubic `C(v, v, v)` of a surface tensor as `[v1^3, v1^2 v2, v1 v2^2, v2^3]`
/// coefficients.
pub fn binary_cubic<S: Scalar>(c: &CubicTensor<S>) -> Result<[S; 4]> {
    if c.n() != 2 {
        return Err(MkitError::Dimension("binary cubic needs n = 2".into()));
    }
    let three = S::from_int(3);
    Ok([c.get(0, 0, 0), three.clone() * c.get(0, 0, 1), three * c.get(0, 1, 1), c.get(1, 1, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::align_direction;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn sig(e: &[i8]) -> Signature {
        Signature::new(e.to_vec()).unwrap()
    }

    fn mixed_germ() -> HypersurfaceGerm<Rational> {
        HypersurfaceGerm::builder(sig(&[1, 1, -1, -1]), 4)
            .cubic([0, 0, 0], q(1, 2))
            .cubic([0, 1, 1], q(-3, 1))
            .cubic([0, 2, 2], q(2, 3))
            .cubic([1, 2, 2], q(1, 1))
            .cubic([1, 1, 3], q(-1, 4))
            .cubic([0, 1, 2], q(5, 1))
            .cubic([1, 2, 3], q(-2, 1))
            .cubic([3, 3, 3], q(3, 1))
            .cubic([0, 0, 3], q(7, 4))
            .build()
            .unwrap()
    }

    #[test]
    fn blaschke_examples() {
        let g = HypersurfaceGerm::<Rational>::builder(sig(&[1, 1]), 4).build().unwrap();
        let bd = blaschke_data(&g).unwrap();
        assert_eq!(bd.grad_phi, vec![q(0, 1); 2]);
        assert_eq!(bd.z, vec![q(0, 1); 2]);
        assert_eq!(bd.phi0, q(1, 1));

        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4).cubic([0, 0, 0], q(1, 1)).build().unwrap();
        assert_eq!(blaschke_data(&g).unwrap().z, vec![q(-1, 2), q(0, 1)]);

        let g = HypersurfaceGerm::builder(sig(&[1, 1, 1]), 4).cubic([0, 1, 1], q(1, 1)).build().unwrap();
        assert_eq!(blaschke_data(&g).unwrap().z[0], q(-2, 5));
    }

    #[test]
    fn appendix_examples() {
        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4).cubic([0, 0, 0], q(2, 1)).build().unwrap();
        let c = cubic_tensor_appendix(&g).unwrap();
        assert_eq!(c.get(0, 0, 0), q(1, 1));
        assert_eq!(c.get(0, 1, 1), q(-1, 1));
        assert_eq!(c, cubic_tensor_closed(&g));
    }

    #[test]
    fn closed_examples() {
        let g = HypersurfaceGerm::builder(sig(&[1, -1]), 4)
            .cubic([0, 0, 0], q(2, 1))
            .cubic([0, 1, 1], q(1, 3))
            .build()
            .unwrap();
        // C111 = K111/2 - (3 eps/2) K122 with eps = -1.
        assert_eq!(cubic_tensor_closed(&g).get(0, 0, 0), q(3, 2));

        let g = HypersurfaceGerm::builder(sig(&[1, 1, 1]), 4).cubic([0, 1, 2], q(5, 1)).build().unwrap();
        assert_eq!(cubic_tensor_closed(&g).get(2, 0, 1), q(10, 1));
    }

    #[test]
    fn routes_agree_and_are_apolar() {
        let g = mixed_germ();
        let a = cubic_tensor_appendix(&g).unwrap();
        let c = cubic_tensor_closed(&g);
        assert_eq!(a, c);
        assert_eq!(apolarity_residual(&a, g.signature()).unwrap(), vec![q(0, 1); 4]);
        let f = cubic_tensor_appendix(&g.to_float()).unwrap();
        assert!(f.approx_eq(&cubic_tensor_closed(&g.to_float()), 1e-12));
    }

    #[test]
    fn residual_of_non_apolar_tensor() {
        let mut c = CubicTensor::zero(2);
        c.set(0, 0, 0, q(1, 1));
        assert_eq!(apolarity_residual(&c, &sig(&[1, 1])).unwrap(), vec![q(1, 1), q(0, 1)]);
        assert_eq!(apolarity_residual(&CubicTensor::<Rational>::zero(3), &sig(&[1, 1, 1])).unwrap(), vec![q(0, 1); 3]);
    }

    #[test]
    fn evaluate_examples() {
        let mut c = CubicTensor::zero(2);
        c.set(0, 0, 0, q(1, 1));
        let e1 = [q(1, 1), q(0, 1)];
        assert_eq!(cubic_evaluate(&c, &e1, &e1, &e1).unwrap(), q(1, 1));

        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4).cubic([0, 0, 0], q(1, 1)).build().unwrap();
        let c = cubic_tensor_closed(&g);
        let v = [q(2, 1), q(3, 1)];
        // 1/2 v1^3 - 3/2 v1 v2^2
        assert_eq!(cubic_evaluate(&c, &v, &v, &v).unwrap(), q(4, 1) - q(27, 1));
        assert_eq!(binary_cubic(&c).unwrap(), [q(1, 2), q(0, 1), q(-3, 2), q(0, 1)]);
        assert!(cubic_evaluate(&c, &v, &v, &[q(1, 1)]).is_err());
    }

    #[test]
    fn frame_covariance_on_pythagorean_rotation() {
        let g = HypersurfaceGerm::builder(sig(&[1, 1, -1]), 4)
            .cubic([0, 0, 0], q(1, 1))
            .cubic([0, 1, 2], q(-2, 1))
            .cubic([1, 1, 2], q(1, 3))
            .cubic([0, 2, 2], q(3, 2))
            .build()
            .unwrap();
        let (rot, frame) = align_direction(&g, &[q(3, 5), q(4, 5), q(0, 1)]).unwrap();
        let c = cubic_tensor_appendix(&g).unwrap();
        assert_eq!(cubic_tensor_appendix(&rot).unwrap(), c.pullback(&frame.linear));
    }
}
