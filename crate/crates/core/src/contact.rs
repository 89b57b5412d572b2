//! Contact functions `phi(x) = g(x, f(x))` between a germ and a quadric.
//!
//! Named coefficients follow the monomial convention: `b_{1st}` for `s != t`
//! is the coefficient of the monomial `x_1 x_s x_t`, so each unordered pair
//! is counted once.

use crate::error::{MkitError, Result};
use crate::jetalgebra::{MultiIndex, TruncatedPolynomial};
use crate::moutard::{moutard_pencil, Quadric};
use crate::normalform::HypersurfaceGerm;
use crate::scalar::Scalar;

const FLOAT_CHECK_TOL: f64 = 1e-9;

/// Contact function of a germ with a quadric, truncated.
#[derive(Clone, Debug)]
pub struct ContactJet<S> {
    phi: TruncatedPolynomial<S>,
}

impl<S: Scalar> ContactJet<S> {
    pub fn phi(&self) -> &TruncatedPolynomial<S> {
        &self.phi
    }

    pub fn n(&self) -> usize {
        self.phi.n_vars()
    }

    fn mono(&self, slots: &[usize]) -> S {
        self.phi.coefficient(MultiIndex::from_slots(self.n(), slots).exponents())
    }

    /// `q` with `phi_3 = x_1 q(x) + p_3(x_2, ..., x_n)`.
    pub fn q(&self) -> TruncatedPolynomial<S> {
        let mut out = TruncatedPolynomial::zero(self.n(), 2);
        for (k, v) in self.phi.jet_part(3).terms() {
            let e = k.exponents();
            if e[0] > 0 {
                let mut e = e.to_vec();
                e[0] -= 1;
                out.add_term(MultiIndex::new(e), v.clone());
            }
        }
        out
    }

    /// The part of `phi_3` free of `x_1`.
    pub fn p3(&self) -> TruncatedPolynomial<S> {
        let mut out = TruncatedPolynomial::zero(self.n(), 3);
        for (k, v) in self.phi.jet_part(3).terms() {
            if k.exponents()[0] == 0 {
                out.add_term(k.clone(), v.clone());
            }
        }
        out
    }

    pub fn b111(&self) -> S {
        self.mono(&[0, 0, 0])
    }

    pub fn b11(&self, s: usize) -> S {
        self.mono(&[0, 0, s])
    }

    pub fn b1ss(&self, s: usize) -> S {
        self.mono(&[0, s, s])
    }

    pub fn b1st(&self, s: usize, t: usize) -> S {
        self.mono(&[0, s, t])
    }

    pub fn b1111(&self) -> S {
        self.mono(&[0, 0, 0, 0])
    }

    /// Coefficient of `x_2^3`, surfaces only.
    pub fn b222(&self) -> Option<S> {
        (self.n() == 2).then(|| self.mono(&[1, 1, 1]))
    }

    /// Whether the constant, linear and quadratic parts of `phi` vanish.
    pub fn two_jet_vanishes(&self, tol: f64) -> bool {
        self.phi.terms().all(|(k, v)| k.degree() > 2 || v.is_negligible(tol))
    }

    /// `d phi_3 / d x_1 == 0`.
    pub fn cubic_free_of_x1(&self, tol: f64) -> bool {
        self.phi.jet_part(3).derivative(0).terms().all(|(_, v)| v.is_negligible(tol))
    }
}

/// `phi = Q(x, f(x))` truncated at `order` (at most the germ's order).
pub fn contact_function<S: Scalar>(
    germ: &HypersurfaceGerm<S>,
    quadric: &Quadric<S>,
    order: u32,
) -> Result<ContactJet<S>> {
    let n = germ.n();
    if quadric.n_vars() != n + 1 {
        return Err(MkitError::Dimension(format!("quadric has {} variables, germ needs {}", quadric.n_vars(), n + 1)));
    }
    let order = order.min(germ.order());
    let mut subs: Vec<TruncatedPolynomial<S>> = (0..n).map(|i| TruncatedPolynomial::var(n, order, i)).collect();
    subs.push(germ.f().with_max_order(order));
    let phi = quadric.poly().compose(&subs, false)?;
    Ok(ContactJet { phi })
}

/// Named contact coefficients along the x1-axis.
#[derive(Clone, Debug, PartialEq)]
pub struct BCoefficients<S> {
    pub n: usize,
    pub b111: S,
    /// `b_{11s}` for `s = 2..n` (index 0 is `s = 2`).
    pub b11: Vec<S>,
    /// `b_{1ss}` for `s = 2..n`.
    pub b1ss: Vec<S>,
    /// `((s, t), b_{1st})` for `2 <= s < t <= n`, 0-based indices.
    pub b1st: Vec<((usize, usize), S)>,
    pub b1111: S,
}

impl<S: Scalar> BCoefficients<S> {
    /// Every coefficient of `q`.
    pub fn q_coefficients(&self) -> impl Iterator<Item = &S> {
        self.b1ss.iter().chain(self.b1st.iter().map(|(_, v)| v))
    }

    /// Euclidean norm of the `q`-coefficients.
    pub fn q_norm(&self) -> f64 {
        self.q_coefficients().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn q_vanishes(&self, tol: f64) -> bool {
        self.q_coefficients().all(|v| v.is_negligible(tol))
    }

    /// First coefficient that differs; on floats relative to `scale`.
    fn first_mismatch(&self, other: &Self, scale: f64) -> Option<String> {
        let pairs = std::iter::once(("b111".to_string(), &self.b111, &other.b111))
            .chain(self.b11.iter().zip(&other.b11).enumerate().map(|(i, (a, b))| (format!("b11{}", i + 2), a, b)))
            .chain(self.b1ss.iter().zip(&other.b1ss).enumerate().map(|(i, (a, b))| (format!("b1{0}{0}", i + 2), a, b)))
            .chain(
                self.b1st.iter().zip(&other.b1st).map(|(((s, t), a), (_, b))| (format!("b1{}{}", s + 1, t + 1), a, b)),
            )
            .chain(std::iter::once(("b1111".to_string(), &self.b1111, &other.b1111)));
        for (name, a, b) in pairs {
            let tol = FLOAT_CHECK_TOL * (scale + a.magnitude().max(b.magnitude()));
            if !(a.clone() - b.clone()).is_negligible(tol) {
                return Some(format!("{name}: extracted {}, closed form {}", a.show(), b.show()));
            }
        }
        None
    }
}

/// Read the named coefficients off a contact jet.
pub fn extract_b<S: Scalar>(cj: &ContactJet<S>) -> BCoefficients<S> {
    let n = cj.n();
    let mut b1st = Vec::new();
    for s in 1..n {
        for t in s + 1..n {
            b1st.push(((s, t), cj.b1st(s, t)));
        }
    }
    BCoefficients {
        n,
        b111: cj.b111(),
        b11: (1..n).map(|s| cj.b11(s)).collect(),
        b1ss: (1..n).map(|s| cj.b1ss(s)).collect(),
        b1st,
        b1111: cj.b1111(),
    }
}

/// Closed forms: `b_111 = b_11s = 0`, `b_1ss = eps_1 eps_s K_111 / 3 - K_1ss`,
/// `b_1st = -2 K_1st`, `b_1111 = -H_1111/12 + 2/9 eps_1 K_111^2 + beta/4`.
pub fn closed_b<S: Scalar>(germ: &HypersurfaceGerm<S>, beta: &S) -> BCoefficients<S> {
    let n = germ.n();
    let e1 = germ.eps(0);
    let k111 = germ.k(0, 0, 0);
    let mut b1st = Vec::new();
    for s in 1..n {
        for t in s + 1..n {
            b1st.push(((s, t), -S::from_int(2) * germ.k(0, s, t)));
        }
    }
    BCoefficients {
        n,
        b111: S::zero(),
        b11: vec![S::zero(); n - 1],
        b1ss: (1..n).map(|s| e1.clone() * germ.eps(s) * k111.clone() / S::from_int(3) - germ.k(0, s, s)).collect(),
        b1st,
        b1111: -germ.h4(0, 0, 0, 0) / S::from_int(12)
            + S::from_ratio(2, 9) * e1 * k111.clone() * k111
            + beta.clone() / S::from_int(4),
    }
}

/// Named coefficients of a contact jet against `moutard_pencil(germ).member(beta)`,
/// cross-checked against the closed forms.
pub fn b_coefficients<S: Scalar>(germ: &HypersurfaceGerm<S>, beta: &S, cj: &ContactJet<S>) -> Result<BCoefficients<S>> {
    let got = extract_b(cj);
    let want = closed_b(germ, beta);
    // Closed forms combine products of two coefficients of the germ.
    let m = 1.0 + germ.f().max_abs() + beta.magnitude();
    if let Some(msg) = got.first_mismatch(&want, m * m) {
        return Err(MkitError::InternalMismatch(msg));
    }
    Ok(got)
}

/// Contact function against the pencil member `beta` and its coefficients.
pub fn pencil_contact<S: Scalar>(germ: &HypersurfaceGerm<S>, beta: &S) -> Result<(ContactJet<S>, BCoefficients<S>)> {
    let member = moutard_pencil(germ).member(beta);
    let cj = contact_function(germ, &member, 4)?;
    let b = b_coefficients(germ, beta, &cj)?;
    Ok((cj, b))
}

/// Largest `m` such that the two univariate graphs agree through degree `m`,
/// capped at the common truncation order (a return value equal to that order
/// means "at least"). Agreement is exact on rationals and within `tol` on
/// floats.
pub fn planar_contact_order_tol<S: Scalar>(c1: &TruncatedPolynomial<S>, c2: &TruncatedPolynomial<S>, tol: f64) -> u32 {
    let cap = c1.max_order().min(c2.max_order());
    for d in 0..=cap {
        if !(c1.coefficient(&[d]) - c2.coefficient(&[d])).is_negligible(tol) {
            return d.saturating_sub(1);
        }
    }
    cap
}

pub fn planar_contact_order<S: Scalar>(c1: &TruncatedPolynomial<S>, c2: &TruncatedPolynomial<S>) -> u32 {
    planar_contact_order_tol(c1, c2, FLOAT_CHECK_TOL)
}

/// E6/E7 verdict for a surface along a Darboux direction.
#[derive(Clone, Debug, PartialEq)]
pub enum ContactClass<S> {
    E6 { c: S, quartic: S },
    E7 { c: S, h1112: S },
    Degenerate { reason: String },
}

impl<S> ContactClass<S> {
    pub fn name(&self) -> &'static str {
        match self {
            ContactClass::E6 { .. } => "E6",
            ContactClass::E7 { .. } => "E7",
            ContactClass::Degenerate { .. } => "Degenerate",
        }
    }
}

/// Result of eliminating `u1^2 u2^2`, `u1 u2^3` and `u2^4` from
/// `psi = -phi` by `x_2 = u_2 + alpha u_1^2 + beta' u_1 u_2 + gamma u_2^2`.
#[derive(Clone, Debug)]
pub struct ReducedQuartic<S> {
    pub alpha: S,
    pub beta_prime: S,
    pub gamma: S,
    /// `psi` after the substitution, through degree 4.
    pub reduced: TruncatedPolynomial<S>,
    /// Coefficient of `u_2^3`.
    pub c: S,
    /// Coefficient of `u_1^3 u_2`, equal to `H_1112 / 3`.
    pub u1cubed_u2: S,
    /// Coefficient of `u_1^4`, equal to `(H_1111 - 3 beta) / 12`.
    pub u1_quartic: S,
}

/// `c = (K_222 - 3 eps_1 eps_2 K_112) / 3`: the `u_2^3` coefficient of
/// `psi = surface - quadric` against any member of the pencil.
pub fn cubic_witness<S: Scalar>(germ: &HypersurfaceGerm<S>) -> S {
    (germ.k(1, 1, 1) - S::from_int(3) * germ.eps(0) * germ.eps(1) * germ.k(0, 0, 1)) / S::from_int(3)
}

/// Contact type of `moutard_pencil(germ).member(beta)` with a surface germ
/// whose x1-axis is a Darboux direction (`K_111 = K_122 = 0`).
///
/// The reduction needs `c != 0`; when `c = 0` the verdict is `Degenerate`
/// and no reduced form is returned.
pub fn classify_contact_surface<S: Scalar>(
    germ: &HypersurfaceGerm<S>,
    beta: &S,
) -> Result<(ContactClass<S>, Option<ReducedQuartic<S>>)> {
    if germ.n() != 2 {
        return Err(MkitError::Dimension("contact classification is defined for surfaces".into()));
    }
    let tol = FLOAT_CHECK_TOL * (1.0 + germ.f().max_abs());
    let (k111, k122) = (germ.k(0, 0, 0), germ.k(0, 1, 1));
    if !k111.is_negligible(tol) || !k122.is_negligible(tol) {
        return Err(MkitError::NotDarbouxDirection(format!("K111 = {}, K122 = {}", k111.show(), k122.show())));
    }
    let member = moutard_pencil(germ).member(beta);
    let cj = contact_function(germ, &member, 4)?;
    let psi = -cj.phi();

    let c = psi.coefficient(&[0, 3]);
    let h1112 = germ.h4(0, 0, 0, 1);
    let quartic_closed = (germ.h4(0, 0, 0, 0) - S::from_int(3) * beta.clone()) / S::from_int(12);
    let checks = [
        ("u2^3", c.clone(), cubic_witness(germ)),
        ("u1^3 u2", psi.coefficient(&[3, 1]), h1112.clone() / S::from_int(3)),
        ("u1^4", psi.coefficient(&[4, 0]), quartic_closed.clone()),
    ];
    for (name, got, want) in checks {
        if !(got.clone() - want.clone()).is_negligible(tol) {
            return Err(MkitError::InternalMismatch(format!(
                "{name} coefficient {}, expected {}",
                got.show(),
                want.show()
            )));
        }
    }
    for (k, v) in psi.jet_part(3).terms() {
        if k.exponents() != [0, 3] && !v.is_negligible(tol) {
            return Err(MkitError::InternalMismatch(format!("cubic part of psi has a {:?} term", k.exponents())));
        }
    }

    if c.is_negligible(tol) {
        return Ok((ContactClass::Degenerate { reason: "c = 0".into() }, None));
    }
    let three_c = S::from_int(3) * c.clone();
    let alpha = -psi.coefficient(&[2, 2]) / three_c.clone();
    let beta_prime = -psi.coefficient(&[1, 3]) / three_c.clone();
    let gamma = -psi.coefficient(&[0, 4]) / three_c;
    let u1 = TruncatedPolynomial::var(2, 4, 0);
    let x2 = TruncatedPolynomial::from_terms(
        2,
        4,
        [
            (vec![0, 1], S::one()),
            (vec![2, 0], alpha.clone()),
            (vec![1, 1], beta_prime.clone()),
            (vec![0, 2], gamma.clone()),
        ],
    );
    let reduced = psi.compose(&[u1, x2], false)?;
    let allowed: [&[u32]; 3] = [&[0, 3], &[3, 1], &[4, 0]];
    for (k, v) in reduced.terms() {
        if !allowed.contains(&k.exponents()) && !v.is_negligible(tol) {
            return Err(MkitError::InternalMismatch(format!(
                "reduction left a {:?} term with coefficient {}",
                k.exponents(),
                v.show()
            )));
        }
    }
    let rq = ReducedQuartic {
        alpha,
        beta_prime,
        gamma,
        c: reduced.coefficient(&[0, 3]),
        u1cubed_u2: reduced.coefficient(&[3, 1]),
        u1_quartic: reduced.coefficient(&[4, 0]),
        reduced,
    };

    let class = if !rq.u1_quartic.is_negligible(tol) {
        ContactClass::E6 { c, quartic: rq.u1_quartic.clone() }
    } else if !h1112.is_negligible(tol) {
        ContactClass::E7 { c, h1112 }
    } else {
        ContactClass::Degenerate { reason: "H1112 = 0 at beta = H1111/3".into() }
    };
    Ok((class, Some(rq)))
}
