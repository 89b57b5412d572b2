//! File formats: germ documents in, JSON reports and CSV tables out.
//!
//! A germ document lists raw polynomial coefficients by exponent vector:
//!
//! ```json
//! {"n": 2, "order": 4, "backend": "exact", "signature": [1, 1],
//!  "coefficients": [{"index": [2, 0], "value": "1/2"},
//!                   {"index": [0, 2], "value": "1/2"},
//!                   {"index": [3, 0], "value": "1/3"}]}
//! ```
//!
//! Values are `"p/q"` strings or decimals. The cubic tensor entry of a
//! monomial is `3 * coefficient / multinomial`, the quartic one
//! `12 * coefficient / multinomial`.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::contact::{BCoefficients, ContactClass, ContactJet, ReducedQuartic};
use crate::cubic::CubicTensor;
use crate::darboux::{DarbouxReport, LocusScanResult, PointOutcome};
use crate::error::{MkitError, Result};
use crate::jetalgebra::{AnyPoly, MultiIndex, TruncatedPolynomial};
use crate::moutard::Quadric;
use crate::normalform::{FrameChange, HypersurfaceGerm, Signature};
use crate::scalar::{scalar_from_json, Backend, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub index: Vec<u32>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermDocument {
    pub n: usize,
    pub order: u32,
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
    pub coefficients: Vec<CoefficientEntry>,
}

impl GermDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: GermDocument = serde_json::from_str(text).map_err(|e| MkitError::Parse(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(MkitError::InvalidInput("n must be positive".into()));
        }
        if let Some(sig) = &self.signature {
            if sig.len() != self.n {
                return Err(MkitError::Dimension(format!("signature has {} entries, n = {}", sig.len(), self.n)));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.coefficients {
            if c.index.len() != self.n {
                return Err(MkitError::Dimension(format!("index {:?} has wrong length for n = {}", c.index, self.n)));
            }
            let deg: u32 = c.index.iter().sum();
            if deg > self.order {
                return Err(MkitError::InvalidInput(format!("index {:?} exceeds order {}", c.index, self.order)));
            }
            if !seen.insert(c.index.clone()) {
                return Err(MkitError::InvalidInput(format!("index {:?} listed twice", c.index)));
            }
        }
        Ok(())
    }

    pub fn polynomial<S: Scalar>(&self) -> Result<TruncatedPolynomial<S>> {
        self.validate()?;
        let mut p = TruncatedPolynomial::zero(self.n, self.order);
        for c in &self.coefficients {
            let v: S = scalar_from_json(&c.value)?;
            p.add_term(MultiIndex::new(c.index.clone()), v);
        }
        Ok(p)
    }

    pub fn any_polynomial(&self) -> Result<AnyPoly> {
        Ok(match self.backend {
            Backend::Exact => AnyPoly::Exact(self.polynomial::<Rational>()?),
            Backend::Float => AnyPoly::Float(self.polynomial::<f64>()?),
        })
    }

    /// The document read as a normal-form germ; the signature is checked
    /// against the quadratic part when given.
    pub fn germ<S: Scalar>(&self) -> Result<HypersurfaceGerm<S>> {
        let f = self.polynomial::<S>()?;
        match &self.signature {
            Some(sig) => HypersurfaceGerm::with_signature(f, sig),
            None => HypersurfaceGerm::from_jet(f),
        }
    }

    pub fn from_polynomial<S: Scalar>(p: &TruncatedPolynomial<S>, signature: Option<&Signature>) -> Self {
        GermDocument {
            n: p.n_vars(),
            order: p.max_order(),
            backend: S::BACKEND,
            signature: signature.cloned(),
            coefficients: p
                .terms()
                .map(|(k, v)| CoefficientEntry { index: k.exponents().to_vec(), value: v.to_json() })
                .collect(),
        }
    }

    pub fn from_germ<S: Scalar>(g: &HypersurfaceGerm<S>) -> Self {
        Self::from_polynomial(g.f(), Some(g.signature()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Notes on conventions attached to reports unless disabled.
pub const CONVENTION_NOTES: [&str; 4] = [
    "E6/E7 strata are decided on the u1^4 coefficient (H1111 - 3 beta)/12 of the reduced quartic",
    "the u2^3 witness is c = (K222 - 3 eps1 eps2 K112)/3, the u2^3 coefficient of psi = -phi",
    "b_1st is the coefficient of the monomial x1 xs xt (s < t), equal to -2 K1st",
    "closed cubic-form sums exclude the fixed indices: tau != sigma in C_sss, rho not in {sigma, tau} in C_stt",
];

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    pub results: Value,
    pub warnings: Vec<String>,
    pub exit_status: i32,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn poly_json<S: Scalar>(p: &TruncatedPolynomial<S>) -> Value {
    Value::Array(p.terms().map(|(k, v)| json!({"index": k.exponents(), "value": v.to_json()})).collect())
}

fn vec_json<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| x.to_json()).collect())
}

fn matrix_json<S: Scalar>(m: &[Vec<S>]) -> Value {
    Value::Array(m.iter().map(|r| vec_json(r)).collect())
}

/// Raw coefficients of degrees 3 and 4 next to their tensor entries.
pub fn germ_json<S: Scalar>(g: &HypersurfaceGerm<S>) -> Value {
    let mut cubic = Vec::new();
    let mut quartic = Vec::new();
    for (k, v) in g.f().terms() {
        let deg = k.degree();
        if deg != 3 && deg != 4 {
            continue;
        }
        let slots: Vec<usize> =
            k.exponents().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect();
        let factor = S::from_int(if deg == 3 { 3 } else { 12 }) / S::from_int(k.multinomial() as i64);
        let entry = json!({"index": k.exponents(), "slots": slots, "raw": v.to_json(), "tensor": (v.clone() * factor).to_json()});
        if deg == 3 {
            cubic.push(entry)
        } else {
            quartic.push(entry)
        }
    }
    json!({
        "n": g.n(),
        "order": g.order(),
        "signature": g.signature().entries(),
        "coefficients": poly_json(g.f()),
        "K": cubic,
        "H": quartic,
    })
}

pub fn frame_json<S: Scalar>(fr: &FrameChange<S>) -> Value {
    json!({
        "origin": vec_json(&fr.origin),
        "height": fr.height.to_json(),
        "linear": matrix_json(&fr.linear),
        "shear": vec_json(&fr.shear),
        "identity": fr.is_identity(),
    })
}

pub fn quadric_json<S: Scalar>(q: &Quadric<S>) -> Value {
    json!({
        "polynomial": poly_json(q.poly()),
        "display": q.to_string(),
        "yy_coefficient": q.yy_coefficient().to_json(),
    })
}

pub fn b_json<S: Scalar>(b: &BCoefficients<S>) -> Value {
    json!({
        "b111": b.b111.to_json(),
        "b11s": b.b11.iter().enumerate().map(|(i, v)| json!({"s": i + 1, "value": v.to_json()})).collect::<Vec<_>>(),
        "b1ss": b.b1ss.iter().enumerate().map(|(i, v)| json!({"s": i + 1, "value": v.to_json()})).collect::<Vec<_>>(),
        "b1st": b.b1st.iter().map(|((s, t), v)| json!({"s": s, "t": t, "value": v.to_json()})).collect::<Vec<_>>(),
        "b1111": b.b1111.to_json(),
        "q_norm": b.q_norm(),
    })
}

pub fn contact_jet_json<S: Scalar>(cj: &ContactJet<S>) -> Value {
    json!({
        "phi": poly_json(cj.phi()),
        "q": poly_json(&cj.q()),
        "p3": poly_json(&cj.p3()),
        "b222": cj.b222().map(|v| v.to_json()),
    })
}

pub fn cubic_json<S: Scalar>(c: &CubicTensor<S>) -> Value {
    Value::Array(c.entries().map(|(k, v)| json!({"index": k, "value": v.to_json()})).collect())
}

pub fn class_json<S: Scalar>(class: &ContactClass<S>, reduced: Option<&ReducedQuartic<S>>) -> Value {
    let witness = match class {
        ContactClass::E6 { c, quartic } => json!({"c": c.to_json(), "u1_quartic": quartic.to_json()}),
        ContactClass::E7 { c, h1112 } => json!({"c": c.to_json(), "H1112": h1112.to_json()}),
        ContactClass::Degenerate { reason } => json!({"reason": reason}),
    };
    json!({
        "class": class.name(),
        "witness": witness,
        "reduction": reduced.map(|r| json!({
            "alpha": r.alpha.to_json(),
            "beta_prime": r.beta_prime.to_json(),
            "gamma": r.gamma.to_json(),
            "c": r.c.to_json(),
            "u1cubed_u2": r.u1cubed_u2.to_json(),
            "u1_quartic": r.u1_quartic.to_json(),
            "reduced": poly_json(&r.reduced),
        })),
    })
}

pub fn darboux_json<S: Scalar>(r: &DarbouxReport<S>) -> Value {
    json!({
        "direction": vec_json(&r.direction),
        "b": b_json(&r.b),
        "c111": r.c111.to_json(),
        "c_slice": r.c_slice.iter().map(|((s, t), v)| json!({"s": s, "t": t, "value": v.to_json()})).collect::<Vec<_>>(),
        "verdict_b": r.verdict_b,
        "verdict_c": r.verdict_c,
        "agreement": r.agreement,
        "cubic_free_of_x1": r.cubic_free_of_x1,
        "q_norm": r.q_norm,
        "c_norm": r.c_norm,
    })
}

/// Writes the scan table: point coordinates, best ambient direction, `q`
/// norm and verdict. Degenerate points get empty direction cells and the
/// verdict `degenerate`.
pub fn write_scan_csv<W: Write>(scan: &LocusScanResult, out: W) -> Result<()> {
    let io = |e: csv::Error| MkitError::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let n = scan.n;
    let mut header: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    header.extend((1..=n).map(|i| format!("v{i}")));
    header.push("q_norm".into());
    header.push("verdict".into());
    w.write_record(&header).map_err(io)?;
    for p in &scan.points {
        let mut row: Vec<String> = p.point.iter().map(|x| x.to_string()).collect();
        match &p.outcome {
            PointOutcome::Degenerate { .. } => {
                row.extend(std::iter::repeat_n(String::new(), n + 1));
                row.push("degenerate".into());
            }
            PointOutcome::Evaluated { best_direction_ambient, best_q_norm, verdict, .. } => {
                row.extend(best_direction_ambient.iter().map(|x| x.to_string()));
                row.push(best_q_norm.to_string());
                row.push(verdict.to_string());
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| MkitError::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}
