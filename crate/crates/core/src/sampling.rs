//! Seeded random germs for the property suites.
//!
//! Coefficients are drawn as `p/q` with `p` uniform in `-3..=3` and `q`
//! uniform in `1..=4`, independently for every monomial.

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::jetalgebra::{MultiIndex, TruncatedPolynomial};
use crate::normalform::{HypersurfaceGerm, Signature};
use crate::scalar::{Rational, Scalar};

/// Seeded source of random exact data.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `index` derived from `seed`; used to split a suite
    /// into parallel work items without changing its output.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Sampler { rng }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn rational(&mut self) -> Rational {
        let p = self.rng.gen_range(-3..=3);
        let q = self.rng.gen_range(1..=4);
        Rational::from_ratio(p, q)
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    pub fn rationals(&mut self, k: usize) -> Vec<Rational> {
        (0..k).map(|_| self.rational()).collect()
    }

    pub fn signature(&mut self, n: usize) -> Signature {
        Signature::new((0..n).map(|_| if self.rng.gen_bool(0.5) { 1 } else { -1 }).collect())
            .expect("nonempty signature")
    }

    pub fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())]
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Normal-form germ with every raw coefficient of degree `3..=order`
    /// random.
    pub fn germ_with(&mut self, signature: &Signature, order: u32) -> HypersurfaceGerm<Rational> {
        let n = signature.len();
        let mut f = TruncatedPolynomial::zero(n, order);
        for i in 0..n {
            f.add_term(MultiIndex::from_slots(n, &[i, i]), Rational::from_ratio(signature.get(i) as i64, 2));
        }
        for d in 3..=order {
            for m in MultiIndex::all_of_degree(n, d) {
                f.add_term(m, self.rational());
            }
        }
        HypersurfaceGerm::with_signature(f, signature).expect("random jet is in normal form")
    }

    /// Order-4 germ with a random mixed signature.
    pub fn germ(&mut self, n: usize) -> HypersurfaceGerm<Rational> {
        let sig = self.signature(n);
        self.germ_with(&sig, 4)
    }

    /// Random vector that is not null for `signature`.
    pub fn non_null_vector(&mut self, signature: &Signature) -> Vec<Rational> {
        loop {
            let v = self.rationals(signature.len());
            if !signature.inner(&v, &v).is_zero() {
                return v;
            }
        }
    }
}
