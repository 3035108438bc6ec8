//! Arithmetic in the truncated Witt ring `W_N = (Z/p^N)[λ]`, `λ² = ε`.
//!
//! `ε` is the Teichmüller lift of a quadratic nonresidue mod `p`, so the ring
//! is `W(F_{p²}) / p^N` and its Frobenius acts by `λ ↦ −λ`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A valuation that is either known exactly or only bounded below by a
/// truncation limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Exact(u64),
    AtLeast(u64),
}

impl Valuation {
    pub fn exact(self) -> Option<u64> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn bound(self) -> u64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Least quadratic nonresidue mod an odd prime.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&e| pow_mod(e, (p - 1) / 2, p) == p - 1).unwrap_or(0)
}

/// Element `a + bλ` of `W_N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WittScalar {
    pub a: u64,
    pub b: u64,
}

impl WittScalar {
    pub const ZERO: WittScalar = WittScalar { a: 0, b: 0 };

    pub fn new(a: u64, b: u64) -> Self {
        WittScalar { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

/// The ring context: prime, precision and the nonresidue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WittRing {
    p: u64,
    n: u32,
    modulus: u64,
    eps_res: u64,
    eps: u64,
}

impl WittRing {
    pub fn new(p: u64, n: u32, eps_res: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::Config("precision N must be positive".into()));
        }
        let modulus = (p as u128).checked_pow(n).filter(|&m| m < (1u128 << 62));
        let modulus = modulus.ok_or_else(|| Error::Config(format!("p^N too large: {p}^{n}")))? as u64;
        let eps_res = eps_res % p;
        if pow_mod(eps_res, (p - 1) / 2, p) != p - 1 {
            return Err(Error::Config(format!("eps = {eps_res} is not a nonresidue mod {p}")));
        }
        let mut ring = WittRing { p, n, modulus, eps_res, eps: 0 };
        ring.eps = ring.teichmuller_int(eps_res);
        Ok(ring)
    }

    /// Ring with the least nonresidue as `eps`.
    pub fn auto(p: u64, n: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        Self::new(p, n, least_nonresidue(p))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn eps_residue(&self) -> u64 {
        self.eps_res
    }
    /// Teichmüller lift of the nonresidue, i.e. `λ²`.
    pub fn eps(&self) -> u64 {
        self.eps
    }

    /// Same prime and nonresidue, different precision.
    pub fn with_precision(&self, n: u32) -> Result<Self> {
        WittRing::new(self.p, n, self.eps_res)
    }

    /// The residue field `F_{p²}` viewed as `W_1`.
    pub fn residue_ring(&self) -> Self {
        WittRing::new(self.p, 1, self.eps_res).expect("valid residue ring")
    }

    fn teichmuller_int(&self, u: u64) -> u64 {
        let mut t = u % self.p;
        loop {
            let next = pow_mod(t, self.p, self.modulus);
            if next == t {
                return t;
            }
            t = next;
        }
    }

    pub fn teichmuller(&self, u: u64) -> WittScalar {
        WittScalar::new(self.teichmuller_int(u), 0)
    }

    pub fn zero(&self) -> WittScalar {
        WittScalar::ZERO
    }
    pub fn one(&self) -> WittScalar {
        WittScalar::new(1 % self.modulus, 0)
    }
    pub fn lambda(&self) -> WittScalar {
        WittScalar::new(0, 1 % self.modulus)
    }

    pub fn int(&self, v: i64) -> WittScalar {
        WittScalar::new(self.reduce_i(v as i128), 0)
    }

    pub fn from_parts(&self, a: i64, b: i64) -> WittScalar {
        WittScalar::new(self.reduce_i(a as i128), self.reduce_i(b as i128))
    }

    fn reduce_i(&self, v: i128) -> u64 {
        v.rem_euclid(self.modulus as i128) as u64
    }

    /// Reduce an element of another ring with the same prime into this one.
    pub fn coerce(&self, s: WittScalar) -> WittScalar {
        WittScalar::new(s.a % self.modulus, s.b % self.modulus)
    }

    pub fn add(&self, x: WittScalar, y: WittScalar) -> WittScalar {
        let m = self.modulus;
        WittScalar::new((x.a + y.a) % m, (x.b + y.b) % m)
    }

    pub fn sub(&self, x: WittScalar, y: WittScalar) -> WittScalar {
        let m = self.modulus;
        WittScalar::new((x.a + m - y.a) % m, (x.b + m - y.b) % m)
    }

    pub fn neg(&self, x: WittScalar) -> WittScalar {
        self.sub(WittScalar::ZERO, x)
    }

    pub fn mul(&self, x: WittScalar, y: WittScalar) -> WittScalar {
        let m = self.modulus as u128;
        let (xa, xb, ya, yb) = (x.a as u128, x.b as u128, y.a as u128, y.b as u128);
        let bd = (xb * yb) % m;
        let a = (xa * ya + bd * self.eps as u128) % m;
        let b = (xa * yb + xb * ya) % m;
        WittScalar::new(a as u64, b as u64)
    }

    pub fn scale(&self, x: WittScalar, k: i64) -> WittScalar {
        self.mul(x, self.int(k))
    }

    pub fn pow(&self, x: WittScalar, mut e: u64) -> WittScalar {
        let mut r = self.one();
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// The lift of Frobenius: `a + bλ ↦ a − bλ`.
    pub fn frobenius(&self, x: WittScalar) -> WittScalar {
        WittScalar::new(x.a, (self.modulus - x.b) % self.modulus)
    }

    pub fn frobenius_pow(&self, x: WittScalar, k: u64) -> WittScalar {
        if k % 2 == 0 {
            x
        } else {
            self.frobenius(x)
        }
    }

    pub fn is_unit(&self, x: WittScalar) -> bool {
        x.a % self.p != 0 || x.b % self.p != 0
    }

    pub fn p_valuation(&self, x: WittScalar) -> Valuation {
        if x.is_zero() {
            return Valuation::AtLeast(self.n as u64);
        }
        let mut k = 0;
        let (mut a, mut b) = (x.a, x.b);
        while a % self.p == 0 && b % self.p == 0 {
            a /= self.p;
            b /= self.p;
            k += 1;
        }
        Valuation::Exact(k)
    }

    /// Exact division by `p` of an element divisible by `p`; the result is
    /// only meaningful modulo `p^(N-1)`.
    pub fn div_p(&self, x: WittScalar) -> WittScalar {
        debug_assert!(x.a % self.p == 0 && x.b % self.p == 0);
        WittScalar::new(x.a / self.p, x.b / self.p)
    }

    /// Multiply by `p^k`.
    pub fn mul_p_pow(&self, x: WittScalar, k: u32) -> WittScalar {
        if k >= self.n {
            return WittScalar::ZERO;
        }
        let f = self.p.pow(k);
        WittScalar::new(mul_mod(x.a, f, self.modulus), mul_mod(x.b, f, self.modulus))
    }

    /// Multiplicative inverse of a unit, by Newton iteration from the residue
    /// field inverse.
    pub fn inv(&self, x: WittScalar) -> Result<WittScalar> {
        if !self.is_unit(x) {
            return Err(Error::Precondition("inverse of a non-unit".into()));
        }
        let p = self.p;
        let (a, b) = (x.a % p, x.b % p);
        let norm = (a * a % p + p - (b * b % p) * (self.eps_res % p) % p) % p;
        let ninv = pow_mod(norm, p - 2, p);
        let mut y = WittScalar::new(a * ninv % p, (p - b) % p * ninv % p);
        let two = self.int(2);
        let mut prec = 1;
        while prec < self.n {
            y = self.mul(y, self.sub(two, self.mul(x, y)));
            prec *= 2;
        }
        Ok(y)
    }

    /// Base-`p` digits (little endian) of both coordinates.
    pub fn digits(&self, x: WittScalar) -> (Vec<u64>, Vec<u64>) {
        let split = |mut v: u64| {
            (0..self.n)
                .map(|_| {
                    let d = v % self.p;
                    v /= self.p;
                    d
                })
                .collect::<Vec<_>>()
        };
        (split(x.a), split(x.b))
    }

    pub fn from_digits(&self, a: &[u64], b: &[u64]) -> Result<WittScalar> {
        let join = |ds: &[u64]| -> Result<u64> {
            let mut v: u128 = 0;
            for &d in ds.iter().rev() {
                if d >= self.p {
                    return Err(Error::Parse(format!("digit {d} out of range for p = {}", self.p)));
                }
                v = v * self.p as u128 + d as u128;
            }
            Ok((v % self.modulus as u128) as u64)
        };
        Ok(WittScalar::new(join(a)?, join(b)?))
    }

    /// Teichmüller digit expansion of an integer: `v = Σ_k T(d_k) p^k` with
    /// `d_k ∈ [0, p)`, returning `count` digits.
    pub fn teichmuller_digits(p: u64, v: i64, count: usize) -> Vec<u64> {
        // Work modulo p^(count) exactly; one extra level is enough because
        // each step divides by p once.
        let levels = count as u32;
        if levels == 0 {
            return Vec::new();
        }
        let m = (p as u128).pow(levels) as i128;
        let teich = |d: u64, m: i128| -> i128 {
            let mut t = d as i128 % m;
            loop {
                let next = pow_mod(t as u64, p, m as u64) as i128;
                if next == t {
                    return t;
                }
                t = next;
            }
        };
        let mut out = Vec::with_capacity(count);
        let mut cur = (v as i128).rem_euclid(m);
        let mut m_cur = m;
        for _ in 0..count {
            let d = (cur % p as i128) as u64;
            out.push(d);
            let t = teich(d, m_cur);
            cur = (cur - t).rem_euclid(m_cur);
            m_cur /= p as i128;
            if m_cur == 1 {
                break;
            }
            cur = (cur / p as i128).rem_euclid(m_cur);
        }
        out.resize(count, 0);
        out
    }

    pub fn to_i64_pair(&self, x: WittScalar) -> (i64, i64) {
        (x.a as i64, x.b as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(r: &WittRing, rng: &mut ChaCha8Rng) -> WittScalar {
        WittScalar::new(rng.gen_range(0..r.modulus()), rng.gen_range(0..r.modulus()))
    }

    #[test]
    fn teichmuller_examples() {
        let r = WittRing::auto(3, 2).unwrap();
        assert_eq!(r.teichmuller(1), r.one());
        assert_eq!(r.teichmuller(2).a, 8);
        let r5 = WittRing::auto(5, 3).unwrap();
        let t = r5.teichmuller(2);
        assert_eq!(r5.pow(t, 5), t);
        assert_eq!(t.a % 5, 2);
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        for p in [3u64, 5, 7] {
            let r = WittRing::auto(p, 4).unwrap();
            for u in 0..p {
                for v in 0..p {
                    assert_eq!(r.mul(r.teichmuller(u), r.teichmuller(v)), r.teichmuller(u * v % p));
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let r = WittRing::auto(3, 4).unwrap();
        assert_eq!(r.p_valuation(WittScalar::new(9, 9)), Valuation::Exact(2));
        assert_eq!(r.p_valuation(r.one()), Valuation::Exact(0));
        assert_eq!(r.p_valuation(r.zero()), Valuation::AtLeast(4));
    }

    #[test]
    fn frobenius_examples() {
        let r = WittRing::auto(3, 3).unwrap();
        assert_eq!(r.frobenius(r.lambda()), r.neg(r.lambda()));
        assert_eq!(r.frobenius(r.from_parts(3, 2)), r.from_parts(3, -2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = random(&r, &mut rng);
            assert_eq!(r.frobenius(r.frobenius(s)), s);
        }
    }

    #[test]
    fn eps_rejects_squares() {
        assert!(WittRing::new(5, 2, 4).is_err());
        assert!(WittRing::new(9, 2, 2).is_err());
        assert_eq!(WittRing::auto(3, 2).unwrap().eps_residue(), 2);
        assert_eq!(least_nonresidue(7), 3);
    }

    #[test]
    fn ring_axioms_and_frobenius_morphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, n) in [(3, 4), (5, 3), (7, 3)] {
            let r = WittRing::auto(p, n).unwrap();
            for _ in 0..1000 {
                let (x, y, z) = (random(&r, &mut rng), random(&r, &mut rng), random(&r, &mut rng));
                assert_eq!(r.mul(r.mul(x, y), z), r.mul(x, r.mul(y, z)));
                assert_eq!(r.mul(x, r.add(y, z)), r.add(r.mul(x, y), r.mul(x, z)));
                assert_eq!(r.mul(x, y), r.mul(y, x));
                assert_eq!(r.frobenius(r.mul(x, y)), r.mul(r.frobenius(x), r.frobenius(y)));
                assert_eq!(r.frobenius(r.add(x, y)), r.add(r.frobenius(x), r.frobenius(y)));
            }
            let l = r.lambda();
            assert_eq!(r.mul(l, l), WittScalar::new(r.eps(), 0));
        }
    }

    #[test]
    fn units_and_inverses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, n) in [(3, 5), (5, 3), (7, 2)] {
            let r = WittRing::auto(p, n).unwrap();
            for _ in 0..500 {
                let s = random(&r, &mut rng);
                let unit = r.p_valuation(s) == Valuation::Exact(0);
                assert_eq!(unit, r.is_unit(s));
                match r.inv(s) {
                    Ok(t) => assert_eq!(r.mul(s, t), r.one()),
                    Err(_) => assert!(!unit),
                }
            }
        }
    }

    #[test]
    fn digits_round_trip() {
        let r = WittRing::auto(3, 4).unwrap();
        let s = r.from_parts(55, 17);
        let (a, b) = r.digits(s);
        assert_eq!(r.from_digits(&a, &b).unwrap(), s);
    }

    #[test]
    fn teichmuller_digit_expansion() {
        for p in [3u64, 5] {
            let k = 6;
            let r = WittRing::auto(p, k as u32).unwrap();
            for v in [-7i64, -1, 0, 1, 2, 17, 100, 243] {
                let ds = WittRing::teichmuller_digits(p, v, k);
                let mut acc = r.zero();
                for (i, &d) in ds.iter().enumerate() {
                    acc = r.add(acc, r.mul_p_pow(r.teichmuller(d), i as u32));
                }
                assert_eq!(acc, r.int(v), "p={p} v={v}");
            }
            // p·v shifts the digits
            let a = WittRing::teichmuller_digits(p, 11, k);
            let b = WittRing::teichmuller_digits(p, 11 * p as i64, k);
            assert_eq!(&b[1..], &a[..k - 1]);
            assert_eq!(b[0], 0);
        }
    }
}
