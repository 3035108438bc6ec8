//! Truncated power series over `W_N`: trivariate series in `x, y, z` cut off
//! at a total degree, and univariate series in `t` cut off at a `t`-degree.
//!
//! Both carry a power-of-`p` denominator so that series with `p` in the
//! denominator (the entries of `F`) stay exact.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::witt::{Valuation, WittRing, WittScalar};

pub type Exp = [u32; 3];

pub fn degree(e: &Exp) -> u32 {
    e[0] + e[1] + e[2]
}

/// `p^{-pdenom} · Σ c_e x^e`, total degree `< bound`.
///
/// The integral part is known modulo `p^prec`; `prec` starts at `N` and drops
/// by one for every division by `p` made while normalizing.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ring: WittRing,
    bound: u32,
    pdenom: u32,
    prec: u32,
    terms: BTreeMap<Exp, WittScalar>,
    lossy: bool,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.bound == other.bound
            && self.pdenom == other.pdenom
            && self.terms == other.terms
    }
}

impl TruncatedSeries {
    pub fn zero(ring: WittRing, bound: u32) -> Self {
        TruncatedSeries { ring, bound, pdenom: 0, prec: ring.n(), terms: BTreeMap::new(), lossy: false }
    }

    pub fn monomial(ring: WittRing, bound: u32, e: Exp, c: WittScalar) -> Self {
        let mut s = Self::zero(ring, bound);
        let c = ring.coerce(c);
        if degree(&e) < bound && !c.is_zero() {
            s.terms.insert(e, c);
        }
        s
    }

    pub fn constant(ring: WittRing, bound: u32, c: WittScalar) -> Self {
        Self::monomial(ring, bound, [0, 0, 0], c)
    }

    pub fn one(ring: WittRing, bound: u32) -> Self {
        Self::constant(ring, bound, ring.one())
    }

    /// The variable `x` (0), `y` (1) or `z` (2).
    pub fn var(ring: WittRing, bound: u32, i: usize) -> Self {
        let mut e = [0, 0, 0];
        e[i] = 1;
        Self::monomial(ring, bound, e, ring.one())
    }

    pub fn from_terms(ring: WittRing, bound: u32, pdenom: u32, terms: impl IntoIterator<Item = (Exp, WittScalar)>) -> Self {
        let mut s = Self::zero(ring, bound);
        s.pdenom = pdenom;
        for (e, c) in terms {
            if degree(&e) < bound {
                let v = ring.add(s.terms.get(&e).copied().unwrap_or_default(), ring.coerce(c));
                s.put(e, v);
            }
        }
        s.normalize();
        s
    }

    fn put(&mut self, e: Exp, c: WittScalar) {
        if c.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    pub fn ring(&self) -> WittRing {
        self.ring
    }
    pub fn bound(&self) -> u32 {
        self.bound
    }
    pub fn pdenom(&self) -> u32 {
        self.pdenom
    }
    pub fn effective_precision(&self) -> u32 {
        self.prec
    }
    pub fn lossy(&self) -> bool {
        self.lossy
    }
    pub fn mark_lossy(&mut self) {
        self.lossy = true;
    }
    pub fn terms(&self) -> &BTreeMap<Exp, WittScalar> {
        &self.terms
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, e: &Exp) -> WittScalar {
        self.terms.get(e).copied().unwrap_or_default()
    }
    pub fn support(&self) -> BTreeSet<Exp> {
        self.terms.keys().copied().collect()
    }
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(degree).min()
    }

    /// Fail loudly once every digit of the integral part has been consumed.
    pub fn check_precision(&self, stage: &str) -> Result<()> {
        if self.prec == 0 {
            Err(Error::precision(stage))
        } else {
            Ok(())
        }
    }

    fn reduce_to_prec(&mut self) {
        if self.prec >= self.ring.n() {
            return;
        }
        let m = self.ring.p().pow(self.prec);
        let terms = std::mem::take(&mut self.terms);
        for (e, c) in terms {
            let c = WittScalar::new(c.a % m, c.b % m);
            if !c.is_zero() {
                self.terms.insert(e, c);
            }
        }
    }

    fn normalize(&mut self) {
        self.reduce_to_prec();
        if self.terms.is_empty() {
            self.pdenom = 0;
            return;
        }
        while self.pdenom > 0 && self.prec > 0 && self.terms.values().all(|c| !self.ring.is_unit(*c)) {
            for c in self.terms.values_mut() {
                *c = self.ring.div_p(*c);
            }
            self.pdenom -= 1;
            self.prec -= 1;
            self.reduce_to_prec();
        }
    }

    /// Scale the integral part by `p^k` (raising `pdenom` by `k` keeps the value).
    fn lifted(&self, k: u32) -> (BTreeMap<Exp, WittScalar>, u32) {
        if k == 0 {
            return (self.terms.clone(), self.prec);
        }
        let t = self
            .terms
            .iter()
            .map(|(e, c)| (*e, self.ring.mul_p_pow(*c, k)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        (t, (self.prec + k).min(self.ring.n()))
    }

    fn compatible(&self, other: &Self) {
        assert_eq!(self.ring, other.ring, "series over different rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.compatible(other);
        let d = self.pdenom.max(other.pdenom);
        let (mut t, pa) = self.lifted(d - self.pdenom);
        let (u, pb) = other.lifted(d - other.pdenom);
        for (e, c) in u {
            let v = self.ring.add(t.get(&e).copied().unwrap_or_default(), c);
            if v.is_zero() {
                t.remove(&e);
            } else {
                t.insert(e, v);
            }
        }
        let bound = self.bound.min(other.bound);
        t.retain(|e, _| degree(e) < bound);
        let mut s = TruncatedSeries {
            ring: self.ring,
            bound,
            pdenom: d,
            prec: pa.min(pb),
            terms: t,
            lossy: self.lossy || other.lossy,
        };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            *c = self.ring.neg(*c);
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: WittScalar) -> Self {
        let c = self.ring.coerce(c);
        let mut s = self.clone();
        s.terms = self
            .terms
            .iter()
            .map(|(e, v)| (*e, self.ring.mul(*v, c)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        s.normalize();
        s
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(self.ring.int(k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.compatible(other);
        let bound = self.bound.min(other.bound);
        let mut t: BTreeMap<Exp, WittScalar> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            let d1 = degree(e1);
            if d1 >= bound {
                continue;
            }
            for (e2, c2) in &other.terms {
                if d1 + degree(e2) >= bound {
                    continue;
                }
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                let v = self.ring.add(t.get(&e).copied().unwrap_or_default(), self.ring.mul(*c1, *c2));
                if v.is_zero() {
                    t.remove(&e);
                } else {
                    t.insert(e, v);
                }
            }
        }
        let mut s = TruncatedSeries {
            ring: self.ring,
            bound,
            pdenom: self.pdenom + other.pdenom,
            prec: self.prec.min(other.prec),
            terms: t,
            lossy: self.lossy || other.lossy,
        };
        s.normalize();
        s
    }

    /// `σ`: Frobenius on coefficients, `x, y, z ↦ x^p, y^p, z^p`.
    pub fn sigma(&self) -> Self {
        let p = self.ring.p() as u32;
        let mut s = Self::zero(self.ring, self.bound);
        s.pdenom = self.pdenom;
        s.prec = self.prec;
        s.lossy = self.lossy;
        for (e, c) in &self.terms {
            let f = [e[0] * p, e[1] * p, e[2] * p];
            if degree(&f) < self.bound {
                s.terms.insert(f, self.ring.frobenius(*c));
            } else {
                s.lossy = true;
            }
        }
        s
    }

    pub fn sigma_pow(&self, k: u32) -> Self {
        let mut s = self.clone();
        for _ in 0..k {
            s = s.sigma();
        }
        s
    }

    /// Reduction of an integral series modulo `p`, over `F_{p²}`.
    pub fn reduce_mod_p(&self) -> Result<Self> {
        if self.pdenom > 0 {
            return Err(Error::Precondition("reduction mod p of a series with p in the denominator".into()));
        }
        self.check_precision("reduce_mod_p")?;
        let r1 = self.ring.residue_ring();
        let mut s = Self::from_terms(r1, self.bound, 0, self.terms.iter().map(|(e, c)| (*e, *c)));
        s.lossy = self.lossy;
        Ok(s)
    }

    /// Change the degree bound (only downwards is lossless).
    pub fn truncate(&self, bound: u32) -> Self {
        let mut s = self.clone();
        s.bound = bound.min(self.bound);
        s.terms.retain(|e, _| degree(e) < s.bound);
        s
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            pdenom: self.pdenom,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let (a, b) = self.ring.digits(*c);
                    TermJson { e: *e, a, b }
                })
                .collect(),
        }
    }

    pub fn from_json(ring: WittRing, bound: u32, j: &SeriesJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            terms.push((t.e, ring.from_digits(&t.a, &t.b)?));
        }
        Ok(Self::from_terms(ring, bound, j.pdenom, terms))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Exp,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub pdenom: u32,
    pub terms: Vec<TermJson>,
}

/// Univariate series `p^{-pdenom} Σ_{i<T} c_i t^i`; coefficients at and
/// beyond `T` are unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct UniSeries {
    ring: WittRing,
    pdenom: u32,
    coeffs: Vec<WittScalar>,
    lossy: bool,
}

impl UniSeries {
    pub fn zero(ring: WittRing, t: usize) -> Self {
        UniSeries { ring, pdenom: 0, coeffs: vec![WittScalar::ZERO; t], lossy: false }
    }

    pub fn from_coeffs(ring: WittRing, coeffs: Vec<WittScalar>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| ring.coerce(c)).collect();
        UniSeries { ring, pdenom: 0, coeffs, lossy: false }
    }

    pub fn monomial(ring: WittRing, t: usize, k: usize, c: WittScalar) -> Self {
        let mut s = Self::zero(ring, t);
        if k < t {
            s.coeffs[k] = ring.coerce(c);
        }
        s
    }

    pub fn ring(&self) -> WittRing {
        self.ring
    }
    /// Truncation degree: coefficients of `t^i` for `i < known_below()` are exact.
    pub fn known_below(&self) -> usize {
        self.coeffs.len()
    }
    pub fn pdenom(&self) -> u32 {
        self.pdenom
    }
    pub fn coeffs(&self) -> &[WittScalar] {
        &self.coeffs
    }
    pub fn coeff(&self, i: usize) -> WittScalar {
        self.coeffs.get(i).copied().unwrap_or_default()
    }
    pub fn set_coeff(&mut self, i: usize, c: WittScalar) {
        if i < self.coeffs.len() {
            self.coeffs[i] = self.ring.coerce(c);
        }
    }
    pub fn lossy(&self) -> bool {
        self.lossy
    }
    pub fn mark_lossy(&mut self) {
        self.lossy = true;
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the lowest nonzero coefficient (not reduced mod p).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, t: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(t);
        s
    }

    fn lifted(&self, k: u32) -> Vec<WittScalar> {
        self.coeffs.iter().map(|c| self.ring.mul_p_pow(*c, k)).collect()
    }

    fn normalize(&mut self) {
        while self.pdenom > 0 && !self.is_zero() && self.coeffs.iter().all(|c| !self.ring.is_unit(*c)) {
            for c in self.coeffs.iter_mut() {
                *c = self.ring.div_p(*c);
            }
            self.pdenom -= 1;
        }
        if self.is_zero() {
            self.pdenom = 0;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.pdenom.max(other.pdenom);
        let a = self.lifted(d - self.pdenom);
        let b = other.lifted(d - other.pdenom);
        let t = a.len().min(b.len());
        let coeffs = (0..t).map(|i| self.ring.add(a[i], b[i])).collect();
        let mut s = UniSeries { ring: self.ring, pdenom: d, coeffs, lossy: self.lossy || other.lossy };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = self.ring.neg(*c);
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: WittScalar) -> Self {
        let c = self.ring.coerce(c);
        let mut s = self.clone();
        for v in s.coeffs.iter_mut() {
            *v = self.ring.mul(*v, c);
        }
        s.normalize();
        s
    }

    /// In-place `self += c · other` for integral series.
    pub fn add_scaled(&mut self, other: &Self, c: WittScalar) {
        debug_assert!(self.pdenom == 0 && other.pdenom == 0);
        let t = self.coeffs.len().min(other.coeffs.len());
        self.coeffs.truncate(t);
        if c.is_zero() {
            return;
        }
        for i in 0..t {
            let o = other.coeffs[i];
            if !o.is_zero() {
                self.coeffs[i] = self.ring.add(self.coeffs[i], self.ring.mul(o, c));
            }
        }
        self.lossy |= other.lossy;
    }

    /// Truncated product; known below the smaller of the two truncations.
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, usize::MAX)
    }

    /// Product, additionally cut off at `limit`.
    pub fn mul_truncated(&self, other: &Self, limit: usize) -> Self {
        let t = self.coeffs.len().min(other.coeffs.len()).min(limit);
        let mut out = vec![WittScalar::ZERO; t];
        let nz_a: Vec<usize> = (0..t).filter(|&i| !self.coeffs[i].is_zero()).collect();
        let nz_b: Vec<usize> = (0..t).filter(|&i| !other.coeffs[i].is_zero()).collect();
        let r = &self.ring;
        for &i in &nz_a {
            let ca = self.coeffs[i];
            for &j in &nz_b {
                let k = i + j;
                if k >= t {
                    break;
                }
                out[k] = r.add(out[k], r.mul(ca, other.coeffs[j]));
            }
        }
        let mut s = UniSeries { ring: self.ring, pdenom: self.pdenom + other.pdenom, coeffs: out, lossy: self.lossy || other.lossy };
        s.normalize();
        s
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut r = Self::monomial(self.ring, self.coeffs.len(), 0, self.ring.one());
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inverse(&self) -> Result<Self> {
        let r = &self.ring;
        let t = self.coeffs.len();
        let c0 = r.inv(self.coeff(0))?;
        let mut out = vec![WittScalar::ZERO; t];
        if t > 0 {
            out[0] = c0;
        }
        for k in 1..t {
            let mut acc = WittScalar::ZERO;
            for j in 1..=k {
                let a = self.coeffs[j];
                if !a.is_zero() {
                    acc = r.add(acc, r.mul(a, out[k - j]));
                }
            }
            out[k] = r.neg(r.mul(acc, c0));
        }
        Ok(UniSeries { ring: self.ring, pdenom: 0, coeffs: out, lossy: self.lossy })
    }

    /// Frobenius twist: `Σ c_i t^i ↦ Σ σ^k(c_i) t^{i p^k}` with the same
    /// truncation. Over `F_{p²}` this is the `p^k`-th power.
    pub fn sigma_twist(&self, k: u32) -> Self {
        let q = (self.ring.p() as usize).pow(k);
        let t = self.coeffs.len();
        let mut out = vec![WittScalar::ZERO; t];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * q >= t {
                break;
            }
            out[i * q] = self.ring.frobenius_pow(*c, k as u64);
        }
        UniSeries { ring: self.ring, pdenom: self.pdenom, coeffs: out, lossy: self.lossy }
    }

    /// Valuation of the reduction mod `p`.
    pub fn t_valuation(&self) -> Valuation {
        let p = self.ring.p();
        match self.coeffs.iter().position(|c| c.a % p != 0 || c.b % p != 0) {
            Some(i) => Valuation::Exact(i as u64),
            None => Valuation::AtLeast(self.coeffs.len() as u64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring() -> WittRing {
        WittRing::auto(3, 3).unwrap()
    }

    fn random_series(r: WittRing, bound: u32, rng: &mut ChaCha8Rng) -> TruncatedSeries {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(0..6) {
            let e = [rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..3)];
            terms.push((e, WittScalar::new(rng.gen_range(0..r.modulus()), rng.gen_range(0..r.modulus()))));
        }
        TruncatedSeries::from_terms(r, bound, 0, terms)
    }

    #[test]
    fn sigma_examples() {
        let r = ring();
        let x = TruncatedSeries::var(r, 30, 0);
        let y = TruncatedSeries::var(r, 30, 1);
        let s = x.add(&y.scale(r.lambda()));
        let expect = TruncatedSeries::monomial(r, 30, [3, 0, 0], r.one())
            .add(&TruncatedSeries::monomial(r, 30, [0, 3, 0], r.neg(r.lambda())));
        assert_eq!(s.sigma(), expect);
        assert_eq!(TruncatedSeries::one(r, 30).sigma(), TruncatedSeries::one(r, 30));
        assert_eq!(x.sigma_pow(2), TruncatedSeries::monomial(r, 30, [9, 0, 0], r.one()));
        assert!(x.sigma_pow(4).is_zero() && x.sigma_pow(4).lossy());
    }

    #[test]
    fn support_examples() {
        let r = ring();
        let s = TruncatedSeries::from_terms(r, 10, 0, [([2, 1, 0], r.one()), ([0, 0, 1], r.one())]);
        assert_eq!(s.support(), [[2, 1, 0], [0, 0, 1]].into_iter().collect());
        assert!(TruncatedSeries::zero(r, 10).support().is_empty());
    }

    #[test]
    fn pdenom_normalizes() {
        let r = ring();
        let s = TruncatedSeries::from_terms(r, 10, 2, [([1, 0, 0], r.int(9)), ([0, 1, 0], r.int(3))]);
        assert_eq!(s.pdenom(), 1);
        assert_eq!(s.coeff(&[1, 0, 0]), r.int(3));
        assert_eq!(s.effective_precision(), 2);
        let z = s.sub(&s);
        assert!(z.is_zero() && z.pdenom() == 0);
        let u = TruncatedSeries::from_terms(r, 10, 1, [([1, 0, 0], r.one())]);
        let sum = u.add(&TruncatedSeries::var(r, 10, 1));
        assert_eq!(sum.pdenom(), 1);
        assert_eq!(sum.coeff(&[0, 1, 0]), r.int(3));
    }

    #[test]
    fn sigma_is_multiplicative() {
        let r = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_series(r, 40, &mut rng);
            let b = random_series(r, 40, &mut rng);
            let lhs = a.mul(&b).sigma();
            let rhs = a.sigma().mul(&b.sigma());
            assert!(!lhs.lossy());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn uni_valuation_and_twist() {
        let r = ring();
        let mut u = UniSeries::zero(r, 8);
        u.set_coeff(3, r.one());
        u.set_coeff(5, r.one());
        assert_eq!(u.t_valuation(), Valuation::Exact(3));
        let mut v = UniSeries::zero(r, 8);
        v.set_coeff(2, r.int(3));
        assert_eq!(v.t_valuation(), Valuation::AtLeast(8));
        let r1 = r.residue_ring();
        let w = UniSeries::from_coeffs(r1, vec![r1.zero(), r1.from_parts(1, 1), r1.lambda(), r1.zero(), r1.zero(), r1.zero(), r1.zero(), r1.zero(), r1.zero(), r1.zero()]);
        assert_eq!(w.sigma_twist(1), w.pow(3));
    }

    #[test]
    fn json_round_trip() {
        let r = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_series(r, 12, &mut rng);
        let j = serde_json::to_string(&s.to_json()).unwrap();
        let back: SeriesJson = serde_json::from_str(&j).unwrap();
        assert_eq!(TruncatedSeries::from_json(r, 12, &back).unwrap(), s);
    }
}
