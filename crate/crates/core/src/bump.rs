//! Coefficient identities for a curve `x = Σ f_k t^{k+1}`, `y = Σ g_k t^{k+1}`,
//! `z = Σ h_k t^{k+1}` (normalized so `f₀ = g₀ = h₀ = 1`) and the induction
//! linking them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::witt::{WittRing, WittScalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSequence {
    pub f: Vec<WittScalar>,
    pub g: Vec<WittScalar>,
    pub h: Vec<WittScalar>,
}

pub struct Predicates<'a> {
    ring: WittRing,
    s: &'a BumpSequence,
}

impl<'a> Predicates<'a> {
    pub fn new(ring: WittRing, s: &'a BumpSequence) -> Self {
        Predicates { ring, s }
    }

    pub fn len(&self) -> usize {
        self.s.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.f.is_empty()
    }

    /// `𝒲_k: 2h_k − f_k − g_k = 0`
    pub fn w(&self, k: usize) -> bool {
        let r = &self.ring;
        r.sub(r.scale(self.s.h[k], 2), r.add(self.s.f[k], self.s.g[k])).is_zero()
    }

    /// `𝒳_k: f_k = g_k`
    pub fn x(&self, k: usize) -> bool {
        self.s.f[k] == self.s.g[k]
    }

    /// `𝒜^i_l: 2Σ h_k^{p^i} h_{l−kp^i} − Σ f_k^{p^i} g_{l−kp^i} − Σ g_k^{p^i} f_{l−kp^i} = 0`
    pub fn a(&self, i: u32, l: usize) -> bool {
        let r = &self.ring;
        let q = (r.p() as usize).pow(i);
        let fr = |v: WittScalar| r.frobenius_pow(v, i as u64);
        let (f, g, h) = (&self.s.f, &self.s.g, &self.s.h);
        let mut acc = WittScalar::ZERO;
        for k in 0..=l / q {
            let j = l - k * q;
            acc = r.add(acc, r.scale(r.mul(fr(h[k]), h[j]), 2));
            acc = r.sub(acc, r.mul(fr(f[k]), g[j]));
            acc = r.sub(acc, r.mul(fr(g[k]), f[j]));
        }
        acc.is_zero()
    }

    /// `ℬ_l: Σ h_k h_{l−k} − Σ f_k g_{l−k} = 0`
    pub fn b(&self, l: usize) -> bool {
        let r = &self.ring;
        let (f, g, h) = (&self.s.f, &self.s.g, &self.s.h);
        let mut acc = WittScalar::ZERO;
        for k in 0..=l {
            acc = r.add(acc, r.mul(h[k], h[l - k]));
            acc = r.sub(acc, r.mul(f[k], g[l - k]));
        }
        acc.is_zero()
    }

    fn upto(&self, n: usize, pred: impl Fn(usize) -> bool) -> bool {
        (1..=n).all(pred)
    }

    /// Implications of the induction at level `n`; `None` when some index
    /// would leave the sequence. Each entry is `(premise, conclusion)`.
    pub fn implications(&self, n: usize) -> Option<[(bool, bool); 5]> {
        if 2 * n + 1 >= self.len() || n == 0 {
            return None;
        }
        let b2n = self.upto(2 * n, |k| self.b(k));
        let w2n = self.upto(2 * n, |k| self.w(k));
        let w2n1 = self.upto(2 * n - 1, |k| self.w(k));
        let xn = self.upto(n, |k| self.x(k));
        let b2n1 = self.upto(2 * n + 1, |k| self.b(k));
        let wnext = self.upto(2 * n + 1, |k| self.w(k));
        let bn = self.upto(n, |k| self.b(k));
        let wn = self.upto(n, |k| self.w(k));
        let a1 = self.upto(n, |k| self.a(1, k));
        let a2 = self.upto(n, |k| self.a(2, k));
        Some([
            (b2n && w2n, xn),
            (b2n && w2n1, w2n == xn),
            (b2n1 && w2n, wnext),
            (bn, a1 == wn),
            (bn, a2 == wn),
        ])
    }
}

/// A random sequence with `f₀ = g₀ = h₀ = 1`. A random-length prefix is
/// symmetric (`f = g = h`); past it each `(f_l, g_l)` is, with high
/// probability, chosen on the hyperplane `ℬ_l`, and sometimes on `𝒳_l` too.
pub fn random_sequence<R: Rng>(rng: &mut R, ring: WittRing, len: usize) -> BumpSequence {
    let r = ring.residue_ring();
    let p = r.p();
    let draw = |rng: &mut R| WittScalar::new(rng.gen_range(0..p), rng.gen_range(0..p));
    let mut f = vec![WittScalar::ZERO; len];
    let mut g = vec![WittScalar::ZERO; len];
    let mut h = vec![WittScalar::ZERO; len];
    f[0] = r.one();
    g[0] = r.one();
    h[0] = r.one();
    let cut = rng.gen_range(1..=len);
    let half = r.inv(r.int(2)).expect("p odd");
    for l in 1..len {
        h[l] = draw(rng);
        if l < cut {
            f[l] = h[l];
            g[l] = h[l];
            continue;
        }
        if rng.gen_bool(0.8) {
            // f_l + g_l = 2h_l + Σ_{0<k<l} (h_k h_{l−k} − f_k g_{l−k})
            let mut s = r.scale(h[l], 2);
            for k in 1..l {
                s = r.add(s, r.sub(r.mul(h[k], h[l - k]), r.mul(f[k], g[l - k])));
            }
            if rng.gen_bool(0.5) {
                f[l] = r.mul(s, half);
            } else {
                f[l] = draw(rng);
            }
            g[l] = r.sub(s, f[l]);
        } else {
            f[l] = draw(rng);
            g[l] = draw(rng);
        }
    }
    BumpSequence { f, g, h }
}

/// Statistics over many sequences: how often each implication's premise was
/// met, and how many counterexamples turned up.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub sequences: usize,
    pub premise_hits: [usize; 5],
    pub violations: [usize; 5],
    pub level_one_mismatches: usize,
}

impl InductionReport {
    pub fn passed(&self) -> bool {
        self.violations.iter().all(|&v| v == 0) && self.level_one_mismatches == 0
    }
}

pub fn check_induction<R: Rng>(rng: &mut R, ring: WittRing, count: usize, len: usize) -> InductionReport {
    let r = ring.residue_ring();
    let mut rep = InductionReport { sequences: count, ..Default::default() };
    for _ in 0..count {
        let s = random_sequence(rng, r, len);
        let pr = Predicates::new(r, &s);
        for n in 1.. {
            let Some(imps) = pr.implications(n) else { break };
            for (k, (prem, concl)) in imps.iter().enumerate() {
                if *prem {
                    rep.premise_hits[k] += 1;
                    if !concl {
                        rep.violations[k] += 1;
                    }
                }
            }
        }
        let (a1, b1, w1) = (pr.a(1, 1), pr.b(1), pr.w(1));
        if a1 != b1 || b1 != w1 {
            rep.level_one_mismatches += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn symmetric_sequences_satisfy_everything() {
        let r = WittRing::auto(3, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let h: Vec<WittScalar> = (0..12).map(|i| if i == 0 { r.one() } else { WittScalar::new(rng.gen_range(0..3), rng.gen_range(0..3)) }).collect();
        let s = BumpSequence { f: h.clone(), g: h.clone(), h };
        let pr = Predicates::new(r, &s);
        assert!((1..12).all(|l| pr.w(l) && pr.x(l) && pr.b(l) && pr.a(1, l) && pr.a(2, l)));
    }

    #[test]
    fn implications_hold() {
        let r = WittRing::auto(3, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rep = check_induction(&mut rng, r, 500, 12);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.premise_hits.iter().all(|&h| h > 20), "{rep:?}");
    }

    #[test]
    fn off_hyperplane_breaks_w1() {
        let r = WittRing::auto(3, 1).unwrap();
        let one = r.one();
        let s = BumpSequence { f: vec![one, one], g: vec![one, r.zero()], h: vec![one, one] };
        let pr = Predicates::new(r, &s);
        assert!(!pr.w(1) && !pr.b(1) && !pr.a(1, 1));
    }
}
