//! A curve through the superspecial point on which `D₁(ω)` is cut out to
//! finite order while `D₂(ω)` vanishes to the working precision.
//!
//! The curve is `x = −β⁻¹(t + Σ f_n t^{n+1})`, `y = βt`,
//! `z = 2λ(t + Σ h_n t^{n+1})`. With `f_n = Σ h_i h_{n−i}` the curve lies on
//! the non-ordinary cone; the remaining `f_n` are solved one at a time so
//! that each new coefficient of the pullback of `D₂(ω)` vanishes.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::crystal::SpecialEndo;
use crate::curve::FormalCurve;
use crate::deformation::Pullbacks;
use crate::error::{Error, Result};
use crate::series::UniSeries;
use crate::witt::{Valuation, WittRing, WittScalar};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip)]
    pub curve: Option<FormalCurve>,
    pub p: u64,
    pub omega: SpecialEndo,
    pub beta: WittScalar,
    pub a: u64,
    pub b: u64,
    pub d: u64,
    pub tprec: usize,
    pub d1: Valuation,
    pub d2: Valuation,
    pub solved: usize,
}

fn build(f: WittRing, beta: WittScalar, fs: &[WittScalar], hs: &[WittScalar], t: usize) -> Result<FormalCurve> {
    let binv = f.inv(beta)?;
    let mut x = UniSeries::zero(f, t);
    let mut z = UniSeries::zero(f, t);
    for n in 0..t.saturating_sub(1) {
        x.set_coeff(n + 1, f.neg(f.mul(binv, fs[n])));
        z.set_coeff(n + 1, f.mul(f.mul(f.int(2), f.lambda()), hs[n]));
    }
    let y = UniSeries::monomial(f, t, 1, beta);
    Ok(FormalCurve::from_series(f, x, y, z))
}

fn cone_f(f: WittRing, hs: &[WittScalar], n: usize) -> WittScalar {
    (0..=n).fold(WittScalar::ZERO, |acc, i| f.add(acc, f.mul(hs[i], hs[n - i])))
}

/// Builds the witness curve for `ω` with leading coefficient `β ∉ λF_p`.
///
/// `t_min` is a floor on the working precision; the precision actually used
/// is at least `3(A + dp²)`. `h` is drawn from `seed` (`h₀ = 1`); with
/// `seed = None` all higher `h_n` vanish.
pub fn witness_curve(p: u64, omega: &SpecialEndo, beta: WittScalar, seed: Option<u64>, t_min: usize) -> Result<Witness> {
    let f = WittRing::auto(p, 1)?;
    let beta = f.coerce(beta);
    if !f.is_unit(beta) {
        return Err(Error::Config("beta must be nonzero".into()));
    }
    if f.pow(beta, p - 1) == f.neg(f.one()) {
        return Err(Error::Precondition("beta/lambda must not lie in F_p".into()));
    }
    // generous length; only the first T entries are used
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut probe = 64usize;
    let (a, d) = loop {
        let hs = h_sequence(f, seed.map(|_| &mut rng), probe);
        let fs: Vec<WittScalar> = (0..probe).map(|n| cone_f(f, &hs, n)).collect();
        let c = build(f, beta, &fs, &hs, probe)?;
        let pb = Pullbacks::new(&c);
        let a = pb.alpha0(1).t_valuation();
        let d = pb.defo(1, omega).t_valuation();
        match (a.exact(), d.exact()) {
            (Some(a), Some(d)) => break (a, d),
            _ if probe < 4096 => {
                probe *= 2;
                rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            }
            _ => return Err(Error::Precondition(format!("D_1 does not cut the witness curve below t^{probe}"))),
        }
    };
    let b = a + p * (p - 1) * d;
    let t = t_min.max(3 * (a + d * p * p) as usize);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let hs = h_sequence(f, seed.map(|_| &mut rng), t.max(probe));
    let mut fs: Vec<WittScalar> = (0..t).map(|n| cone_f(f, &hs, n)).collect();
    let shift = (p * d) as usize + 2;
    let mut solved = 0;
    for n in (b as usize - 2)..t {
        let m = n + shift;
        if m >= t {
            break;
        }
        let coeff_at = |fs: &[WittScalar]| -> Result<WittScalar> {
            let c = build(f, beta, fs, &hs, t)?;
            Ok(Pullbacks::new(&c).defo_recursive(2, omega).coeff(m))
        };
        fs[n] = f.zero();
        let v0 = coeff_at(&fs)?;
        fs[n] = f.one();
        let v1 = coeff_at(&fs)?;
        let slope = f.sub(v1, v0);
        if slope.is_zero() {
            return Err(Error::Unsolvable(n));
        }
        fs[n] = f.neg(f.mul(v0, f.inv(slope)?));
        solved += 1;
    }
    let curve = build(f, beta, &fs, &hs, t)?;
    let pb = Pullbacks::new(&curve);
    let d1 = pb.defo(1, omega).t_valuation();
    let d2 = pb.defo_recursive(2, omega).t_valuation();
    let got_b = pb.beta0().t_valuation();
    if got_b != Valuation::Exact(b) || pb.alpha0(1).t_valuation() != Valuation::Exact(a) {
        return Err(Error::Precondition(format!("witness invariants drifted: B = {got_b}, expected {b}")));
    }
    Ok(Witness { curve: Some(curve), p, omega: *omega, beta, a, b, d, tprec: t, d1, d2, solved })
}

fn h_sequence<R: Rng>(f: WittRing, rng: Option<&mut R>, len: usize) -> Vec<WittScalar> {
    let p = f.p();
    let mut out = vec![WittScalar::ZERO; len];
    out[0] = f.one();
    if let Some(rng) = rng {
        for h in out.iter_mut().skip(1) {
            *h = WittScalar::new(rng.gen_range(0..p), rng.gen_range(0..p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_basic() {
        let f = WittRing::auto(3, 1).unwrap();
        for (omega, seed) in [(SpecialEndo::basis(3), None), (SpecialEndo::basis(4), Some(5)), (SpecialEndo::new([1, 0, 1, 2, 1]), Some(1))] {
            let w = witness_curve(3, &omega, f.one(), seed, 0).unwrap();
            assert_eq!(w.a, 4);
            assert_eq!(w.b, w.a + 6 * w.d);
            assert_eq!(w.d1, Valuation::Exact(w.d));
            assert_eq!(w.d2, Valuation::AtLeast(w.tprec as u64));
            assert!(w.tprec as u64 >= 3 * (w.a + 9 * w.d));
        }
    }

    #[test]
    fn rejects_lambda_multiples() {
        let f = WittRing::auto(3, 1).unwrap();
        assert!(witness_curve(3, &SpecialEndo::basis(3), f.lambda(), None, 0).is_err());
    }
}
