//! Random formal curves in each Newton stratum, described by small
//! reproducible recipes that can be rebuilt at any `t`-precision.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::FormalCurve;
use crate::deformation::{ss_line_directions, Pullbacks};
use crate::error::Result;
use crate::series::UniSeries;
use crate::witt::{WittRing, WittScalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    /// `t ↦ φ(t)·v` along a supersingular line.
    Supersingular,
    /// `x = β⁻¹tᵃu₁`, `z = 2λtᶜu₃`, `y = −z²/(4εx)`, optionally plus `s·t^K` in `y`.
    Cone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecipe {
    pub kind: RecipeKind,
    pub a: usize,
    pub c: usize,
    pub beta: WittScalar,
    /// Index into the supersingular line list.
    pub line: usize,
    /// Tails of `u₁`, `u₃` (or of `φ` in the first slot).
    pub tails: [Vec<WittScalar>; 2],
    pub y_shift: Option<(usize, WittScalar)>,
}

fn one_plus_tail(f: WittRing, tail: &[WittScalar], t: usize) -> UniSeries {
    let mut s = UniSeries::monomial(f, t, 0, f.one());
    for (k, c) in tail.iter().enumerate() {
        s.set_coeff(k + 1, *c);
    }
    s
}

impl CurveRecipe {
    pub fn build(&self, f: WittRing, t: usize) -> Result<FormalCurve> {
        let f = f.residue_ring();
        match self.kind {
            RecipeKind::Supersingular => {
                let dir = ss_line_directions(f)[self.line];
                let phi = one_plus_tail(f, &self.tails[0], t).mul(&UniSeries::monomial(f, t, self.a, f.one()));
                Ok(FormalCurve::along(f, dir, &phi))
            }
            RecipeKind::Cone => {
                let beta = f.coerce(self.beta);
                let x = one_plus_tail(f, &self.tails[0], t).mul(&UniSeries::monomial(f, t, self.a, f.inv(beta)?));
                let z = one_plus_tail(f, &self.tails[1], t).mul(&UniSeries::monomial(f, t, self.c, f.mul(f.int(2), f.lambda())));
                // y = −z²/(4εx): divide out tᵃ before inverting.
                let b = 2 * self.c - self.a;
                let u1 = one_plus_tail(f, &self.tails[0], t).scale(f.inv(beta)?);
                let u3 = one_plus_tail(f, &self.tails[1], t).scale(f.mul(f.int(2), f.lambda()));
                let four_eps = f.mul(f.int(4), f.teichmuller(f.eps_residue()));
                let q = u3.mul(&u3).mul(&u1.scale(four_eps).inverse()?);
                let mut y = q.mul(&UniSeries::monomial(f, t, b, f.neg(f.one())));
                if let Some((k, s)) = self.y_shift {
                    y.set_coeff(k, f.add(y.coeff(k), s));
                }
                Ok(FormalCurve::from_series(f, x, y, z))
            }
        }
    }
}

pub fn random_unit<R: Rng>(rng: &mut R, f: WittRing) -> WittScalar {
    let p = f.p();
    loop {
        let s = WittScalar::new(rng.gen_range(0..p), rng.gen_range(0..p));
        if !s.is_zero() {
            return s;
        }
    }
}

fn random_tail<R: Rng>(rng: &mut R, f: WittRing, len: usize) -> Vec<WittScalar> {
    let p = f.p();
    let density: f64 = rng.gen_range(0.2..1.0);
    (0..len)
        .map(|_| if rng.gen_bool(density) { WittScalar::new(rng.gen_range(0..p), rng.gen_range(0..p)) } else { WittScalar::ZERO })
        .collect()
}

pub const TAIL_LEN: usize = 1024;

pub fn random_supersingular<R: Rng>(rng: &mut R, f: WittRing) -> CurveRecipe {
    let f = f.residue_ring();
    let lines = ss_line_directions(f).len();
    CurveRecipe {
        kind: RecipeKind::Supersingular,
        a: rng.gen_range(1..=3),
        c: 0,
        beta: f.one(),
        line: rng.gen_range(0..lines),
        tails: [random_tail(rng, f, TAIL_LEN), Vec::new()],
        y_shift: None,
    }
}

/// A curve on the non-ordinary cone, with leading exponents `a` and `c`
/// (so `b = 2c − a`). With `force_case_two`, `a = b = c` and `β/λ ∈ F_p^*`.
pub fn random_cone<R: Rng>(rng: &mut R, f: WittRing, force_case_two: bool) -> CurveRecipe {
    let f = f.residue_ring();
    let p = f.p();
    let (a, c, beta) = if force_case_two {
        let a = rng.gen_range(1..=2);
        (a, a, f.mul(f.int(rng.gen_range(1..p) as i64), f.lambda()))
    } else {
        let a = rng.gen_range(1..=3);
        let c = rng.gen_range((a / 2 + 1)..=3);
        (a, c, random_unit(rng, f))
    };
    CurveRecipe {
        kind: RecipeKind::Cone,
        a,
        c,
        beta,
        line: 0,
        tails: [random_tail(rng, f, TAIL_LEN), random_tail(rng, f, TAIL_LEN)],
        y_shift: None,
    }
}

/// A generically almost-ordinary curve: resamples until `α_{0,1}` has finite order below `t`.
pub fn random_almost_ordinary<R: Rng>(rng: &mut R, f: WittRing, force_case_two: bool, t: usize) -> Result<CurveRecipe> {
    loop {
        let r = random_cone(rng, f, force_case_two);
        let c = r.build(f, t)?;
        if Pullbacks::new(&c).alpha0(1).t_valuation().exact().is_some() {
            return Ok(r);
        }
    }
}

/// Moves an almost-ordinary recipe off the cone: `y += s·t^{B−a}`.
pub fn with_ordinary_shift(r: &CurveRecipe, b_target: usize, s: WittScalar) -> CurveRecipe {
    let mut out = r.clone();
    out.y_shift = Some((b_target - r.a, s));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{curve_invariants, Stratum};
    use crate::crystal::SpecialEndo;
    use crate::witt::Valuation;
    use rand::SeedableRng;

    #[test]
    fn strata_of_samples() {
        let f = WittRing::auto(3, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let w = SpecialEndo::basis(3);
        for _ in 0..5 {
            let ss = random_supersingular(&mut rng, f).build(f, 40).unwrap();
            assert_eq!(curve_invariants(&ss, &w).stratum, Stratum::Supersingular);
            let ao = random_almost_ordinary(&mut rng, f, false, 60).unwrap();
            let c = ao.build(f, 60).unwrap();
            assert!(c.leading().is_some());
            assert_eq!(curve_invariants(&c, &w).stratum, Stratum::AlmostOrdinary);
            let ord = with_ordinary_shift(&ao, ao.a + 5, f.one()).build(f, 60).unwrap();
            let prof = curve_invariants(&ord, &w);
            assert_eq!(prof.stratum, Stratum::Ordinary);
            assert_eq!(prof.b, Valuation::Exact(ao.a as u64 + 5));
        }
    }

    #[test]
    fn rebuild_is_prefix_stable() {
        let f = WittRing::auto(5, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let r = random_cone(&mut rng, f, false);
        let small = r.build(f, 30).unwrap();
        let big = r.build(f, 90).unwrap().with_tprec(30);
        assert_eq!(small.coords(), big.coords());
    }
}
