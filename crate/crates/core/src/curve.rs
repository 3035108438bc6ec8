//! Formal curves `Spf k[[t]] → Spf k[[x,y,z]]` with coefficients in `F_{p²}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, UniSeries};
use crate::witt::{WittRing, WittScalar};

/// Leading data `x = β⁻¹tᵃ + …, y = −βtᵇ + …, z = 2λtᶜ + …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leading {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub beta: WittScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Supersingular,
    Special,
    General,
}

/// A formal curve over `F_{p²}` known to `t`-precision `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalCurve {
    ring: WittRing,
    xyz: [UniSeries; 3],
}

impl FormalCurve {
    /// Reduces `ring` to `F_{p²}` and truncates all three series to the
    /// shortest of them.
    pub fn from_series(ring: WittRing, x: UniSeries, y: UniSeries, z: UniSeries) -> Self {
        let f = ring.residue_ring();
        let t = x.known_below().min(y.known_below()).min(z.known_below());
        let red = |s: UniSeries| UniSeries::from_coeffs(f, s.coeffs()[..t].to_vec());
        FormalCurve { ring: f, xyz: [red(x), red(y), red(z)] }
    }

    /// `x = β⁻¹tᵃ + Σ tails_x[k] t^{a+1+k}` and likewise for `y`, `z`.
    pub fn normal_form(ring: WittRing, a: usize, b: usize, c: usize, beta: WittScalar, tails: [&[WittScalar]; 3], tprec: usize) -> Result<Self> {
        let f = ring.residue_ring();
        let beta = f.coerce(beta);
        if a == 0 || b == 0 || c == 0 || a + b != 2 * c {
            return Err(Error::Config(format!("leading exponents need a + b = 2c > 0, got ({a},{b},{c})")));
        }
        if !f.is_unit(beta) {
            return Err(Error::Config("leading coefficient beta must be nonzero".into()));
        }
        let lead = [f.inv(beta)?, f.neg(beta), f.mul(f.int(2), f.lambda())];
        let ords = [a, b, c];
        let xyz: [UniSeries; 3] = std::array::from_fn(|v| {
            let mut s = UniSeries::zero(f, tprec);
            s.set_coeff(ords[v], lead[v]);
            for (k, t) in tails[v].iter().enumerate() {
                s.set_coeff(ords[v] + 1 + k, *t);
            }
            s
        });
        Ok(FormalCurve { ring: f, xyz })
    }

    /// The line `t ↦ t·v`.
    pub fn line(ring: WittRing, dir: [WittScalar; 3], tprec: usize) -> Self {
        let f = ring.residue_ring();
        let xyz = dir.map(|c| UniSeries::monomial(f, tprec, 1, c));
        FormalCurve { ring: f, xyz }
    }

    /// The curve `t ↦ φ(t)·v` for a series `φ`.
    pub fn along(ring: WittRing, dir: [WittScalar; 3], phi: &UniSeries) -> Self {
        let f = ring.residue_ring();
        let xyz = dir.map(|c| UniSeries::from_coeffs(f, phi.coeffs().to_vec()).scale(c));
        FormalCurve { ring: f, xyz }
    }

    pub fn ring(&self) -> WittRing {
        self.ring
    }
    pub fn tprec(&self) -> usize {
        self.xyz[0].known_below()
    }
    pub fn x(&self) -> &UniSeries {
        &self.xyz[0]
    }
    pub fn y(&self) -> &UniSeries {
        &self.xyz[1]
    }
    pub fn z(&self) -> &UniSeries {
        &self.xyz[2]
    }
    pub fn coords(&self) -> &[UniSeries; 3] {
        &self.xyz
    }

    pub fn with_tprec(&self, t: usize) -> Self {
        let xyz = self.xyz.clone().map(|s| {
            let mut c = s.coeffs().to_vec();
            c.resize(t, WittScalar::ZERO);
            UniSeries::from_coeffs(self.ring, c)
        });
        FormalCurve { ring: self.ring, xyz }
    }

    /// Add `c·t^k` to coordinate `v`.
    pub fn perturbed(&self, v: usize, k: usize, c: WittScalar) -> Self {
        let mut out = self.clone();
        let cur = out.xyz[v].coeff(k);
        out.xyz[v].set_coeff(k, self.ring.add(cur, c));
        out
    }

    /// Smallest `t`-order among the three coordinates.
    pub fn min_order(&self) -> Option<usize> {
        self.xyz.iter().filter_map(|s| s.order()).min()
    }

    /// Leading data when the curve is in the normal form `(a, b, c, β)`.
    pub fn leading(&self) -> Option<Leading> {
        let f = self.ring;
        let (a, b, c) = (self.xyz[0].order()?, self.xyz[1].order()?, self.xyz[2].order()?);
        if a + b != 2 * c {
            return None;
        }
        let beta = f.inv(self.xyz[0].coeff(a)).ok()?;
        let ok_y = self.xyz[1].coeff(b) == f.neg(beta);
        let ok_z = self.xyz[2].coeff(c) == f.mul(f.int(2), f.lambda());
        (ok_y && ok_z).then_some(Leading { a, b, c, beta })
    }

    /// Table-of-positions test on the leading data.
    pub fn position(&self) -> Result<Position> {
        let l = self.leading().ok_or_else(|| Error::Precondition("curve is not in normal form".into()))?;
        Ok(classify_leading(self.ring, &l))
    }

    /// Position read off the tangent direction `v`: supersingular when `v`
    /// and `v^{(p)}` agree up to scalar, special when `v` and `v^{(p²)}` do.
    pub fn position_by_direction(&self) -> Option<Position> {
        let m = self.min_order()?;
        let v: [WittScalar; 3] = std::array::from_fn(|i| self.xyz[i].coeff(m));
        let f = self.ring;
        let vp = v.map(|c| f.frobenius(c));
        let vpp = vp.map(|c| f.frobenius(c));
        if proportional(f, &v, &vp) {
            Some(Position::Supersingular)
        } else if proportional(f, &v, &vpp) {
            Some(Position::Special)
        } else {
            Some(Position::General)
        }
    }

    /// Substitute the curve into a series. Coefficients are reduced mod `p`;
    /// the result is flagged lossy when dropped monomials of degree `≥ D`
    /// could contribute below the `t`-precision.
    pub fn substitute(&self, s: &TruncatedSeries) -> Result<UniSeries> {
        if s.pdenom() != 0 {
            return Err(Error::Precondition("substitution needs an integral series".into()));
        }
        let f = self.ring;
        let t = self.tprec();
        let mut out = UniSeries::zero(f, t);
        let mut cache = PowerCache::new(self);
        for (e, c) in s.terms() {
            let c = f.coerce(*c);
            if c.is_zero() {
                continue;
            }
            let m = cache.monomial(e);
            out.add_scaled(&m, c);
        }
        let minord = self.min_order().unwrap_or(t);
        if (s.bound() as usize).saturating_mul(minord.max(1)) < t || s.lossy() {
            out.mark_lossy();
        }
        Ok(out)
    }

    pub fn to_json(&self) -> CurveJson {
        let ser = |s: &UniSeries| s.coeffs().iter().map(|c| ScalarJson::Pair([c.a as i64, c.b as i64])).collect();
        match self.leading() {
            Some(l) if self.matches_normal(&l) => {
                let tail = |v: usize, o: usize| -> Vec<ScalarJson> {
                    self.xyz[v].coeffs().iter().skip(o + 1).map(|c| ScalarJson::Pair([c.a as i64, c.b as i64])).collect()
                };
                CurveJson {
                    a: Some(l.a),
                    b: Some(l.b),
                    c: Some(l.c),
                    beta: Some(ScalarJson::Pair([l.beta.a as i64, l.beta.b as i64])),
                    tails: Some(TailsJson { x: tail(0, l.a), y: tail(1, l.b), z: tail(2, l.c) }),
                    series: None,
                    tprec: Some(self.tprec()),
                }
            }
            _ => CurveJson {
                a: None,
                b: None,
                c: None,
                beta: None,
                tails: None,
                series: Some(TailsJson { x: ser(&self.xyz[0]), y: ser(&self.xyz[1]), z: ser(&self.xyz[2]) }),
                tprec: Some(self.tprec()),
            },
        }
    }

    fn matches_normal(&self, l: &Leading) -> bool {
        let ords = [l.a, l.b, l.c];
        (0..3).all(|v| self.xyz[v].coeffs()[..ords[v]].iter().all(|c| c.is_zero()))
    }

    /// Build from JSON; `tprec` overrides the stored precision when given.
    pub fn from_json(ring: WittRing, j: &CurveJson, tprec: Option<usize>) -> Result<Self> {
        let f = ring.residue_ring();
        let conv = |v: &[ScalarJson]| -> Result<Vec<WittScalar>> { v.iter().map(|s| s.to_scalar(f)).collect() };
        let t = tprec.or(j.tprec).unwrap_or(64);
        if let Some(series) = &j.series {
            let mk = |v: &[ScalarJson]| -> Result<UniSeries> {
                let mut c = conv(v)?;
                c.resize(t, WittScalar::ZERO);
                Ok(UniSeries::from_coeffs(f, c))
            };
            return Ok(FormalCurve::from_series(f, mk(&series.x)?, mk(&series.y)?, mk(&series.z)?));
        }
        let (a, b, c) = match (j.a, j.b, j.c) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::Parse("curve JSON needs a, b, c or explicit series".into())),
        };
        let beta = j.beta.as_ref().ok_or_else(|| Error::Parse("curve JSON needs beta".into()))?.to_scalar(f)?;
        let empty = TailsJson::default();
        let tails = j.tails.as_ref().unwrap_or(&empty);
        let (tx, ty, tz) = (conv(&tails.x)?, conv(&tails.y)?, conv(&tails.z)?);
        FormalCurve::normal_form(f, a, b, c, beta, [&tx, &ty, &tz], t)
    }
}

fn proportional(f: WittRing, u: &[WittScalar; 3], v: &[WittScalar; 3]) -> bool {
    (0..3).all(|i| (0..3).all(|j| f.sub(f.mul(u[i], v[j]), f.mul(u[j], v[i])).is_zero()))
}

/// `β/λ ∈ F_p^*`
pub fn beta_over_lambda_in_fp(f: WittRing, beta: WittScalar) -> bool {
    let b = f.coerce(beta);
    b.a % f.p() == 0 && b.b % f.p() != 0
}

pub fn classify_leading(f: WittRing, l: &Leading) -> Position {
    if l.a != l.b || l.b != l.c {
        return Position::Supersingular;
    }
    if beta_over_lambda_in_fp(f, l.beta) {
        Position::Supersingular
    } else {
        // β ∈ F_{p²}^* always holds for representable curves.
        Position::Special
    }
}

/// Cached powers of the three coordinate series.
pub struct PowerCache<'a> {
    curve: &'a FormalCurve,
    pows: [Vec<UniSeries>; 3],
}

impl<'a> PowerCache<'a> {
    pub fn new(curve: &'a FormalCurve) -> Self {
        let one = UniSeries::monomial(curve.ring, curve.tprec(), 0, curve.ring.one());
        PowerCache { curve, pows: std::array::from_fn(|_| vec![one.clone()]) }
    }

    pub fn power(&mut self, v: usize, k: usize) -> UniSeries {
        while self.pows[v].len() <= k {
            let next = self.pows[v].last().unwrap().mul(&self.curve.xyz[v]);
            self.pows[v].push(next);
        }
        self.pows[v][k].clone()
    }

    pub fn monomial(&mut self, e: &[u32; 3]) -> UniSeries {
        let mut m = self.power(0, e[0] as usize);
        for v in 1..3 {
            if e[v] > 0 {
                m = m.mul(&self.power(v, e[v] as usize));
            }
        }
        m
    }
}

/// A scalar of `F_{p²}` (or `W_N`) in JSON: `[a, b]` for `a + bλ`, or
/// little-endian base-`p` digit lists `{"a": [...], "b": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Pair([i64; 2]),
    Digits { a: Vec<u64>, b: Vec<u64> },
}

impl ScalarJson {
    pub fn to_scalar(&self, ring: WittRing) -> Result<WittScalar> {
        match self {
            ScalarJson::Pair([a, b]) => Ok(ring.from_parts(*a, *b)),
            ScalarJson::Digits { a, b } => ring.from_digits(a, b),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailsJson {
    #[serde(default)]
    pub x: Vec<ScalarJson>,
    #[serde(default)]
    pub y: Vec<ScalarJson>,
    #[serde(default)]
    pub z: Vec<ScalarJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ScalarJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tails: Option<TailsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<TailsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tprec: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::Crystal;
    use crate::witt::Valuation;

    fn f3() -> WittRing {
        WittRing::auto(3, 1).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let r = WittRing::auto(3, 2).unwrap();
        let f = f3();
        let c = Crystal::new(r, 12).unwrap();
        let xy = c.var_pow(0, 0).mul(&c.var_pow(1, 0));
        let curve = FormalCurve::line(f, [f.one(), f.one(), f.zero()], 10);
        let s = curve.substitute(&xy).unwrap();
        assert_eq!(s.t_valuation(), Valuation::Exact(2));
        assert_eq!(s.coeffs().iter().filter(|c| !c.is_zero()).count(), 1);

        let lam = f.lambda();
        let ss = FormalCurve::line(f, [f.inv(lam).unwrap(), f.neg(lam), f.mul(f.int(2), lam)], 30);
        assert!(ss.substitute(&c.beta(0)).unwrap().is_zero());
        assert!(ss.substitute(&c.alpha(0, 1)).unwrap().is_zero());
    }

    #[test]
    fn beta0_pullback_valuation() {
        let r = WittRing::auto(3, 2).unwrap();
        let f = f3();
        let c = Crystal::new(r, 12).unwrap();
        let beta = f.lambda();
        let curve = FormalCurve::normal_form(f, 1, 1, 1, beta, [&[], &[f.one()], &[]], 10).unwrap();
        assert_eq!(curve.substitute(&c.beta(0)).unwrap().t_valuation(), Valuation::Exact(3));
    }

    #[test]
    fn substitution_is_multiplicative() {
        let r = WittRing::auto(3, 2).unwrap();
        let f = f3();
        let c = Crystal::new(r, 20).unwrap();
        let curve = FormalCurve::normal_form(f, 1, 3, 2, f.from_parts(1, 1), [&[f.one(), f.lambda()], &[f.int(2)], &[f.one()]], 40).unwrap();
        let (a, b) = (c.alpha(0, 1), c.beta(0));
        let lhs = curve.substitute(&a.mul(&b)).unwrap();
        let rhs = curve.substitute(&a).unwrap().mul(&curve.substitute(&b).unwrap());
        assert_eq!(lhs.coeffs(), rhs.coeffs());
    }

    #[test]
    fn positions() {
        let f = f3();
        let mk = |a, b, c, beta| FormalCurve::normal_form(f, a, b, c, beta, [&[], &[], &[]], 10).unwrap();
        assert_eq!(mk(1, 3, 2, f.one()).position().unwrap(), Position::Supersingular);
        assert_eq!(mk(1, 1, 1, f.lambda()).position().unwrap(), Position::Supersingular);
        assert_eq!(mk(1, 1, 1, f.one()).position().unwrap(), Position::Special);
        for beta in [f.one(), f.lambda(), f.from_parts(1, 1), f.from_parts(2, 1)] {
            let c = mk(1, 1, 1, beta);
            assert_eq!(c.position_by_direction(), Some(c.position().unwrap()));
        }
        assert_eq!(mk(1, 3, 2, f.one()).position_by_direction(), Some(Position::Supersingular));
    }

    #[test]
    fn json_round_trip() {
        let f = f3();
        let c = FormalCurve::normal_form(f, 1, 1, 1, f.one(), [&[f.one()], &[], &[f.lambda()]], 12).unwrap();
        let j = c.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: CurveJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FormalCurve::from_json(f, &back, None).unwrap(), c);
        let axis = FormalCurve::line(f, [f.one(), f.zero(), f.zero()], 8);
        let j = axis.to_json();
        assert!(j.series.is_some());
        assert_eq!(FormalCurve::from_json(f, &j, None).unwrap(), axis);
    }
}
