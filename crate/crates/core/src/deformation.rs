//! Deformation loci `D_n(ω)`, their pullbacks along formal curves, and the
//! decay invariants built from them.
//!
//! All pullbacks are computed in `F_{p²}[[t]]`. The pullback of `σ^s(f)` is
//! the `p^s`-th power of the pullback of `f`, so every generator `α_{i,j}`,
//! `β_j`, `x^{[j]}` is a Frobenius twist of a handful of base series.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::admissible::{g_series, trail_choices, walk_cores, Atom, Star};
use crate::crystal::{Crystal, SpecialEndo};
use crate::curve::{beta_over_lambda_in_fp, FormalCurve, Leading, Position};
use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, UniSeries};
use crate::witt::{Valuation, WittRing, WittScalar};

/// Generic Newton stratum of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Supersingular,
    AlmostOrdinary,
    Ordinary,
}

/// A closed-form prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Finite(u64),
    Infinite,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

pub fn compare(pred: Predicted, got: Valuation) -> Agreement {
    match (pred, got) {
        (Predicted::Finite(v), Valuation::Exact(w)) => {
            if v == w {
                Agreement::Agree
            } else {
                Agreement::Disagree
            }
        }
        (Predicted::Finite(v), Valuation::AtLeast(t)) => {
            if v < t {
                Agreement::Disagree
            } else {
                Agreement::Inconclusive
            }
        }
        (Predicted::Infinite, Valuation::AtLeast(_)) => Agreement::Agree,
        (Predicted::Infinite, Valuation::Exact(_)) => Agreement::Disagree,
        (Predicted::Unknown, _) => Agreement::Inconclusive,
    }
}

/// Pullbacks of the generator series along one curve.
#[derive(Debug)]
pub struct Pullbacks {
    ring: WittRing,
    t: usize,
    imax: u32,
    xyz: [UniSeries; 3],
    twisted_xyz: Vec<[UniSeries; 3]>,
    alpha0: Vec<UniSeries>,
    beta0: UniSeries,
    atoms: HashMap<Atom, UniSeries>,
}

impl Pullbacks {
    pub fn new(curve: &FormalCurve) -> Self {
        let f = curve.ring();
        let p = f.p() as usize;
        let t = curve.tprec();
        let m0 = curve.min_order().unwrap_or(t).max(1);
        let mut imax = 0u32;
        while p.pow(imax + 1).saturating_mul(m0) < t {
            imax += 1;
        }
        let xyz = curve.coords().clone();
        let twisted_xyz: Vec<[UniSeries; 3]> = (0..=imax).map(|i| xyz.clone().map(|s| s.sigma_twist(i))).collect();
        let inv2e = f.inv(f.mul(f.int(2), f.teichmuller(f.eps_residue()))).expect("unit");
        let inv4e = f.inv(f.mul(f.int(4), f.teichmuller(f.eps_residue()))).expect("unit");
        let [x, y, z] = &xyz;
        let beta0 = x.mul(y).add(&z.mul(z).scale(inv4e));
        let alpha0: Vec<UniSeries> = (0..=imax)
            .map(|k| {
                let [xk, yk, zk] = &twisted_xyz[k as usize];
                x.mul(yk).add(&xk.mul(y)).add(&z.mul(zk).scale(inv2e))
            })
            .collect();
        let mut atoms = HashMap::new();
        for i in 0..=imax {
            let b = beta0.sigma_twist(i);
            if !b.is_zero() {
                atoms.insert(Atom::Single(i), b);
            }
            for j in i + 1..=imax {
                let a = alpha0[(j - i) as usize].sigma_twist(i);
                if !a.is_zero() {
                    atoms.insert(Atom::Pair(i, j), a);
                }
            }
        }
        Pullbacks { ring: f, t, imax, xyz, twisted_xyz, alpha0, beta0, atoms }
    }

    pub fn tprec(&self) -> usize {
        self.t
    }
    pub fn ring(&self) -> WittRing {
        self.ring
    }
    /// Pullback of `α_{0,k}` (zero beyond the twist range).
    pub fn alpha0(&self, k: u32) -> UniSeries {
        self.alpha0.get(k as usize).cloned().unwrap_or_else(|| UniSeries::zero(self.ring, self.t))
    }
    pub fn beta0(&self) -> &UniSeries {
        &self.beta0
    }
    pub fn xyz(&self) -> &[UniSeries; 3] {
        &self.xyz
    }

    fn digit_table(&self, omega: &SpecialEndo) -> Vec<[WittScalar; 5]> {
        let count = self.imax as usize + 3;
        let d = omega.digits(self.ring.p(), count);
        (0..count).map(|k| std::array::from_fn(|j| self.ring.int(d[j][k] as i64))).collect()
    }

    /// Pullback of `D_n(ω)` summed directly over admissible systems.
    pub fn defo(&self, n: u32, omega: &SpecialEndo) -> UniSeries {
        let f = self.ring;
        let t = self.t;
        let digits = self.digit_table(omega);
        let zero5 = [WittScalar::ZERO; 5];
        let dig = |k: u32| digits.get(k as usize).copied().unwrap_or(zero5);
        let half = f.inv(f.int(2)).expect("unit");
        let linv = f.inv(f.lambda()).expect("unit");
        let sgn = |k: u32| if k % 2 == 0 { f.one() } else { f.neg(f.one()) };
        let pref = |len: u32| f.mul(sgn(len + 1), half);
        let mut acc = UniSeries::zero(f, t);
        let one = UniSeries::monomial(f, t, 0, f.one());
        let imax = self.imax;
        walk_cores(
            imax,
            (one, 0u32),
            &mut |(prod, len), a| {
                if *len == 0 && a.first() % 2 == 1 {
                    return None;
                }
                let s = self.atoms.get(&a)?;
                let np = prod.mul(s);
                (!np.is_zero()).then_some((np, len + 1))
            },
            &mut |atoms, (prod, len)| {
                let len = *len;
                if len > 0 && len >= n {
                    let dk = dig(len - n);
                    let mx = atoms.last().unwrap().last();
                    let c = f.sub(f.mul(dk[0], sgn(mx)), f.mul(dk[1], linv));
                    if !c.is_zero() {
                        acc.add_scaled(prod, f.mul(pref(len), c));
                    }
                }
                let l = len + 1;
                if l >= n {
                    let dk = dig(l - n);
                    if dk[2..].iter().all(|c| c.is_zero()) {
                        return;
                    }
                    for j in trail_choices(atoms, imax) {
                        if atoms.is_empty() && j % 2 == 1 {
                            continue;
                        }
                        let mut term = UniSeries::zero(f, t);
                        for v in 0..3 {
                            term.add_scaled(&self.twisted_xyz[j as usize][v], dk[2 + v]);
                        }
                        if term.is_zero() {
                            continue;
                        }
                        acc.add_scaled(&prod.mul(&term), f.mul(pref(l), linv));
                    }
                }
            },
        );
        acc
    }

    /// Pullback of `D_n(ω)` through the recursion on `D_1(ω)`:
    /// `D_n = (−1)^{n−1} Σ_{|(I,J)|=n−1, min even} (−1)^{max+1} α_I β_J D_1^{[max+1]}`.
    pub fn defo_recursive(&self, n: u32, omega: &SpecialEndo) -> UniSeries {
        let d1 = self.defo(1, omega);
        self.defo_from_d1(n, &d1)
    }

    pub fn defo_from_d1(&self, n: u32, d1: &UniSeries) -> UniSeries {
        if n <= 1 {
            return d1.clone();
        }
        let f = self.ring;
        let t = self.t;
        let target = n - 1;
        let sgn = |k: u32| if k % 2 == 0 { f.one() } else { f.neg(f.one()) };
        let mut acc = UniSeries::zero(f, t);
        let one = UniSeries::monomial(f, t, 0, f.one());
        let mut twists: HashMap<u32, UniSeries> = HashMap::new();
        walk_cores(
            self.imax,
            (one, 0u32),
            &mut |(prod, len), a| {
                if *len == 0 && a.first() % 2 == 1 {
                    return None;
                }
                if *len >= target {
                    return None;
                }
                let s = self.atoms.get(&a)?;
                let np = prod.mul(s);
                (!np.is_zero()).then_some((np, len + 1))
            },
            &mut |atoms, (prod, len)| {
                if *len != target {
                    return;
                }
                let mx = atoms.last().unwrap().last();
                let tw = twists.entry(mx + 1).or_insert_with(|| d1.sigma_twist(mx + 1));
                if tw.is_zero() {
                    return;
                }
                acc.add_scaled(&prod.mul(tw), f.mul(sgn(n - 1), sgn(mx + 1)));
            },
        );
        acc
    }
}

/// `G¹_{n,even}(ω)` reduced mod `p`.
pub fn defo_divisor(n: u32, omega: &SpecialEndo, crystal: &Crystal) -> Result<TruncatedSeries> {
    let g = g_series(n, Star::Even, omega, crystal)?;
    g[0].reduce_mod_p()
}

/// `Ĉ · D_n(ω)`.
pub fn intersection_multiplicity(curve: &FormalCurve, n: u32, omega: &SpecialEndo) -> Result<Valuation> {
    if n == 0 {
        return Err(Error::Precondition("intersection multiplicity needs n ≥ 1".into()));
    }
    Ok(Pullbacks::new(curve).defo(n, omega).t_valuation())
}

/// `A_n = A(1 + p² + … + p^{2n})`, `A_{−1} = 0`.
pub fn a_n(a: u64, p: u64, n: i64) -> u64 {
    (0..=n).map(|k| a * p.pow(2 * k as u32)).sum()
}

fn geometric(p: u64, step: u32, terms: u32) -> u64 {
    (0..terms).map(|k| p.pow(step * k)).sum()
}

/// The invariants `A`, `B`, `d`, `e`, `D` of a curve and an endomorphism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub p: u64,
    pub tprec: usize,
    pub a: Valuation,
    pub b: Valuation,
    pub d: Valuation,
    pub stratum: Stratum,
    pub e_index: Option<u32>,
    pub boundary: bool,
    pub dq: Option<Valuation>,
    pub position: Option<Position>,
    pub leading: Option<[usize; 3]>,
    pub lower_bound_only: bool,
}

/// `H_e = A(1 + p^{2e−1}) + p^{2e−1}(p² − 1) d` for `e ≥ 1`.
pub fn h_e(a: u64, d: u64, p: u64, e: u32) -> u128 {
    let q = (p as u128).pow(2 * e - 1);
    a as u128 * (1 + q) + q * (p as u128 * p as u128 - 1) * d as u128
}

pub fn curve_invariants(curve: &FormalCurve, omega: &SpecialEndo) -> DecayProfile {
    let pb = Pullbacks::new(curve);
    profile_from(&pb, curve, omega)
}

pub fn profile_from(pb: &Pullbacks, curve: &FormalCurve, omega: &SpecialEndo) -> DecayProfile {
    let p = pb.ring.p();
    let a = pb.alpha0(1).t_valuation();
    let b = pb.beta0().t_valuation();
    let d1 = pb.defo(1, omega);
    let d = d1.t_valuation();
    let stratum = match (a, b) {
        (Valuation::AtLeast(_), _) => Stratum::Supersingular,
        (_, Valuation::AtLeast(_)) => Stratum::AlmostOrdinary,
        _ => Stratum::Ordinary,
    };
    let mut e_index = None;
    let mut dq = None;
    let mut boundary = false;
    if let (Stratum::Ordinary, Some(av), Some(bv), Some(dv)) = (stratum, a.exact(), b.exact(), d.exact()) {
        let lhs = (1 + p as u128) * bv as u128;
        let mut e = 0u32;
        while h_e(av, dv, p, e + 1) <= lhs {
            e += 1;
        }
        e_index = Some(e);
        if e >= 1 && h_e(av, dv, p, e) == lhs {
            boundary = true;
            dq = Some(pb.defo_from_d1(e + 1, &d1).t_valuation());
        } else {
            dq = Some(Valuation::Exact(a_n(av, p, e as i64 - 1) + dv * p.pow(2 * e)));
        }
    }
    let leading = curve.leading();
    let lower_bound_only = d.exact().is_none()
        || match stratum {
            Stratum::Supersingular => false,
            Stratum::AlmostOrdinary => a.exact().is_none(),
            Stratum::Ordinary => dq.map_or(true, |v| v.exact().is_none()),
        };
    DecayProfile {
        p,
        tprec: pb.tprec(),
        a,
        b,
        d,
        stratum,
        e_index,
        boundary,
        dq,
        position: curve.position().ok(),
        leading: leading.map(|l| [l.a, l.b, l.c]),
        lower_bound_only,
    }
}

/// Closed form for `Ĉ · D_n(ω)` by stratum.
pub fn predicted_multiplicity(profile: &DecayProfile, n: u32) -> Predicted {
    let p = profile.p;
    if n == 0 {
        return Predicted::Unknown;
    }
    if n >= 2 && profile.stratum == Stratum::Supersingular {
        return Predicted::Infinite;
    }
    let Some(d) = profile.d.exact() else { return Predicted::Unknown };
    if n == 1 {
        return Predicted::Finite(d);
    }
    let m = n - 1;
    let ao = |a: u64| a * geometric(p, 2, m) + d * p.pow(2 * m);
    match profile.stratum {
        Stratum::Supersingular => unreachable!(),
        Stratum::AlmostOrdinary => match profile.a.exact() {
            Some(a) => Predicted::Finite(ao(a)),
            None => Predicted::Unknown,
        },
        Stratum::Ordinary => {
            let (Some(a), Some(b), Some(e)) = (profile.a.exact(), profile.b.exact(), profile.e_index) else {
                return Predicted::Unknown;
            };
            if m < e {
                return Predicted::Finite(ao(a));
            }
            match profile.dq.and_then(|v| v.exact()) {
                Some(dq) => Predicted::Finite(b * geometric(p, 1, m - e) + dq * p.pow(m - e)),
                None => Predicted::Unknown,
            }
        }
    }
}

/// Case split for curves that are generically almost ordinary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum CurveCase {
    /// `a, b, c` distinct.
    SupersingularI,
    /// `a = b = c`, `β = δλ` with `δ ∈ F_p^*`; `e = A − a(p+1)`.
    SupersingularII { delta: u64, e: u64 },
    /// `a = b = c`, `β ∈ F_{p²} ∖ λF_p`; `−β + αβ⁻¹ = 2λγ`.
    SpecialNonSupersingular { alpha: u64, gamma: u64 },
}

pub fn curve_case(curve: &FormalCurve, a_val: Valuation) -> Result<(CurveCase, Leading)> {
    let l = curve.leading().ok_or_else(|| Error::Precondition("curve is not in normal form".into()))?;
    let f = curve.ring();
    let p = f.p();
    if l.a != l.b || l.b != l.c {
        return Ok((CurveCase::SupersingularI, l));
    }
    let beta = f.coerce(l.beta);
    if beta_over_lambda_in_fp(f, beta) {
        let a_big = a_val.exact().ok_or_else(|| Error::Precondition("curve lies on the supersingular locus".into()))?;
        let e = a_big
            .checked_sub(l.a as u64 * (p + 1))
            .ok_or_else(|| Error::Precondition("A below a(p+1) in case II".into()))?;
        return Ok((CurveCase::SupersingularII { delta: beta.b % p, e }, l));
    }
    let (u, v) = (beta.a % p, beta.b % p);
    let eps = f.eps_residue();
    let alpha = (u * u % p + p * p - eps * v % p * v % p) % p;
    let gamma = (p - v) % p;
    Ok((CurveCase::SpecialNonSupersingular { alpha, gamma }, l))
}

/// A basis of `L'' ⊗ Z_p` adapted to the case, with the base degree
/// `deg(b_j)` predicted for each vector (`None` when no closed form exists).
pub fn adapted_basis(case: &CurveCase, l: &Leading, a_big: u64, eps: u64, p: u64) -> ([SpecialEndo; 5], [Option<u64>; 5]) {
    let w = SpecialEndo::basis;
    let (a, b, c) = (l.a as u64, l.b as u64, l.c as u64);
    match *case {
        CurveCase::SupersingularI => ([w(1), w(2), w(3), w(4), w(5)], [Some(a_big), Some(a_big), Some(a), Some(b), Some(c)]),
        CurveCase::SupersingularII { delta, e } => {
            let d2e = (delta * delta * eps % p) as i64;
            let w3 = SpecialEndo::new([0, 0, d2e, -1, -(delta as i64)]);
            let w4 = SpecialEndo::new([0, 0, d2e, 1, 0]);
            ([w(1), w(2), w3, w4, w(5)], [Some(a_big), Some(a_big), Some(a + e), Some(a + e / 2), Some(c)])
        }
        CurveCase::SpecialNonSupersingular { alpha, gamma } => {
            let eta = SpecialEndo::new([0, 0, alpha as i64, 1, gamma as i64]);
            ([w(1), w(2), w(3), eta, w(5)], [Some(a_big), Some(a_big), Some(a), None, Some(c)])
        }
    }
}

/// `deg(p^k b) = A_{k−1} + deg(b) p^{2k}` for a basis vector of base degree `deg(b)`.
pub fn predicted_lifting_degree(a_big: u64, base: u64, p: u64, k: u32) -> u64 {
    a_n(a_big, p, k as i64 - 1) + base * p.pow(2 * k)
}

/// The largest `N` such that `p^k ω` lifts to `k[[t]]/(t^N)`.
pub fn exact_lifting_degree(pb: &Pullbacks, omega: &SpecialEndo, k: u32) -> Valuation {
    pb.defo(k + 1, omega).t_valuation()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub basis_index: usize,
    pub k: u32,
    pub computed: Valuation,
    pub predicted: Option<u64>,
    pub agreement: Agreement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub case: CurveCase,
    pub position: Position,
    pub a: u64,
    pub basis: Vec<SpecialEndo>,
    pub checks: Vec<LiftCheck>,
    /// Basis vectors certified to decay rapidly for `k ≤ n_max`.
    pub rapid: Vec<usize>,
    /// Basis vectors certified to decay very rapidly for `k ≤ n_max`.
    pub very_rapid: Vec<usize>,
    /// Every mod-`p` class with `Q′ ≡ m`, `(m/p) = 1`, has degree `≤ A/(p+1)`.
    pub first_step_split: Option<bool>,
    pub n_max: u32,
    pub inconclusive: bool,
}

/// Decay report certified by finitely many lifting-degree computations.
pub fn decay_classify(curve: &FormalCurve, n_max: u32) -> Result<DecayReport> {
    let pb = Pullbacks::new(curve);
    let f = pb.ring;
    let p = f.p();
    let a_val = pb.alpha0(1).t_valuation();
    if pb.beta0().t_valuation().exact().is_some() {
        return Err(Error::Precondition("decay classification needs a generically almost ordinary curve".into()));
    }
    let (case, l) = curve_case(curve, a_val)?;
    let a_big = a_val.exact().ok_or_else(|| Error::Precondition("curve lies on the supersingular locus".into()))?;
    let position = curve.position()?;
    let (basis, base) = adapted_basis(&case, &l, a_big, f.eps_residue(), p);
    let mut checks = Vec::new();
    let mut rapid = Vec::new();
    let mut very_rapid = Vec::new();
    let mut inconclusive = false;
    for (j, b) in basis.iter().enumerate() {
        let mut is_rapid = true;
        let mut is_very = true;
        for k in 0..=n_max {
            let got = exact_lifting_degree(&pb, b, k);
            let pred = base[j].map(|d| predicted_lifting_degree(a_big, d, p, k));
            let agreement = match pred {
                Some(v) => compare(Predicted::Finite(v), got),
                None => Agreement::Inconclusive,
            };
            if agreement == Agreement::Inconclusive && pred.is_some() {
                inconclusive = true;
            }
            match got.exact() {
                Some(g) => {
                    if g > a_n(a_big, p, k as i64) {
                        is_rapid = false;
                    }
                    let cap = a_n(a_big, p, k as i64 - 1) as u128 * (p as u128 + 1) + a_big as u128 * (p as u128).pow(2 * k);
                    if g as u128 * (p as u128 + 1) > cap {
                        is_very = false;
                    }
                }
                None => {
                    is_rapid = false;
                    is_very = false;
                }
            }
            checks.push(LiftCheck { basis_index: j, k, computed: got, predicted: pred, agreement });
        }
        if is_rapid {
            rapid.push(j);
        }
        if is_very {
            very_rapid.push(j);
        }
    }
    let first_step_split = Some(first_step_holds(&pb, a_big)?);
    Ok(DecayReport { case, position, a: a_big, basis: basis.to_vec(), checks, rapid, very_rapid, first_step_split, n_max, inconclusive })
}

/// Checks that every `ω mod p` with `Q′(ω) ≡ m` for a nonzero square `m`
/// has `deg(ω) ≤ A/(p+1)`.
pub fn first_step_holds(pb: &Pullbacks, a_big: u64) -> Result<bool> {
    let f = pb.ring;
    let p = f.p() as i64;
    let eps = f.eps_residue() as i64;
    let squares: Vec<i64> = (1..p).map(|x| x * x % p).collect();
    let mut coords = [0i64; 5];
    for idx in 0..(p.pow(5)) {
        let mut r = idx;
        for c in coords.iter_mut() {
            *c = r % p;
            r /= p;
        }
        // mod p, Q′ reduces to x₃x₄ + εx₅².
        let q = (coords[2] * coords[3] + eps * coords[4] * coords[4]).rem_euclid(p);
        if !squares.contains(&q) {
            continue;
        }
        let deg = pb.defo(1, &SpecialEndo::new(coords)).t_valuation();
        match deg.exact() {
            Some(dv) if dv * (p as u64 + 1) <= a_big => {}
            Some(_) => return Ok(false),
            None => return Err(Error::precision("first-step decay check")),
        }
    }
    Ok(true)
}

/// Tangent directions of the `p + 1` supersingular lines: the two axes and
/// `(α⁻¹, −α, 2λ)` with `α/λ ∈ F_p^*`.
pub fn ss_line_directions(f: WittRing) -> Vec<[WittScalar; 3]> {
    let mut out = vec![[f.one(), f.zero(), f.zero()], [f.zero(), f.one(), f.zero()]];
    for delta in 1..f.p() {
        let al = f.mul(f.int(delta as i64), f.lambda());
        out.push([f.inv(al).expect("unit"), f.neg(al), f.mul(f.int(2), f.lambda())]);
    }
    out
}

/// Polynomial over `F_{p²}`, lowest coefficient first.
fn poly_interpolate(f: WittRing, values: &[(WittScalar, WittScalar)]) -> Vec<WittScalar> {
    // Over F_q the indicator of a is 1 − (X − a)^{q−1}.
    let q = (f.p() * f.p()) as usize;
    let mut coeffs = vec![WittScalar::ZERO; q];
    for &(a, c) in values {
        if c.is_zero() {
            continue;
        }
        coeffs[0] = f.add(coeffs[0], c);
        // (X − a)^{q−1} = Σ_k binom(q−1, k) X^k (−a)^{q−1−k}, binom ≡ (−1)^k.
        for (k, co) in coeffs.iter_mut().enumerate() {
            let b = if k % 2 == 0 { f.one() } else { f.neg(f.one()) };
            let term = f.mul(b, f.pow(f.neg(a), (q - 1 - k) as u64));
            *co = f.sub(*co, f.mul(c, term));
        }
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
    coeffs
}

fn poly_root_multiplicity(f: WittRing, poly: &[WittScalar], r: WittScalar) -> usize {
    let mut cur = poly.to_vec();
    let mut m = 0;
    loop {
        if cur.iter().all(|c| c.is_zero()) {
            return usize::MAX;
        }
        // synthetic division by (X − r)
        let n = cur.len();
        let mut quo = vec![WittScalar::ZERO; n.saturating_sub(1)];
        let mut acc = WittScalar::ZERO;
        for i in (0..n).rev() {
            acc = f.add(f.mul(acc, r), cur[i]);
            if i > 0 {
                quo[i - 1] = acc;
            }
        }
        if !acc.is_zero() {
            return m;
        }
        m += 1;
        cur = quo;
    }
}

pub fn field_elements(f: WittRing) -> Vec<WittScalar> {
    let p = f.p();
    (0..p).flat_map(|a| (0..p).map(move |b| WittScalar::new(a, b))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataReport {
    pub p: u64,
    /// Every listed line lies on both strata germs.
    pub lines_on_locus: bool,
    /// Roots `α` of the supersingular equation on the cone chart and their multiplicities.
    pub chart_roots: Vec<(WittScalar, usize)>,
    /// Multiplicity of the remaining axis from the second chart.
    pub other_axis_multiplicity: usize,
    pub line_count: usize,
    pub all_multiplicity_two: bool,
    pub random_directions_tested: usize,
    pub random_directions_ok: bool,
}

impl StrataReport {
    pub fn passed(&self) -> bool {
        self.lines_on_locus && self.all_multiplicity_two && self.line_count as u64 == self.p + 1 && self.random_directions_ok
    }
}

/// The supersingular germ as `p + 1` double lines, checked on the cone
/// `xy + z²/4ε = 0` through two charts plus random transversal directions.
pub fn check_strata(ring: WittRing, samples: usize, seed: u64) -> Result<StrataReport> {
    use rand::{Rng, SeedableRng};
    let f = ring.residue_ring();
    let p = f.p();
    let bound = (2 * p + 4) as u32;
    let crystal = Crystal::new(f, bound)?;
    let (nonord, ss) = crystal.strata_equations();
    let t = (p + 3) as usize;
    let on_both = |dir: [WittScalar; 3]| -> Result<bool> {
        let c = FormalCurve::line(f, dir, t);
        Ok(c.substitute(&nonord)?.is_zero() && c.substitute(&ss)?.is_zero())
    };
    let lines = ss_line_directions(f);
    let mut lines_on_locus = true;
    for d in &lines {
        lines_on_locus &= on_both(*d)?;
    }
    let elems = field_elements(f);
    let two_lam = f.mul(f.int(2), f.lambda());
    // chart (s, −α²s, 2λαs) and its mirror (−α²s, s, 2λαs)
    let chart = |al: WittScalar, mirror: bool| -> Result<WittScalar> {
        let a2 = f.neg(f.mul(al, al));
        let dir = if mirror { [a2, f.one(), f.mul(two_lam, al)] } else { [f.one(), a2, f.mul(two_lam, al)] };
        let c = FormalCurve::line(f, dir, t);
        debug_assert!(c.substitute(&nonord)?.is_zero());
        Ok(c.substitute(&ss)?.coeff(p as usize + 1))
    };
    let mut vals = Vec::new();
    let mut mvals = Vec::new();
    for &al in &elems {
        vals.push((al, chart(al, false)?));
        mvals.push((al, chart(al, true)?));
    }
    let poly = poly_interpolate(f, &vals);
    let mpoly = poly_interpolate(f, &mvals);
    let mut chart_roots = Vec::new();
    for &(al, v) in &vals {
        if v.is_zero() {
            chart_roots.push((al, poly_root_multiplicity(f, &poly, al)));
        }
    }
    let other_axis_multiplicity = poly_root_multiplicity(f, &mpoly, f.zero());
    let line_count = chart_roots.len() + usize::from(other_axis_multiplicity > 0);
    let all_multiplicity_two = chart_roots.iter().all(|&(_, m)| m == 2) && other_axis_multiplicity == 2;
    // chart roots must be exactly the listed directions
    let mut expected: Vec<WittScalar> = vec![f.zero()];
    expected.extend((1..p).map(|d| f.mul(f.int(d as i64), f.lambda())));
    let mut roots: Vec<WittScalar> = chart_roots.iter().map(|r| r.0).collect();
    roots.sort();
    expected.sort();
    let roots_match = roots == expected;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let proportional = |u: &[WittScalar; 3], v: &[WittScalar; 3]| (0..3).all(|i| (0..3).all(|j| f.sub(f.mul(u[i], v[j]), f.mul(u[j], v[i])).is_zero()));
    let mut tested = 0;
    let mut random_ok = true;
    while tested < samples {
        let v: [WittScalar; 3] = std::array::from_fn(|_| WittScalar::new(rng.gen_range(0..p), rng.gen_range(0..p)));
        if v.iter().all(|c| c.is_zero()) || lines.iter().any(|l| proportional(l, &v)) {
            continue;
        }
        tested += 1;
        if on_both(v)? {
            random_ok = false;
        }
    }
    Ok(StrataReport {
        p,
        lines_on_locus: lines_on_locus && roots_match,
        chart_roots,
        other_axis_multiplicity,
        line_count,
        all_multiplicity_two,
        random_directions_tested: tested,
        random_directions_ok: random_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> WittRing {
        WittRing::auto(p, 1).unwrap()
    }

    fn beta1(t: usize) -> FormalCurve {
        let r = f(3);
        FormalCurve::normal_form(r, 1, 1, 1, r.one(), [&[], &[], &[]], t).unwrap()
    }

    #[test]
    fn direct_matches_symbolic() {
        let r = WittRing::auto(3, 2).unwrap();
        let crystal = Crystal::new(r, 24).unwrap();
        let fr = f(3);
        let curve = FormalCurve::normal_form(fr, 1, 3, 2, fr.from_parts(1, 1), [&[fr.one()], &[fr.lambda(), fr.one()], &[fr.int(2)]], 22).unwrap();
        let pb = Pullbacks::new(&curve);
        for omega in [SpecialEndo::basis(1), SpecialEndo::basis(3), SpecialEndo::new([1, 2, 0, 1, 2]), SpecialEndo::new([-1, 0, 4, 0, 1])] {
            for n in 1..=2 {
                let sym = defo_divisor(n, &omega, &crystal).unwrap();
                let via = curve.substitute(&sym).unwrap();
                assert!(!via.lossy());
                assert_eq!(via.coeffs(), pb.defo(n, &omega).coeffs(), "n={n} omega={omega}");
            }
        }
    }

    #[test]
    fn recursion_matches_direct() {
        let fr = f(3);
        let curve = FormalCurve::normal_form(fr, 1, 1, 1, fr.one(), [&[fr.one(), fr.lambda()], &[fr.int(2)], &[]], 60).unwrap();
        let pb = Pullbacks::new(&curve);
        for omega in [SpecialEndo::basis(2), SpecialEndo::basis(4), SpecialEndo::new([2, 1, 1, 0, 2])] {
            for n in 1..=3 {
                assert_eq!(pb.defo(n, &omega), pb.defo_recursive(n, &omega), "n={n}");
            }
        }
    }

    #[test]
    fn beta1_examples() {
        let curve = beta1(40);
        let prof = curve_invariants(&curve, &SpecialEndo::basis(3));
        assert_eq!(prof.a, Valuation::Exact(4));
        assert_eq!(prof.d, Valuation::Exact(1));
        let w3 = SpecialEndo::basis(3);
        assert_eq!(intersection_multiplicity(&curve, 1, &w3).unwrap(), Valuation::Exact(1));
        assert_eq!(intersection_multiplicity(&curve, 2, &w3).unwrap(), Valuation::Exact(13));
        assert!(matches!(intersection_multiplicity(&curve, 1, &SpecialEndo::new([0; 5])).unwrap(), Valuation::AtLeast(_)));
        assert_eq!(intersection_multiplicity(&curve, 1, &SpecialEndo::basis(1)).unwrap(), Valuation::Exact(4));
    }

    #[test]
    fn supersingular_line_profile() {
        let r = f(3);
        let lam = r.lambda();
        let line = FormalCurve::line(r, [r.inv(lam).unwrap(), r.neg(lam), r.mul(r.int(2), lam)], 30);
        let prof = curve_invariants(&line, &SpecialEndo::basis(3));
        assert!(prof.a.exact().is_none() && prof.b.exact().is_none());
        assert_eq!(prof.stratum, Stratum::Supersingular);
        assert_eq!(predicted_multiplicity(&prof, 2), Predicted::Infinite);
    }

    #[test]
    fn distinct_exponents_a() {
        let r = f(3);
        let c = FormalCurve::normal_form(r, 1, 3, 2, r.one(), [&[], &[], &[]], 30).unwrap();
        let a = Pullbacks::new(&c).alpha0(1).t_valuation();
        assert_eq!(a, Valuation::Exact(3 + 3));
    }

    #[test]
    fn predicted_values() {
        let prof = DecayProfile {
            p: 3,
            tprec: 200,
            a: Valuation::Exact(4),
            b: Valuation::AtLeast(200),
            d: Valuation::Exact(1),
            stratum: Stratum::AlmostOrdinary,
            e_index: None,
            boundary: false,
            dq: None,
            position: None,
            leading: None,
            lower_bound_only: false,
        };
        assert_eq!(predicted_multiplicity(&prof, 3), Predicted::Finite(121));
        assert_eq!(predicted_multiplicity(&prof, 2), Predicted::Finite(13));
    }

    #[test]
    fn strata_geometry() {
        for p in [3, 5] {
            let rep = check_strata(WittRing::auto(p, 2).unwrap(), 100, 7).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn shift_identity_on_pullbacks() {
        let curve = beta1(50);
        let pb = Pullbacks::new(&curve);
        let w = SpecialEndo::new([1, 0, 2, 1, 0]);
        assert_eq!(pb.defo(1, &w.scaled(3)), pb.defo(2, &w));
    }

    #[test]
    fn lifting_degrees_beta1() {
        let curve = beta1(45);
        let pb = Pullbacks::new(&curve);
        assert_eq!(exact_lifting_degree(&pb, &SpecialEndo::basis(1), 0), Valuation::Exact(4));
        assert_eq!(exact_lifting_degree(&pb, &SpecialEndo::basis(3), 0), Valuation::Exact(1));
        assert_eq!(exact_lifting_degree(&pb, &SpecialEndo::basis(4), 1), Valuation::Exact(13));
    }
}
