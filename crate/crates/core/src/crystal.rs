//! The rank-5 crystal at a superspecial point: the matrix `F` with
//! `Frob = (I + F)σ`, its building blocks `B`, `C`, `E`, `D_{i,j}`, the
//! generator series `α_{i,j}`, `β_i`, the form `Q′` and the horizontal
//! extension `F_∞ = Π_i (I + F^{[i]})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SeriesMatrix;
use crate::series::TruncatedSeries;
use crate::witt::{WittRing, WittScalar};

/// Chart data: the ring and the total-degree bound of every series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crystal {
    ring: WittRing,
    bound: u32,
}

fn sign(k: u32) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

impl Crystal {
    pub fn new(ring: WittRing, bound: u32) -> Result<Self> {
        if bound < 2 {
            return Err(Error::Config("degree bound must be at least 2".into()));
        }
        Ok(Crystal { ring, bound })
    }

    pub fn ring(&self) -> WittRing {
        self.ring
    }
    pub fn bound(&self) -> u32 {
        self.bound
    }
    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    /// Same chart over the residue field.
    pub fn mod_p(&self) -> Crystal {
        Crystal { ring: self.ring.residue_ring(), bound: self.bound }
    }

    pub fn with_bound(&self, bound: u32) -> Crystal {
        Crystal { ring: self.ring, bound }
    }

    pub fn inv(&self, s: WittScalar) -> WittScalar {
        self.ring.inv(s).expect("unit constant")
    }

    pub fn inv_lambda(&self) -> WittScalar {
        self.inv(self.ring.lambda())
    }
    pub fn half(&self) -> WittScalar {
        self.inv(self.ring.int(2))
    }
    pub fn eps(&self) -> WittScalar {
        WittScalar::new(self.ring.eps(), 0)
    }
    /// `1/(2ε)`.
    pub fn inv_2eps(&self) -> WittScalar {
        self.inv(self.ring.mul(self.ring.int(2), self.eps()))
    }
    /// `1/(4ε)`.
    pub fn inv_4eps(&self) -> WittScalar {
        self.inv(self.ring.mul(self.ring.int(4), self.eps()))
    }

    pub fn zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(self.ring, self.bound)
    }
    pub fn one(&self) -> TruncatedSeries {
        TruncatedSeries::one(self.ring, self.bound)
    }
    pub fn constant(&self, c: WittScalar) -> TruncatedSeries {
        TruncatedSeries::constant(self.ring, self.bound, c)
    }

    /// `x^{[i]}`, `y^{[i]}`, `z^{[i]}` for `v = 0, 1, 2`.
    pub fn var_pow(&self, v: usize, i: u32) -> TruncatedSeries {
        let mut e = [0, 0, 0];
        e[v] = self.p().pow(i) as u32;
        if e[v] as u64 != self.p().pow(i) || e[v] >= self.bound {
            return self.zero();
        }
        TruncatedSeries::monomial(self.ring, self.bound, e, self.ring.one())
    }

    /// `α_{i,j} = x^{[i]}y^{[j]} + x^{[j]}y^{[i]} + z^{[i]}z^{[j]}/(2ε)`.
    pub fn alpha(&self, i: u32, j: u32) -> TruncatedSeries {
        let (x, y, z) = (0, 1, 2);
        let a = self.var_pow(x, i).mul(&self.var_pow(y, j));
        let b = self.var_pow(x, j).mul(&self.var_pow(y, i));
        let c = self.var_pow(z, i).mul(&self.var_pow(z, j)).scale(self.inv_2eps());
        a.add(&b).add(&c)
    }

    /// Checked variant of [`Crystal::alpha`].
    pub fn alpha_checked(&self, i: u32, j: u32) -> Result<TruncatedSeries> {
        let p = self.p();
        if p.pow(i) + p.pow(j) >= self.bound as u64 {
            return Err(Error::Degree(format!("α_{{{i},{j}}} has degree ≥ {}", self.bound)));
        }
        Ok(self.alpha(i, j))
    }

    /// `β_i = x^{[i]}y^{[i]} + z^{2[i]}/(4ε)`.
    pub fn beta(&self, i: u32) -> TruncatedSeries {
        let a = self.var_pow(0, i).mul(&self.var_pow(1, i));
        let z = self.var_pow(2, i);
        a.add(&z.mul(&z).scale(self.inv_4eps()))
    }

    /// `D_{i,j} = [[(−1)^{i+j}, (−1)^{i+1}/λ], [(−1)^j λ, −1]]`.
    pub fn d_scalars(&self, i: u32, j: u32) -> [WittScalar; 4] {
        let r = self.ring;
        [
            r.int(sign(i + j)),
            r.scale(self.inv_lambda(), sign(i + 1)),
            r.scale(r.lambda(), sign(j)),
            r.int(-1),
        ]
    }

    pub fn d_matrix(&self, i: u32, j: u32) -> SeriesMatrix {
        SeriesMatrix::from_scalars(self.ring, self.bound, 2, 2, &self.d_scalars(i, j))
    }

    /// `u_i = ((−1)^i/λ, 1)ᵀ`.
    pub fn u_col(&self, i: u32) -> [WittScalar; 2] {
        [self.ring.scale(self.inv_lambda(), sign(i)), self.ring.one()]
    }

    /// `w_i = ((−1)^i λ, −1)`.
    pub fn w_row(&self, i: u32) -> [WittScalar; 2] {
        [self.ring.scale(self.ring.lambda(), sign(i)), self.ring.int(-1)]
    }

    /// `v_i = (y, x, z/2ε)^{[i]}`.
    pub fn v_col(&self, i: u32) -> [TruncatedSeries; 3] {
        [self.var_pow(1, i), self.var_pow(0, i), self.var_pow(2, i).scale(self.inv_2eps())]
    }

    /// `(x, y, z)^{[i]}` as a row.
    pub fn xyz_row(&self, i: u32) -> [TruncatedSeries; 3] {
        [self.var_pow(0, i), self.var_pow(1, i), self.var_pow(2, i)]
    }

    /// `B^{[i]} = v_i w_iᵀ` (3×2).
    pub fn b_block(&self, i: u32) -> SeriesMatrix {
        let w = self.w_row(i).map(|c| self.constant(c));
        SeriesMatrix::outer(&self.v_col(i), &w)
    }

    /// `C^{[i]} = u_i (x, y, z)^{[i]}` (2×3).
    pub fn c_block(&self, i: u32) -> SeriesMatrix {
        let u = self.u_col(i).map(|c| self.constant(c));
        SeriesMatrix::outer(&u, &self.xyz_row(i))
    }

    /// `E^{[i]} = β_i D_{i,i}` (2×2).
    pub fn e_block(&self, i: u32) -> SeriesMatrix {
        self.d_matrix(i, i).scale_series(&self.beta(i))
    }

    /// The two graded pieces of `F`: `F = p^{-1} G₁ + G₀` with
    /// `G₁ = [[E/2, C/2], [0, 0]]` and `G₀ = [[0, 0], [B, 0]]`.
    pub fn f_graded(&self) -> (SeriesMatrix, SeriesMatrix) {
        let half = self.half();
        let mut g1 = SeriesMatrix::zeros(self.ring, self.bound, 5, 5);
        g1.put_block(0, 0, &self.e_block(0).scale(half));
        g1.put_block(0, 2, &self.c_block(0).scale(half));
        let mut g0 = SeriesMatrix::zeros(self.ring, self.bound, 5, 5);
        g0.put_block(2, 0, &self.b_block(0));
        (g1, g0)
    }

    /// The matrix `F` itself; rows 1–2 carry `p` in the denominator.
    pub fn f_matrix(&self) -> SeriesMatrix {
        let (g1, g0) = self.f_graded();
        let mut f = g0;
        for i in 0..2 {
            for j in 0..5 {
                let e = g1.get(i, j);
                let v = TruncatedSeries::from_terms(self.ring, self.bound, 1, e.terms().iter().map(|(k, c)| (*k, *c)));
                f.set(i, j, v);
            }
        }
        f
    }

    /// The unipotent chart matrix `u`.
    pub fn u_matrix(&self) -> SeriesMatrix {
        let r = self.ring;
        let x = TruncatedSeries::var(r, self.bound, 0);
        let y = TruncatedSeries::var(r, self.bound, 1);
        let z = TruncatedSeries::var(r, self.bound, 2);
        let mut m = SeriesMatrix::identity(r, self.bound, 5);
        m.set(0, 1, x.clone());
        m.set(0, 2, x.mul(&y).add(&z.mul(&z).scale(self.inv_4eps())).neg());
        m.set(0, 3, y.clone());
        m.set(0, 4, z.clone());
        m.set(1, 2, y.neg());
        m.set(3, 2, x.neg());
        m.set(4, 2, z.scale(self.inv_2eps()).neg());
        m
    }

    /// `Π_{i<depth}(I + F^{[i]})` split by powers of `p^{-1}`: entry `g` of
    /// the result is the coefficient of `p^{-g}`.
    pub fn f_infty_graded(&self, depth: u32) -> Vec<SeriesMatrix> {
        let (g1, g0) = self.f_graded();
        let id = SeriesMatrix::identity(self.ring, self.bound, 5);
        let mut prod = vec![id.clone()];
        for i in 0..depth {
            let a1 = g1.sigma_pow(i);
            let a0 = id.add(&g0.sigma_pow(i));
            let mut next: Vec<SeriesMatrix> = prod.iter().map(|m| m.mul(&a0)).collect();
            next.push(SeriesMatrix::zeros(self.ring, self.bound, 5, 5));
            for (g, m) in prod.iter().enumerate() {
                next[g + 1] = next[g + 1].add(&m.mul(&a1));
            }
            while next.len() > 1 && next.last().map_or(false, |m| m.is_zero()) {
                next.pop();
            }
            prod = next;
        }
        prod
    }

    /// Default depth so that omitted factors are `≡ I` below the degree bound.
    pub fn default_depth(&self) -> u32 {
        let mut d = 0;
        while self.p().pow(d) < self.bound as u64 {
            d += 1;
        }
        d + 1
    }

    /// `F_∞` truncated at `depth` factors, with `p` in the denominators.
    pub fn f_infty(&self, depth: u32) -> Result<SeriesMatrix> {
        if depth > 0 && self.p().pow(depth) < self.bound as u64 {
            return Err(Error::Precondition(format!("p^depth must reach the degree bound {}", self.bound)));
        }
        let graded = self.f_infty_graded(depth);
        let mut out = SeriesMatrix::zeros(self.ring, self.bound, 5, 5);
        for (g, m) in graded.iter().enumerate() {
            for i in 0..5 {
                for j in 0..5 {
                    let e = m.get(i, j);
                    let piece = TruncatedSeries::from_terms(self.ring, self.bound, g as u32, e.terms().iter().map(|(k, c)| (*k, *c)));
                    let sum = out.get(i, j).add(&piece);
                    sum.check_precision("f_infty")?;
                    out.set(i, j, sum);
                }
            }
        }
        Ok(out)
    }

    /// The non-ordinary equation `β₀` and the supersingular equation `α_{0,1}`,
    /// reduced mod `p`.
    pub fn strata_equations(&self) -> (TruncatedSeries, TruncatedSeries) {
        let c = self.mod_p();
        (c.beta(0), c.alpha(0, 1))
    }

    /// `Q′(x) = −pε x₁² + p x₂² + x₃x₄ + ε x₅²` on coordinates in the ω-basis.
    pub fn q_prime(&self, v: [WittScalar; 5]) -> WittScalar {
        let r = self.ring;
        let p = r.int(self.p() as i64);
        let e = self.eps();
        let t1 = r.neg(r.mul(r.mul(p, e), r.mul(v[0], v[0])));
        let t2 = r.mul(p, r.mul(v[1], v[1]));
        let t3 = r.mul(v[2], v[3]);
        let t5 = r.mul(e, r.mul(v[4], v[4]));
        r.add(r.add(t1, t2), r.add(t3, t5))
    }
}

/// Upper-triangular integer coefficients of `Q′` with `ε` the given residue.
pub fn q_prime_upper(p: i64, eps: i64) -> Vec<Vec<i64>> {
    let mut u = vec![vec![0i64; 5]; 5];
    u[0][0] = -p * eps;
    u[1][1] = p;
    u[2][3] = 1;
    u[4][4] = eps;
    u
}

/// A special endomorphism given by integer coordinates in the basis `ω₁..ω₅`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpecialEndo {
    pub coords: [i64; 5],
}

impl SpecialEndo {
    pub fn new(coords: [i64; 5]) -> Self {
        SpecialEndo { coords }
    }

    /// The basis vector `ω_j`, `j ∈ 1..=5`.
    pub fn basis(j: usize) -> Self {
        let mut c = [0; 5];
        c[j - 1] = 1;
        SpecialEndo { coords: c }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(|t| t.trim()).collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!("expected five coordinates, got {:?}", s)));
        }
        let mut c = [0i64; 5];
        for (k, t) in parts.iter().enumerate() {
            c[k] = t.parse().map_err(|_| Error::Parse(format!("bad coordinate {t:?}")))?;
        }
        Ok(SpecialEndo { coords: c })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        SpecialEndo { coords: self.coords.map(|c| c * k) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(other.coords) {
            *a += b;
        }
        SpecialEndo { coords: c }
    }

    /// Teichmüller digits `a_{j,k}` (residues in `[0,p)`), `count` per coordinate.
    pub fn digits(&self, p: u64, count: usize) -> [Vec<u64>; 5] {
        self.coords.map(|c| WittRing::teichmuller_digits(p, c, count))
    }
}

impl std::fmt::Display for SpecialEndo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = self.coords;
        write!(f, "{},{},{},{},{}", c[0], c[1], c[2], c[3], c[4])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Exp;

    fn crystal(p: u64, n: u32, d: u32) -> Crystal {
        Crystal::new(WittRing::auto(p, n).unwrap(), d).unwrap()
    }

    #[test]
    fn f_entries_match_display() {
        let c = crystal(3, 3, 10);
        let r = c.ring();
        let f = c.f_matrix();
        let y = TruncatedSeries::var(r, 10, 1);
        assert_eq!(*f.get(2, 0), y.scale(r.lambda()));
        let beta_half = c.beta(0).scale(c.half());
        let f11 = f.get(0, 0);
        assert_eq!(f11.pdenom(), 1);
        assert_eq!(f11.terms(), beta_half.terms());
        assert!(f.entries().iter().all(|e| e.coeff(&[0, 0, 0]).is_zero()));
    }

    #[test]
    fn alpha_beta_examples() {
        let c = crystal(3, 3, 20);
        let r = c.ring();
        let a01 = c.alpha(0, 1);
        let supp: Vec<Exp> = a01.support().into_iter().collect();
        let mut want = vec![[1, 3, 0], [3, 1, 0], [0, 0, 4]];
        want.sort();
        assert_eq!(supp, want);
        assert_eq!(a01.coeff(&[0, 0, 4]), c.inv_2eps());
        assert_eq!(c.alpha(1, 0), a01);
        let b0 = c.beta(0);
        assert_eq!(b0.coeff(&[1, 1, 0]), r.one());
        assert_eq!(b0.coeff(&[0, 0, 2]), c.inv_4eps());
        assert!(c.alpha_checked(2, 3).is_err());
    }

    #[test]
    fn d_products() {
        let c = crystal(5, 3, 10);
        let prod = c.d_matrix(0, 1).mul(&c.d_matrix(1, 2));
        assert!(prod.is_zero());
        let prod = c.d_matrix(0, 1).mul(&c.d_matrix(0, 3));
        assert_eq!(prod, c.d_matrix(0, 3).scale(c.ring().int(-2)));
        let r = c.ring();
        for i in 0..=5 {
            for j in 0..=5 {
                let d = c.d_scalars(i, j);
                assert!(r.sub(r.mul(d[0], d[3]), r.mul(d[1], d[2])).is_zero());
            }
        }
    }

    #[test]
    fn cb_contraction() {
        let c = crystal(3, 3, 30);
        for i in 0..=2 {
            for j in 0..=2 {
                let lhs = c.c_block(i).mul(&c.b_block(j));
                let rhs = c.d_matrix(i, j).scale_series(&c.alpha(i, j));
                assert_eq!(lhs, rhs, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn f_infty_small() {
        let c = crystal(3, 3, 5);
        assert_eq!(c.f_infty(0).unwrap(), SeriesMatrix::identity(c.ring(), 5, 5));
        let f = c.f_infty(2).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { c.ring().one() } else { c.ring().zero() };
                let e = f.get(i, j);
                assert_eq!(e.coeff(&[0, 0, 0]), c.ring().mul_p_pow(want, e.pdenom()));
            }
        }
        let e31 = f.get(2, 0);
        let y = TruncatedSeries::var(c.ring(), 5, 1).scale(c.ring().lambda());
        let y3 = y.sigma();
        assert_eq!(y3.coeff(&[0, 3, 0]), c.ring().neg(c.ring().lambda()));
        assert!(e31.sub(&y).sub(&y3).min_degree().map_or(true, |d| d >= 4));
    }

    #[test]
    fn strata_equations_display() {
        let c = crystal(3, 2, 10);
        let (nonord, ss) = c.strata_equations();
        assert_eq!(nonord, c.mod_p().beta(0));
        assert_eq!(ss.support().len(), 3);
    }

    #[test]
    fn u_matrix_first_row() {
        let c = crystal(3, 2, 6);
        let u = c.u_matrix();
        assert_eq!(*u.get(0, 2), c.beta(0).neg());
    }

    #[test]
    fn q_prime_matches_polynomial() {
        use rand::{Rng, SeedableRng};
        let c = crystal(3, 4, 4);
        let r = c.ring();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let up = q_prime_upper(3, r.eps() as i64);
        for _ in 0..100 {
            let v: [i64; 5] = std::array::from_fn(|_| rng.gen_range(-20..20));
            let mut q = 0i64;
            for i in 0..5 {
                for j in i..5 {
                    q += up[i][j] * v[i] * v[j];
                }
            }
            assert_eq!(c.q_prime(v.map(|t| r.int(t))), r.int(q));
        }
    }

    #[test]
    fn endo_parse() {
        let w = SpecialEndo::parse("0, 0,1,0,0").unwrap();
        assert_eq!(w, SpecialEndo::basis(3));
        assert!(SpecialEndo::parse("1,2").is_err());
        assert_eq!(w.to_string(), "0,0,1,0,0");
    }
}
