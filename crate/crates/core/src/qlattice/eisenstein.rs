//! Kronecker characters, `L(2, χ_D)`, and Eisenstein coefficients `q_L(m)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::density::{stabilized_density, Density, DEFAULT_BUDGET};
use super::QuadLattice;
use crate::error::{Error, Result};

/// Kronecker symbol `(D/n)`.
pub fn kronecker(d: i64, n: i64) -> i8 {
    if n == 0 {
        return if d.abs() == 1 { 1 } else { 0 };
    }
    let mut a = d as i128;
    let mut b = n as i128;
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    let tab2 = |a: i128| -> i8 {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        }
    };
    let mut k: i8 = if v % 2 == 0 { 1 } else { tab2(a) };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // Jacobi symbol (a/b), b odd positive
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let mut v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= tab2(b);
        }
        if a < 0 {
            a = -a;
            if b % 4 == 3 {
                k = -k;
            }
        }
        if a % 4 == 3 && b % 4 == 3 {
            k = -k;
        }
        let r = b % a;
        b = a;
        a = r;
    }
}

/// Trigamma `ψ′(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // ψ′(x) ~ 1/x + 1/(2x²) + Σ B_{2k}/x^{2k+1}
    const B: [f64; 8] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut term = inv * inv2;
    let mut s = inv + 0.5 * inv2;
    for b in B {
        s += b * term;
        term *= inv2;
    }
    acc + s
}

/// Period of `n ↦ (D/n)` on positive `n`.
pub fn kronecker_period(d: i64) -> u64 {
    if d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1 {
        d.unsigned_abs().max(1)
    } else {
        4 * d.unsigned_abs()
    }
}

/// `L(2, χ_D) = Σ χ_D(n)/n²`.
///
/// Summed exactly over residues: `L = P⁻² Σ_{a=1}^{P} χ_D(a) ψ′(a/P)` with
/// `P` a period of `χ_D`. When `tol` is looser than `1/P` the plain partial
/// sum with tail bound `1/N < tol` is cheaper and is used instead.
pub fn dirichlet_l2(d: i64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let period = kronecker_period(d);
    let n_terms = (1.0 / tol).ceil();
    if n_terms < period as f64 {
        return Ok(dirichlet_l2_partial(d, n_terms as u64));
    }
    let pf = period as f64;
    let mut s = 0.0;
    for a in 1..=period {
        let c = kronecker(d, a as i64);
        if c != 0 {
            s += c as f64 * trigamma(a as f64 / pf);
        }
    }
    Ok(s / (pf * pf))
}

/// `Σ_{n ≤ N} χ_D(n)/n²`; the tail is at most `1/N`.
pub fn dirichlet_l2_partial(d: i64, n: u64) -> f64 {
    (1..=n).map(|k| kronecker(d, k as i64) as f64 / (k as f64 * k as f64)).sum()
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn mobius(n: u64) -> i128 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `Σ_{d | n} d^{−3}` as an exact rational.
fn sigma_minus3(n: u64) -> Ratio<i128> {
    divisors(n).into_iter().map(|d| Ratio::new(1, (d as i128).pow(3))).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinCoeff {
    pub m: u64,
    pub m0: u64,
    pub f: u64,
    pub disc: i64,
    pub l_value: f64,
    pub divisor_sum: String,
    /// `(l, δ(l, L, m), stabilization level)` for `l | 2 det L`.
    pub local: Vec<(u64, String, u32)>,
    pub value: f64,
}

/// `q_L(m)` for a rank-5 lattice.
pub fn eisenstein_coeff(lat: &QuadLattice, m: u64, tol: f64) -> Result<EisensteinCoeff> {
    eisenstein_coeff_budget(lat, m, tol, DEFAULT_BUDGET)
}

pub fn eisenstein_coeff_budget(lat: &QuadLattice, m: u64, tol: f64, budget: u128) -> Result<EisensteinCoeff> {
    if m == 0 {
        return Err(Error::Precondition("Eisenstein coefficients are for m ≥ 1".into()));
    }
    if lat.rank() != 5 {
        return Err(Error::Precondition("the coefficient formula is for rank-5 lattices".into()));
    }
    let det = lat.det();
    let two_det = (2 * det).unsigned_abs() as u64;
    let bad: Vec<u64> = factor(two_det).into_iter().map(|(l, _)| l).collect();
    let mut m0 = 1u64;
    let mut f = 1u64;
    for (l, e) in factor(m) {
        if bad.contains(&l) {
            m0 *= l.pow(e);
        } else {
            f *= l.pow(e / 2);
            m0 *= l.pow(e % 2);
        }
    }
    let disc = -2 * m0 as i64 * det as i64;
    let l_value = dirichlet_l2(disc, tol)?;
    let mut dsum = Ratio::from_integer(0i128);
    for d in divisors(f) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let chi = kronecker(disc, d as i64) as i128;
        dsum += Ratio::new(mu * chi, (d as i128).pow(2)) * sigma_minus3(f / d);
    }
    let mut local = Vec::new();
    let mut prod = 1f64;
    for &l in &bad {
        let st = stabilized_density(lat, l, m as i64, budget)?;
        let l4 = (l as i128).pow(4);
        let factor: Density = st.density / (Ratio::from_integer(1) - Ratio::new(1, l4));
        prod *= *factor.numer() as f64 / *factor.denom() as f64;
        local.push((l, st.value.clone(), st.a));
    }
    let pi = std::f64::consts::PI;
    let zeta4 = pi.powi(4) / 90.0;
    let pre = -16.0 * 2f64.sqrt() * pi * pi * (m as f64).powf(1.5) * l_value / (2.0 * (lat.discriminant_order() as f64).sqrt() * zeta4);
    let ds = *dsum.numer() as f64 / *dsum.denom() as f64;
    Ok(EisensteinCoeff {
        m,
        m0,
        f,
        disc,
        l_value,
        divisor_sum: format!("{}/{}", dsum.numer(), dsum.denom()),
        local,
        value: pre * ds * prod,
    })
}

/// `q_{L‴}(m)/(−q_L(m)) = δ(p,L‴,m)[1 − (m/p)p⁻²] / (√|disc_p| (1 − p⁻⁴))`.
pub fn eisenstein_ratio(density_p: Density, m: i64, p: u64, disc_p: u128) -> f64 {
    let leg = kronecker(m, p as i64) as f64;
    let pf = p as f64;
    let dens = *density_p.numer() as f64 / *density_p.denom() as f64;
    dens * (1.0 - leg / (pf * pf)) / ((disc_p as f64).sqrt() * (1.0 - pf.powi(-4)))
}

/// The `p`-part of `|L^∨/L|`.
pub fn disc_p_part(lat: &QuadLattice, p: u64) -> u128 {
    let mut d = lat.discriminant_order();
    let mut out = 1;
    while d % p as u128 == 0 {
        d /= p as u128;
        out *= p as u128;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::q_prime_upper;
    use crate::qlattice::local_density_hanke;

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker(5, 4), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(7, 1), 1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-8, 3), 1);
        assert_eq!(kronecker(2, 3), -1);
        assert_eq!(kronecker(6, 3), 0);
        for d in [-20i64, -8, -7, -4, -3, 5, 8, 12, 13] {
            for a in 1..40i64 {
                for b in 1..40i64 {
                    assert_eq!(kronecker(d, a * b), kronecker(d, a) * kronecker(d, b));
                }
                let per = kronecker_period(d) as i64;
                assert_eq!(kronecker(d, a), kronecker(d, a + per));
            }
        }
    }

    #[test]
    fn l_values() {
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((dirichlet_l2(1, 1e-10).unwrap() - z2).abs() < 1e-10);
        // L(2, χ₋₄) is Catalan's constant
        assert!((dirichlet_l2(-4, 1e-10).unwrap() - 0.915_965_594_177_219).abs() < 1e-10);
        for d in [-4i64, -8, -20, -24, 5, 12, -3] {
            let a = dirichlet_l2(d, 1e-6).unwrap();
            let b = dirichlet_l2(d, 1e-8).unwrap();
            assert!((a - b).abs() < 1e-5);
            assert!(a > 0.0 && a <= z2 + 1e-12);
            assert!((dirichlet_l2_partial(d, 100_000) - b).abs() < 1e-5);
        }
    }

    #[test]
    fn ambient_sign_and_trivial_divisor_sum() {
        let l = QuadLattice::ambient();
        for m in 1..=60 {
            let q = eisenstein_coeff(&l, m, 1e-8).unwrap();
            assert!(q.value < 0.0, "m={m}");
            if q.f == 1 {
                assert_eq!(q.divisor_sum, "1/1");
            }
        }
    }

    #[test]
    fn ratio_for_q_prime() {
        let q = QuadLattice::new(q_prime_upper(3, 2)).unwrap();
        let d1 = local_density_hanke(&q, 3, 1).unwrap();
        assert!((eisenstein_ratio(d1, 1, 3, disc_p_part(&q, 3)) - 0.2).abs() < 1e-12);
        let d2 = local_density_hanke(&q, 3, 2).unwrap();
        let want = (4.0 / 3.0) * (1.0 + 1.0 / 9.0) / (3.0 * (80.0 / 81.0));
        assert!((eisenstein_ratio(d2, 2, 3, disc_p_part(&q, 3)) - want).abs() < 1e-12);
    }
}
