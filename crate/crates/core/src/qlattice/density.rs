//! Local densities `δ(l, L, m)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::padic::{split, Zmod};
use super::QuadLattice;
use crate::error::{Error, Result};

pub type Density = Ratio<i128>;

/// Default cap on enumerated points.
pub const DEFAULT_BUDGET: u128 = 200_000_000;

fn lpow(l: u64, e: u32) -> Result<i128> {
    (l as i128).checked_pow(e).ok_or_else(|| Error::budget("local density", "modulus overflow"))
}

/// `#{v mod l^a : Q(v) ≡ m}` after splitting `L ⊗ Z_l` into blocks of rank
/// at most two, so the cost is about `l^{2a}` instead of `l^{ar}`.
pub fn count_mod(lat: &QuadLattice, l: u64, m: i64, a: u32, budget: u128) -> Result<i128> {
    let vdet = {
        let mut d = lat.det().unsigned_abs();
        let mut v = 0;
        while d % l as u128 == 0 {
            d /= l as u128;
            v += 1;
        }
        v
    };
    let mut k = a + 2 * vdet + 8;
    while (l as f64).powi(k as i32) >= 2f64.powi(60) {
        k -= 1;
    }
    if k < a + 2 * vdet + 2 {
        return Err(Error::budget("local density", format!("l^a too large for l={l}, a={a}")));
    }
    let z = Zmod::new(l, k);
    let (blocks, _) = split(&lat.gram2(), &z)?;
    let q = lpow(l, a)? as usize;
    let zq = Zmod::new(l, a);
    let polys: Vec<Vec<i128>> = blocks.iter().map(|b| b.poly(&z).map(|p| p.iter().map(|&c| zq.red(c)).collect())).collect::<Result<_>>()?;
    let hyperbolic = |p: &Vec<i128>| p.len() == 3 && p[0] == 0 && p[2] == 0;
    let dists: Vec<Vec<i128>> = polys.iter().map(|p| block_distribution(&zq, p)).collect();
    // distributions that only see the valuation of the value convolve in O(q·a)
    let (mut inv, mut rest): (Vec<Vec<i128>>, Vec<Vec<i128>>) = dists.into_iter().partition(|d| unit_invariant(&zq, d));
    let mut cost: u128 = 0;
    for p in &polys {
        cost += match p.len() {
            1 => q as u128,
            _ if hyperbolic(p) => q as u128 * a as u128,
            _ => (q as u128).pow(2),
        };
    }
    let parts = usize::from(!inv.is_empty()) + rest.len();
    cost += (inv.len() as u128).saturating_sub(1) * q as u128 * (a as u128 + 1);
    cost += (parts as u128).saturating_sub(2) * (q as u128).pow(2) + q as u128;
    if cost > budget {
        return Err(Error::budget("local density", format!("{cost} steps for l={l}, a={a}")));
    }
    if let Some(first) = inv.pop() {
        let folded = inv.iter().fold(first, |acc, d| convolve_invariant(&zq, &acc, d));
        rest.push(folded);
    }
    // convolve all but the last part, then read off the target value
    let (last, init) = rest.split_last().expect("rank ≥ 1");
    let mut acc: Option<Vec<i128>> = None;
    for d in init {
        acc = Some(match acc {
            None => d.clone(),
            Some(prev) => convolve(&prev, d),
        });
    }
    let target = zq.red(m as i128) as usize;
    Ok(match acc {
        None => last[target],
        Some(prev) => prev.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| c * last[(target + q - i) % q]).sum(),
    })
}

fn unit_invariant(zq: &Zmod, d: &[i128]) -> bool {
    let mut rep: Vec<Option<i128>> = vec![None; zq.k as usize + 1];
    for (c, &n) in d.iter().enumerate() {
        let slot = &mut rep[zq.val(c as i128) as usize];
        match slot {
            None => *slot = Some(n),
            Some(m) if *m != n => return false,
            _ => {}
        }
    }
    true
}

/// Convolution of two distributions that depend only on the valuation.
fn convolve_invariant(zq: &Zmod, f: &[i128], g: &[i128]) -> Vec<i128> {
    let q = f.len();
    let mut at_val = vec![0i128; zq.k as usize + 1];
    for (w, slot) in at_val.iter_mut().enumerate() {
        let c = if (w as u32) < zq.k { zq.l.pow(w as u32) as usize } else { 0 };
        *slot = (0..q).map(|c1| f[c1] * g[(c + q - c1) % q]).sum();
    }
    (0..q).map(|c| at_val[zq.val(c as i128) as usize]).collect()
}

fn convolve(a: &[i128], b: &[i128]) -> Vec<i128> {
    let q = a.len();
    let (sparse, dense) = if a.iter().filter(|&&c| c != 0).count() <= b.iter().filter(|&&c| c != 0).count() { (a, b) } else { (b, a) };
    let mut out = vec![0i128; q];
    for (i, &ci) in sparse.iter().enumerate() {
        if ci == 0 {
            continue;
        }
        for (j, &dj) in dense.iter().enumerate() {
            if dj != 0 {
                out[(i + j) % q] += ci * dj;
            }
        }
    }
    out
}

/// Value distribution of one block over `(Z/l^a)^{rank}`.
fn block_distribution(zq: &Zmod, poly: &[i128]) -> Vec<i128> {
    let q = zq.m as usize;
    let mut d = vec![0i128; q];
    match poly.len() {
        1 => {
            for x in 0..q as i128 {
                d[zq.mul(poly[0], zq.mul(x, x)) as usize] += 1;
            }
        }
        _ if poly[0] == 0 && poly[2] == 0 => {
            // c·xy: for x of valuation v, y ↦ cxy hits each multiple of
            // c·l^v exactly l^v times
            let cv = zq.val(poly[1]);
            let mut by_val = vec![0i128; zq.k as usize + 1];
            for x in 0..q as i128 {
                by_val[(zq.val(x) + cv).min(zq.k) as usize] += 1;
            }
            for (v, &n) in by_val.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                if v as u32 >= zq.k {
                    d[0] += n * q as i128;
                    continue;
                }
                let step = zq.l.pow(v as u32) as usize;
                for c in (0..q).step_by(step) {
                    d[c] += n * step as i128;
                }
            }
        }
        _ => {
            let (c1, c12, c2) = (poly[0], poly[1], poly[2]);
            for x in 0..q as i128 {
                let xx = zq.mul(c1, zq.mul(x, x));
                let cx = zq.mul(c12, x);
                for y in 0..q as i128 {
                    let val = (xx + zq.mul(cx + zq.mul(c2, y), y)) % zq.m;
                    d[val as usize] += 1;
                }
            }
        }
    }
    d
}

/// `l^{a(1−r)} · #{v mod l^a : Q(v) ≡ m mod l^a}`.
pub fn local_density_limit(lat: &QuadLattice, l: u64, m: i64, a: u32) -> Result<Density> {
    local_density_limit_budget(lat, l, m, a, DEFAULT_BUDGET)
}

pub fn local_density_limit_budget(lat: &QuadLattice, l: u64, m: i64, a: u32, budget: u128) -> Result<Density> {
    if a == 0 {
        return Err(Error::Config("a must be at least 1".into()));
    }
    let c = count_mod(lat, l, m, a, budget)?;
    let r = lat.rank() as u32;
    Ok(Ratio::new(c, lpow(l, a * (r - 1))?))
}

/// Brute-force count over all of `(Z/l^a)^r`; used as an oracle.
pub fn count_mod_naive(lat: &QuadLattice, l: u64, m: i64, a: u32) -> i128 {
    let q = (l as i64).pow(a);
    let r = lat.rank();
    let mut v = vec![0i64; r];
    let mut count = 0;
    loop {
        if (lat.value(&v) - m as i128).rem_euclid(q as i128) == 0 {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == r {
                return count;
            }
            v[i] += 1;
            if v[i] < q {
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stabilized {
    pub l: u64,
    pub m: i64,
    pub a: u32,
    pub value: String,
    #[serde(skip)]
    pub density: Density,
}

/// The limit density, accepted once consecutive levels `a`, `a+1` agree,
/// starting from `a = v_l(m) + 1`.
pub fn stabilized_density(lat: &QuadLattice, l: u64, m: i64, budget: u128) -> Result<Stabilized> {
    let mut vm = 0u32;
    let mut mm = m.unsigned_abs();
    while mm != 0 && mm % l == 0 {
        mm /= l;
        vm += 1;
    }
    let mut a = vm + 1;
    let mut prev = local_density_limit_budget(lat, l, m, a, budget)?;
    loop {
        let next = local_density_limit_budget(lat, l, m, a + 1, budget)?;
        if next == prev {
            return Ok(Stabilized { l, m, a, value: format!("{}/{}", prev.numer(), prev.denom()), density: prev });
        }
        prev = next;
        a += 1;
    }
}

/// `p^{1−r} · #{v ∈ (Z/p)^r : Q(v) ≡ m mod p}` for `p ∤ m`.
pub fn local_density_hanke(lat: &QuadLattice, p: u64, m: i64) -> Result<Density> {
    if m.rem_euclid(p as i64) == 0 {
        return Err(Error::Precondition(format!("Hanke's formula needs p ∤ m, got p={p}, m={m}")));
    }
    let r = lat.rank() as u32;
    Ok(Ratio::new(count_mod_naive(lat, p, m, 1), lpow(p, r - 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::q_prime_upper;

    #[test]
    fn rank_one() {
        let l = QuadLattice::new(vec![vec![1]]).unwrap();
        for a in 1..4 {
            assert_eq!(local_density_limit(&l, 3, 1, a).unwrap(), Ratio::from_integer(2));
        }
    }

    #[test]
    fn q_prime_values() {
        let q = QuadLattice::new(q_prime_upper(3, 2)).unwrap();
        assert_eq!(local_density_limit(&q, 3, 1, 1).unwrap(), Ratio::new(2, 3));
        assert_eq!(local_density_hanke(&q, 3, 1).unwrap(), Ratio::new(2, 3));
        assert_eq!(local_density_hanke(&q, 3, 2).unwrap(), Ratio::new(4, 3));
        assert!(local_density_hanke(&q, 3, 3).is_err());
    }

    #[test]
    fn split_counts_match_naive() {
        for lat in [QuadLattice::ambient(), QuadLattice::model_p3(), QuadLattice::new(q_prime_upper(3, 2)).unwrap()] {
            for l in [2u64, 3] {
                for a in 1..=2 {
                    for m in [0i64, 1, 2, 3, 6, 7] {
                        assert_eq!(count_mod(&lat, l, m, a, DEFAULT_BUDGET).unwrap(), count_mod_naive(&lat, l, m, a), "l={l} a={a} m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn budget_guard() {
        let lat = QuadLattice::ambient();
        assert!(matches!(local_density_limit_budget(&lat, 2, 1, 12, 1000), Err(Error::Budget { .. })));
    }
}
