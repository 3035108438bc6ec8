//! Orthogonal splittings of integer forms over `Z/l^K`, and isometries
//! between forms in the same `Z_l`-class for odd `l`.

use crate::error::{Error, Result};

/// Arithmetic in `Z/l^K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zmod {
    pub l: i128,
    pub k: u32,
    pub m: i128,
}

impl Zmod {
    pub fn new(l: u64, k: u32) -> Self {
        let m = (l as i128).pow(k);
        assert!(m < 1i128 << 62, "modulus too large");
        Zmod { l: l as i128, k, m }
    }
    pub fn red(&self, x: i128) -> i128 {
        x.rem_euclid(self.m)
    }
    pub fn mul(&self, a: i128, b: i128) -> i128 {
        (self.red(a) * self.red(b)).rem_euclid(self.m)
    }
    /// `l`-adic valuation, `K` for zero.
    pub fn val(&self, x: i128) -> u32 {
        let mut x = self.red(x);
        if x == 0 {
            return self.k;
        }
        let mut v = 0;
        while x % self.l == 0 {
            x /= self.l;
            v += 1;
        }
        v
    }
    pub fn inv(&self, x: i128) -> Result<i128> {
        let (mut a, mut b) = (self.red(x), self.m);
        let (mut s, mut t) = (1i128, 0i128);
        while b != 0 {
            let q = a / b;
            (a, b) = (b, a - q * b);
            (s, t) = (t, s - q * t);
        }
        if a != 1 {
            return Err(Error::Precondition(format!("{x} is not a unit mod {}", self.m)));
        }
        Ok(self.red(s))
    }
    /// `a / b` where `v(a) ≥ v(b)`; determined modulo `l^{K − v(b)}`.
    pub fn div(&self, a: i128, b: i128) -> Result<i128> {
        let vb = self.val(b);
        if vb >= self.k {
            return Err(Error::precision("p-adic division by zero"));
        }
        let a = self.red(a);
        if self.val(a) < vb {
            return Err(Error::Precondition("non-integral quotient".into()));
        }
        let q = self.l.pow(vb);
        let sub = Zmod { l: self.l, k: self.k - vb, m: self.m / q };
        Ok(sub.mul(a / q, sub.inv(self.red(b) / q)?))
    }
    /// Square root of a unit that is a square, lifted from a root mod `l`.
    pub fn sqrt(&self, x: i128) -> Option<i128> {
        let x = self.red(x);
        let r0 = (1..self.l).find(|r| (r * r - x).rem_euclid(self.l) == 0)?;
        let mut r = r0;
        for _ in 0..=self.k {
            // Newton step r ← r − (r² − x)/(2r)
            let f = self.red(r * r - x);
            r = self.red(r - self.mul(f, self.inv(2 * r).ok()?));
        }
        (self.mul(r, r) == x).then_some(r)
    }
}

pub type Mat = Vec<Vec<i128>>;

pub fn mat_mul(z: &Zmod, a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0i128; m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = z.red(out[i][j] + z.mul(a[i][t], b[t][j]));
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Inverse of a matrix invertible mod `l`.
pub fn mat_inv(z: &Zmod, a: &Mat) -> Result<Mat> {
    let n = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().zip(identity(n)).map(|(r, e)| r.iter().map(|&x| z.red(x)).chain(e).collect()).collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| z.val(m[r][c]) == 0).ok_or_else(|| Error::Precondition("matrix not invertible mod l".into()))?;
        m.swap(c, piv);
        let inv = z.inv(m[c][c])?;
        for x in m[c].iter_mut() {
            *x = z.mul(*x, inv);
        }
        for r in 0..n {
            if r != c && m[r][c] != 0 {
                let f = m[r][c];
                for j in 0..2 * n {
                    m[r][j] = z.red(m[r][j] - z.mul(f, m[c][j]));
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// One orthogonal summand: a `1×1` or `2×2` block of the bilinear Gram
/// matrix (diagonal entries are `2Q(e_i)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub gram: Mat,
}

impl Block {
    /// Values of `Q` restricted to the block, as polynomial coefficients.
    /// For a `1×1` block `[q]`; for `2×2` `[q₁, q₁₂, q₂]`.
    pub fn poly(&self, z: &Zmod) -> Result<Vec<i128>> {
        let half = |x: i128| -> Result<i128> {
            if z.l == 2 {
                let x = z.red(x);
                if x % 2 != 0 {
                    return Err(Error::Precondition("odd diagonal in even Gram".into()));
                }
                Ok(x / 2)
            } else {
                Ok(z.mul(x, z.inv(2)?))
            }
        };
        match self.gram.len() {
            1 => Ok(vec![half(self.gram[0][0])?]),
            _ => Ok(vec![half(self.gram[0][0])?, z.red(self.gram[0][1]), half(self.gram[1][1])?]),
        }
    }
}

/// Splits the bilinear Gram `g` over `Z/l^K` into orthogonal blocks.
/// Returns the blocks and the change of basis `P` (columns are the new basis)
/// with `Pᵀ g P` block diagonal in the returned order.
pub fn split(g: &Mat, z: &Zmod) -> Result<(Vec<Block>, Mat)> {
    let n = g.len();
    let mut p = identity(n);
    let cur = |p: &Mat| mat_mul(z, &mat_mul(z, &transpose(p), g), p);
    let mut active: Vec<usize> = (0..n).collect();
    let mut order: Vec<Vec<usize>> = Vec::new();
    while !active.is_empty() {
        let mut h = cur(&p);
        let mut best = (u32::MAX, 0, 0);
        for &i in &active {
            for &j in &active {
                let v = z.val(h[i][j]);
                // prefer diagonal pivots at equal valuation
                if v < best.0 || (v == best.0 && i == j && best.1 != best.2) {
                    best = (v, i, j);
                }
            }
        }
        let (v, i, j) = best;
        if v >= z.k {
            return Err(Error::precision("form is degenerate to the working l-adic precision"));
        }
        let pivot: Vec<usize> = if i == j {
            vec![i]
        } else if z.l != 2 {
            // e_i ← e_i + e_j gives Q-value of valuation v
            for r in 0..n {
                p[r][i] = z.red(p[r][i] + p[r][j]);
            }
            h = cur(&p);
            vec![i]
        } else {
            vec![i, j]
        };
        for &k in &active {
            if pivot.contains(&k) {
                continue;
            }
            let coeffs: Vec<i128> = if pivot.len() == 1 {
                vec![z.div(h[i][k], h[i][i])?]
            } else {
                let det = z.red(h[i][i] * h[j][j] - h[i][j] * h[i][j]);
                vec![
                    z.div(z.red(z.mul(h[j][j], h[i][k]) - z.mul(h[i][j], h[j][k])), det)?,
                    z.div(z.red(z.mul(h[i][i], h[j][k]) - z.mul(h[i][j], h[i][k])), det)?,
                ]
            };
            for (c, &piv) in coeffs.iter().zip(&pivot) {
                for r in 0..n {
                    p[r][k] = z.red(p[r][k] - z.mul(*c, p[r][piv]));
                }
            }
        }
        active.retain(|k| !pivot.contains(k));
        order.push(pivot);
    }
    let h = cur(&p);
    let cols: Vec<usize> = order.iter().flatten().copied().collect();
    let p2: Mat = (0..n).map(|r| cols.iter().map(|&c| p[r][c]).collect()).collect();
    let blocks = order.iter().map(|b| Block { gram: b.iter().map(|&r| b.iter().map(|&c| h[r][c]).collect()).collect() }).collect();
    Ok((blocks, p2))
}

/// For odd `l`: a basis change `P` with `Pᵀ g P = diag(2·l^{v_i}·c_i)` in a
/// canonical shape: sorted by `v`, and within each scale all `c_i = 1`
/// except possibly the last, which is `1` or the least nonresidue.
pub fn normalize_odd(g: &Mat, z: &Zmod) -> Result<(Vec<(u32, i128)>, Mat)> {
    if z.l == 2 {
        return Err(Error::Precondition("normalization implemented for odd l only".into()));
    }
    let (blocks, mut p) = split(g, z)?;
    let n = g.len();
    let inv2 = z.inv(2)?;
    // (valuation, unit part of Q(e_i)) per column
    let mut diag: Vec<(u32, i128)> = blocks
        .iter()
        .map(|b| {
            let q = z.mul(b.gram[0][0], inv2);
            let v = z.val(q);
            (v, z.red(q / z.l.pow(v)))
        })
        .collect();
    // sort columns by valuation
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| diag[i].0);
    p = (0..n).map(|r| idx.iter().map(|&c| p[r][c]).collect()).collect();
    diag = idx.iter().map(|&i| diag[i]).collect();
    let nonres = (2..z.l).find(|&e| (1..z.l).all(|x| (x * x - e).rem_euclid(z.l) != 0)).expect("odd prime");
    let mut start = 0;
    while start < n {
        let v = diag[start].0;
        let end = (start..n).find(|&i| diag[i].0 != v).unwrap_or(n);
        for i in start..end.saturating_sub(1) {
            let (u1, u2) = (diag[i].1, diag[i + 1].1);
            // u1 x² + u2 y² = 1
            let sub = Zmod::new(z.l as u64, 1);
            let (x0, y0) = (0..z.l)
                .flat_map(|x| (0..z.l).map(move |y| (x, y)))
                .find(|&(x, y)| sub.red(u1 * x * x + u2 * y * y) == 1)
                .expect("binary unimodular forms represent 1");
            let (x, y) = if x0 != 0 {
                let rest = z.red(1 - z.mul(u2, z.mul(y0, y0)));
                (z.sqrt(z.mul(rest, z.inv(u1)?)).ok_or_else(|| Error::precision("hensel lift"))?, y0)
            } else {
                let rest = z.red(1 - z.mul(u1, z.mul(x0, x0)));
                (x0, z.sqrt(z.mul(rest, z.inv(u2)?)).ok_or_else(|| Error::precision("hensel lift"))?)
            };
            for r in 0..n {
                let (a, b) = (p[r][i], p[r][i + 1]);
                p[r][i] = z.red(z.mul(x, a) + z.mul(y, b));
                p[r][i + 1] = z.red(z.mul(z.red(-z.mul(u2, y)), a) + z.mul(z.mul(u1, x), b));
            }
            diag[i].1 = 1;
            diag[i + 1].1 = z.mul(u1, u2);
        }
        let last = end - 1;
        let u = diag[last].1;
        let target = if z.sqrt(u).is_some() { 1 } else { nonres };
        let s = z.sqrt(z.mul(u, z.inv(target)?)).ok_or_else(|| Error::precision("square class"))?;
        let sinv = z.inv(s)?;
        for row in p.iter_mut() {
            row[last] = z.mul(row[last], sinv);
        }
        diag[last].1 = target;
        start = end;
    }
    Ok((diag, p))
}

/// A matrix `T` with `Tᵀ g_to T ≡ g_from (mod l^K)`: it maps coordinates for
/// `g_from` to coordinates for `g_to`. `None` if the forms are not
/// `Z_l`-isometric.
pub fn isometry_odd(g_from: &Mat, g_to: &Mat, z: &Zmod) -> Result<Option<Mat>> {
    let (d1, p) = normalize_odd(g_from, z)?;
    let (d2, r) = normalize_odd(g_to, z)?;
    if d1 != d2 {
        return Ok(None);
    }
    let t = mat_mul(z, &r, &mat_inv(z, &p)?);
    Ok(Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlattice::QuadLattice;

    fn q_prime(p: i64, eps: i64) -> QuadLattice {
        QuadLattice::new(crate::crystal::q_prime_upper(p, eps)).unwrap()
    }

    #[test]
    fn split_is_block_diagonal() {
        for l in [2u64, 3, 5] {
            let z = Zmod::new(l, 20);
            for lat in [QuadLattice::ambient(), QuadLattice::model_p3(), q_prime(3, 2)] {
                let g = lat.gram2();
                let (blocks, p) = split(&g, &z).unwrap();
                let h = mat_mul(&z, &mat_mul(&z, &transpose(&p), &g), &p);
                let mut off = 0;
                for b in &blocks {
                    let s = b.gram.len();
                    for i in 0..5 {
                        for j in 0..5 {
                            let inside = (off..off + s).contains(&i) && (off..off + s).contains(&j);
                            if !inside && (off..off + s).contains(&i) {
                                assert_eq!(h[i][j], 0);
                            }
                        }
                    }
                    off += s;
                }
                assert!(mat_inv(&z, &p).is_ok());
            }
        }
    }

    #[test]
    fn model_is_isometric_to_q_prime_at_3() {
        let z = Zmod::new(3, 18);
        let from = QuadLattice::model_p3().gram2();
        let to = q_prime(3, 2).gram2();
        let t = isometry_odd(&from, &to, &z).unwrap().expect("isometric");
        let back = mat_mul(&z, &mat_mul(&z, &transpose(&t), &to), &t);
        let zk = Zmod::new(3, 12);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(zk.red(back[i][j]), zk.red(from[i][j]));
            }
        }
        // the sum of five squares is not (different Jordan shape)
        let sq = QuadLattice::sum_of_squares(5).gram2();
        assert!(isometry_odd(&sq, &to, &z).unwrap().is_none());
    }

    #[test]
    fn sqrt_and_div() {
        let z = Zmod::new(3, 10);
        let s = z.sqrt(z.red(-2)).unwrap();
        assert_eq!(z.mul(s, s), z.red(-2));
        assert!(z.sqrt(2).is_none());
        assert_eq!(z.mul(z.div(18, 6).unwrap(), 1), 3);
    }
}
