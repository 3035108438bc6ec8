//! Integer quadratic lattices `Q(v) = Σ_{i≤j} q_ij v_i v_j`.

pub mod density;
pub mod eisenstein;
pub mod padic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use density::{local_density_hanke, local_density_limit, stabilized_density, Density};
pub use eisenstein::{dirichlet_l2, eisenstein_coeff, eisenstein_ratio, kronecker};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub rank: usize,
    pub upper: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadLattice {
    rank: usize,
    upper: Vec<Vec<i64>>,
    positive_definite: bool,
    det: i128,
}

impl QuadLattice {
    /// Builds a lattice from the upper-triangular coefficients (entries below
    /// the diagonal must be zero).
    pub fn new(upper: Vec<Vec<i64>>) -> Result<Self> {
        let r = upper.len();
        if r == 0 || upper.iter().any(|row| row.len() != r) {
            return Err(Error::Config("form must be a square matrix".into()));
        }
        for (i, row) in upper.iter().enumerate() {
            if row[..i].iter().any(|&c| c != 0) {
                return Err(Error::Config("form must be upper triangular".into()));
            }
        }
        let mut l = QuadLattice { rank: r, upper, positive_definite: false, det: 0 };
        l.det = det_i128(&l.gram2());
        if l.det == 0 {
            return Err(Error::Config("form is degenerate".into()));
        }
        l.positive_definite = l.ldl().is_some();
        Ok(l)
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        if j.upper.len() != j.rank {
            return Err(Error::Config(format!("rank {} does not match a {}-row form", j.rank, j.upper.len())));
        }
        Self::new(j.upper.clone())
    }

    pub fn to_json(&self) -> FormJson {
        FormJson { rank: self.rank, upper: self.upper.clone() }
    }

    /// Sum of squares in `r` variables.
    pub fn sum_of_squares(r: usize) -> Self {
        let mut u = vec![vec![0; r]; r];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self::new(u).expect("nondegenerate")
    }

    /// `x₀² + x₁x₂ − x₃x₄`.
    pub fn ambient() -> Self {
        let mut u = vec![vec![0; 5]; 5];
        u[0][0] = 1;
        u[1][2] = 1;
        u[3][4] = -1;
        Self::new(u).expect("nondegenerate")
    }

    /// `a² + x² + xz + z² + y² + yw + w²` in the variable order `(a, x, z, y, w)`.
    /// Over `Z_3` it is isometric to `−6x₁² + 3x₂² + x₃x₄ + 2x₅²`.
    pub fn model_p3() -> Self {
        let mut u = vec![vec![0; 5]; 5];
        u[0][0] = 1;
        u[1][1] = 1;
        u[1][2] = 1;
        u[2][2] = 1;
        u[3][3] = 1;
        u[3][4] = 1;
        u[4][4] = 1;
        Self::new(u).expect("nondegenerate")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn upper(&self) -> &[Vec<i64>] {
        &self.upper
    }
    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }
    /// Determinant of the bilinear Gram matrix `(x, y) = Q(x+y) − Q(x) − Q(y)`.
    pub fn det(&self) -> i128 {
        self.det
    }
    /// `|L^∨/L|`.
    pub fn discriminant_order(&self) -> u128 {
        self.det.unsigned_abs()
    }

    /// Gram matrix of `(x, y)`; its diagonal is `2q_ii`.
    pub fn gram2(&self) -> Vec<Vec<i128>> {
        let r = self.rank;
        let mut g = vec![vec![0i128; r]; r];
        for i in 0..r {
            g[i][i] = 2 * self.upper[i][i] as i128;
            for j in i + 1..r {
                g[i][j] = self.upper[i][j] as i128;
                g[j][i] = self.upper[i][j] as i128;
            }
        }
        g
    }

    pub fn value(&self, v: &[i64]) -> i128 {
        let mut s = 0i128;
        for i in 0..self.rank {
            for j in i..self.rank {
                let c = self.upper[i][j];
                if c != 0 {
                    s += c as i128 * v[i] as i128 * v[j] as i128;
                }
            }
        }
        s
    }

    /// `Q(v) = Σ_i d_i (v_i + Σ_{j>i} μ_ij v_j)²`; `None` unless all `d_i > 0`.
    fn ldl(&self) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        let r = self.rank;
        let mut a = vec![vec![0f64; r]; r];
        for i in 0..r {
            a[i][i] = self.upper[i][i] as f64;
            for j in i + 1..r {
                a[i][j] = self.upper[i][j] as f64 / 2.0;
                a[j][i] = a[i][j];
            }
        }
        let mut d = vec![0f64; r];
        let mut mu = vec![vec![0f64; r]; r];
        for i in 0..r {
            let mut di = a[i][i];
            for k in 0..i {
                di -= d[k] * mu[k][i] * mu[k][i];
            }
            if di <= 1e-12 {
                return None;
            }
            d[i] = di;
            for j in i + 1..r {
                let mut s = a[i][j];
                for k in 0..i {
                    s -= d[k] * mu[k][i] * mu[k][j];
                }
                mu[i][j] = s / di;
            }
        }
        Some((d, mu))
    }

    /// Visits every `v` with `lo ≤ Q(v) ≤ hi`, together with `Q(v)`.
    pub fn for_each_in_shell(&self, lo: u64, hi: u64, visit: &mut dyn FnMut(&[i64], u64)) -> Result<()> {
        if !self.positive_definite {
            return Err(Error::Precondition("enumeration needs a positive definite form".into()));
        }
        let (d, mu) = self.ldl().expect("checked");
        let r = self.rank;
        let mut v = vec![0i64; r];
        let slack = 1e-7 * (hi as f64 + 1.0);
        // enumerate from the last coordinate down to the first
        fn rec(
            l: &QuadLattice,
            i: usize,
            partial: f64,
            v: &mut Vec<i64>,
            d: &[f64],
            mu: &[Vec<f64>],
            lo: u64,
            hi: u64,
            slack: f64,
            visit: &mut dyn FnMut(&[i64], u64),
        ) {
            let r = v.len();
            let c: f64 = (i + 1..r).map(|j| mu[i][j] * v[j] as f64).sum();
            let room = (hi as f64 - partial + slack) / d[i];
            if room < 0.0 {
                return;
            }
            let rad = room.sqrt();
            let (mut from, to) = ((-c - rad).ceil() as i64, (-c + rad).floor() as i64);
            if i == 0 {
                // Q = q₀₀x² + lin·x + rest along the first coordinate
                v[0] = 0;
                let rest = l.value(v);
                let lin: i128 = (1..r).map(|j| l.upper[0][j] as i128 * v[j] as i128).sum();
                let q00 = l.upper[0][0] as i128;
                // skip the inner hole where Q < lo
                let inner = (lo as f64 - partial - slack) / d[0];
                let hole = (inner > 0.0).then(|| {
                    let h = inner.sqrt();
                    ((-c - h).floor() as i64 + 1, (-c + h).ceil() as i64 - 1)
                });
                let mut x = from;
                while x <= to {
                    if let Some((a, b)) = hole {
                        if x >= a && x <= b {
                            x = b + 1;
                            continue;
                        }
                    }
                    let xi = x as i128;
                    let q = (q00 * xi + lin) * xi + rest;
                    if q >= lo as i128 && q <= hi as i128 {
                        v[0] = x;
                        visit(v, q as u64);
                    }
                    x += 1;
                }
                v[0] = 0;
                return;
            }
            while from <= to {
                v[i] = from;
                let y = from as f64 + c;
                rec(l, i - 1, partial + d[i] * y * y, v, d, mu, lo, hi, slack, visit);
                from += 1;
            }
            v[i] = 0;
        }
        rec(self, r - 1, 0.0, &mut v, &d, &mu, lo, hi, slack, visit);
        Ok(())
    }

    /// `#{v : Q(v) = m}`.
    pub fn count_representations(&self, m: u64) -> Result<u64> {
        let mut n = 0u64;
        self.for_each_in_shell(m, m, &mut |_, _| n += 1)?;
        Ok(n)
    }

    /// `r(0), …, r(max)` in one enumeration.
    pub fn theta_series(&self, max: u64) -> Result<Vec<u64>> {
        let mut out = vec![0u64; max as usize + 1];
        self.for_each_in_shell(0, max, &mut |_, q| out[q as usize] += 1)?;
        Ok(out)
    }
}

pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    // Bareiss fraction-free elimination
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let l2 = QuadLattice::sum_of_squares(2);
        assert_eq!(l2.count_representations(1).unwrap(), 4);
        assert_eq!(l2.count_representations(0).unwrap(), 1);
        assert_eq!(l2.count_representations(25).unwrap(), 12);
        let l5 = QuadLattice::sum_of_squares(5);
        let mut brute = 0;
        for i in 0..5i64.pow(5) {
            let v: Vec<i64> = (0..5).map(|k| (i / 5i64.pow(k)) % 5 - 2).collect();
            brute += u64::from(l5.value(&v) == 4);
        }
        assert_eq!(brute, 90);
        assert_eq!(l5.count_representations(4).unwrap(), brute);
    }

    #[test]
    fn brute_force_agreement() {
        let l = QuadLattice::model_p3();
        let theta = l.theta_series(12).unwrap();
        let mut brute = vec![0u64; 13];
        let b = 4i64;
        for a in -b..=b {
            for x in -b..=b {
                for z in -b..=b {
                    for y in -b..=b {
                        for w in -b..=b {
                            let q = l.value(&[a, x, z, y, w]);
                            if q <= 12 {
                                brute[q as usize] += 1;
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(theta, brute);
        assert!(theta[1..].iter().all(|c| c % 2 == 0));
    }

    #[test]
    fn determinants() {
        assert_eq!(QuadLattice::ambient().det(), 2);
        assert!(!QuadLattice::ambient().is_positive_definite());
        assert_eq!(QuadLattice::model_p3().det(), 18);
        assert!(QuadLattice::model_p3().is_positive_definite());
        assert!(QuadLattice::new(vec![vec![1, 2], vec![0, 1]]).is_err());
        assert!(QuadLattice::new(vec![vec![1, 3], vec![0, 1]]).unwrap().count_representations(1).is_err());
        assert!(QuadLattice::new(vec![vec![1, 2], vec![1, 1]]).is_err());
    }
}
