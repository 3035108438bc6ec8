//! Small dense matrices whose entries are truncated series.

use crate::series::TruncatedSeries;
use crate::witt::{WittRing, WittScalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    data: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn zeros(ring: WittRing, bound: u32, rows: usize, cols: usize) -> Self {
        SeriesMatrix { rows, cols, data: vec![TruncatedSeries::zero(ring, bound); rows * cols] }
    }

    pub fn identity(ring: WittRing, bound: u32, n: usize) -> Self {
        let mut m = Self::zeros(ring, bound, n, n);
        for i in 0..n {
            m.set(i, i, TruncatedSeries::one(ring, bound));
        }
        m
    }

    pub fn from_scalars(ring: WittRing, bound: u32, rows: usize, cols: usize, s: &[WittScalar]) -> Self {
        assert_eq!(s.len(), rows * cols);
        SeriesMatrix { rows, cols, data: s.iter().map(|c| TruncatedSeries::constant(ring, bound, *c)).collect() }
    }

    pub fn from_entries(rows: usize, cols: usize, data: Vec<TruncatedSeries>) -> Self {
        assert_eq!(data.len(), rows * cols);
        SeriesMatrix { rows, cols, data }
    }

    /// Column vector times row vector.
    pub fn outer(col: &[TruncatedSeries], row: &[TruncatedSeries]) -> Self {
        let mut data = Vec::with_capacity(col.len() * row.len());
        for c in col {
            for r in row {
                data.push(c.mul(r));
            }
        }
        SeriesMatrix { rows: col.len(), cols: row.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncatedSeries) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        SeriesMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        SeriesMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let zero = || {
            let e = &self.data[0];
            TruncatedSeries::zero(e.ring(), e.bound().min(other.data[0].bound()))
        };
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                data.push(acc);
            }
        }
        SeriesMatrix { rows: self.rows, cols: other.cols, data }
    }

    pub fn scale(&self, c: WittScalar) -> Self {
        SeriesMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn scale_series(&self, s: &TruncatedSeries) -> Self {
        SeriesMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.mul(s)).collect() }
    }

    pub fn sigma_pow(&self, k: u32) -> Self {
        SeriesMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.sigma_pow(k)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    /// Copy `block` into `self` with its top-left corner at `(r, c)`.
    pub fn put_block(&mut self, r: usize, c: usize, block: &SeriesMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r + i, c + j, block.get(i, j).clone());
            }
        }
    }

    pub fn block(&self, r: usize, c: usize, rows: usize, cols: usize) -> SeriesMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(self.get(r + i, c + j).clone());
            }
        }
        SeriesMatrix { rows, cols, data }
    }

    pub fn column(&self, j: usize) -> Vec<TruncatedSeries> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }
}
