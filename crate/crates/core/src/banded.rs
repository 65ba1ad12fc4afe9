//! Banded LU with partial pivoting, for the block-tridiagonal Newton
//! systems of the coupled-mode boundary-value problem.
//!
//! Storage is row-compact: row `i` holds columns `i-kl ..= i+ku+kl`, the
//! extra `kl` superdiagonals absorbing pivoting fill-in.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + kl + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        if j < lo || j > i + self.ku + self.kl || j >= self.n {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("({i},{j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("({i},{j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Factor in place; returns pivot order for the solve phase.
    pub fn lu(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let w = self.width;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            // Pivot search over the kl rows below k.
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[k * w + kl].abs();
            for i in (k + 1)..=last {
                // Column k sits at band index kl - (i - k) in row i.
                let v = self.data[i * w + kl - (i - k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix(format!("zero pivot at column {k}")));
            }
            pivots[k] = p;
            if p != k {
                // Swap the overlapping parts of rows k and p, aligned by column.
                for j in k..=(k + self.ku + kl).min(n - 1) {
                    let a = k * w + (j + kl - k);
                    let b = p * w + (j + kl - p);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[k * w + kl];
            for i in (k + 1)..=last {
                let li = i * w + kl - (i - k);
                let m = self.data[li] / pivot;
                self.data[li] = m;
                if m != 0.0 {
                    for j in (k + 1)..=(k + self.ku + kl).min(n - 1) {
                        let a = i * w + (j + kl - i);
                        let b = k * w + (j + kl - k);
                        self.data[a] -= m * self.data[b];
                    }
                }
            }
        }
        Ok(BandedLu {
            mat: self,
            pivots,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        let w = self.mat.width;
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        // Forward: apply pivots and L.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in (k + 1)..=last {
                let m = self.mat.data[i * w + kl - (i - k)];
                x[i] -= m * x[k];
            }
        }
        // Backward: U has bandwidth ku + kl.
        for i in (0..n).rev() {
            let mut s = x[i];
            let last = (i + ku + kl).min(n - 1);
            for j in (i + 1)..=last {
                s -= self.mat.data[i * w + (j + kl - i)] * x[j];
            }
            x[i] = s / self.mat.data[i * w + kl];
        }
        x
    }
}
