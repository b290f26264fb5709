//! Banded matrix storage with an LU factorisation (partial pivoting).

use crate::{Error, Result, Scalar};

/// Square matrix with `kl` sub- and `ku` super-diagonals. Each row keeps an
/// extra `kl` slots to the right for fill-in produced by row interchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `(kl, ku)`.
    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            T::zero()
        }
    }

    /// Adds `value` to entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let s = self.slot(i, j);
        self.data[s] += value;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Solves `A x = b` by banded Gaussian elimination with partial pivoting.
    pub fn solve(mut self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let (kl, ku) = (self.kl, self.ku);
        let mut x = b.to_vec();
        // fill-in may reach kl + ku columns right of the diagonal
        let reach = kl + ku;
        let at = |m: &Self, i: usize, j: usize| m.data[m.slot(i, j)];

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = at(&self, k, k).abs();
            for i in k + 1..=last_row {
                let v = at(&self, i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::SingularMatrix(k));
            }
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, c) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, c);
                }
                x.swap(k, p);
            }
            let pivot = at(&self, k, k);
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / pivot;
                if l == T::zero() {
                    continue;
                }
                self.data[s] = T::zero();
                for j in k + 1..=last_col {
                    let u = at(&self, k, j);
                    let s = self.slot(i, j);
                    self.data[s] -= l * u;
                }
                let xk = x[k];
                x[i] -= l * xk;
            }
        }

        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let s = (k + 1..=last_col).fold(x[k], |s, j| s - at(&self, k, j) * x[j]);
            x[k] = s / at(&self, k, k);
        }
        Ok(x)
    }
}
