//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl`
/// columns absorb fill-in from row exchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return T::zero();
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::zero();
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc += self.data[self.slot(i, j)] * *xj;
            }
            *yi = acc;
        }
        y
    }

    /// Factorizes in place, consuming the matrix.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut perm = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > T::zero()) {
                return Err(Error::Singular(k));
            }
            perm[k] = piv;
            let right = (k + reach).min(n - 1);
            if piv != k {
                for j in k..=right {
                    let a = self.slot(k, j);
                    let b = self.slot(piv, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last {
                let sik = self.slot(i, k);
                let l = self.data[sik] / pivot;
                self.data[sik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=right {
                    let v = self.data[self.slot(k, j)];
                    let s = self.slot(i, j);
                    self.data[s] -= l * v;
                }
            }
        }
        Ok(BandLu { m: self, perm })
    }
}

/// Factors `P A = L U` of a band matrix.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let m = &self.m;
        let n = m.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            b.swap(k, self.perm[k]);
            let bk = b[k];
            for (i, bi) in b
                .iter_mut()
                .enumerate()
                .take((k + m.kl).min(n - 1) + 1)
                .skip(k + 1)
            {
                *bi -= m.data[m.slot(i, k)] * bk;
            }
        }
        let reach = m.kl + m.ku;
        for i in (0..n).rev() {
            let mut acc = b[i];
            for (j, bj) in b
                .iter()
                .enumerate()
                .take((i + reach).min(n - 1) + 1)
                .skip(i + 1)
            {
                acc -= m.data[m.slot(i, j)] * *bj;
            }
            b[i] = acc / m.data[m.slot(i, i)];
        }
        b
    }
}
