//! Small dense square matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::Num;

/// Row-major `n×n` matrix over any numeric scalar.
#[derive(Clone, PartialEq, Eq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Num> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows<const M: usize>(rows: &[[T; M]; M]) -> Self {
        Self::from_fn(M, |i, j| rows[i][j])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Copy + Num>(&self, mut f: impl FnMut(T) -> U) -> SquareMatrix<U> {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix order mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// `self · rhsᵀ` without materializing the transpose.
    pub fn mul_transposed(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix order mismatch");
        Self::from_fn(self.n, |i, j| {
            self.row(i)
                .iter()
                .zip(rhs.row(j))
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix order mismatch");
        SquareMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        self.rows()
            .map(|r| r.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// First off-diagonal entry that is not zero, as `(row, col, value)`.
    pub fn first_off_diagonal(&self) -> Option<(usize, usize, T)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self[(i, j)] != T::zero() {
                    return Some((i, j, self[(i, j)]));
                }
            }
        }
        None
    }
}

impl<T: Copy + Num + PartialOrd> SquareMatrix<T> {
    /// Largest `|self[i][j] − δᵢⱼ|`.
    pub fn max_deviation_from_identity(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { T::one() } else { T::zero() };
                let diff = self[(i, j)] - target;
                let d = if diff < T::zero() {
                    T::zero() - diff
                } else {
                    diff
                };
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}×{}) [", self.n, self.n)?;
        for row in self.data.chunks_exact(self.n.max(1)) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_neutral() {
        let a = SquareMatrix::from_fn(3, |i, j| (i * 3 + j) as i64 - 4);
        let i = SquareMatrix::identity(3);
        assert_eq!(a.matmul(&i), a);
        assert_eq!(i.matmul(&a), a);
    }

    #[test]
    fn mul_transposed_matches_explicit_transpose() {
        let a = SquareMatrix::from_fn(4, |i, j| (i as f64) - 2.0 * (j as f64));
        let b = SquareMatrix::from_fn(4, |i, j| ((i + j) % 3) as f64);
        assert_eq!(a.mul_transposed(&b), a.matmul(&b.transpose()));
    }

    #[test]
    fn trace_and_frobenius() {
        let a = SquareMatrix::from_rows(&[[1i64, 2], [3, 4]]);
        assert_eq!(a.trace(), 5);
        assert_eq!(a.frobenius_sq(), 30);
        assert_eq!(a.first_off_diagonal(), Some((0, 1, 2)));
    }
}
