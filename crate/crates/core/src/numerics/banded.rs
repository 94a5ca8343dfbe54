//! Banded linear systems solved by Gaussian elimination with partial
//! pivoting restricted to the band.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field element usable in [`BandedSystem`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square system `A x = b` with `A` nonzero only on `-lower..=upper`
/// diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSystem<T> {
    dim: usize,
    lower: usize,
    upper: usize,
    // row-major, `lower + upper + 1` slots per row; column j of row i at j - i + lower
    band: Vec<T>,
    rhs: Vec<T>,
}

pub type BandedComplexSystem = BandedSystem<Complex64>;

impl<T: Scalar> BandedSystem<T> {
    pub fn new(dim: usize, lower: usize, upper: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSystem("dimension must be at least 1".into()));
        }
        let width = lower + upper + 1;
        Ok(BandedSystem {
            dim,
            lower,
            upper,
            band: vec![T::zero(); dim * width],
            rhs: vec![T::zero(); dim],
        })
    }

    pub fn tridiagonal(dim: usize) -> Result<Self> {
        Self::new(dim, 1, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.dim && j < self.dim && j + self.lower >= i && j <= i + self.upper
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.band[self.slot(i, j)]
        } else {
            T::zero()
        }
    }

    /// Sets `A[i][j]`. Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.slot(i, j);
        self.band[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.slot(i, j);
        self.band[k] += value;
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn set_rhs(&mut self, i: usize, value: T) {
        self.rhs[i] = value;
    }

    /// Writes a full row given as `(column, value)` pairs plus its right-hand side.
    pub fn set_row(&mut self, i: usize, entries: &[(usize, T)], rhs: T) {
        for &(j, v) in entries {
            self.set(i, j, v);
        }
        self.rhs[i] = rhs;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.dim - 1);
                let mut acc = T::zero();
                for j in lo..=hi {
                    acc += self.get(i, j) * x[j];
                }
                acc
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.band
            .chunks(self.width())
            .map(|row| row.iter().map(|v| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖Ax − b‖∞`.
    pub fn residual_inf(&self, x: &[T]) -> f64 {
        self.matvec(x)
            .into_iter()
            .zip(&self.rhs)
            .map(|(ax, &b)| (ax - b).modulus())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Solves a banded system by LU with partial pivoting inside the band.
///
/// Under row interchanges the upper bandwidth of `U` grows by at most the
/// lower bandwidth, so the work array carries `lower` extra slots per row.
pub fn solve_banded<T: Scalar>(system: &BandedSystem<T>) -> Result<Vec<T>> {
    let n = system.dim;
    let kl = system.lower;
    let ku = system.upper;
    let width = 2 * kl + ku + 1;
    let reach = ku + kl;
    let threshold = 1e-14 * system.norm_inf();

    let mut a = vec![T::zero(); n * width];
    for i in 0..n {
        let lo = i.saturating_sub(kl);
        let hi = (i + ku).min(n - 1);
        for j in lo..=hi {
            a[i * width + j + kl - i] = system.get(i, j);
        }
    }
    let at = |i: usize, j: usize| i * width + j + kl - i;
    let mut b = system.rhs.clone();

    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let mut pivot = k;
        let mut best = a[at(k, k)].modulus();
        for i in k + 1..=last_row {
            let m = a[at(i, k)].modulus();
            if m > best {
                best = m;
                pivot = i;
            }
        }
        if !(best > threshold) {
            return Err(Error::SingularSystem {
                row: k,
                magnitude: best,
                threshold,
            });
        }
        let last_col = (k + reach).min(n - 1);
        if pivot != k {
            for j in k..=last_col {
                a.swap(at(k, j), at(pivot, j));
            }
            b.swap(k, pivot);
        }
        let diag = a[at(k, k)];
        for i in k + 1..=last_row {
            let factor = a[at(i, k)] / diag;
            if factor == T::zero() {
                continue;
            }
            a[at(i, k)] = T::zero();
            for j in k + 1..=last_col {
                let u = a[at(k, j)];
                a[at(i, j)] -= factor * u;
            }
            let bk = b[k];
            b[i] -= factor * bk;
        }
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let last_col = (i + reach).min(n - 1);
        let mut acc = b[i];
        for j in i + 1..=last_col {
            acc -= a[at(i, j)] * x[j];
        }
        x[i] = acc / a[at(i, i)];
    }
    Ok(x)
}
