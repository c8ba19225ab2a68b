//! Dense square-matrix helpers: determinants and products.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Field, Ring};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Ring> Square<T> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Square { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square");
        Square {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        Self::from_fn(self.n, |i, j| {
            (0..self.n).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * rhs.get(k, j).clone()
            })
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1))
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Field>(m: &Square<T>) -> T {
    let n = m.n;
    let mut a = m.data.clone();
    let mut det = T::one();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[x * n + k]
                    .pivot_score()
                    .total_cmp(&a[y * n + k].pivot_score())
            })
            .expect("non-empty pivot range");
        if a[p * n + k].is_zero() {
            return T::zero();
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k].clone();
        det = det * piv.clone();
        for i in k + 1..n {
            let f = a[i * n + k].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a[k * n + j].clone() * f.clone();
                a[i * n + j] = a[i * n + j].clone() - v;
            }
        }
    }
    det
}

/// Exact determinant of a rational matrix by fraction-free (Bareiss)
/// elimination over the integers. Rows are first cleared of denominators;
/// every intermediate division is exact.
pub fn determinant_fraction_free(m: &Square<BigRational>) -> BigRational {
    let n = m.n;
    if n == 0 {
        return BigRational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<BigInt> = Vec::with_capacity(n * n);
    for row in m.rows() {
        let lcm = row
            .iter()
            .fold(BigInt::one(), |l, q| l.lcm(q.denom()));
        for q in row {
            a.push(q.numer() * (&lcm / q.denom()));
        }
        scale *= lcm;
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                debug_assert!((&num % &prev).is_zero());
                a[i * n + j] = num / &prev;
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = a[k * n + k].clone();
    }
    let det = sign * a[n * n - 1].clone();
    BigRational::new(det, scale)
}
