//! Pfaffians and quaternion determinants.
//!
//! [`pfaffian`] runs skew-symmetric Gaussian elimination (Parlett–Reid
//! ordering, pivoting on the largest entry of the active row) over any
//! [`Field`]; for exact rationals this is exact. [`pfaffian_oracle`] is the
//! ring-generic expansion along the first row and serves as an independent
//! cross-check. [`zeta_pfaffian`] handles matrices whose entries are
//! polynomials in a formal variable by evaluation and interpolation.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Field, Magnitude, Ring};

/// Relative antisymmetry tolerance for matrices built from floating point
/// formulas: `max|A + A^T| <= ANTISYMMETRY_TOL * max|A|`.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Largest order accepted by [`pfaffian_oracle`].
pub const ORACLE_MAX_ORDER: usize = 12;

/// Polynomial in the formal variable ζ with complex coefficients.
pub type ZetaPolynomial = Poly<Complex64>;

/// Antisymmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Ring> SkewMatrix<T> {
    /// Builds the matrix from its strict upper triangle; `upper(i, j)` is
    /// called for `i < j` (0-based).
    pub fn from_upper(order: usize, upper: impl Fn(usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); order * order];
        for i in 0..order {
            for j in i + 1..order {
                let v = upper(i, j);
                data[j * order + i] = -v.clone();
                data[i * order + j] = v;
            }
        }
        SkewMatrix { order, data }
    }

    /// Accepts a dense matrix only if it is exactly antisymmetric.
    pub fn from_dense_exact(order: usize, data: Vec<T>) -> Result<Self> {
        check_square(order, data.len())?;
        for i in 0..order {
            for j in i..order {
                if data[i * order + j] != -data[j * order + i].clone() {
                    return Err(Error::NotAntisymmetric {
                        max_deviation: f64::INFINITY,
                        tolerance: 0.0,
                    });
                }
            }
        }
        Ok(SkewMatrix { order, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.order + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Applies `f` entrywise; `f` must map negation to negation.
    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> SkewMatrix<U> {
        SkewMatrix::from_upper(self.order, |i, j| f(self.get(i, j)))
    }

    /// `P A P^T` where `P` sends row `perm[i]` to row `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.order);
        SkewMatrix::from_upper(self.order, |i, j| self.get(perm[i], perm[j]).clone())
    }

    /// Submatrix on the given (sorted, distinct) indices.
    pub fn principal_minor(&self, keep: &[usize]) -> Self {
        SkewMatrix::from_upper(keep.len(), |i, j| self.get(keep[i], keep[j]).clone())
    }

    /// `B A B^T` for a square `B` given row-major.
    pub fn congruence(&self, b: &[T]) -> Self {
        let n = self.order;
        assert_eq!(b.len(), n * n);
        SkewMatrix::from_upper(n, |i, j| {
            let mut acc = T::zero();
            for k in 0..n {
                if b[i * n + k].is_zero() {
                    continue;
                }
                let mut row = T::zero();
                for l in 0..n {
                    row = row + self.get(k, l).clone() * b[j * n + l].clone();
                }
                acc = acc + b[i * n + k].clone() * row;
            }
            acc
        })
    }
}

impl<T: Ring + Magnitude> SkewMatrix<T> {
    /// Accepts a dense matrix whose antisymmetry defect is within
    /// [`ANTISYMMETRY_TOL`] relative to its largest entry. The strict upper
    /// triangle is kept.
    pub fn from_dense(order: usize, data: Vec<T>) -> Result<Self> {
        check_square(order, data.len())?;
        let (dev, scale) = antisymmetry_defect(order, &data);
        let tolerance = ANTISYMMETRY_TOL * scale;
        if dev > tolerance {
            return Err(Error::NotAntisymmetric {
                max_deviation: dev,
                tolerance,
            });
        }
        Ok(SkewMatrix::from_upper(order, |i, j| data[i * order + j].clone()))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(Magnitude::magnitude).fold(0.0, f64::max)
    }
}

fn check_square(order: usize, len: usize) -> Result<()> {
    if order * order != len {
        return Err(Error::InvalidArgument(format!(
            "{len} entries do not form a {order}x{order} matrix"
        )));
    }
    Ok(())
}

/// Returns `(max |A + A^T|, max |A|)`.
pub fn antisymmetry_defect<T: Ring + Magnitude>(order: usize, data: &[T]) -> (f64, f64) {
    let mut dev = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..order {
        for j in 0..order {
            let a = &data[i * order + j];
            scale = scale.max(a.magnitude());
            if j >= i {
                let s = a.clone() + data[j * order + i].clone();
                dev = dev.max(s.magnitude());
            }
        }
    }
    (dev, scale)
}

/// Pfaffian by skew-symmetric elimination. `Pf` of the empty matrix is 1.
pub fn pfaffian<T: Field>(a: &SkewMatrix<T>) -> Result<T> {
    let n = a.order;
    if n % 2 == 1 {
        return Err(Error::OddOrder { order: n });
    }
    let mut m = a.data.clone();
    let mut pf = T::one();
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kp = (k + 1..n)
            .max_by(|&x, &y| {
                m[k * n + x]
                    .pivot_score()
                    .total_cmp(&m[k * n + y].pivot_score())
            })
            .expect("active block has at least two rows");
        if kp != k + 1 {
            for c in 0..n {
                m.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                m.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }
        let piv = m[k * n + k + 1].clone();
        if piv.is_zero() {
            return Ok(T::zero());
        }
        pf = pf * piv.clone();
        if k + 2 < n {
            let tau: Vec<T> = (k + 2..n).map(|c| m[k * n + c].clone() / piv.clone()).collect();
            let col: Vec<T> = (k + 2..n).map(|r| m[r * n + k + 1].clone()).collect();
            let w = n - k - 2;
            for i in 0..w {
                for j in 0..w {
                    if i == j {
                        continue;
                    }
                    let upd = tau[i].clone() * col[j].clone() - col[i].clone() * tau[j].clone();
                    let idx = (k + 2 + i) * n + k + 2 + j;
                    m[idx] = m[idx].clone() + upd;
                }
            }
        }
    }
    Ok(pf)
}

/// Pfaffian by recursive expansion along the first row,
/// `Pf(A) = sum_j (-1)^(j+1) a_{0j} Pf(A without rows/cols 0, j)`.
/// Works over any commutative ring; exponential cost, so the order is
/// capped at [`ORACLE_MAX_ORDER`].
pub fn pfaffian_oracle<T: Ring>(a: &SkewMatrix<T>) -> Result<T> {
    let n = a.order;
    if n % 2 == 1 {
        return Err(Error::OddOrder { order: n });
    }
    if n > ORACLE_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: ORACLE_MAX_ORDER,
        });
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(expand(a, &idx))
}

fn expand<T: Ring>(a: &SkewMatrix<T>, idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::one();
    }
    let first = idx[0];
    let mut total = T::zero();
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let entry = a.get(first, j);
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..]
            .iter()
            .copied()
            .filter(|&k| k != j)
            .collect();
        let term = entry.clone() * expand(a, &rest);
        // pos is 1-based position of j among the remaining indices
        if pos % 2 == 1 {
            total = total + term;
        } else {
            total = total - term;
        }
    }
    total
}

/// The symplectic unit `Z_{2k} = I_k ⊗ [[0, -1], [1, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticUnit {
    half_order: usize,
}

impl SymplecticUnit {
    pub fn new(half_order: usize) -> Self {
        SymplecticUnit { half_order }
    }

    pub fn half_order(&self) -> usize {
        self.half_order
    }

    pub fn order(&self) -> usize {
        2 * self.half_order
    }

    /// Dense `Z_{2k}`, row-major.
    pub fn matrix<T: Ring>(&self) -> Vec<T> {
        self.blocks(false)
    }

    /// Dense `Z_{2k}^{-1} = -Z_{2k} = I_k ⊗ [[0, 1], [-1, 0]]`.
    pub fn inverse<T: Ring>(&self) -> Vec<T> {
        self.blocks(true)
    }

    fn blocks<T: Ring>(&self, inverse: bool) -> Vec<T> {
        let n = self.order();
        let mut z = vec![T::zero(); n * n];
        for b in 0..self.half_order {
            let (i, j) = (2 * b, 2 * b + 1);
            let one = T::one();
            if inverse {
                z[i * n + j] = one.clone();
                z[j * n + i] = -one;
            } else {
                z[i * n + j] = -one.clone();
                z[j * n + i] = one;
            }
        }
        z
    }

    /// `Pf(Z_{2k}^{-1})`, computed rather than assumed.
    pub fn inverse_pfaffian(&self) -> i64 {
        let z = SkewMatrix::from_dense(self.order(), self.inverse::<f64>())
            .expect("symplectic unit is antisymmetric");
        pfaffian(&z).expect("even order").round() as i64
    }
}

/// One 2x2 block `[[S, -D], [Ĩ, S_swap]]` of a matrix kernel, where
/// `S_swap` is `S` with species and arguments exchanged.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct KernelBlock {
    pub s: Complex64,
    pub d: Complex64,
    pub itilde: Complex64,
    pub s_swap: Complex64,
}

impl KernelBlock {
    /// The block as a dense 2x2 `[[S, -D], [Ĩ, S_swap]]`.
    pub fn as_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.s, -self.d], [self.itilde, self.s_swap]]
    }

    pub fn mul(&self, rhs: &KernelBlock) -> [[Complex64; 2]; 2] {
        let (a, b) = (self.as_matrix(), rhs.as_matrix());
        let mut out = [[Complex64::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

/// Assembles the `2k x 2k` matrix `M` from a `k x k` grid of kernel blocks
/// (row-major) and returns `M Z_{2k}^{-1}`.
pub fn assemble_qmatrix(blocks: &[KernelBlock], k: usize) -> Result<Vec<Complex64>> {
    if blocks.len() != k * k {
        return Err(Error::InvalidArgument(format!(
            "{} blocks do not form a {k}x{k} grid",
            blocks.len()
        )));
    }
    let n = 2 * k;
    let mut out = vec![Complex64::zero(); n * n];
    for bi in 0..k {
        for bj in 0..k {
            let m = blocks[bi * k + bj].as_matrix();
            // [[a, b], [c, d]] * [[0, 1], [-1, 0]] = [[-b, a], [-d, c]]
            let r = 2 * bi;
            let c = 2 * bj;
            out[r * n + c] = -m[0][1];
            out[r * n + c + 1] = m[0][0];
            out[(r + 1) * n + c] = -m[1][1];
            out[(r + 1) * n + c + 1] = m[1][0];
        }
    }
    Ok(out)
}

/// Quaternion determinant `qdet M = Pf(M Z_{2k}^{-1})` of a self-dual
/// block matrix given as a `k x k` grid of kernel blocks.
pub fn quaternion_pfaffian(blocks: &[KernelBlock], k: usize) -> Result<Complex64> {
    let a = assemble_qmatrix(blocks, k)?;
    let skew = SkewMatrix::from_dense(2 * k, a)?;
    pfaffian(&skew)
}

/// Exact Pfaffian, as a polynomial in ζ, of a matrix with polynomial
/// entries of degree at most `degree_bound`.
///
/// The Pfaffian has degree at most `order/2 * degree_bound`; it is sampled
/// at the real points `0, 1, ..., d` and interpolated. One extra sample at
/// `d + 1/2` is used as a residual check.
pub fn zeta_pfaffian(a: &SkewMatrix<ZetaPolynomial>, degree_bound: usize) -> Result<ZetaPolynomial> {
    let n = a.order();
    if n % 2 == 1 {
        return Err(Error::OddOrder { order: n });
    }
    for e in a.entries() {
        if let Some(d) = e.degree() {
            if d > degree_bound {
                return Err(Error::DegreeBound {
                    found: d,
                    bound: degree_bound,
                });
            }
        }
    }
    let d = n / 2 * degree_bound;
    let points: Vec<f64> = (0..=d).map(|p| p as f64).collect();
    let eval_at = |t: f64| -> Result<Complex64> {
        let tc = Complex64::new(t, 0.0);
        pfaffian(&a.map(|p| p.eval(&tc)))
    };
    let values: Vec<Complex64> = points
        .par_iter()
        .map(|&t| eval_at(t))
        .collect::<Result<_>>()?;
    let coeffs = interpolate(&points, &values);
    let poly = ZetaPolynomial::new(coeffs);

    let probe = d as f64 + 0.5;
    let direct = eval_at(probe)?;
    let interp = poly.eval(&Complex64::new(probe, 0.0));
    let scale = values
        .iter()
        .map(|v| v.norm())
        .fold(direct.norm(), f64::max)
        .max(f64::MIN_POSITIVE);
    let residual = (direct - interp).norm() / scale;
    let tolerance = 1e-8;
    if residual > tolerance {
        return Err(Error::InterpolationResidual {
            residual,
            tolerance,
        });
    }
    Ok(poly)
}

/// Monomial coefficients of the interpolating polynomial through
/// `(points[i], values[i])`, via Newton divided differences.
pub fn interpolate(points: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(points.len(), values.len());
    let m = points.len();
    let mut dd = values.to_vec();
    for level in 1..m {
        for i in (level..m).rev() {
            let h = points[i] - points[i - level];
            assert!(h != 0.0, "interpolation points must be distinct");
            dd[i] = (dd[i] - dd[i - 1]) / h;
        }
    }
    // Expand the Newton form into monomials from the innermost term out.
    let mut coeffs = vec![Complex64::zero(); m];
    for i in (0..m).rev() {
        // coeffs <- coeffs * (t - points[i]) + dd[i]
        let mut next = vec![Complex64::zero(); m];
        for k in 0..m {
            if k + 1 < m {
                next[k + 1] += coeffs[k];
            }
            next[k] -= coeffs[k] * points[i];
        }
        next[0] += dd[i];
        coeffs = next;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{determinant, determinant_fraction_free, Square};
    use num_rational::BigRational;
    use num_traits::One;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_by_two_is_the_entry() {
        let a = SkewMatrix::from_upper(2, |_, _| c(3.5));
        assert_eq!(pfaffian(&a).unwrap(), c(3.5));
        assert_eq!(pfaffian_oracle(&a).unwrap(), c(3.5));
    }

    #[test]
    fn empty_matrix_has_unit_pfaffian() {
        let a: SkewMatrix<f64> = SkewMatrix::from_upper(0, |_, _| 0.0);
        assert_eq!(pfaffian(&a).unwrap(), 1.0);
        assert_eq!(pfaffian_oracle(&a).unwrap(), 1.0);
    }

    #[test]
    fn four_by_four_expansion_value() {
        // a12 a34 - a13 a24 + a14 a23 = 25 - 256 + 243 = 12
        let up = [[0.0, 1.0, 8.0, 27.0], [0.0, 0.0, 9.0, 32.0], [0.0, 0.0, 0.0, 25.0]];
        let a = SkewMatrix::from_upper(4, |i, j| up[i][j]);
        assert!((pfaffian(&a).unwrap() - 12.0_f64).abs() < 1e-12);
        assert_eq!(pfaffian_oracle(&a).unwrap(), 12.0);
    }

    #[test]
    fn odd_order_rejected() {
        let a = SkewMatrix::from_upper(3, |_, _| 1.0);
        assert!(matches!(pfaffian(&a), Err(Error::OddOrder { order: 3 })));
        assert!(matches!(pfaffian_oracle(&a), Err(Error::OddOrder { .. })));
    }

    #[test]
    fn oracle_order_cap() {
        let a = SkewMatrix::from_upper(14, |i, j| (i + j) as f64);
        assert!(matches!(
            pfaffian_oracle(&a),
            Err(Error::OrderTooLarge { order: 14, max: 12 })
        ));
    }

    #[test]
    fn antisymmetry_violation_rejected() {
        let mut data = vec![0.0; 4];
        data[1] = 1.0;
        data[2] = -1.0 + 1e-6;
        assert!(matches!(
            SkewMatrix::from_dense(2, data),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn block_j_has_unit_pfaffian() {
        for k in 1..=6 {
            let j = SkewMatrix::from_upper(2 * k, |a, b| {
                if b == a + 1 && a % 2 == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            });
            assert_eq!(pfaffian(&j).unwrap(), BigRational::one());
            assert_eq!(SymplecticUnit::new(k).inverse_pfaffian(), 1);
        }
    }

    #[test]
    fn rational_pfaffian_squares_to_bareiss_determinant() {
        let vals = [3, -7, 11, 2, 5, -1, 4, 9, -6, 8, 1, -3, 10, 7, -2];
        let a = SkewMatrix::from_upper(6, |i, j| {
            let v = vals[(i * 6 + j) % vals.len()];
            BigRational::new(v.into(), ((i + 2 * j) % 5 + 1).into())
        });
        let pf = pfaffian_oracle(&a).unwrap();
        assert_eq!(pfaffian(&a).unwrap(), pf);
        let dense = Square::from_fn(6, |i, j| a.get(i, j).clone());
        assert_eq!(determinant_fraction_free(&dense), pf.clone() * pf);
    }

    #[test]
    fn zeta_direct_sum_is_power() {
        for blocks in 1..=4 {
            let zeta = ZetaPolynomial::monomial(c(1.0), 1);
            let a = SkewMatrix::from_upper(2 * blocks, |i, j| {
                if j == i + 1 && i % 2 == 0 {
                    zeta.clone()
                } else {
                    ZetaPolynomial::zero()
                }
            });
            let pf = zeta_pfaffian(&a, 1).unwrap();
            for k in 0..=blocks {
                let want = if k == blocks { 1.0 } else { 0.0 };
                assert!((pf.coeff(k) - c(want)).norm() < 1e-10, "k={k} {pf:?}");
            }
        }
    }

    #[test]
    fn zeta_pfaffian_matches_symbolic_oracle() {
        // Linear entries with small integer coefficients.
        let a = SkewMatrix::from_upper(4, |i, j| {
            ZetaPolynomial::new(vec![c((i + 2 * j) as f64 - 3.0), c((i * j) as f64 + 1.0)])
        });
        let symbolic = pfaffian_oracle(&a).unwrap();
        let numeric = zeta_pfaffian(&a, 1).unwrap();
        for k in 0..=2 {
            assert!((symbolic.coeff(k) - numeric.coeff(k)).norm() < 1e-10);
        }
    }

    #[test]
    fn zeta_degree_bound_enforced() {
        let a = SkewMatrix::from_upper(2, |_, _| ZetaPolynomial::monomial(c(1.0), 2));
        assert!(matches!(zeta_pfaffian(&a, 1), Err(Error::DegreeBound { found: 2, bound: 1 })));
    }

    #[test]
    fn scalar_quaternion_block() {
        let rho = Complex64::new(0.7, 0.0);
        let block = KernelBlock {
            s: rho,
            s_swap: rho,
            ..Default::default()
        };
        assert!((quaternion_pfaffian(&[block], 1).unwrap() - rho).norm() < 1e-15);
    }

    #[test]
    fn quaternion_defect_rejected() {
        let block = KernelBlock {
            s: c(1.0),
            s_swap: c(1.0),
            d: c(0.3),
            ..Default::default()
        };
        match quaternion_pfaffian(&[block], 1) {
            Err(Error::NotAntisymmetric { max_deviation, .. }) => {
                assert!((max_deviation - 0.6).abs() < 1e-15)
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn sine_kernel_qdet_is_determinant() {
        // k = 2 with D = Ĩ = 0 reduces to det [[S11, S12], [S21, S22]].
        let sk = |x: f64| if x == 0.0 { 1.0 } else { (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x) };
        let xs = [0.0, 0.37];
        let mut blocks = Vec::new();
        for &a in &xs {
            for &b in &xs {
                blocks.push(KernelBlock {
                    s: c(sk(a - b)),
                    s_swap: c(sk(b - a)),
                    ..Default::default()
                });
            }
        }
        let q = quaternion_pfaffian(&blocks, 2).unwrap();
        let det = determinant(&Square::from_fn(2, |i, j| sk(xs[i] - xs[j])));
        assert!((q.re - det).abs() < 1e-14 && q.im.abs() < 1e-15);
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let p = [c(2.0), c(-1.0), c(0.5), c(3.0)];
        let pts = [0.0, 1.0, 2.0, 3.0];
        let vals: Vec<Complex64> = pts
            .iter()
            .map(|&t| p.iter().rev().fold(c(0.0), |acc, &k| acc * t + k))
            .collect();
        let got = interpolate(&pts, &vals);
        for (g, w) in got.iter().zip(p.iter()) {
            assert!((g - w).norm() < 1e-12);
        }
    }
}
