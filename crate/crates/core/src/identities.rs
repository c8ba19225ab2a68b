//! Exact verification of Pfaffian evaluations of (confluent) Vandermonde
//! products over big rationals.
//!
//! Every check builds its matrix with exact polynomial arithmetic (no
//! division by differences of sample points), evaluates both sides of the
//! identity exactly and reports them as `"p/q"` strings.
//!
//! Derivatives are normalized as `D_l = (1/l!) d^l/dx^l`, so `D_0` is the
//! identity and `D_l x^i = binom(i, l) x^(i-l)`. With this normalization the
//! confluent Vandermonde determinant carries no extra constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant_fraction_free, Square};
use crate::pfaffian::{pfaffian, SkewMatrix};
use crate::poly::Poly;
use crate::scalar::{rational_string, Ring};

/// Univariate polynomial with exact rational coefficients.
pub type RationalPolynomial = Poly<BigRational>;

/// Pairwise distinct rationals `x_1, ..., x_N` with `N` even.
#[derive(Clone, Debug, PartialEq)]
pub struct IndeterminateSet {
    values: Vec<BigRational>,
}

impl IndeterminateSet {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if values.len() % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "need an even number of indeterminates, got {}",
                values.len()
            )));
        }
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if values[i] == values[j] {
                    return Err(Error::InvalidArgument(format!(
                        "indeterminates {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(IndeterminateSet { values })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| BigRational::from_i64(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Every value multiplied by `c` (which must be nonzero).
    pub fn scaled(&self, c: &BigRational) -> Self {
        assert!(!c.is_zero());
        IndeterminateSet {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub pass: bool,
}

/// Outcome of one exact identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub theorem: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: Option<u64>,
    pub pass: bool,
    pub lhs: String,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subchecks: Vec<SubCheck>,
}

impl IdentityReport {
    fn new(
        theorem: &str,
        n: usize,
        l: usize,
        lhs: &BigRational,
        rhs: &BigRational,
        subchecks: Vec<SubCheck>,
    ) -> Self {
        let pass = lhs == rhs && subchecks.iter().all(|c| c.pass);
        IdentityReport {
            theorem: theorem.to_string(),
            n,
            l,
            seed: None,
            pass,
            lhs: rational_string(lhs),
            rhs: rational_string(rhs),
            subchecks,
        }
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn sub(name: &str, pass: bool) -> SubCheck {
    SubCheck {
        name: name.to_string(),
        pass,
    }
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

/// `prod_{m<n} (x_n - x_m)^power`.
pub fn vandermonde_product(xs: &IndeterminateSet, power: u32) -> BigRational {
    let v = xs.values();
    let mut acc = BigRational::one();
    for n in 0..v.len() {
        for m in 0..n {
            acc *= pow(&(&v[n] - &v[m]), power as usize);
        }
    }
    acc
}

/// `D_l p` with `D_l = (1/l!) d^l/dx^l`.
pub fn confluent_derivative(p: &RationalPolynomial, l: usize) -> RationalPolynomial {
    Poly::new(
        p.coeffs()
            .iter()
            .enumerate()
            .skip(l)
            .map(|(i, c)| c * BigRational::from_integer(binomial(i, l)))
            .collect(),
    )
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bivariate polynomial `sum c_{ij} x^i y^j`, dense.
#[derive(Clone, Debug)]
struct Bivariate {
    coeffs: Vec<Vec<BigRational>>,
}

impl Bivariate {
    fn zero(dx: usize, dy: usize) -> Self {
        Bivariate {
            coeffs: vec![vec![BigRational::zero(); dy + 1]; dx + 1],
        }
    }

    fn add_term(&mut self, i: usize, j: usize, c: BigRational) {
        self.coeffs[i][j] += c;
    }

    /// `(1/(l! m!)) d^l/dx^l d^m/dy^m` evaluated at `(x, y)`.
    fn confluent_eval(&self, l: usize, m: usize, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, row) in self.coeffs.iter().enumerate().skip(l) {
            for (j, c) in row.iter().enumerate().skip(m) {
                if c.is_zero() {
                    continue;
                }
                let w = BigRational::from_integer(binomial(i, l) * binomial(j, m));
                acc += c * w * pow(x, i - l) * pow(y, j - m);
            }
        }
        acc
    }

    /// `(y^h - x^h)^2 / (y - x)`, formed as `(y^h - x^h) * sum_p y^(h-1-p) x^p`.
    fn squared_power_quotient(h: usize) -> Self {
        let deg = 2 * h - 1;
        let mut out = Bivariate::zero(deg, deg);
        for p in 0..h {
            // y^h * y^(h-1-p) x^p  -  x^h * y^(h-1-p) x^p
            out.add_term(p, 2 * h - 1 - p, BigRational::one());
            out.add_term(h + p, h - 1 - p, -BigRational::one());
        }
        out
    }
}

/// The skew matrix with entries `(x_n^{N/2} - x_m^{N/2})^2 / (x_n - x_m)`.
pub fn theorem1_matrix(xs: &IndeterminateSet) -> SkewMatrix<BigRational> {
    let f = Bivariate::squared_power_quotient(xs.len() / 2);
    let v = xs.values();
    SkewMatrix::from_upper(v.len(), |m, n| f.confluent_eval(0, 0, &v[m], &v[n]))
}

/// Pfaffian form of the Vandermonde product, plus the three proof steps:
/// the Pfaffian vanishes when two indeterminates coincide, it is
/// homogeneous of degree `N(N-1)/2`, and the two sides agree.
pub fn check_theorem1(xs: &IndeterminateSet) -> Result<IdentityReport> {
    let n = xs.len();
    let f = Bivariate::squared_power_quotient(n / 2);
    let build = |vals: &[BigRational]| {
        SkewMatrix::from_upper(vals.len(), |a, b| f.confluent_eval(0, 0, &vals[a], &vals[b]))
    };
    let lhs = pfaffian(&build(xs.values()))?;
    let rhs = vandermonde_product(xs, 1);

    let mut vanishes = true;
    for a in 0..n {
        for b in a + 1..n {
            let mut vals = xs.values().to_vec();
            vals[b] = vals[a].clone();
            vanishes &= pfaffian(&build(&vals))?.is_zero();
        }
    }

    let c = BigRational::new(BigInt::from(-3), BigInt::from(2));
    let scaled = pfaffian(&build(xs.scaled(&c).values()))?;
    let homogeneous = scaled == &lhs * pow(&c, n * (n.saturating_sub(1)) / 2);

    Ok(IdentityReport::new(
        "theorem1",
        n,
        1,
        &lhs,
        &rhs,
        vec![
            sub("vanishes_on_coincidence", vanishes),
            sub("homogeneous_same_degree", homogeneous),
            sub("unit_ratio", lhs == rhs),
        ],
    ))
}

fn require_monic(p: &RationalPolynomial, degree: usize, name: &str) -> Result<()> {
    if p.degree() != Some(degree) || !p.is_monic() {
        return Err(Error::InvalidArgument(format!(
            "{name} must be monic of degree {degree}"
        )));
    }
    Ok(())
}

/// `(p(y) - p(x)) / (y - x)` evaluated exactly via
/// `sum_k c_k sum_{i+j=k-1} x^i y^j`.
fn divided_difference(p: &RationalPolynomial, x: &BigRational, y: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for (k, c) in p.coeffs().iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let mut s = BigRational::zero();
        for i in 0..k {
            s += pow(x, i) * pow(y, k - 1 - i);
        }
        acc += c * s;
    }
    acc
}

/// Generalization of [`check_theorem1`] to two monic polynomials `F`, `G`
/// of degree `N/2`.
pub fn check_fg_identity(
    xs: &IndeterminateSet,
    f: &RationalPolynomial,
    g: &RationalPolynomial,
) -> Result<IdentityReport> {
    let n = xs.len();
    require_monic(f, n / 2, "F")?;
    require_monic(g, n / 2, "G")?;
    let v = xs.values();
    let a = SkewMatrix::from_upper(n, |m, k| {
        (f.eval(&v[k]) - f.eval(&v[m])) * divided_difference(g, &v[m], &v[k])
    });
    let lhs = pfaffian(&a)?;
    let rhs = vandermonde_product(xs, 1);
    Ok(IdentityReport::new("fg", n, 1, &lhs, &rhs, vec![]))
}

fn require_ladder(polys: &[RationalPolynomial], count: usize) -> Result<()> {
    if polys.len() != count {
        return Err(Error::InvalidArgument(format!(
            "need {count} polynomials, got {}",
            polys.len()
        )));
    }
    for (k, p) in polys.iter().enumerate() {
        if p.degree() != Some(k) {
            return Err(Error::InvalidArgument(format!(
                "polynomial {k} has degree {:?}, expected {k}",
                p.degree()
            )));
        }
    }
    Ok(())
}

fn leading_product(polys: &[RationalPolynomial]) -> BigRational {
    polys.iter().map(|p| p.leading()).fold(BigRational::one(), |a, b| a * b)
}

/// `Pf[sum_l pi_{2l}(x_m) pi_{2l+1}(x_n) - pi_{2l+1}(x_m) pi_{2l}(x_n)]
///  = prod a_k prod (x_n - x_m)` for a degree ladder `deg pi_k = k`.
pub fn check_theorem2(xs: &IndeterminateSet, polys: &[RationalPolynomial]) -> Result<IdentityReport> {
    let n = xs.len();
    require_ladder(polys, n)?;
    let v = xs.values();
    let vals: Vec<Vec<BigRational>> = v.iter().map(|x| polys.iter().map(|p| p.eval(x)).collect()).collect();
    let a = SkewMatrix::from_upper(n, |m, k| {
        (0..n / 2).fold(BigRational::zero(), |acc, l| {
            acc + &vals[m][2 * l] * &vals[k][2 * l + 1] - &vals[m][2 * l + 1] * &vals[k][2 * l]
        })
    });
    let lhs = pfaffian(&a)?;
    let rhs = leading_product(polys) * vandermonde_product(xs, 1);
    Ok(IdentityReport::new("theorem2", n, 1, &lhs, &rhs, vec![]))
}

/// Confluent Vandermonde matrix: row `(m, l)` (node-major) holds
/// `D_l pi_c(x_m)` for `c = 0..LN`.
pub fn confluent_vandermonde(
    xs: &IndeterminateSet,
    l: usize,
    polys: &[RationalPolynomial],
) -> Square<BigRational> {
    let derivs: Vec<Vec<RationalPolynomial>> = (0..l)
        .map(|d| polys.iter().map(|p| confluent_derivative(p, d)).collect())
        .collect();
    let v = xs.values();
    Square::from_fn(l * v.len(), |row, col| {
        let (m, d) = (row / l, row % l);
        derivs[d][col].eval(&v[m])
    })
}

/// The `LN x LN` skew matrix `J = I ⊗ [[0, 1], [-1, 0]]`.
pub fn block_j(order: usize) -> Square<BigRational> {
    Square::from_fn(order, |i, j| {
        if i % 2 == 0 && j == i + 1 {
            BigRational::one()
        } else if j % 2 == 0 && i == j + 1 {
            -BigRational::one()
        } else {
            BigRational::zero()
        }
    })
}

/// Confluent generalization: `Pf W = det V = prod a_k prod (x_n - x_m)^{L^2}`,
/// together with the factorization `W = V J V^T`.
pub fn check_theorem3(
    xs: &IndeterminateSet,
    l: usize,
    polys: &[RationalPolynomial],
) -> Result<IdentityReport> {
    if l == 0 {
        return Err(Error::InvalidArgument("L must be positive".into()));
    }
    let n = xs.len();
    let size = l * n;
    require_ladder(polys, size)?;
    let v = confluent_vandermonde(xs, l, polys);
    let w = SkewMatrix::from_upper(size, |r, s| {
        (0..size / 2).fold(BigRational::zero(), |acc, k| {
            acc + v.get(r, 2 * k) * v.get(s, 2 * k + 1) - v.get(r, 2 * k + 1) * v.get(s, 2 * k)
        })
    });
    let pf_w = pfaffian(&w)?;
    let det_v = determinant_fraction_free(&v);
    let rhs = leading_product(polys) * vandermonde_product(xs, (l * l) as u32);

    let vjvt = v.mul(&block_j(size)).mul(&v.transpose());
    let factorized = (0..size).all(|r| (0..size).all(|s| vjvt.get(r, s) == w.get(r, s)));

    Ok(IdentityReport::new(
        "theorem3",
        n,
        l,
        &pf_w,
        &rhs,
        vec![
            sub("pf_w_equals_det_v", pf_w == det_v),
            sub("det_v_equals_product", det_v == rhs),
            sub("w_equals_v_j_vt", factorized),
        ],
    ))
}

/// Signature of the permutation sorting the degrees
/// `(0, LN-1, 1, LN-2, ..., LN/2-1, LN/2)` into increasing order.
pub fn degree_ordering_signature(l: usize, n: usize) -> i8 {
    let size = l * n;
    let degrees: Vec<usize> = (0..size)
        .map(|k| if k % 2 == 0 { k / 2 } else { size - 1 - k / 2 })
        .collect();
    let inversions = (0..size)
        .flat_map(|i| (i + 1..size).map(move |j| (i, j)))
        .filter(|&(i, j)| degrees[i] > degrees[j])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `Pf U = prod (x_n - x_m)^{L^2}` where `U` holds the normalized mixed
/// derivatives of `F(x, y) = (y^{LN/2} - x^{LN/2})^2 / (y - x)`.
pub fn check_corollary1(xs: &IndeterminateSet, l: usize) -> Result<IdentityReport> {
    if l == 0 {
        return Err(Error::InvalidArgument("L must be positive".into()));
    }
    let n = xs.len();
    let size = l * n;
    let f = Bivariate::squared_power_quotient(size / 2);
    let v = xs.values();
    let u = SkewMatrix::from_upper(size, |r, s| {
        f.confluent_eval(r % l, s % l, &v[r / l], &v[s / l])
    });
    let lhs = pfaffian(&u)?;
    let rhs = vandermonde_product(xs, (l * l) as u32);
    Ok(IdentityReport::new(
        "corollary1",
        n,
        l,
        &lhs,
        &rhs,
        vec![sub("degree_ordering_signature", degree_ordering_signature(l, n) == 1)],
    ))
}

/// Rational with numerator in `[-20, 20]` and denominator in `[1, 20]`.
pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(rng.gen_range(-20i64..=20).into(), rng.gen_range(1i64..=20).into())
}

/// `n` distinct random rationals (rejection sampled).
pub fn random_indeterminates<R: Rng>(rng: &mut R, n: usize) -> IndeterminateSet {
    let mut vals: Vec<BigRational> = Vec::with_capacity(n);
    while vals.len() < n {
        let q = random_rational(rng);
        if !vals.contains(&q) {
            vals.push(q);
        }
    }
    IndeterminateSet { values: vals }
}

/// Random polynomials with `deg pi_k = k` and small rational coefficients.
pub fn random_ladder<R: Rng>(rng: &mut R, count: usize) -> Vec<RationalPolynomial> {
    (0..count)
        .map(|k| {
            let mut c: Vec<BigRational> = (0..=k)
                .map(|_| BigRational::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=5).into()))
                .collect();
            while c[k].is_zero() {
                c[k] = BigRational::new(rng.gen_range(1i64..=5).into(), rng.gen_range(1i64..=5).into());
                if rng.gen_bool(0.5) {
                    c[k] = -c[k].clone();
                }
            }
            Poly::new(c)
        })
        .collect()
}

/// Random monic polynomial of the given degree.
pub fn random_monic<R: Rng>(rng: &mut R, degree: usize) -> RationalPolynomial {
    let mut c: Vec<BigRational> = (0..degree).map(|_| random_rational(rng)).collect();
    c.push(BigRational::one());
    Poly::new(c)
}

/// Which identity a suite entry exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Theorem1,
    Fg,
    Theorem2,
    Theorem3,
    Corollary1,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::Theorem1,
        Theorem::Fg,
        Theorem::Theorem2,
        Theorem::Theorem3,
        Theorem::Corollary1,
    ];

    pub fn parse(s: &str) -> Option<Vec<Theorem>> {
        Some(match s {
            "all" => Theorem::ALL.to_vec(),
            "1" | "theorem1" => vec![Theorem::Theorem1],
            "fg" => vec![Theorem::Fg],
            "2" | "theorem2" => vec![Theorem::Theorem2],
            "3" | "theorem3" => vec![Theorem::Theorem3],
            "c1" | "corollary1" => vec![Theorem::Corollary1],
            _ => return None,
        })
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }

    /// Whether the identity involves the confluence order `L`.
    pub fn confluent(self) -> bool {
        matches!(self, Theorem::Theorem3 | Theorem::Corollary1)
    }
}

/// Derives an independent seed for one instance.
pub fn instance_seed(base: u64, theorem: Theorem, n: usize, l: usize, trial: usize) -> u64 {
    let mut z = base
        ^ theorem.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (n as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (l as u64).wrapping_mul(0x94D0_49BB_1331_11EB)
        ^ (trial as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one random instance.
pub fn run_instance(theorem: Theorem, n: usize, l: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random_indeterminates(&mut rng, n);
    let report = match theorem {
        Theorem::Theorem1 => check_theorem1(&xs)?,
        Theorem::Fg => {
            let f = random_monic(&mut rng, n / 2);
            let g = random_monic(&mut rng, n / 2);
            check_fg_identity(&xs, &f, &g)?
        }
        Theorem::Theorem2 => check_theorem2(&xs, &random_ladder(&mut rng, n))?,
        Theorem::Theorem3 => check_theorem3(&xs, l, &random_ladder(&mut rng, l * n))?,
        Theorem::Corollary1 => check_corollary1(&xs, l)?,
    };
    Ok(report.with_seed(seed))
}

/// Runs `trials` random instances of each requested identity for every
/// admissible `(N, L)`; confluence orders are only applied to the
/// confluent identities, and only when `L N <= max_size`. Reports come
/// back in a fixed order regardless of scheduling.
pub fn run_suite(
    theorems: &[Theorem],
    ns: &[usize],
    ls: &[usize],
    trials: usize,
    max_size: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let mut jobs = Vec::new();
    for &t in theorems {
        for &n in ns {
            if n == 0 || n % 2 == 1 {
                return Err(Error::InvalidArgument(format!("N = {n} must be positive and even")));
            }
            let lvals: Vec<usize> = if t.confluent() { ls.to_vec() } else { vec![1] };
            for l in lvals {
                if l == 0 || l * n > max_size {
                    continue;
                }
                for trial in 0..trials {
                    jobs.push((t, n, l, instance_seed(seed, t, n, l, trial)));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(t, n, l, s)| run_instance(t, n, l, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_i64(n)
    }

    fn poly(c: &[i64]) -> RationalPolynomial {
        Poly::new(c.iter().map(|&v| q(v)).collect())
    }

    #[test]
    fn vandermonde_examples() {
        let two = IndeterminateSet::from_integers(&[0, 1]).unwrap();
        assert_eq!(vandermonde_product(&two, 1), q(1));
        assert_eq!(vandermonde_product(&two, 4), q(1));
        let four = IndeterminateSet::from_integers(&[0, 1, 2, 3]).unwrap();
        assert_eq!(vandermonde_product(&four, 1), q(12));
    }

    #[test]
    fn indeterminates_validated() {
        assert!(IndeterminateSet::from_integers(&[1, 2, 3]).is_err());
        assert!(IndeterminateSet::from_integers(&[1, 2, 1, 4]).is_err());
    }

    #[test]
    fn theorem1_small_cases() {
        let xs = IndeterminateSet::from_integers(&[0, 1, 2, 3]).unwrap();
        let m = theorem1_matrix(&xs);
        let upper: Vec<BigRational> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
            .iter()
            .map(|&(i, j)| m.get(i, j).clone())
            .collect();
        assert_eq!(upper, [1, 8, 27, 9, 32, 25].map(q).to_vec());
        let r = check_theorem1(&xs).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.lhs, "12");

        let two = IndeterminateSet::new(vec![q(5), BigRational::new(1.into(), 3.into())]).unwrap();
        let m = theorem1_matrix(&two);
        assert_eq!(m.get(0, 1), &(two.values()[1].clone() - two.values()[0].clone()));
    }

    #[test]
    fn fg_reduces_to_theorem1() {
        let xs = IndeterminateSet::from_integers(&[-2, 1, 4, 7]).unwrap();
        let x2 = poly(&[0, 0, 1]);
        let r = check_fg_identity(&xs, &x2, &x2).unwrap();
        assert_eq!(r.lhs, check_theorem1(&xs).unwrap().lhs);
        assert!(r.pass);
        let r = check_fg_identity(&xs, &poly(&[0, 1, 1]), &poly(&[-1, 0, 1])).unwrap();
        assert!(r.pass);
        let two = IndeterminateSet::from_integers(&[3, 8]).unwrap();
        assert!(check_fg_identity(&two, &poly(&[4, 1]), &poly(&[-9, 1])).unwrap().pass);
    }

    #[test]
    fn fg_rejects_non_monic() {
        let xs = IndeterminateSet::from_integers(&[0, 1, 2, 3]).unwrap();
        assert!(check_fg_identity(&xs, &poly(&[0, 0, 2]), &poly(&[0, 0, 1])).is_err());
        assert!(check_fg_identity(&xs, &poly(&[0, 1]), &poly(&[0, 0, 1])).is_err());
    }

    #[test]
    fn theorem2_monomials_and_scaling() {
        let xs = IndeterminateSet::from_integers(&[2, 9]).unwrap();
        let r = check_theorem2(&xs, &[poly(&[1]), poly(&[0, 1])]).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, "7");
        let r = check_theorem2(&xs, &[poly(&[2]), poly(&[0, 2])]).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, "28");
    }

    #[test]
    fn theorem2_chebyshev_ladder() {
        // T0..T3
        let ladder = [poly(&[1]), poly(&[0, 1]), poly(&[-1, 0, 2]), poly(&[0, -3, 0, 4])];
        let xs = IndeterminateSet::from_integers(&[-3, 0, 2, 5]).unwrap();
        assert!(check_theorem2(&xs, &ladder).unwrap().pass);
    }

    #[test]
    fn theorem2_rejects_broken_ladder() {
        let xs = IndeterminateSet::from_integers(&[0, 1]).unwrap();
        assert!(check_theorem2(&xs, &[poly(&[1]), poly(&[0, 0, 1])]).is_err());
    }

    #[test]
    fn theorem3_with_l1_is_theorem2() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs = random_indeterminates(&mut rng, 4);
        let ladder = random_ladder(&mut rng, 4);
        let a = check_theorem3(&xs, 1, &ladder).unwrap();
        let b = check_theorem2(&xs, &ladder).unwrap();
        assert!(a.pass && b.pass);
        assert_eq!(a.lhs, b.lhs);
    }

    #[test]
    fn theorem3_l2_monomials_at_0_1() {
        let xs = IndeterminateSet::from_integers(&[0, 1]).unwrap();
        let ladder: Vec<_> = (0..4).map(|k| Poly::monomial(q(1), k)).collect();
        let r = check_theorem3(&xs, 2, &ladder).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.lhs, "1");
    }

    #[test]
    fn corollary1_small_cases() {
        let xs = IndeterminateSet::from_integers(&[0, 1]).unwrap();
        let r = check_corollary1(&xs, 2).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, "1");
        let xs = IndeterminateSet::from_integers(&[-1, 3, 4, 10]).unwrap();
        assert_eq!(check_corollary1(&xs, 1).unwrap().lhs, check_theorem1(&xs).unwrap().lhs);
    }

    #[test]
    fn degree_ordering_is_even() {
        for (l, n) in [(1, 4), (2, 2), (2, 4), (3, 2), (1, 2), (3, 4), (2, 6)] {
            assert_eq!(degree_ordering_signature(l, n), 1, "L={l} N={n}");
        }
    }

    #[test]
    fn wrong_derivative_normalization_breaks_corollary() {
        // With 1/(l-1)! in place of 1/l! the second derivative rows pick up a
        // factor 2 each, so L = 3 fails by 2^N.
        let xs = IndeterminateSet::from_integers(&[1, 4]).unwrap();
        let good = check_corollary1(&xs, 3).unwrap();
        assert!(good.pass);
        let f = Bivariate::squared_power_quotient(3);
        let v = xs.values();
        let w = |d: usize| if d == 2 { q(2) } else { q(1) };
        let u = SkewMatrix::from_upper(6, |r, s| {
            f.confluent_eval(r % 3, s % 3, &v[r / 3], &v[s / 3]) * w(r % 3) * w(s % 3)
        });
        let skewed = pfaffian(&u).unwrap();
        assert_eq!(skewed, vandermonde_product(&xs, 9) * q(4));
    }

    #[test]
    fn reports_serialize_with_exact_strings() {
        let xs = IndeterminateSet::new(vec![BigRational::new(1.into(), 2.into()), q(3)]).unwrap();
        let r = check_theorem1(&xs).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["lhs"], "5/2");
        assert_eq!(json["N"], 2);
        assert_eq!(json["pass"], true);
    }

    #[test]
    fn suite_is_deterministic() {
        let a = run_suite(&Theorem::ALL, &[2, 4], &[1, 2], 3, 12, 99).unwrap();
        let b = run_suite(&Theorem::ALL, &[2, 4], &[1, 2], 3, 12, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.pass));
    }
}
