//! The finite two-species plasma on the circle: Boltzmann weight,
//! normalization, Gram matrices, the partition function as a
//! ζ-Pfaffian, and the skew-orthogonal structure of the monomial basis.

use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfaffian::{zeta_pfaffian, SkewMatrix, ZetaPolynomial};
use crate::poly::Poly;
use crate::quadrature::uniform_angles;

/// Particle numbers: `n1` Roman (charge-1-like, even) and `n2` Greek.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlasmaConfig {
    #[serde(rename = "N1")]
    n1: usize,
    #[serde(rename = "N2")]
    n2: usize,
}

impl PlasmaConfig {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 % 2 == 1 {
            return Err(Error::InvalidConfig(format!("N1 = {n1} must be even")));
        }
        if n1 + n2 == 0 {
            return Err(Error::InvalidConfig("need N1 + N2 >= 1".into()));
        }
        Ok(PlasmaConfig { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// `N1/2`.
    pub fn half(&self) -> usize {
        self.n1 / 2
    }

    /// `N1 + 2 N2`, the order of the Gram matrices.
    pub fn dim(&self) -> usize {
        self.n1 + 2 * self.n2
    }

    /// Laurent bandwidth of the Gram integrands in each angle.
    pub fn bandwidth(&self) -> usize {
        2 * self.dim()
    }

    /// Admissible configurations with `N1 + 2 N2 <= max_dim`.
    pub fn enumerate(max_dim: usize) -> Vec<PlasmaConfig> {
        let mut out = Vec::new();
        for n1 in (0..=max_dim).step_by(2) {
            for n2 in 0..=(max_dim - n1) / 2 {
                if let Ok(c) = PlasmaConfig::new(n1, n2) {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// One-body weight `u(θ)`: a constant or a real trigonometric polynomial
/// `sum_k cos[k] cos(kθ) + sin[k] sin(kθ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OneBodyWeight {
    Const {
        value: f64,
    },
    Fourier {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl Default for OneBodyWeight {
    fn default() -> Self {
        OneBodyWeight::Const { value: 1.0 }
    }
}

impl OneBodyWeight {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            OneBodyWeight::Const { value } => *value,
            OneBodyWeight::Fourier { cos, sin } => {
                let c: f64 = cos.iter().enumerate().map(|(k, a)| a * (k as f64 * theta).cos()).sum();
                let s: f64 = sin.iter().enumerate().map(|(k, b)| b * (k as f64 * theta).sin()).sum();
                c + s
            }
        }
    }

    /// Highest Fourier mode present.
    pub fn bandwidth(&self) -> usize {
        match self {
            OneBodyWeight::Const { .. } => 0,
            OneBodyWeight::Fourier { cos, sin } => cos.len().max(sin.len()).saturating_sub(1),
        }
    }

    /// `θ ↦ u(θ - alpha)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        match self {
            OneBodyWeight::Const { .. } => self.clone(),
            OneBodyWeight::Fourier { cos, sin } => {
                let n = cos.len().max(sin.len());
                let get = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(0.0);
                let (mut c2, mut s2) = (vec![0.0; n], vec![0.0; n]);
                for k in 0..n {
                    let (a, b) = (get(cos, k), get(sin, k));
                    let (ck, sk) = ((k as f64 * alpha).cos(), (k as f64 * alpha).sin());
                    c2[k] = a * ck - b * sk;
                    s2[k] = a * sk + b * ck;
                }
                OneBodyWeight::Fourier { cos: c2, sin: s2 }
            }
        }
    }

    pub fn sample(&self, m: usize) -> Vec<f64> {
        uniform_angles(m).into_iter().map(|t| self.eval(t)).collect()
    }
}

/// JSON run description `{N1, N2, u, v}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlasmaSpec {
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(default)]
    pub u: OneBodyWeight,
    #[serde(default)]
    pub v: OneBodyWeight,
}

impl PlasmaSpec {
    pub fn config(&self) -> Result<PlasmaConfig> {
        PlasmaConfig::new(self.n1, self.n2)
    }
}

fn ln_abs_chord(a: f64, b: f64) -> f64 {
    // |e^{ia} - e^{ib}| = 2 |sin((a - b)/2)|
    (2.0 * (0.5 * (a - b)).sin().abs()).ln()
}

/// Log of the unnormalized density
/// `prod |z_k - z_j|^2 prod |w_a - w_b|^4 prod |z_j - w_a|^2`;
/// `-inf` at coincident points.
pub fn log_boltzmann_weight(thetas: &[f64], phis: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..thetas.len() {
        for k in j + 1..thetas.len() {
            acc += 2.0 * ln_abs_chord(thetas[j], thetas[k]);
        }
        for p in phis {
            acc += 2.0 * ln_abs_chord(thetas[j], *p);
        }
    }
    for a in 0..phis.len() {
        for b in a + 1..phis.len() {
            acc += 4.0 * ln_abs_chord(phis[a], phis[b]);
        }
    }
    acc
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Natural log of a positive big integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 60;
    let top: BigInt = n >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// The integer-factorial part of the normalization,
/// `(2N2+N1)! (N1/2)! N2! / (2^N2 (N2+N1/2)!)`, exactly.
pub fn normalization_factorials(config: PlasmaConfig) -> BigRational {
    let (n1, n2, h) = (config.n1, config.n2, config.half());
    BigRational::new(
        factorial(2 * n2 + n1) * factorial(h) * factorial(n2),
        (BigInt::one() << n2) * factorial(n2 + h),
    )
}

/// `ln C(N1, N2)`.
pub fn ln_normalization_c(config: PlasmaConfig) -> f64 {
    let q = normalization_factorials(config);
    (config.n1 + config.n2) as f64 * (2.0 * PI).ln() + ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// `C(N1, N2) = (2π)^{N1+N2} (2N2+N1)! (N1/2)! N2! / (2^N2 (N2+N1/2)!)`.
pub fn normalization_c(config: PlasmaConfig) -> f64 {
    ln_normalization_c(config).exp()
}

/// `ln (N1! N2! / C)`, the prefactor of the ζ-Pfaffian.
pub fn ln_partition_prefactor(config: PlasmaConfig) -> f64 {
    ln_bigint(&(factorial(config.n1) * factorial(config.n2))) - ln_normalization_c(config)
}

/// Fourier moments `W(n) = ∫ w(θ) e^{inθ} dθ` for `n` in `[-nmax, nmax]`
/// from samples on `M` uniform nodes, stored at offset `nmax`.
#[derive(Clone, Debug)]
pub struct Moments {
    nmax: i64,
    values: Vec<Complex64>,
}

impl Moments {
    pub fn from_samples(samples: &[f64], nmax: usize) -> Self {
        let m = samples.len();
        let step = 2.0 * PI / m as f64;
        let values = (-(nmax as i64)..=nmax as i64)
            .map(|n| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(q, w)| Complex64::from_polar(*w, n as f64 * q as f64 * step))
                    .sum::<Complex64>()
                    * step
            })
            .collect();
        Moments {
            nmax: nmax as i64,
            values,
        }
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.abs() > self.nmax {
            return Complex64::zero();
        }
        self.values[(n + self.nmax) as usize]
    }
}

/// Gram matrices `a[u]`, `b[v]` of the monomial basis `p_j(z) = z^j`.
#[derive(Clone, Debug)]
pub struct GramMatrices {
    pub config: PlasmaConfig,
    pub nodes: usize,
    pub a: SkewMatrix<Complex64>,
    pub b: SkewMatrix<Complex64>,
}

impl GramMatrices {
    /// Default node count `4 (N1 + 2 N2) + 8` plus the weights' bandwidth.
    pub fn default_nodes(config: PlasmaConfig, u: &OneBodyWeight, v: &OneBodyWeight) -> usize {
        4 * config.dim() + 8 + u.bandwidth().max(v.bandwidth())
    }

    /// Smallest exact node count: above the largest moment index plus the
    /// weight bandwidth.
    pub fn required_nodes(config: PlasmaConfig, u: &OneBodyWeight, v: &OneBodyWeight) -> usize {
        config.n1 + config.n2 + u.bandwidth().max(v.bandwidth()) + 1
    }

    pub fn new(config: PlasmaConfig, u: &OneBodyWeight, v: &OneBodyWeight) -> Result<Self> {
        Self::with_nodes(config, u, v, Self::default_nodes(config, u, v))
    }

    pub fn with_nodes(
        config: PlasmaConfig,
        u: &OneBodyWeight,
        v: &OneBodyWeight,
        nodes: usize,
    ) -> Result<Self> {
        let required = Self::required_nodes(config, u, v);
        if nodes < required {
            return Err(Error::GridTooCoarse { nodes, required });
        }
        let nmax = config.n1 + config.n2;
        let um = Moments::from_samples(&u.sample(nodes), nmax);
        let vm = Moments::from_samples(&v.sample(nodes), nmax);
        let dim = config.dim();
        let entries: Vec<(Complex64, Complex64)> = (0..dim * dim)
            .into_par_iter()
            .map(|idx| {
                let (j, k) = (idx / dim + 1, idx % dim + 1);
                (gram_a(config, &um, j, k), gram_b(config, &vm, j, k))
            })
            .collect();
        let a = SkewMatrix::from_upper(dim, |i, j| {
            0.5 * (entries[i * dim + j].0 - entries[j * dim + i].0)
        });
        let b = SkewMatrix::from_upper(dim, |i, j| entries[i * dim + j].1);
        Ok(GramMatrices { config, nodes, a, b })
    }

    /// CSV dump: `matrix,j,k,re,im` with 1-based indices.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "matrix,j,k,re,im")?;
        for (name, m) in [("a", &self.a), ("b", &self.b)] {
            for j in 0..m.order() {
                for k in 0..m.order() {
                    let e = m.get(j, k);
                    writeln!(w, "{name},{},{},{:.16e},{:.16e}", j + 1, k + 1, e.re, e.im)?;
                }
            }
        }
        Ok(())
    }
}

/// `a_{j,k}[u]` (1-based) from the moments of `u`, using
/// `(Y^h - X^h)^2/(Y - X) = sum_p (X^p Y^{2h-1-p} - X^{h+p} Y^{h-1-p})`
/// with `X = z1^{-1}`, `Y = z2^{-1}`.
pub fn gram_a(config: PlasmaConfig, u: &Moments, j: usize, k: usize) -> Complex64 {
    let (n2, h) = (config.n2 as i64, config.half() as i64);
    let (j, k) = (j as i64 - 1 - n2, k as i64 - 1 - n2);
    (0..h)
        .map(|p| {
            u.get(j - p) * u.get(k - (2 * h - 1 - p)) - u.get(j - h - p) * u.get(k - (h - 1 - p))
        })
        .sum()
}

/// `b_{j,k}[v] = (k - j) ∫ v(θ) z^{j+k-1-(N1+2N2)} dθ` (1-based).
pub fn gram_b(config: PlasmaConfig, v: &Moments, j: usize, k: usize) -> Complex64 {
    let n = j as i64 + k as i64 - 1 - config.dim() as i64;
    v.get(n) * (k as f64 - j as f64)
}

/// `Z_{N1,N2}[u, v]` with its imaginary part checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub value: f64,
    pub imag: f64,
}

/// Relative tolerance on the imaginary part of a real result.
pub const IMAG_TOL: f64 = 1e-8;

/// `Z = (N1! N2! / C) [ζ^{N1/2}] Pf(ζ a[u] + b[v])`.
pub fn partition_function(
    config: PlasmaConfig,
    u: &OneBodyWeight,
    v: &OneBodyWeight,
) -> Result<PartitionValue> {
    let g = GramMatrices::new(config, u, v)?;
    partition_from_gram(&g)
}

pub fn partition_from_gram(g: &GramMatrices) -> Result<PartitionValue> {
    let m: SkewMatrix<ZetaPolynomial> =
        SkewMatrix::from_upper(g.config.dim(), |i, j| Poly::new(vec![*g.b.get(i, j), *g.a.get(i, j)]));
    let pf = zeta_pfaffian(&m, 1)?;
    let c = pf.coeff(g.config.half()) * ln_partition_prefactor(g.config).exp();
    if c.im.abs() > IMAG_TOL * c.re.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidual { real: c.re, imag: c.im });
    }
    Ok(PartitionValue { value: c.re, imag: c.im })
}

/// The skew-orthogonalizing permutation `R` (1-based) and the
/// normalizations `r_{j-1} = (2π)^2 α_j ζ + 2π β_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewOrdering {
    pub permutation: Vec<usize>,
    /// `α_j`: coefficient of `(2π)^2 ζ`.
    pub zeta_coeff: Vec<i64>,
    /// `β_j`: coefficient of `2π`.
    pub constant_coeff: Vec<i64>,
}

impl SkewOrdering {
    /// The normalizations as ζ-polynomials.
    pub fn normalizations(&self) -> Vec<ZetaPolynomial> {
        self.zeta_coeff
            .iter()
            .zip(&self.constant_coeff)
            .map(|(&a, &b)| {
                Poly::new(vec![
                    Complex64::new(2.0 * PI * b as f64, 0.0),
                    Complex64::new(4.0 * PI * PI * a as f64, 0.0),
                ])
            })
            .collect()
    }

    /// `r_j` evaluated at a given ζ.
    pub fn normalization_at(&self, j: usize, zeta: f64) -> f64 {
        4.0 * PI * PI * self.zeta_coeff[j] as f64 * zeta + 2.0 * PI * self.constant_coeff[j] as f64
    }
}

/// The permutation `R` (1-based, length `N1 + 2N2`).
pub fn skew_permutation(config: PlasmaConfig) -> Vec<usize> {
    let (n1, n2, h) = (config.n1, config.n2, config.half());
    let mut r = vec![0; config.dim()];
    for j in 1..=h {
        r[2 * j - 2] = n2 + j;
        r[2 * j - 1] = n2 + n1 - j + 1;
    }
    for j in h + 1..=h + n2 {
        r[2 * j - 2] = j - h;
        r[2 * j - 1] = 2 * n2 + 3 * h - j + 1;
    }
    r
}

/// `a[1] / (2π)^2` as exact integers (1-based indices).
pub fn gram_a_unit(config: PlasmaConfig, j: usize, k: usize) -> i64 {
    let (n1, n2) = (config.n1, config.n2);
    if j + k != config.dim() + 1 || j <= n2 || j > n2 + n1 {
        return 0;
    }
    // sgn(N2 + N1/2 + 1/2 - j)
    if j <= n2 + n1 / 2 {
        1
    } else {
        -1
    }
}

/// `b[1] / (2π)` as exact integers (1-based indices).
pub fn gram_b_unit(config: PlasmaConfig, j: usize, k: usize) -> i64 {
    if j + k != config.dim() + 1 {
        return 0;
    }
    k as i64 - j as i64
}

/// Builds `R` and `r_j`, verifying exactly (in integers) that the
/// reordered unit-weight matrix `ζ a[1] + b[1]` is block-skew-diagonal.
pub fn skew_structure(config: PlasmaConfig) -> Result<SkewOrdering> {
    let perm = skew_permutation(config);
    let dim = config.dim();
    let mut seen = vec![false; dim + 1];
    for &p in &perm {
        if p == 0 || p > dim || seen[p] {
            return Err(Error::InvalidConfig(format!("R is not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    let (mut zeta_coeff, mut constant_coeff) = (Vec::new(), Vec::new());
    for n in 0..dim {
        for m in n + 1..dim {
            let (rn, rm) = (perm[n], perm[m]);
            let alpha = gram_a_unit(config, rn, rm);
            let beta = gram_b_unit(config, rn, rm);
            if n % 2 == 0 && m == n + 1 {
                zeta_coeff.push(alpha);
                constant_coeff.push(beta);
            } else if alpha != 0 || beta != 0 {
                return Err(Error::InvalidConfig(format!(
                    "off-block entry ({}, {}) = {alpha} (2π)²ζ + {beta} (2π)",
                    n + 1,
                    m + 1
                )));
            }
        }
    }
    let (n1, n2, h) = (config.n1 as i64, config.n2 as i64, config.half());
    for (idx, (a, b)) in zeta_coeff.iter().zip(&constant_coeff).enumerate() {
        let j = idx as i64 + 1;
        let expected = if idx < h {
            (1, n1 + 1 - 2 * j)
        } else {
            (0, 2 * n2 + 2 * n1 + 1 - 2 * j)
        };
        if (*a, *b) != expected {
            return Err(Error::InvalidConfig(format!(
                "block {j}: got ({a}, {b}), expected {expected:?}"
            )));
        }
    }
    Ok(SkewOrdering {
        permutation: perm,
        zeta_coeff,
        constant_coeff,
    })
}

/// `Φ_j(z) = 2π sgn(N2 + N1/2 - 1/2 - j) z^{j+1-N1-N2}` for
/// `N2 <= j <= N2 + N1 - 1`, else 0 (`j` is 0-based).
pub fn phi_transform(config: PlasmaConfig, j: usize, z: Complex64) -> Complex64 {
    match phi_transform_term(config, j) {
        Some((c, e)) => z.powi(e as i32) * c,
        None => Complex64::zero(),
    }
}

/// `Φ_j` as `(coefficient, exponent)`, or `None` outside the band.
pub fn phi_transform_term(config: PlasmaConfig, j: usize) -> Option<(f64, i64)> {
    let (n1, n2) = (config.n1, config.n2);
    if j < n2 || j + 1 > n2 + n1 {
        return None;
    }
    let sign = if 2 * j + 1 < 2 * n2 + n1 { 1.0 } else { -1.0 };
    Some((2.0 * PI * sign, j as i64 + 1 - n1 as i64 - n2 as i64))
}
