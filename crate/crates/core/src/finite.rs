//! Finite-N correlation functions of the two-species plasma as
//! quaternion determinants of a 2×2-block matrix kernel.
//!
//! The kernel is built from the skew-orthogonal basis of
//! [`crate::plasma::skew_structure`]. Every basis function and its
//! ε-transform is a monomial `c z^p` whose coefficient is at most linear in
//! ζ. Entries are either evaluated at a finite ζ, or expanded for ζ → ∞,
//! where the terms growing with ζ cancel and the constant term is kept.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfaffian::{interpolate, quaternion_pfaffian, KernelBlock};
use crate::plasma::{phi_transform_term, skew_permutation, skew_structure, PlasmaConfig, SkewOrdering};

/// Particle species: Roman (θ angles) or Greek (φ angles).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    #[serde(rename = "R")]
    Roman,
    #[serde(rename = "G")]
    Greek,
}

impl Species {
    pub fn label(self) -> &'static str {
        match self {
            Species::Roman => "R",
            Species::Greek => "G",
        }
    }
}

/// `c z^p` with `c = c0 + c1 ζ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial {
    pub c0: f64,
    pub c1: f64,
    pub power: i64,
}

impl Monomial {
    fn plain(power: i64) -> Self {
        Monomial { c0: 1.0, c1: 0.0, power }
    }

    fn eval(&self, z: Complex64) -> [Complex64; 2] {
        let zp = z.powi(self.power as i32);
        [zp * self.c0, zp * self.c1]
    }
}

/// Tables of `ψ_i^{(s)}`, `ε_s[ψ_i^{(s)}]` (`i = 0..N1+2N2`) and the
/// normalizations `r_j`.
#[derive(Clone, Debug)]
pub struct BasisFunctions {
    pub config: PlasmaConfig,
    pub psi_roman: Vec<Monomial>,
    pub psi_greek: Vec<Monomial>,
    pub eps_roman: Vec<Monomial>,
    pub eps_greek: Vec<Monomial>,
    pub ordering: SkewOrdering,
}

impl BasisFunctions {
    pub fn new(config: PlasmaConfig) -> Result<Self> {
        let ordering = skew_structure(config)?;
        let perm = skew_permutation(config);
        let dim = config.dim() as i64;
        let n2 = config.n2() as i64;
        let mut psi_roman = Vec::new();
        let mut psi_greek = Vec::new();
        let mut eps_roman = Vec::new();
        let mut eps_greek = Vec::new();
        for &r in &perm {
            let deg = r as i64 - 1;
            psi_roman.push(Monomial::plain(deg - n2));
            let pg = deg - (dim - 2) / 2;
            psi_greek.push(Monomial::plain(pg));
            eps_roman.push(match phi_transform_term(config, deg as usize) {
                Some((c, e)) => Monomial { c0: 0.0, c1: -0.5 * c, power: e },
                None => Monomial { c0: 0.0, c1: 0.0, power: 0 },
            });
            eps_greek.push(Monomial { c0: 0.5 * pg as f64, c1: 0.0, power: pg - 1 });
        }
        Ok(BasisFunctions {
            config,
            psi_roman,
            psi_greek,
            eps_roman,
            eps_greek,
            ordering,
        })
    }

    fn psi(&self, s: Species) -> &[Monomial] {
        match s {
            Species::Roman => &self.psi_roman,
            Species::Greek => &self.psi_greek,
        }
    }

    fn eps(&self, s: Species) -> &[Monomial] {
        match s {
            Species::Roman => &self.eps_roman,
            Species::Greek => &self.eps_greek,
        }
    }
}

/// How ζ enters the kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelMode {
    /// Evaluate at a finite ζ.
    Zeta(f64),
    /// The ζ → ∞ limit.
    LargeZeta,
}

/// Powers `ζ^0, ζ^1, ζ^2` of a large-ζ expansion (terms `O(1/ζ)` dropped).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Expansion(pub [Complex64; 3]);

impl Expansion {
    /// Size of the terms that grow with ζ.
    pub fn divergence(&self) -> f64 {
        self.0[1].norm().max(self.0[2].norm())
    }
}

fn product(a: [Complex64; 2], b: [Complex64; 2]) -> [Complex64; 3] {
    [a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[1] * b[1]]
}

/// Accumulates `sum_j X_j(ζ) / r_j(ζ)` in either mode.
struct Accumulator {
    mode: KernelMode,
    value: Complex64,
    expansion: [Complex64; 3],
}

impl Accumulator {
    fn new(mode: KernelMode) -> Self {
        Accumulator {
            mode,
            value: Complex64::zero(),
            expansion: [Complex64::zero(); 3],
        }
    }

    /// Adds `x(ζ) / (alpha ζ + beta)`.
    fn add(&mut self, x: [Complex64; 3], alpha: f64, beta: f64) {
        match self.mode {
            KernelMode::Zeta(z) => {
                self.value += (x[0] + x[1] * z + x[2] * z * z) / (alpha * z + beta);
            }
            KernelMode::LargeZeta => {
                if alpha == 0.0 {
                    for k in 0..3 {
                        self.expansion[k] += x[k] / beta;
                    }
                } else {
                    // (x2 ζ² + x1 ζ + x0) / (α ζ + β) = (x2/α) ζ + (x1 - x2 β/α)/α + O(1/ζ)
                    self.expansion[1] += x[2] / alpha;
                    self.expansion[0] += (x[1] - x[2] * (beta / alpha)) / alpha;
                }
            }
        }
    }

    /// Adds an exact polynomial in ζ.
    fn add_polynomial(&mut self, x: [Complex64; 3]) {
        match self.mode {
            KernelMode::Zeta(z) => self.value += x[0] + x[1] * z + x[2] * z * z,
            KernelMode::LargeZeta => {
                for k in 0..3 {
                    self.expansion[k] += x[k];
                }
            }
        }
    }

    fn finish(&self) -> (Complex64, Expansion) {
        match self.mode {
            KernelMode::Zeta(_) => (self.value, Expansion([self.value, Complex64::zero(), Complex64::zero()])),
            KernelMode::LargeZeta => (self.expansion[0], Expansion(self.expansion)),
        }
    }
}

/// Kernel entries with their large-ζ expansions (for diagnostics).
#[derive(Clone, Copy, Debug)]
pub struct ExpandedBlock {
    pub block: KernelBlock,
    pub s: Expansion,
    pub d: Expansion,
    pub itilde: Expansion,
}

fn unit(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// `(z^{-h} - w^{-h})^2 / (z^{-1} - w^{-1})` as a polynomial in `z^{-1}`, `w^{-1}`.
fn squared_power_quotient(z: Complex64, w: Complex64, h: i32) -> Complex64 {
    let q: Complex64 = (0..h).map(|p| z.powi(-p) * w.powi(-(h - 1 - p))).sum();
    (z.powi(-h) - w.powi(-h)) * q
}

/// `S`, `D`, `Ĩ` of the `(s1, s2)` kernel at `(μ, η)`.
fn entries(
    basis: &BasisFunctions,
    s1: Species,
    s2: Species,
    mu: f64,
    eta: f64,
    mode: KernelMode,
) -> (Complex64, Complex64, Complex64, [Expansion; 3]) {
    let (z, w) = (unit(mu), unit(eta));
    let (p1, p2) = (basis.psi(s1), basis.psi(s2));
    let (e1, e2) = (basis.eps(s1), basis.eps(s2));
    let ord = &basis.ordering;
    let mut s = Accumulator::new(mode);
    let mut d = Accumulator::new(mode);
    let mut it = Accumulator::new(mode);
    for j in 0..basis.config.dim() / 2 {
        let (a, b) = (2 * j, 2 * j + 1);
        let alpha = 4.0 * PI * PI * ord.zeta_coeff[j] as f64;
        let beta = 2.0 * PI * ord.constant_coeff[j] as f64;
        let two = |x: [Complex64; 3], y: [Complex64; 3]| [(x[0] - y[0]) * 2.0, (x[1] - y[1]) * 2.0, (x[2] - y[2]) * 2.0];
        s.add(
            two(
                product(p1[a].eval(z), e2[b].eval(w)),
                product(p1[b].eval(z), e2[a].eval(w)),
            ),
            alpha,
            beta,
        );
        d.add(
            two(
                product(p1[a].eval(z), p2[b].eval(w)),
                product(p1[b].eval(z), p2[a].eval(w)),
            ),
            alpha,
            beta,
        );
        it.add(
            two(
                product(e1[a].eval(z), e2[b].eval(w)),
                product(e1[b].eval(z), e2[a].eval(w)),
            ),
            alpha,
            beta,
        );
    }
    let h = basis.config.half() as i32;
    if s1 == Species::Roman && s2 == Species::Roman && h > 0 {
        let extra = squared_power_quotient(z, w, h) * 0.5;
        it.add_polynomial([Complex64::zero(), extra, Complex64::zero()]);
    }
    let (sv, se) = s.finish();
    let (dv, de) = d.finish();
    let (iv, ie) = it.finish();
    (sv, dv, iv, [se, de, ie])
}

/// The block `K_{s1 s2}(μ, η) = [[S, -D], [Ĩ, S']]` where
/// `S' = S_{s2 s1}(η, μ)`.
pub fn kernel_entries(
    basis: &BasisFunctions,
    s1: Species,
    s2: Species,
    mu: f64,
    eta: f64,
    mode: KernelMode,
) -> KernelBlock {
    kernel_expanded(basis, s1, s2, mu, eta, mode).block
}

/// As [`kernel_entries`], also returning the large-ζ expansions.
pub fn kernel_expanded(
    basis: &BasisFunctions,
    s1: Species,
    s2: Species,
    mu: f64,
    eta: f64,
    mode: KernelMode,
) -> ExpandedBlock {
    let (s, d, itilde, [se, de, ie]) = entries(basis, s1, s2, mu, eta, mode);
    let (s_swap, ..) = entries(basis, s2, s1, eta, mu, mode);
    ExpandedBlock {
        block: KernelBlock { s, d, itilde, s_swap },
        s: se,
        d: de,
        itilde: ie,
    }
}

/// Large-ζ `Ĩ_RR` in closed form:
/// `sum_{j=1}^{N1/2} (N1+1-2j)/(4π) (z^{j-N1} w^{1-j} - z^{1-j} w^{j-N1})`.
pub fn itilde_rr_limit(config: PlasmaConfig, mu: f64, eta: f64) -> Complex64 {
    let (z, w) = (unit(mu), unit(eta));
    let n1 = config.n1() as i32;
    (1..=config.half() as i32)
        .map(|j| {
            (z.powi(j - n1) * w.powi(1 - j) - z.powi(1 - j) * w.powi(j - n1))
                * ((n1 + 1 - 2 * j) as f64 / (4.0 * PI))
        })
        .sum()
}

/// Large-ζ `S_RR` in closed form: `(1/2π) sum_{m<N1} (z/w)^m`.
pub fn s_rr_limit(config: PlasmaConfig, mu: f64, eta: f64) -> Complex64 {
    let r = unit(mu - eta);
    (0..config.n1() as i32).map(|m| r.powi(m)).sum::<Complex64>() / (2.0 * PI)
}

/// A labelled test point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub species: Species,
    pub x: f64,
}

/// Roman points first, then Greek.
pub fn points(xs: &[f64], ys: &[f64]) -> Vec<Point> {
    xs.iter()
        .map(|&x| Point { species: Species::Roman, x })
        .chain(ys.iter().map(|&x| Point { species: Species::Greek, x }))
        .collect()
}

/// Rejects coincident points within one species (`period` is the length
/// of the circle the coordinates live on, or `None` on the line).
pub fn check_distinct(pts: &[Point], period: Option<f64>) -> Result<()> {
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if p.species != q.species {
                continue;
            }
            let mut d = (p.x - q.x).abs();
            if let Some(l) = period {
                d = d.rem_euclid(l);
                d = d.min(l - d);
            }
            if d < 1e-12 {
                return Err(Error::CoincidentPoints {
                    species: p.species.label(),
                });
            }
        }
    }
    Ok(())
}

/// A correlation value with its discarded imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub k1: usize,
    pub k2: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub rho: f64,
    pub abs_imag_residual: f64,
}

/// Asserts that a Pfaffian value is real relative to `scale`.
pub fn real_part(value: Complex64, scale: f64) -> Result<f64> {
    if value.im.abs() > crate::plasma::IMAG_TOL * value.re.abs().max(scale) {
        return Err(Error::ImaginaryResidual { real: value.re, imag: value.im });
    }
    Ok(value.re)
}

/// `Pf` of the assembled kernel grid times `Z^{-1}`.
pub fn pfaffian_of_points(
    pts: &[Point],
    block: impl Fn(&Point, &Point) -> KernelBlock,
) -> Result<Complex64> {
    let k = pts.len();
    let mut blocks = Vec::with_capacity(k * k);
    for p in pts {
        for q in pts {
            blocks.push(block(p, q));
        }
    }
    quaternion_pfaffian(&blocks, k)
}

/// Correlation computed from a prepared basis.
pub fn correlation_with(
    basis: &BasisFunctions,
    xs: &[f64],
    ys: &[f64],
    mode: KernelMode,
) -> Result<CorrelationResult> {
    let config = basis.config;
    if xs.len() > config.n1() || ys.len() > config.n2() {
        return Err(Error::InvalidArgument(format!(
            "({}, {}) points exceed ({}, {}) particles",
            xs.len(),
            ys.len(),
            config.n1(),
            config.n2()
        )));
    }
    let pts = points(xs, ys);
    check_distinct(&pts, Some(2.0 * PI))?;
    let pf = pfaffian_of_points(&pts, |p, q| kernel_entries(basis, p.species, q.species, p.x, q.x, mode))?;
    let scale = ((config.n1() + config.n2()) as f64 / (2.0 * PI)).powi(pts.len() as i32);
    let rho = real_part(pf, scale)?;
    Ok(CorrelationResult {
        k1: xs.len(),
        k2: ys.len(),
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        rho,
        abs_imag_residual: pf.im.abs(),
    })
}

/// `ρ_{(k1,k2)}(xs; ys)` from the ζ → ∞ kernel.
pub fn correlation(config: PlasmaConfig, xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    correlation_with(&BasisFunctions::new(config)?, xs, ys, KernelMode::LargeZeta)
}

/// `ρ_{(k1,k2)}` from the ζ-resolved formula: the numerator
/// `N(ζ) = prod r_l(ζ) Pf(K(ζ) Z^{-1})` is a polynomial of degree
/// `N1/2`; its top coefficient divided by that of `prod r_l` is the
/// correlation. `N` is sampled at `ζ = 0, ..., N1/2 + 1` so a spurious
/// higher-degree term is detected.
pub fn correlation_zeta_oracle(config: PlasmaConfig, xs: &[f64], ys: &[f64]) -> Result<f64> {
    let basis = BasisFunctions::new(config)?;
    let h = config.half();
    let pts = points(xs, ys);
    check_distinct(&pts, Some(2.0 * PI))?;
    let zetas: Vec<f64> = (0..=h + 1).map(|z| z as f64).collect();
    let mut values = Vec::with_capacity(zetas.len());
    for &zeta in &zetas {
        let mode = KernelMode::Zeta(zeta);
        let pf = pfaffian_of_points(&pts, |p, q| kernel_entries(&basis, p.species, q.species, p.x, q.x, mode))?;
        let prod: f64 = (0..config.dim() / 2).map(|j| basis.ordering.normalization_at(j, zeta)).product();
        values.push(pf * prod);
    }
    let coeffs = interpolate(&zetas, &values);
    // interpolation roundoff is relative to the sampled values
    let scale = coeffs.iter().chain(&values).map(|c| c.norm()).fold(0.0, f64::max);
    let excess = coeffs[h + 1].norm();
    if excess > 1e-9 * scale {
        return Err(Error::DegreeOverflow { expected: h, excess });
    }
    let top: f64 = basis
        .ordering
        .zeta_coeff
        .iter()
        .zip(&basis.ordering.constant_coeff)
        .map(|(&a, &b)| if a != 0 { 4.0 * PI * PI * a as f64 } else { 2.0 * PI * b as f64 })
        .product();
    real_part(coeffs[h] / top, scale / top.abs())
}

/// CSV with columns `k1,k2,x_1..x_k1,y_1..y_k2,rho,abs_imag_residual`.
/// All rows must share `(k1, k2)`.
pub fn write_correlation_csv(rows: &[CorrelationResult], mut w: impl Write) -> Result<()> {
    let (k1, k2) = rows.first().map(|r| (r.k1, r.k2)).unwrap_or((0, 0));
    let mut header = vec!["k1".to_string(), "k2".to_string()];
    header.extend((1..=k1).map(|i| format!("x_{i}")));
    header.extend((1..=k2).map(|i| format!("y_{i}")));
    header.push("rho".into());
    header.push("abs_imag_residual".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        if (r.k1, r.k2) != (k1, k2) {
            return Err(Error::InvalidArgument("mixed (k1, k2) in one CSV".into()));
        }
        let mut cols = vec![r.k1.to_string(), r.k2.to_string()];
        cols.extend(r.xs.iter().chain(&r.ys).map(|v| format!("{v:.16e}")));
        cols.push(format!("{:.16e}", r.rho));
        cols.push(format!("{:.16e}", r.abs_imag_residual));
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::oracle_correlation;

    fn cfg(n1: usize, n2: usize) -> PlasmaConfig {
        PlasmaConfig::new(n1, n2).unwrap()
    }

    #[test]
    fn density_is_uniform() {
        for (n1, n2) in [(2, 1), (4, 2), (6, 0), (0, 3)] {
            let c = cfg(n1, n2);
            for x in [0.0, 1.3, 4.0] {
                if n1 > 0 {
                    let r = correlation(c, &[x], &[]).unwrap().rho;
                    assert!((r - n1 as f64 / (2.0 * PI)).abs() < 1e-12, "({n1},{n2}) R");
                }
                if n2 > 0 {
                    let r = correlation(c, &[], &[x]).unwrap().rho;
                    assert!((r - n2 as f64 / (2.0 * PI)).abs() < 1e-12, "({n1},{n2}) G");
                }
            }
        }
    }

    #[test]
    fn two_roman_opposite_points() {
        let r = correlation(cfg(2, 0), &[0.0, PI], &[]).unwrap().rho;
        assert!((r - 1.0 / (PI * PI)).abs() < 1e-13);
    }

    #[test]
    fn limit_closed_forms_and_cancellation() {
        for (n1, n2) in [(2, 1), (4, 2), (6, 1)] {
            let c = cfg(n1, n2);
            let b = BasisFunctions::new(c).unwrap();
            let (mu, eta) = (0.4, 2.1);
            let e = kernel_expanded(&b, Species::Roman, Species::Roman, mu, eta, KernelMode::LargeZeta);
            assert!((e.block.itilde - itilde_rr_limit(c, mu, eta)).norm() < 1e-13);
            assert!((e.block.s - s_rr_limit(c, mu, eta)).norm() < 1e-13);
            let at = kernel_entries(&b, Species::Roman, Species::Roman, mu, mu, KernelMode::LargeZeta);
            assert!((at.s.re - n1 as f64 / (2.0 * PI)).abs() < 1e-13);
            assert!(at.itilde.norm() < 1e-13);
            for (s1, s2) in [(Species::Roman, Species::Greek), (Species::Greek, Species::Roman), (Species::Greek, Species::Greek), (Species::Roman, Species::Roman)] {
                let e = kernel_expanded(&b, s1, s2, mu, eta, KernelMode::LargeZeta);
                assert!(e.s.divergence() < 1e-13 && e.d.divergence() < 1e-13 && e.itilde.divergence() < 1e-13, "{s1:?}{s2:?}");
            }
        }
    }

    #[test]
    fn block_antisymmetry_between_species() {
        let b = BasisFunctions::new(cfg(4, 2)).unwrap();
        let (x, y) = (0.7, 2.9);
        let rg = kernel_entries(&b, Species::Roman, Species::Greek, x, y, KernelMode::LargeZeta);
        let gr = kernel_entries(&b, Species::Greek, Species::Roman, y, x, KernelMode::LargeZeta);
        // K_GR(y, x) = -K_RG(x, y)^T: S and S' swap roles, D and Ĩ flip sign.
        assert!((gr.d + rg.d).norm() < 1e-13);
        assert!((gr.itilde + rg.itilde).norm() < 1e-13);
        assert!((gr.s - rg.s_swap).norm() < 1e-13);
    }

    #[test]
    fn small_oracle_agreement() {
        let c = cfg(2, 1);
        let (xs, ys) = ([0.4], [2.2]);
        let o = oracle_correlation(c, &xs, &ys).unwrap();
        let r = correlation(c, &xs, &ys).unwrap().rho;
        assert!((o - r).abs() < 1e-10 * o.abs(), "{o} vs {r}");
        let z = correlation_zeta_oracle(c, &xs, &ys).unwrap();
        assert!((z - r).abs() < 1e-9 * r.abs(), "{z} vs {r}");
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            correlation(cfg(2, 1), &[0.3, 0.3 + 2.0 * PI], &[]),
            Err(Error::CoincidentPoints { species: "R" })
        ));
        assert!(correlation(cfg(2, 1), &[0.3], &[0.3]).is_ok());
    }

    #[test]
    fn csv_layout() {
        let r = correlation(cfg(2, 1), &[0.1], &[0.2]).unwrap();
        let mut buf = Vec::new();
        write_correlation_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("k1,k2,x_1,y_1,rho,abs_imag_residual\n1,1,"));
    }
}
