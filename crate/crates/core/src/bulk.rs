//! Bulk-scaled correlations on the line: the five kernel primitives, the
//! 2x2 matrix kernel for each species pair, the Pfaffian correlations,
//! the explicit two-point double integrals, and the classical β = 2 and
//! β = 4 reductions.
//!
//! With `Δ = x - y` and `c = ρ_R/2`, the primitives are
//!
//! * `S_R = ρ_R ∫_0^1 e^{2πiρ_R Δ t} dt = ρ_R e^{iπρ_RΔ} sinc(πρ_RΔ)`
//! * `I_R = ρ_R² ∫_{-1/2}^{1/2} t e^{2πiρ_RΔ t} dt = 2iρ_R² ∫_0^{1/2} t sin(2πρ_RΔ t) dt`
//! * `S_G = ∫_c^{c+ρ_G} cos(2πΔ s) ds`
//! * `I_G = -(i/2) ∫_c^{c+ρ_G} s sin(2πΔ s) ds`
//! * `D = -2i ∫_c^{c+ρ_G} sin(2πΔ s)/s ds`
//!
//! The first four are evaluated in closed form with series near `Δ = 0`;
//! `D` is integrated numerically.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{check_distinct, correlation, pfaffian_of_points, points, real_part, CorrelationResult, Species};
use crate::linalg::{determinant, Square};
use crate::pfaffian::{quaternion_pfaffian, KernelBlock};
use crate::plasma::PlasmaConfig;
use crate::quadrature::{adaptive, GaussLegendre};

/// Bulk densities of the two species.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkDensities {
    pub rho_r: f64,
    pub rho_g: f64,
}

impl BulkDensities {
    pub fn new(rho_r: f64, rho_g: f64) -> Result<Self> {
        let ok = |r: f64| r.is_finite() && r >= 0.0;
        if !ok(rho_r) || !ok(rho_g) {
            return Err(Error::InvalidArgument(format!("densities must be finite and >= 0, got ({rho_r}, {rho_g})")));
        }
        if rho_r == 0.0 && rho_g == 0.0 {
            return Err(Error::InvalidArgument("densities are both zero".into()));
        }
        Ok(BulkDensities { rho_r, rho_g })
    }

    pub fn of(&self, s: Species) -> f64 {
        match s {
            Species::Roman => self.rho_r,
            Species::Greek => self.rho_g,
        }
    }

    pub fn total(&self) -> f64 {
        self.rho_r + self.rho_g
    }
}

/// `sin z / z`.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

/// `d/dz (sin z / z)`.
fn sinc_prime(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        let z2 = z * z;
        -z / 3.0 * (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0))
    } else {
        (z * z.cos() - z.sin()) / (z * z)
    }
}

/// `∫_0^s u sin(b u) du`.
fn sin_moment(b: f64, s: f64) -> f64 {
    let z = b * s;
    if z.abs() < 1.0 {
        let mut term = b * s * s * s;
        let mut acc = term / 3.0;
        for k in 1..20 {
            term *= -z * z / ((2 * k) as f64 * (2 * k + 1) as f64);
            acc += term / (2 * k + 3) as f64;
        }
        acc
    } else {
        (z.sin() - z * z.cos()) / (b * b)
    }
}

/// `∫_a^b sin(w s)/s ds` by Gauss–Kronrod on pieces spanning at most two
/// radians of phase each.
fn sin_over_s(w: f64, a: f64, b: f64) -> f64 {
    if w == 0.0 || a == b {
        return 0.0;
    }
    let pieces = ((w.abs() * (b - a) / 2.0).ceil() as usize).max(1);
    let h = (b - a) / pieces as f64;
    let f = |s: f64| w * sinc(w * s);
    (0..pieces)
        .map(|p| {
            let lo = a + h * p as f64;
            adaptive(f, lo, lo + h, 1e-16, 1e-15, 64).value
        })
        .sum()
}

/// Sine integral `Si(z)`.
pub fn sine_integral(z: f64) -> f64 {
    sin_over_s(1.0, 0.0, z.abs()) * z.signum()
}

/// The five scalar kernel primitives at fixed densities.
#[derive(Clone, Copy, Debug)]
pub struct BulkKernelPrimitives {
    pub densities: BulkDensities,
}

pub fn bulk_primitives(densities: BulkDensities) -> BulkKernelPrimitives {
    BulkKernelPrimitives { densities }
}

impl BulkKernelPrimitives {
    fn window(&self) -> (f64, f64) {
        let c = 0.5 * self.densities.rho_r;
        (c, c + self.densities.rho_g)
    }

    pub fn s_r(&self, x: f64, y: f64) -> Complex64 {
        let r = self.densities.rho_r;
        let h = PI * r * (x - y);
        Complex64::from_polar(r * sinc(h), h)
    }

    pub fn i_r(&self, x: f64, y: f64) -> Complex64 {
        let r = self.densities.rho_r;
        Complex64::new(0.0, 2.0 * r * r * sin_moment(2.0 * PI * r * (x - y), 0.5))
    }

    pub fn s_g(&self, x: f64, y: f64) -> Complex64 {
        let (lo, hi) = self.window();
        let b = 2.0 * PI * (x - y);
        let g = self.densities.rho_g;
        Complex64::new(g * (b * 0.5 * (lo + hi)).cos() * sinc(0.5 * b * g), 0.0)
    }

    pub fn i_g(&self, x: f64, y: f64) -> Complex64 {
        let (lo, hi) = self.window();
        let b = 2.0 * PI * (x - y);
        Complex64::new(0.0, -0.5 * (sin_moment(b, hi) - sin_moment(b, lo)))
    }

    pub fn d(&self, x: f64, y: f64) -> Complex64 {
        let (lo, hi) = self.window();
        Complex64::new(0.0, -2.0 * sin_over_s(2.0 * PI * (x - y), lo, hi))
    }

    /// `e^{iπρ_R a}`.
    fn phase(&self, a: f64) -> Complex64 {
        Complex64::from_polar(1.0, PI * self.densities.rho_r * a)
    }

    pub fn s_entry(&self, s1: Species, s2: Species, x: f64, y: f64) -> Complex64 {
        use Species::*;
        match (s1, s2) {
            (Roman, Roman) => self.s_r(x, y),
            (Roman, Greek) => self.phase(x) * self.s_g(x, y),
            (Greek, Roman) => self.phase(x - 2.0 * y) * self.s_r(y, x),
            (Greek, Greek) => self.s_g(x, y),
        }
    }

    pub fn d_entry(&self, s1: Species, s2: Species, x: f64, y: f64) -> Complex64 {
        use Species::*;
        match (s1, s2) {
            (Roman, Roman) => self.phase(x + y) * self.d(x, y),
            (Roman, Greek) => self.phase(x) * self.d(x, y),
            (Greek, Roman) => -self.d_entry(Roman, Greek, y, x),
            (Greek, Greek) => self.d(x, y),
        }
    }

    pub fn itilde_entry(&self, s1: Species, s2: Species, x: f64, y: f64) -> Complex64 {
        use Species::*;
        match (s1, s2) {
            (Roman, Roman) => -self.i_r(x, y) / self.phase(x + y),
            (Roman, Greek) => 0.5 * self.i_r(x, y) / self.phase(x),
            (Greek, Roman) => -self.itilde_entry(Roman, Greek, y, x),
            (Greek, Greek) => -self.i_g(x, y),
        }
    }

    pub fn block(&self, s1: Species, s2: Species, x: f64, y: f64) -> KernelBlock {
        KernelBlock {
            s: self.s_entry(s1, s2, x, y),
            d: self.d_entry(s1, s2, x, y),
            itilde: self.itilde_entry(s1, s2, x, y),
            s_swap: self.s_entry(s2, s1, y, x),
        }
    }
}

/// The 2x2 block `K_{s1 s2}(x, y)`.
pub fn bulk_kernel(s1: Species, s2: Species, x: f64, y: f64, densities: BulkDensities) -> KernelBlock {
    bulk_primitives(densities).block(s1, s2, x, y)
}

/// `ρ^bulk_{(k1,k2)}(xs; ys)` as the Pfaffian of the assembled kernel.
pub fn bulk_correlation(xs: &[f64], ys: &[f64], densities: BulkDensities) -> Result<CorrelationResult> {
    let prims = bulk_primitives(densities);
    let pts = points(xs, ys);
    check_distinct(&pts, None)?;
    let pf = pfaffian_of_points(&pts, |p, q| prims.block(p.species, q.species, p.x, q.x))?;
    let rho = real_part(pf, densities.total().powi(pts.len() as i32))?;
    Ok(CorrelationResult {
        k1: xs.len(),
        k2: ys.len(),
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        rho,
        abs_imag_residual: pf.im.abs(),
    })
}

/// Species pair of a two-point function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    RR,
    RG,
    GG,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::RR, Pair::RG, Pair::GG];

    pub fn parse(s: &str) -> Option<Pair> {
        match s.to_ascii_lowercase().as_str() {
            "rr" => Some(Pair::RR),
            "rg" => Some(Pair::RG),
            "gg" => Some(Pair::GG),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::RR => "rr",
            Pair::RG => "rg",
            Pair::GG => "gg",
        }
    }

    pub fn species(self) -> (Species, Species) {
        match self {
            Pair::RR => (Species::Roman, Species::Roman),
            Pair::RG => (Species::Roman, Species::Greek),
            Pair::GG => (Species::Greek, Species::Greek),
        }
    }

    /// Point lists placing the first particle at `x` and the second at 0.
    pub fn arguments(self, x: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Pair::RR => (vec![x, 0.0], vec![]),
            Pair::RG => (vec![x], vec![0.0]),
            Pair::GG => (vec![], vec![x, 0.0]),
        }
    }
}

/// Composite Gauss–Legendre over `[0, 1]`, evaluated serially.
fn unit_composite(gl: &GaussLegendre, f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let w = 1.0 / panels as f64;
    (0..panels).map(|p| gl.integrate(&f, w * p as f64, w * (p + 1) as f64)).sum::<f64>()
}

/// The bulk two-point function `ρ_{s1 s2}(x, 0)` from its explicit
/// double-integral representation.
pub fn two_point_explicit(pair: Pair, x: f64, d: BulkDensities) -> f64 {
    let (r, g) = (d.rho_r, d.rho_g);
    let panels = 1 + (2.0 * (r + g) * x.abs()).ceil() as usize;
    let once = |f: &(dyn Fn(f64, f64) -> f64 + Sync)| {
        let gl = GaussLegendre::new(20);
        gl.composite(|t| unit_composite(&gl, |s| f(t, s), panels), 0.0, 1.0, panels)
    };
    match pair {
        Pair::RR => {
            if r == 0.0 {
                return 0.0;
            }
            let sine = r * sinc(PI * r * x);
            let integral = if g == 0.0 {
                0.0
            } else {
                once(&|t, s| {
                    let a = 2.0 * PI * r * x * (s - 1.0) - 2.0 * PI * g * x * t;
                    let b = 2.0 * PI * r * x * s + 2.0 * PI * g * x * t;
                    (1.0 - 2.0 * s) / (2.0 * g * t / r + 1.0) * (a.cos() - b.cos())
                })
            };
            r * r - sine * sine - g * r * integral
        }
        Pair::GG => {
            if g == 0.0 {
                return 0.0;
            }
            let c = r / g;
            let w = 2.0 * PI * g * x;
            let integral = once(&|t, s| {
                let den = (2.0 * t + c) * (2.0 * s + c);
                (-(t + s + c).powi(2) * (w * (t - s)).cos() + (t - s).powi(2) * (w * (t + s + c)).cos()) / den
            });
            g * g + g * g * integral
        }
        Pair::RG => {
            if r == 0.0 || g == 0.0 {
                return 0.0;
            }
            let integral = once(&|t, s| {
                (g * t + r * s) / (2.0 * g * t + r) * (2.0 * PI * g * x * t - 2.0 * PI * r * x * (s - 1.0)).cos()
            });
            r * g - 2.0 * r * g * integral
        }
    }
}

/// `ρ_{s1} ρ_{s2} - (S_{s1s2}(x,0) S_{s2s1}(0,x) + D_{s1s2}(x,0) Ĩ_{s1s2}(x,0))`.
pub fn two_point_from_kernel(pair: Pair, x: f64, d: BulkDensities) -> Complex64 {
    let p = bulk_primitives(d);
    let (s1, s2) = pair.species();
    let prod = p.s_entry(s1, s2, x, 0.0) * p.s_entry(s2, s1, 0.0, x)
        + p.d_entry(s1, s2, x, 0.0) * p.itilde_entry(s1, s2, x, 0.0);
    Complex64::new(d.of(s1) * d.of(s2), 0.0) - prod
}

/// The β = 2 bulk correlation `det[ρ sin πρ(x_j-x_l) / π(x_j-x_l)]`.
pub fn sine_kernel_correlation(xs: &[f64], rho: f64) -> f64 {
    let m = Square::from_fn(xs.len(), |j, l| rho * sinc(PI * rho * (xs[j] - xs[l])));
    determinant(&m)
}

/// The β = 4 bulk correlation at density `rho`: the quaternion determinant
/// of the unit-density kernel at `rho · x`, times `rho^k`.
pub fn quaternion_sine_correlation(xs: &[f64], rho: f64) -> Result<f64> {
    let k = xs.len();
    let mut blocks = Vec::with_capacity(k * k);
    for &a in xs {
        for &b in xs {
            let u = rho * (a - b);
            let z = 2.0 * PI * u;
            let s = Complex64::new(sinc(z), 0.0);
            blocks.push(KernelBlock {
                s,
                d: Complex64::new(-sine_integral(z) / (2.0 * PI), 0.0),
                itilde: Complex64::new(2.0 * PI * sinc_prime(z), 0.0),
                s_swap: s,
            });
        }
    }
    let pf = quaternion_pfaffian(&blocks, k)?;
    Ok(real_part(pf, 1.0)? * rho.powi(k as i32))
}

/// One row of a finite-to-bulk convergence sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub requested_length: f64,
    pub length: f64,
    pub n1: usize,
    pub n2: usize,
    pub scaled_finite: f64,
    pub bulk: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub k1: usize,
    pub k2: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub densities: BulkDensities,
    pub rows: Vec<ConvergenceRow>,
    /// Error of the last row is below that of the first.
    pub decreasing: bool,
}

/// The admissible period nearest to `length`: `N1 = ρ_R L` even and
/// `N2 = ρ_G L` an integer.
pub fn admissible_length(length: f64, d: BulkDensities) -> Result<(f64, usize, usize)> {
    let (n1, l) = if d.rho_r > 0.0 {
        let n1 = (2.0 * (0.5 * d.rho_r * length).round()).max(2.0);
        (n1, n1 / d.rho_r)
    } else {
        let n2 = (d.rho_g * length).round().max(1.0);
        (0.0, n2 / d.rho_g)
    };
    let n2 = (d.rho_g * l).round();
    if (n2 - d.rho_g * l).abs() > 1e-9 * n2.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "no period near {length} makes N1 = {} ρ_R L even and ρ_G L integral",
            d.rho_r
        )));
    }
    Ok((l, n1 as usize, n2 as usize))
}

/// Tabulates `|(2π/L)^k ρ^finite(2πx/L) - ρ^bulk(x)|` along `lengths`.
pub fn finite_to_bulk_convergence(
    xs: &[f64],
    ys: &[f64],
    densities: BulkDensities,
    lengths: &[f64],
) -> Result<ConvergenceReport> {
    let bulk = bulk_correlation(xs, ys, densities)?.rho;
    let k = (xs.len() + ys.len()) as i32;
    let rows = lengths
        .par_iter()
        .map(|&requested| {
            let (l, n1, n2) = admissible_length(requested, densities)?;
            let config = PlasmaConfig::new(n1, n2)?;
            let scale = |v: &[f64]| v.iter().map(|&x| 2.0 * PI * x / l).collect::<Vec<_>>();
            let finite = correlation(config, &scale(xs), &scale(ys))?.rho * (2.0 * PI / l).powi(k);
            Ok(ConvergenceRow {
                requested_length: requested,
                length: l,
                n1,
                n2,
                scaled_finite: finite,
                bulk,
                error: (finite - bulk).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => rows.len() < 2 || b.error < a.error,
        _ => true,
    };
    Ok(ConvergenceReport {
        k1: xs.len(),
        k2: ys.len(),
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        densities,
        rows,
        decreasing,
    })
}

/// CSV curve `x,value`.
pub fn write_curve_csv(rows: &[(f64, f64)], mut w: impl Write) -> Result<()> {
    writeln!(w, "x,value")?;
    for (x, v) in rows {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}
