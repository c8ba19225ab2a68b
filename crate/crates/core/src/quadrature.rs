//! One-dimensional quadrature: Gauss–Legendre panels, adaptive
//! Gauss–Kronrod (7, 15), and whole-line integrals with a `C/u^2` tail model.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Values that can be integrated: a vector space over `f64` with a norm.
pub trait QuadValue:
    Copy + Send + Sync + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// `M` uniform angles `2 pi q / M`, `q = 0..M`.
pub fn uniform_angles(m: usize) -> Vec<f64> {
    (0..m)
        .map(|q| 2.0 * std::f64::consts::PI * q as f64 / m as f64)
        .collect()
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> T {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    /// Composite rule over `panels` equal panels, evaluated in parallel and
    /// summed in panel order.
    pub fn composite<T: QuadValue>(
        &self,
        f: impl Fn(f64) -> T + Sync,
        a: f64,
        b: f64,
        panels: usize,
    ) -> T {
        let w = (b - a) / panels as f64;
        let parts: Vec<T> = (0..panels)
            .into_par_iter()
            .map(|p| {
                let lo = a + w * p as f64;
                self.integrate(&f, lo, lo + w)
            })
            .collect();
        parts.into_iter().fold(T::zero(), |s, v| s + v)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod (7, 15): bisects the interval with the
/// largest error estimate until the total estimate is below
/// `max(abs_tol, rel_tol |I|)` or `max_intervals` is reached.
pub fn adaptive<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Adaptive<T> {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let value = parts.iter().fold(T::zero(), |s, p| s + p.2 .0);
        let error: f64 = parts.iter().map(|p| p.2 .1).sum();
        if error <= abs_tol.max(rel_tol * value.norm()) || parts.len() >= max_intervals {
            return Adaptive {
                value,
                error,
                intervals: parts.len(),
            };
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// Integral over the real line: the raw window `[-X, X]` and the
/// tail-corrected value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineIntegral<T = f64> {
    pub raw: T,
    pub tail: T,
    pub corrected: T,
}

/// Settings for [`line_integral`].
#[derive(Clone, Copy, Debug)]
pub struct LineQuadrature {
    pub half_width: f64,
    /// Panel width (should resolve the shortest oscillation).
    pub panel: f64,
    pub order: usize,
}

impl LineQuadrature {
    pub fn new(half_width: f64, panel: f64) -> Self {
        LineQuadrature {
            half_width,
            panel,
            order: 16,
        }
    }
}

/// Weight of the cutoff-averaged tail-corrected integral at `|u| = a`.
///
/// For a cutoff `Y` the estimate `∫_{-Y}^{Y} f + ∫_{Y/2 < |u| < Y} f` is
/// exact for a `C/u^2` tail. Averaging it over `Y` uniform in `[X/2, X]`
/// gives `∫ f W` with this piecewise-linear `W`, which also damps the
/// cutoff error of oscillating `1/u` terms to second order.
pub fn cutoff_weight(a: f64, x: f64) -> f64 {
    let a = a.abs();
    if a <= 0.25 * x {
        1.0
    } else if a <= 0.5 * x {
        4.0 * a / x
    } else if a <= x {
        4.0 * (x - a) / x
    } else {
        0.0
    }
}

/// Whole-line integral of `f` about `centre`: `raw` over `[-X, X]`,
/// `corrected` with the cutoff-averaged `C/u^2` tail model, and `tail`
/// their difference.
pub fn line_integral<T: QuadValue>(f: impl Fn(f64) -> T + Sync, centre: f64, q: LineQuadrature) -> LineIntegral<T> {
    let gl = GaussLegendre::new(q.order);
    let x = q.half_width;
    let per_segment = ((0.25 * x / q.panel).ceil() as usize).max(1);
    let edges: Vec<f64> = (0..=8).map(|i| -x + 0.25 * x * i as f64).collect();
    let mut raw = T::zero();
    let mut corrected = T::zero();
    for w in edges.windows(2) {
        let (plain, weighted) = gl.composite(
            |u| {
                let v = f(centre + u);
                Pair(v, v * cutoff_weight(u, x))
            },
            w[0],
            w[1],
            per_segment,
        )
        .into();
        raw = raw + plain;
        corrected = corrected + weighted;
    }
    LineIntegral {
        raw,
        tail: corrected - raw,
        corrected,
    }
}

#[derive(Clone, Copy)]
struct Pair<T>(T, T);

impl<T: QuadValue> From<Pair<T>> for (T, T) {
    fn from(p: Pair<T>) -> Self {
        (p.0, p.1)
    }
}

impl<T: QuadValue> Add for Pair<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl<T: QuadValue> Sub for Pair<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl<T: QuadValue> Mul<f64> for Pair<T> {
    type Output = Self;
    fn mul(self, w: f64) -> Self {
        Pair(self.0 * w, self.1 * w)
    }
}

impl<T: QuadValue> Zero for Pair<T> {
    fn zero() -> Self {
        Pair(T::zero(), T::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }
}

impl<T: QuadValue> QuadValue for Pair<T> {
    fn norm(&self) -> f64 {
        self.0.norm() + self.1.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(5);
        let v = gl.integrate(|x: f64| x.powi(9) + 3.0 * x.powi(8), -1.0, 1.0);
        assert!((v - 6.0 / 9.0).abs() < 1e-14);
        let s: f64 = gl.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let gl = GaussLegendre::new(16);
        assert!((gl.integrate(|x: f64| x.exp(), 0.0, 1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation_and_complex() {
        let r = adaptive(|x: f64| (50.0 * x).sin() / x.max(1e-300), 1e-300, 3.0, 1e-13, 0.0, 500);
        // Si(150)
        assert!((r.value - 1.566_166_832_722_520_9).abs() < 1e-11, "{}", r.value);
        let c = adaptive(|t: f64| Complex64::new(0.0, 2.0 * PI * t).exp(), 0.0, 0.25, 1e-14, 0.0, 100);
        assert!((c.value - Complex64::new(1.0, 1.0) / (2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn line_integral_tail_model() {
        // 1/(1+u^2) integrates to pi; the tail model recovers most of 2/X.
        let q = LineQuadrature::new(100.0, 0.5);
        let r = line_integral(|u| 1.0 / (1.0 + u * u), 0.0, q);
        assert!((r.raw - PI).abs() > 1e-2);
        assert!((r.corrected - PI).abs() < 1e-4, "{r:?}");
        // an oscillating 1/u tail is damped by the cutoff averaging
        let r = line_integral(|u: f64| (3.0 * u).sin() / u.abs().max(1.0) * u.signum() * (u.abs() > 1.0) as u8 as f64, 0.0, q);
        let exact = 2.0 * (PI / 2.0 - sine_integral_ref(3.0));
        assert!((r.corrected - exact).abs() < 1e-4 && (r.raw - exact).abs() > 1e-4, "{r:?} vs {exact}");
    }

    // Si(3) reference value
    fn sine_integral_ref(_z: f64) -> f64 {
        1.848_652_527_999_468_3
    }

    #[test]
    fn cutoff_weight_shape() {
        assert_eq!(cutoff_weight(10.0, 100.0), 1.0);
        assert_eq!(cutoff_weight(-50.0, 100.0), 2.0);
        assert_eq!(cutoff_weight(100.0, 100.0), 0.0);
        assert!((cutoff_weight(37.5, 100.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_angles_cover_circle() {
        let a = uniform_angles(4);
        assert_eq!(a.len(), 4);
        assert!((a[2] - PI).abs() < 1e-15);
    }
}
