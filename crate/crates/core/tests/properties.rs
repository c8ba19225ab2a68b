use std::f64::consts::PI;

use genplasma::bulk::sine_kernel_correlation;
use genplasma::linalg::determinant;
use genplasma::pfaffian::zeta_pfaffian;
use genplasma::poly::Poly;
use genplasma::sumrules::truncated_by_partitions;
use genplasma::{
    bulk_correlation, correlation, pfaffian, pfaffian_oracle, truncated_correlation, BulkDensities, PlasmaConfig,
    RationalMatrix, RationalSkewMatrix, RealSkewMatrix, ZetaSkewMatrix,
};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use proptest::prelude::*;

fn q(n: i64) -> BigRational {
    BigRational::from_i64(n).unwrap()
}

/// A skew matrix of even order with small integer entries.
fn skew_ints() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (1usize..=4).prop_flat_map(|h| {
        let n = 2 * h;
        (Just(n), proptest::collection::vec(-5i64..=5, n * (n - 1) / 2))
    })
}

fn rational_skew(n: usize, upper: &[i64]) -> RationalSkewMatrix {
    let index = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);
    RationalSkewMatrix::from_upper(n, |i, j| q(upper[index(i, j)]))
}

fn dense(a: &RationalSkewMatrix) -> RationalMatrix {
    RationalMatrix::from_fn(a.order(), |i, j| a.get(i, j).clone())
}

fn separated(v: &[f64], min: f64, period: Option<f64>) -> bool {
    v.iter().enumerate().all(|(i, a)| {
        v[i + 1..].iter().all(|b| {
            let mut d = (a - b).abs();
            if let Some(p) = period {
                d = d.rem_euclid(p).min(p - d.rem_euclid(p));
            }
            d > min
        })
    })
}

/// Periodic trapezoid rule; exact for trigonometric polynomials of
/// degree below `nodes`.
fn circle_integral(nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes).map(|i| f(h * i as f64 + 0.123)).sum::<f64>() * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squared_is_determinant((n, upper) in skew_ints()) {
        let a = rational_skew(n, &upper);
        let pf = pfaffian(&a).unwrap();
        prop_assert_eq!(pf.clone() * pf, determinant(&dense(&a)));
    }

    #[test]
    fn elimination_matches_matching_expansion((n, upper) in skew_ints()) {
        let a = rational_skew(n, &upper);
        prop_assert_eq!(pfaffian(&a).unwrap(), pfaffian_oracle(&a).unwrap());
    }

    #[test]
    fn congruence_scales_by_determinant(
        (n, upper) in skew_ints(),
        b in proptest::collection::vec(-3i64..=3, 64),
    ) {
        let a = rational_skew(n, &upper);
        let b: Vec<BigRational> = b[..n * n].iter().map(|&v| q(v)).collect();
        let det_b = determinant(&RationalMatrix::from_fn(n, |i, j| b[i * n + j].clone()));
        let lhs = pfaffian(&a.congruence(&b)).unwrap();
        prop_assert_eq!(lhs, det_b * pfaffian(&a).unwrap());
    }

    #[test]
    fn real_pfaffian_squared_is_determinant(
        (n, upper) in skew_ints(),
        scale in 0.1f64..10.0,
    ) {
        let index = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);
        let r = RealSkewMatrix::from_upper(n, |i, j| scale * upper[index(i, j)] as f64);
        let pf = pfaffian(&r).unwrap();
        let det = determinant(&genplasma::RealMatrix::from_fn(n, |i, j| *r.get(i, j)));
        let size = scale.powi(n as i32) * 5f64.powi(n as i32) * 100.0;
        prop_assert!((pf * pf - det).abs() <= 1e-10 * size);
    }

    #[test]
    fn zeta_pfaffian_evaluates_pointwise(
        (n, upper) in skew_ints(),
        slopes in proptest::collection::vec(-3i64..=3, 28),
        zeta in -2.0f64..2.0,
    ) {
        let m = ZetaSkewMatrix::from_upper(n, |i, j| {
            let k = i * (2 * n - i - 1) / 2 + (j - i - 1);
            Poly::new(vec![Complex64::new(upper[k] as f64, 0.0), Complex64::new(slopes[k] as f64, 0.0)])
        });
        let poly = zeta_pfaffian(&m, 1).unwrap();
        prop_assert!(poly.degree().is_none_or(|d| d <= n / 2));
        let z = Complex64::new(zeta, 0.0);
        let direct = pfaffian(&m.map(|p| p.eval(&z))).unwrap();
        let via = poly.eval(&z);
        prop_assert!((direct - via).norm() <= 1e-8 * (1.0 + direct.norm()) * 10f64.powi(n as i32));
    }

    #[test]
    fn finite_correlation_is_rotation_and_reflection_invariant(
        x in proptest::collection::vec(0.0f64..2.0 * PI, 2),
        y in proptest::collection::vec(0.0f64..2.0 * PI, 2),
        alpha in 0.0f64..2.0 * PI,
    ) {
        prop_assume!(separated(&x, 1e-3, Some(2.0 * PI)) && separated(&y, 1e-3, Some(2.0 * PI)));
        let c = PlasmaConfig::new(4, 2).unwrap();
        let base = correlation(c, &x, &y).unwrap().rho;
        let shift = |v: &[f64]| v.iter().map(|t| (t + alpha).rem_euclid(2.0 * PI)).collect::<Vec<_>>();
        let flip = |v: &[f64]| v.iter().map(|t| (-t).rem_euclid(2.0 * PI)).collect::<Vec<_>>();
        let rotated = correlation(c, &shift(&x), &shift(&y)).unwrap().rho;
        let reflected = correlation(c, &flip(&x), &flip(&y)).unwrap().rho;
        let swapped = correlation(c, &[x[1], x[0]], &[y[1], y[0]]).unwrap().rho;
        let tol = 1e-9 * (6.0 / (2.0 * PI)).powi(4);
        prop_assert!(base >= -tol);
        prop_assert!((base - rotated).abs() <= tol);
        prop_assert!((base - reflected).abs() <= tol);
        prop_assert!((base - swapped).abs() <= tol);
    }

    #[test]
    fn bulk_correlation_is_non_negative_and_symmetric(
        x in proptest::collection::vec(-3.0f64..3.0, 0..=2),
        y in proptest::collection::vec(-3.0f64..3.0, 0..=2),
        rho_r in 0.1f64..2.0,
        rho_g in 0.1f64..2.0,
        shift in -5.0f64..5.0,
    ) {
        prop_assume!(!(x.is_empty() && y.is_empty()));
        prop_assume!(separated(&x, 1e-3, None) && separated(&y, 1e-3, None));
        let d = BulkDensities::new(rho_r, rho_g).unwrap();
        let rho = bulk_correlation(&x, &y, d).unwrap().rho;
        let scale = (rho_r + rho_g).powi((x.len() + y.len()) as i32);
        prop_assert!(rho >= -1e-10 * scale);
        let moved = |v: &[f64]| v.iter().map(|t| t + shift).collect::<Vec<_>>();
        let neg = |v: &[f64]| v.iter().map(|t| -t).collect::<Vec<_>>();
        prop_assert!((bulk_correlation(&moved(&x), &moved(&y), d).unwrap().rho - rho).abs() <= 1e-9 * scale);
        prop_assert!((bulk_correlation(&neg(&x), &neg(&y), d).unwrap().rho - rho).abs() <= 1e-9 * scale);
    }

    #[test]
    fn cycle_sum_equals_moebius_inversion(
        x in proptest::collection::vec(-2.0f64..2.0, 0..=2),
        y in proptest::collection::vec(-2.0f64..2.0, 0..=2),
        rho_r in 0.2f64..1.5,
        rho_g in 0.2f64..1.5,
    ) {
        prop_assume!(x.len() + y.len() >= 1);
        prop_assume!(separated(&x, 1e-3, None) && separated(&y, 1e-3, None));
        let d = BulkDensities::new(rho_r, rho_g).unwrap();
        let a = truncated_correlation(&x, &y, d).unwrap();
        let b = truncated_by_partitions(&x, &y, d).unwrap();
        let scale = (rho_r + rho_g).powi((x.len() + y.len()) as i32);
        prop_assert!((a - b).abs() <= 1e-10 * scale, "{} vs {}", a, b);
    }

    #[test]
    fn greek_free_bulk_is_the_sine_kernel(
        x in proptest::collection::vec(-3.0f64..3.0, 1..=3),
        rho_r in 0.1f64..2.0,
    ) {
        prop_assume!(separated(&x, 1e-3, None));
        let d = BulkDensities::new(rho_r, 0.0).unwrap();
        let rho = bulk_correlation(&x, &[], d).unwrap().rho;
        let det = sine_kernel_correlation(&x, rho_r);
        prop_assert!((rho - det).abs() <= 1e-10 * rho_r.powi(x.len() as i32));
    }
}

#[test]
fn marginalizing_one_point_lowers_the_order() {
    // ∫ ρ_(k1+1, k2) dx = (N1 - k1) ρ_(k1, k2), and likewise for Greek points
    for (n1, n2) in [(2, 1), (4, 1), (2, 2), (4, 2)] {
        let c = PlasmaConfig::new(n1, n2).unwrap();
        let (xs, ys) = (vec![0.4], vec![2.1]);
        let base = correlation(c, &xs, &ys).unwrap().rho;
        let nodes = 96;
        let roman = circle_integral(nodes, |t| correlation(c, &[0.4, t], &ys).map(|r| r.rho).unwrap_or(0.0));
        assert!((roman - (n1 - 1) as f64 * base).abs() < 1e-10 * base.abs().max(1.0), "{c:?} roman");
        if n2 > 1 {
            let greek = circle_integral(nodes, |t| correlation(c, &xs, &[2.1, t]).map(|r| r.rho).unwrap_or(0.0));
            assert!((greek - (n2 - 1) as f64 * base).abs() < 1e-10 * base.abs().max(1.0), "{c:?} greek");
        }
        let one = correlation(c, &xs, &[]).unwrap().rho;
        let full = circle_integral(nodes, |t| correlation(c, &xs, &[t]).unwrap().rho);
        assert!((full - n2 as f64 * one).abs() < 1e-10 * one, "{c:?} one-point");
    }
}

#[test]
fn frozen_oracle_values() {
    // two Roman particles: ρ(0, π) = 1/π²
    let c = PlasmaConfig::new(2, 0).unwrap();
    assert!((correlation(c, &[0.0, PI], &[]).unwrap().rho - 1.0 / (PI * PI)).abs() < 1e-14);
    // one-point densities are uniform
    for (n1, n2) in [(2, 1), (4, 2), (0, 3)] {
        let c = PlasmaConfig::new(n1, n2).unwrap();
        if n1 > 0 {
            assert!((correlation(c, &[1.3], &[]).unwrap().rho - n1 as f64 / (2.0 * PI)).abs() < 1e-12);
        }
        assert!((correlation(c, &[], &[0.7]).unwrap().rho - n2 as f64 / (2.0 * PI)).abs() < 1e-12);
    }
    // a 2x2 Pfaffian is its single upper entry
    let a = RationalSkewMatrix::from_upper(2, |_, _| q(7));
    assert_eq!(pfaffian(&a).unwrap(), q(7));
    assert!(pfaffian(&RationalSkewMatrix::from_upper(4, |_, _| BigRational::zero())).unwrap().is_zero());
}
