//! Brute-force correlations by tensor-grid integration of the Boltzmann
//! weight. The integrand is a trigonometric polynomial of degree at most
//! `N1 + 2N2` in each angle, so a uniform grid with more nodes than that
//! integrates it exactly up to roundoff.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plasma::{ln_normalization_c, OneBodyWeight, PlasmaConfig};
use crate::quadrature::uniform_angles;

/// Largest tensor grid the oracle will walk.
pub const MAX_GRID_POINTS: u64 = 200_000_000;

/// Largest `N1 + 2N2` accepted.
pub const MAX_ORACLE_DIM: usize = 8;

/// Uniform tensor grid over the free angles.
#[derive(Clone, Debug)]
pub struct OracleGrid {
    pub nodes: usize,
    pub free_roman: usize,
    pub free_greek: usize,
}

impl OracleGrid {
    /// `M = 2 (N1 + 2N2) + 2` plus the weight bandwidth.
    pub fn new(config: PlasmaConfig, k1: usize, k2: usize, extra_bandwidth: usize) -> Result<Self> {
        Self::with_nodes(config, k1, k2, 2 * config.dim() + 2 + extra_bandwidth)
    }

    pub fn with_nodes(config: PlasmaConfig, k1: usize, k2: usize, nodes: usize) -> Result<Self> {
        if config.dim() > MAX_ORACLE_DIM {
            return Err(Error::DimensionTooLarge(format!(
                "N1 + 2N2 = {} exceeds {MAX_ORACLE_DIM}",
                config.dim()
            )));
        }
        if k1 > config.n1() || k2 > config.n2() {
            return Err(Error::InvalidArgument(format!(
                "({k1}, {k2}) points exceed ({}, {}) particles",
                config.n1(),
                config.n2()
            )));
        }
        let grid = OracleGrid {
            nodes,
            free_roman: config.n1() - k1,
            free_greek: config.n2() - k2,
        };
        let total = (nodes as u64).checked_pow(grid.dimension() as u32);
        if total.is_none_or(|t| t > MAX_GRID_POINTS) {
            return Err(Error::DimensionTooLarge(format!(
                "{nodes}^{} grid points",
                grid.dimension()
            )));
        }
        Ok(grid)
    }

    pub fn dimension(&self) -> usize {
        self.free_roman + self.free_greek
    }
}

fn chord2(a: f64, b: f64) -> f64 {
    2.0 - 2.0 * (a - b).cos()
}

fn boltzmann(thetas: &[f64], phis: &[f64]) -> f64 {
    let mut w = 1.0;
    for j in 0..thetas.len() {
        for k in j + 1..thetas.len() {
            w *= chord2(thetas[j], thetas[k]);
        }
        for p in phis {
            w *= chord2(thetas[j], *p);
        }
    }
    for a in 0..phis.len() {
        for b in a + 1..phis.len() {
            let c = chord2(phis[a], phis[b]);
            w *= c * c;
        }
    }
    w
}

/// `∫ prod u(θ) prod v(φ) W(θ, φ)` over the free angles, with the given
/// angles held fixed (their one-body factors included).
fn integrate(
    grid: &OracleGrid,
    xs: &[f64],
    ys: &[f64],
    u: &OneBodyWeight,
    v: &OneBodyWeight,
) -> f64 {
    let angles = uniform_angles(grid.nodes);
    let us: Vec<f64> = angles.iter().map(|&t| u.eval(t)).collect();
    let vs: Vec<f64> = angles.iter().map(|&t| v.eval(t)).collect();
    let d = grid.dimension();
    let m = grid.nodes;
    let fixed: f64 = xs.iter().map(|&x| u.eval(x)).product::<f64>() * ys.iter().map(|&y| v.eval(y)).product::<f64>();
    let walk = |first: usize| -> f64 {
        let mut idx = vec![0usize; d];
        if d > 0 {
            idx[0] = first;
        }
        let mut thetas: Vec<f64> = xs.to_vec();
        thetas.resize(xs.len() + grid.free_roman, 0.0);
        let mut phis: Vec<f64> = ys.to_vec();
        phis.resize(ys.len() + grid.free_greek, 0.0);
        let mut acc = 0.0;
        loop {
            let mut one_body = 1.0;
            for (i, &q) in idx.iter().enumerate() {
                if i < grid.free_roman {
                    thetas[xs.len() + i] = angles[q];
                    one_body *= us[q];
                } else {
                    phis[ys.len() + i - grid.free_roman] = angles[q];
                    one_body *= vs[q];
                }
            }
            acc += one_body * boltzmann(&thetas, &phis);
            // odometer over indices 1..d (index 0 is fixed per task)
            let mut pos = 1;
            loop {
                if pos >= d {
                    return acc;
                }
                idx[pos] += 1;
                if idx[pos] < m {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    };
    let total: f64 = if d == 0 {
        walk(0)
    } else {
        let parts: Vec<f64> = (0..m).into_par_iter().map(walk).collect();
        parts.iter().sum()
    };
    fixed * total * (2.0 * PI / m as f64).powi(d as i32)
}

fn falling(n: usize, k: usize) -> f64 {
    (n - k + 1..=n).map(|i| i as f64).product()
}

/// `ρ_{(k1,k2)}(xs; ys) = N1!/(N1-k1)! N2!/(N2-k2)! ∫ PDF` over the
/// remaining angles, by exact tensor-grid quadrature.
pub fn oracle_correlation(config: PlasmaConfig, xs: &[f64], ys: &[f64]) -> Result<f64> {
    let grid = OracleGrid::new(config, xs.len(), ys.len(), 0)?;
    oracle_correlation_on(&grid, config, xs, ys)
}

/// As [`oracle_correlation`] on a caller-chosen grid.
pub fn oracle_correlation_on(grid: &OracleGrid, config: PlasmaConfig, xs: &[f64], ys: &[f64]) -> Result<f64> {
    let one = OneBodyWeight::one();
    let raw = integrate(grid, xs, ys, &one, &one);
    let count = falling(config.n1(), xs.len()) * falling(config.n2(), ys.len());
    Ok(count * raw * (-ln_normalization_c(config)).exp())
}

/// `Z_{N1,N2}[u, v]` by direct integration over all angles.
pub fn oracle_partition(config: PlasmaConfig, u: &OneBodyWeight, v: &OneBodyWeight) -> Result<f64> {
    let grid = OracleGrid::new(config, 0, 0, u.bandwidth().max(v.bandwidth()))?;
    Ok(integrate(&grid, &[], &[], u, v) * (-ln_normalization_c(config)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n1: usize, n2: usize) -> PlasmaConfig {
        PlasmaConfig::new(n1, n2).unwrap()
    }

    #[test]
    fn two_roman_examples() {
        let c = cfg(2, 0);
        assert!((oracle_correlation(c, &[0.4], &[]).unwrap() - 1.0 / PI).abs() < 1e-14);
        assert!((oracle_correlation(c, &[0.0, PI], &[]).unwrap() - 1.0 / (PI * PI)).abs() < 1e-14);
        assert!((oracle_correlation(c, &[], &[]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn grid_doubling_is_stable() {
        let c = cfg(2, 1);
        let g1 = OracleGrid::new(c, 1, 0, 0).unwrap();
        let g2 = OracleGrid::with_nodes(c, 1, 0, 2 * g1.nodes).unwrap();
        let a = oracle_correlation_on(&g1, c, &[0.3], &[]).unwrap();
        let b = oracle_correlation_on(&g2, c, &[0.3], &[]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn too_large_rejected() {
        assert!(matches!(oracle_correlation(cfg(10, 0), &[], &[]), Err(Error::DimensionTooLarge(_))));
        assert!(oracle_correlation(cfg(2, 0), &[0.1, 0.2, 0.3], &[]).is_err());
    }

    #[test]
    fn weighted_partition_matches_pfaffian_route() {
        use crate::plasma::partition_function;
        let u = OneBodyWeight::Fourier { cos: vec![1.0, 0.5], sin: vec![0.0, 0.3, -0.1] };
        let v = OneBodyWeight::Fourier { cos: vec![1.0, -0.2, 0.1], sin: vec![0.0, 0.25] };
        for c in [cfg(2, 1), cfg(2, 0), cfg(0, 2), cfg(4, 1), cfg(2, 2)] {
            let direct = oracle_partition(c, &u, &v).unwrap();
            let pf = partition_function(c, &u, &v).unwrap().value;
            assert!((direct - pf).abs() < 1e-10 * direct.abs(), "{c:?}: {direct} vs {pf}");
        }
    }
}
