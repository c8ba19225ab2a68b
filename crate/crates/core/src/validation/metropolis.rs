//! Single-angle Metropolis sampling of the plasma Boltzmann weight, with
//! binned pair-correlation estimates and batch-means error bars.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::Species;
use crate::plasma::PlasmaConfig;

const TWO_PI: f64 = 2.0 * PI;

/// Proposal distribution for the moved angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposal {
    /// `θ + step · U(-1, 1)`, step tuned per species during burn-in.
    RandomWalk,
    /// A fresh uniform angle (independence sampler).
    Uniform,
}

/// Sampler settings. `steps` and `burn_in` count single-angle proposals
/// per chain; a sample is recorded every `thin` proposals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub chains: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub proposal: Proposal,
    /// Ignore the Boltzmann weight (null target).
    pub flat: bool,
}

impl McSettings {
    pub fn new(chains: usize, steps: usize, burn_in: usize, seed: u64) -> Self {
        McSettings {
            chains,
            steps,
            burn_in,
            thin: 1,
            seed,
            proposal: Proposal::RandomWalk,
            flat: false,
        }
    }
}

/// Acceptance band required after tuning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.2, 0.6);

/// Per-chain diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: usize,
    pub step_roman: f64,
    pub step_greek: f64,
    pub acceptance_roman: f64,
    pub acceptance_greek: f64,
    pub warnings: Vec<String>,
}

/// Recorded configurations, chain by chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub config: PlasmaConfig,
    pub reports: Vec<ChainReport>,
    /// `samples[c]` holds `(step, thetas ++ phis)` for chain `c`.
    pub samples: Vec<Vec<(usize, Vec<f64>)>>,
}

struct Chain {
    n1: usize,
    angles: Vec<f64>,
    flat: bool,
}

fn ln_chord2(a: f64, b: f64) -> f64 {
    (2.0 - 2.0 * (a - b).cos()).ln()
}

impl Chain {
    /// Log weight terms involving particle `i` at angle `t`.
    fn local(&self, i: usize, t: f64) -> f64 {
        if self.flat {
            return 0.0;
        }
        let greek_i = i >= self.n1;
        let mut acc = 0.0;
        for (j, &a) in self.angles.iter().enumerate() {
            if j == i {
                continue;
            }
            let both_greek = greek_i && j >= self.n1;
            acc += if both_greek { 2.0 } else { 1.0 } * ln_chord2(t, a);
        }
        acc
    }
}

fn run_chain(config: PlasmaConfig, s: &McSettings, chain: usize) -> (ChainReport, Vec<(usize, Vec<f64>)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    rng.set_stream(chain as u64 + 1);
    let n = config.n1() + config.n2();
    let mut c = Chain {
        n1: config.n1(),
        angles: (0..n).map(|_| rng.gen_range(0.0..TWO_PI)).collect(),
        flat: s.flat,
    };
    let mut step = [1.0f64, 0.6f64];
    let mut tried = [0u64; 2];
    let mut accepted = [0u64; 2];
    let mut samples = Vec::new();
    let window = 1000;
    for it in 0..s.burn_in + s.steps {
        if n == 0 {
            break;
        }
        let i = rng.gen_range(0..n);
        let sp = usize::from(i >= c.n1);
        let old = c.angles[i];
        let new = match s.proposal {
            Proposal::RandomWalk => (old + step[sp] * rng.gen_range(-1.0..1.0)).rem_euclid(TWO_PI),
            Proposal::Uniform => rng.gen_range(0.0..TWO_PI),
        };
        let delta = c.local(i, new) - c.local(i, old);
        let u: f64 = rng.gen();
        tried[sp] += 1;
        if delta >= 0.0 || u < delta.exp() {
            c.angles[i] = new;
            accepted[sp] += 1;
        }
        if it < s.burn_in {
            if (it + 1) % window == 0 {
                for k in 0..2 {
                    if tried[k] > 0 {
                        let rate = accepted[k] as f64 / tried[k] as f64;
                        if rate > 0.45 {
                            step[k] = (step[k] * 1.25).min(PI);
                        } else if rate < 0.35 {
                            step[k] /= 1.25;
                        }
                    }
                }
                tried = [0; 2];
                accepted = [0; 2];
            }
            if it + 1 == s.burn_in {
                tried = [0; 2];
                accepted = [0; 2];
            }
            continue;
        }
        let k = it - s.burn_in;
        if (k + 1) % s.thin.max(1) == 0 {
            samples.push((k, c.angles.clone()));
        }
    }
    let rate = |k: usize| if tried[k] > 0 { accepted[k] as f64 / tried[k] as f64 } else { f64::NAN };
    let mut warnings = Vec::new();
    if s.proposal == Proposal::RandomWalk && !s.flat {
        for (k, name) in [(0, "roman"), (1, "greek")] {
            let r = rate(k);
            if r.is_finite() && !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&r) {
                warnings.push(format!("{name} acceptance {r:.3} outside {ACCEPTANCE_BAND:?} (step {:.4})", step[k]));
            }
        }
    }
    (
        ChainReport {
            chain,
            step_roman: step[0],
            step_greek: step[1],
            acceptance_roman: rate(0),
            acceptance_greek: rate(1),
            warnings,
        },
        samples,
    )
}

/// Runs `chains` independent chains in parallel (one ChaCha8 stream
/// each); results are ordered by chain index, so output is determined
/// by the seed alone.
pub fn metropolis_sample(config: PlasmaConfig, settings: &McSettings) -> Result<SampleSet> {
    if settings.chains == 0 {
        return Err(Error::InvalidArgument("need at least one chain".into()));
    }
    let runs: Vec<_> = (0..settings.chains)
        .into_par_iter()
        .map(|c| run_chain(config, settings, c))
        .collect();
    let (reports, samples) = runs.into_iter().unzip();
    Ok(SampleSet { config, reports, samples })
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV `chain,step,theta_1..,phi_1..`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header = vec!["chain".to_string(), "step".to_string()];
        header.extend((1..=self.config.n1()).map(|i| format!("theta_{i}")));
        header.extend((1..=self.config.n2()).map(|i| format!("phi_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (c, chain) in self.samples.iter().enumerate() {
            for (step, angles) in chain {
                let vals: Vec<String> = angles.iter().map(|a| format!("{a:.16e}")).collect();
                writeln!(w, "{c},{step},{}", vals.join(","))?;
            }
        }
        Ok(())
    }

    /// Binned estimate of `ρ_{(s1,s2)}(0, Δ)` over relative angles
    /// `Δ ∈ [0, 2π)`, with batch-means standard errors from
    /// `batches_per_chain` contiguous batches in every chain.
    pub fn pair_histogram(&self, s1: Species, s2: Species, bins: usize, batches_per_chain: usize) -> Histogram {
        let n1 = self.config.n1();
        let idx = |s: Species| -> Vec<usize> {
            match s {
                Species::Roman => (0..n1).collect(),
                Species::Greek => (n1..n1 + self.config.n2()).collect(),
            }
        };
        let (a, b) = (idx(s1), idx(s2));
        let width = TWO_PI / bins as f64;
        let mut batch_estimates: Vec<Vec<f64>> = Vec::new();
        let mut total = vec![0.0; bins];
        let mut total_n = 0usize;
        for chain in &self.samples {
            let per = chain.len() / batches_per_chain.max(1);
            if per == 0 {
                continue;
            }
            for batch in chain.chunks(per).take(batches_per_chain) {
                let mut counts = vec![0.0; bins];
                for (_, angles) in batch {
                    for &i in &a {
                        for &j in &b {
                            if i == j {
                                continue;
                            }
                            let d = (angles[j] - angles[i]).rem_euclid(TWO_PI);
                            counts[((d / width) as usize).min(bins - 1)] += 1.0;
                        }
                    }
                }
                for k in 0..bins {
                    total[k] += counts[k];
                }
                total_n += batch.len();
                let norm = batch.len() as f64 * TWO_PI * width;
                batch_estimates.push(counts.iter().map(|c| c / norm).collect());
            }
        }
        let nb = batch_estimates.len();
        let norm = total_n as f64 * TWO_PI * width;
        let estimate: Vec<f64> = total.iter().map(|c| c / norm).collect();
        let sigma = (0..bins)
            .map(|k| {
                let mean = batch_estimates.iter().map(|e| e[k]).sum::<f64>() / nb as f64;
                let var = batch_estimates.iter().map(|e| (e[k] - mean).powi(2)).sum::<f64>() / (nb as f64 - 1.0);
                (var / nb as f64).sqrt()
            })
            .collect();
        Histogram {
            edges: (0..=bins).map(|k| k as f64 * width).collect(),
            estimate,
            sigma,
            batches: nb,
        }
    }

    /// All recorded angles of one species (for distribution tests).
    pub fn angles_of(&self, s: Species) -> Vec<f64> {
        let n1 = self.config.n1();
        let range = match s {
            Species::Roman => 0..n1,
            Species::Greek => n1..n1 + self.config.n2(),
        };
        self.samples
            .iter()
            .flatten()
            .flat_map(|(_, a)| a[range.clone()].to_vec())
            .collect()
    }
}

/// Binned density estimate with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub estimate: Vec<f64>,
    pub sigma: Vec<f64>,
    pub batches: usize,
}

impl Histogram {
    /// Number of bins whose estimate lies within `k` standard errors of
    /// the bin average of `exact`.
    pub fn bins_within(&self, exact: &[f64], k: f64) -> usize {
        self.estimate
            .iter()
            .zip(&self.sigma)
            .zip(exact)
            .filter(|((e, s), x)| (*e - *x).abs() <= k * *s)
            .count()
    }

    /// CSV `lo,hi,estimate,sigma[,exact]`.
    pub fn write_csv(&self, exact: Option<&[f64]>, mut w: impl Write) -> Result<()> {
        writeln!(w, "lo,hi,estimate,sigma{}", if exact.is_some() { ",exact" } else { "" })?;
        for k in 0..self.estimate.len() {
            write!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.edges[k], self.edges[k + 1], self.estimate[k], self.sigma[k])?;
            if let Some(x) = exact {
                write!(w, ",{:.16e}", x[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Bin averages `(1/w) ∫_bin f` by 8-point Gauss–Legendre per bin.
pub fn bin_averages(edges: &[f64], f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
    let gl = crate::quadrature::GaussLegendre::new(8);
    edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|e| gl.integrate(&f, e[0], e[1]) / (e[1] - e[0]))
        .collect()
}

/// One-sample Kolmogorov–Smirnov statistic against the uniform law on
/// `[0, 2π)`.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s: Vec<f64> = samples.iter().map(|a| a / TWO_PI).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}
