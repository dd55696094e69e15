//! Trajectory evaluation, reproducible random-time sampling, and empirical
//! statistics — the Monte-Carlo ground truth for every analytic
//! distribution in this crate.
//!
//! Times are drawn i.i.d. uniform on [0, T] rather than on a grid, so the
//! quasiperiodic spectrum cannot alias. The generator is counter-based:
//! chunk c derives its stream from (seed, c), which makes the sample set a
//! pure function of (seed, n_chunks) no matter how many threads run.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charfun::coeffs::A2P;
use crate::error::{Error, Result};
use crate::model_xy::ModeData;

/// A sampling experiment: window, sample count, seed, and the chunk
/// granularity that fixes parallel reproducibility.
#[derive(Debug, Clone, PartialEq, serde::Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    pub t_max: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default = "default_chunks")]
    pub n_chunks: usize,
}

fn default_chunks() -> usize {
    64
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 || self.n_chunks < 1 || !(self.t_max > 0.0) {
            return Err(Error::InvalidArgument(
                "sampling plan needs n_samples >= 1, n_chunks >= 1, t_max > 0".into(),
            ));
        }
        Ok(())
    }

    /// Sample count of chunk c; the first (n mod chunks) chunks carry one
    /// extra sample.
    fn chunk_len(&self, c: usize) -> usize {
        let base = self.n_samples / self.n_chunks;
        let extra = self.n_samples % self.n_chunks;
        base + usize::from(c < extra)
    }

    fn chunk_rng(&self, c: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(c as u64);
        rng
    }
}

/// The uniformly distributed sample times of a plan, in chunk order.
pub fn sample_times(plan: &SamplingPlan) -> Result<Vec<f64>> {
    plan.validate()?;
    let chunks: Vec<Vec<f64>> = (0..plan.n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = plan.chunk_rng(c);
            (0..plan.chunk_len(c))
                .map(|_| rng.gen::<f64>() * plan.t_max)
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// M(t) = sum_k [cos(theta2) cos(dtheta) + W_k cos(t Lambda_k)].
pub fn evaluate_magnetization(modes: &[ModeData], t: f64) -> f64 {
    modes
        .iter()
        .map(|m| m.mean_part() + m.w * (t * m.lambda).cos())
        .sum()
}

/// Sample the magnetization trajectory at the plan's random times.
pub fn sample_trajectory(modes: &[ModeData], plan: &SamplingPlan) -> Result<Vec<(f64, f64)>> {
    plan.validate()?;
    let mean: f64 = modes.iter().map(ModeData::mean_part).sum();
    let w: Vec<f64> = modes.iter().map(|m| m.w).collect();
    let lambda: Vec<f64> = modes.iter().map(|m| m.lambda).collect();
    let chunks: Vec<Vec<(f64, f64)>> = (0..plan.n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = plan.chunk_rng(c);
            (0..plan.chunk_len(c))
                .map(|_| {
                    let t = rng.gen::<f64>() * plan.t_max;
                    let osc: f64 = w
                        .iter()
                        .zip(&lambda)
                        .map(|(&wi, &li)| wi * (t * li).cos())
                        .sum();
                    (t, mean + osc)
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// One merged oscillator: all modes sharing a frequency, with their
/// combined amplitude V = sum of W over the class. Exactly degenerate
/// frequencies (k and 2 pi - k share Lambda) are not rationally
/// independent, so the theorem of averages applies only after merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyClass {
    pub lambda: f64,
    pub amplitude: f64,
    pub members: usize,
}

const FREQUENCY_MERGE_TOL: f64 = 1e-9;

/// Group modes into frequency classes by relative proximity of Lambda.
pub fn merge_frequency_classes(modes: &[ModeData]) -> Vec<FrequencyClass> {
    let mut sorted: Vec<(f64, f64)> = modes.iter().map(|m| (m.lambda, m.w)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut classes: Vec<FrequencyClass> = Vec::new();
    for (lambda, w) in sorted {
        match classes.last_mut() {
            Some(c)
                if (lambda - c.lambda).abs()
                    <= FREQUENCY_MERGE_TOL * lambda.abs().max(c.lambda.abs()) =>
            {
                c.amplitude += w;
                c.members += 1;
            }
            _ => classes.push(FrequencyClass {
                lambda,
                amplitude: w,
                members: 1,
            }),
        }
    }
    classes
}

/// Analytic time statistics of the magnetization: mean, temporal variance,
/// and the generalized-variance chain over merged frequency classes.
#[derive(Debug, Clone)]
pub struct AnalyticMoments {
    pub mean: f64,
    /// (1/2) sum_j V_j^2; for the +-k pairing this equals sum_k W_k^2.
    pub variance: f64,
    /// Q_{2p} = sum_j (V_j / 2)^{2p}, p = 1..=p_max.
    pub q: Vec<f64>,
    /// kappa_{2p} = a_{2p} 2^{2p} Q_{2p}.
    pub kappa: Vec<f64>,
}

impl AnalyticMoments {
    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa[1] / (self.kappa[0] * self.kappa[0])
    }

    /// Half-amplitudes V_j/2 of the merged classes: the weight vector in
    /// the |Z_n| convention.
    pub fn half_amplitudes(classes: &[FrequencyClass]) -> Vec<f64> {
        classes.iter().map(|c| 0.5 * c.amplitude.abs()).collect()
    }
}

pub fn analytic_moments(modes: &[ModeData], p_max: usize) -> Result<AnalyticMoments> {
    if p_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "p_max must be >= 1, got {p_max}"
        )));
    }
    if 2 * p_max > crate::charfun::coeffs::MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: 2 * p_max,
            max: crate::charfun::coeffs::MAX_ORDER,
        });
    }
    let classes = merge_frequency_classes(modes);
    let mean = modes.iter().map(ModeData::mean_part).sum();
    let mut q = vec![0.0; p_max];
    for c in &classes {
        let half = 0.5 * c.amplitude;
        let h2 = half * half;
        let mut pow = 1.0;
        for qp in q.iter_mut() {
            pow *= h2;
            *qp += pow;
        }
    }
    let kappa: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(i, &qv)| A2P[i] * 4f64.powi(i as i32 + 1) * qv)
        .collect();
    Ok(AnalyticMoments {
        mean,
        variance: kappa[0],
        q,
        kappa,
    })
}

/// Empirical mean, variance, and even cumulants with batch-means errors.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalStats {
    pub mean: f64,
    /// Unbiased (n-1) variance.
    pub variance: f64,
    /// kappa_2, kappa_4, kappa_6, kappa_8 from central moments.
    pub cumulants: [f64; 4],
    /// Batch-means standard error per entry of `cumulants`.
    pub std_errors: [f64; 4],
    pub n: usize,
    /// Set when n is too small for the order-8 estimates to mean much.
    pub insufficient_samples: bool,
}

const BATCHES: usize = 32;
const RECOMMENDED_MIN_SAMPLES: usize = 1000;

/// Central moments m2..m8 about the sample mean.
fn central_moments(samples: &[f64], mean: f64) -> [f64; 7] {
    let mut acc = [0.0f64; 7];
    for &s in samples {
        let d = s - mean;
        let mut p = d;
        for a in acc.iter_mut() {
            p *= d;
            *a += p;
        }
    }
    let n = samples.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    acc
}

/// Even cumulants (2,4,6,8) from central moments.
fn even_cumulants(m: &[f64; 7]) -> [f64; 4] {
    let (m2, m3, m4, m5, m6, m8) = (m[0], m[1], m[2], m[3], m[4], m[6]);
    let k2 = m2;
    let k4 = m4 - 3.0 * m2 * m2;
    let k6 = m6 - 15.0 * m4 * m2 - 10.0 * m3 * m3 + 30.0 * m2.powi(3);
    let k8 = m8 - 28.0 * m6 * m2 - 56.0 * m5 * m3 - 35.0 * m4 * m4
        + 420.0 * m4 * m2 * m2
        + 560.0 * m3 * m3 * m2
        - 630.0 * m2.powi(4);
    [k2, k4, k6, k8]
}

/// Estimate statistics of a sample set. Never fails; sparse data sets the
/// insufficient-samples flag instead (with NaN errors below 2 samples).
pub fn empirical_stats(samples: &[f64]) -> EmpiricalStats {
    let n = samples.len();
    if n < 2 {
        return EmpiricalStats {
            mean: samples.first().copied().unwrap_or(f64::NAN),
            variance: 0.0,
            cumulants: [0.0; 4],
            std_errors: [f64::NAN; 4],
            n,
            insufficient_samples: true,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let m = central_moments(samples, mean);
    let cumulants = even_cumulants(&m);
    let variance = m[0] * n as f64 / (n - 1) as f64;

    let mut std_errors = [f64::NAN; 4];
    if n >= 2 * BATCHES {
        let batch_len = n / BATCHES;
        let mut batch_vals = [[0.0f64; BATCHES]; 4];
        for b in 0..BATCHES {
            let lo = b * batch_len;
            let hi = if b + 1 == BATCHES { n } else { lo + batch_len };
            let chunk = &samples[lo..hi];
            let bm = chunk.iter().sum::<f64>() / chunk.len() as f64;
            let bc = even_cumulants(&central_moments(chunk, bm));
            for (i, v) in bc.iter().enumerate() {
                batch_vals[i][b] = *v;
            }
        }
        for i in 0..4 {
            let bmean = batch_vals[i].iter().sum::<f64>() / BATCHES as f64;
            let var = batch_vals[i]
                .iter()
                .map(|v| (v - bmean).powi(2))
                .sum::<f64>()
                / (BATCHES - 1) as f64;
            std_errors[i] = (var / BATCHES as f64).sqrt();
        }
    }

    EmpiricalStats {
        mean,
        variance,
        cumulants,
        std_errors,
        n,
        insufficient_samples: n < RECOMMENDED_MIN_SAMPLES,
    }
}

/// How histogram counts are meant to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationRule {
    Count,
    Density,
}

/// Binned counts over sorted edges. `n` is the number of binned samples;
/// values outside the edge range are tallied separately so that
/// sum(counts) = n always holds.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
    pub n_outside: u64,
    pub normalization: NormalizationRule,
}

impl Histogram {
    /// Per-bin probability density (counts / (n * width)).
    pub fn density(&self) -> Vec<f64> {
        let total = self.n.max(1) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (total * (e[1] - e[0])))
            .collect()
    }
}

/// JSON export shape for histograms, carrying the plan provenance.
#[derive(Debug, Clone, Serialize)]
pub struct HistogramExport<'a> {
    #[serde(flatten)]
    pub histogram: &'a Histogram,
    pub seed: u64,
    pub t_max: f64,
}

pub fn histogram(
    samples: &[f64],
    edges: &[f64],
    normalization: NormalizationRule,
) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "histogram needs at least 2 strictly increasing edges".into(),
        ));
    }
    let mut counts = vec![0u64; edges.len() - 1];
    let mut outside = 0u64;
    for &s in samples {
        if s < edges[0] || s >= *edges.last().unwrap() {
            outside += 1;
            continue;
        }
        let bin = edges.partition_point(|&e| e <= s) - 1;
        counts[bin] += 1;
    }
    let n = counts.iter().sum();
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        n,
        n_outside: outside,
        normalization,
    })
}

/// Two-sided Kolmogorov-Smirnov distance between a sample set and a
/// reference CDF. Sorts a copy of the samples.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 / n - f).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Write `t,value` sample rows at full precision.
pub fn write_samples_csv<W: std::io::Write>(
    samples: &[(f64, f64)],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in samples {
        writeln!(out, "{t:.16e},{v:.16e}")?;
    }
    Ok(())
}
