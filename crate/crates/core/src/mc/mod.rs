//! Monte Carlo estimators for the adaptation policies and a symbol-level
//! square-QAM simulator.
//!
//! Every run splits `n_samples` over `workers` logical workers. Worker `w`
//! draws from ChaCha8 seeded with `seed` on stream `w`, and partial results
//! are merged in worker order, so output is a pure function of
//! `(seed, workers, n_samples)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adapt::{discrete_power, discrete_regions, optimal_power, BerPolicy, ConstellationSet, SnrSpec};
use crate::adapt::{solve_cutoff_continuous, solve_cutoff_discrete};
use crate::channel::{composite_cdf, ChannelModel, IrradianceSampler};
use crate::error::{Error, Result};
use crate::specfun::SeriesConfig;

mod qam;

pub use qam::{
    gray_qam_ber_exact, qam_crossing_snr_db, simulate_qam_ber, simulate_qam_ber_parallel, QamEstimate, QamSimConfig,
};

/// Sample budget and stream layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub const FIGURE_SAMPLES: u64 = 40_000;
    pub const ORACLE_SAMPLES: u64 = 1_000_000;
    pub const DEFAULT_WORKERS: usize = 4;

    pub fn new(n_samples: u64, seed: u64, workers: usize) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be positive"));
        }
        if workers == 0 {
            return Err(Error::invalid("workers", "must be positive"));
        }
        Ok(McConfig {
            n_samples,
            seed,
            workers,
        })
    }

    pub fn figure(seed: u64) -> Self {
        McConfig {
            n_samples: Self::FIGURE_SAMPLES,
            seed,
            workers: Self::DEFAULT_WORKERS,
        }
    }

    pub fn oracle(seed: u64) -> Self {
        McConfig {
            n_samples: Self::ORACLE_SAMPLES,
            seed,
            workers: Self::DEFAULT_WORKERS,
        }
    }

    /// Samples assigned to worker `w`; the first `n % workers` get one extra.
    pub fn share(&self, w: usize) -> u64 {
        let k = self.workers as u64;
        self.n_samples / k + u64::from((w as u64) < self.n_samples % k)
    }
}

/// The RNG of worker `w`.
pub fn worker_rng(seed: u64, w: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(w as u64);
    rng
}

/// Runs `f(rng, share)` for every worker and returns the results in worker
/// order.
pub(crate) fn run_workers<T, F>(cfg: &McConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    (0..cfg.workers)
        .into_par_iter()
        .map(|w| f(&mut worker_rng(cfg.seed, w), cfg.share(w)))
        .collect()
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64),
        }
    }

    pub(crate) fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate {
            mean: self.mean,
            std_err: (var / self.n as f64).sqrt(),
            n: self.n,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

impl Estimate {
    /// `(mean - reference) / std_err`; infinite when the spread is zero and
    /// the mean differs.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }
}

/// A solved adaptation policy: rate and power as functions of `I`.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptivePolicy {
    /// Continuous rate `log2(I / c)` above the cutoff `c`.
    Continuous { cutoff: f64 },
    /// Square-QAM regions `[M_i c, M_{i+1} c)`.
    Discrete { cutoff: f64, set: ConstellationSet },
}

impl AdaptivePolicy {
    pub fn continuous(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel) -> Result<Self> {
        Ok(AdaptivePolicy::Continuous {
            cutoff: solve_cutoff_continuous(snr, policy, m)?.cutoff,
        })
    }

    pub fn discrete(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, set: &ConstellationSet) -> Result<Self> {
        Ok(AdaptivePolicy::Discrete {
            cutoff: solve_cutoff_discrete(snr, policy, m, set)?.cutoff,
            set: set.clone(),
        })
    }

    pub fn cutoff(&self) -> f64 {
        match self {
            AdaptivePolicy::Continuous { cutoff } | AdaptivePolicy::Discrete { cutoff, .. } => *cutoff,
        }
    }

    /// The same policy with the cutoff multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            AdaptivePolicy::Continuous { cutoff } => AdaptivePolicy::Continuous { cutoff: cutoff * factor },
            AdaptivePolicy::Discrete { cutoff, set } => AdaptivePolicy::Discrete {
                cutoff: cutoff * factor,
                set: set.clone(),
            },
        }
    }

    /// Region index for the discrete policy (0 = silent); always 0 for the
    /// continuous one.
    fn region(&self, i: f64) -> usize {
        match self {
            AdaptivePolicy::Continuous { .. } => 0,
            AdaptivePolicy::Discrete { cutoff, set } => {
                set.orders().iter().take_while(|&&m| i >= m as f64 * cutoff).count()
            }
        }
    }

    /// `(bits/s/Hz, P / sigma^2)` at irradiance `i`.
    pub fn rate_and_power(&self, i: f64, policy: &BerPolicy) -> (f64, f64) {
        match self {
            AdaptivePolicy::Continuous { cutoff } => {
                ((i / cutoff).log2().max(0.0), optimal_power(i, *cutoff, policy))
            }
            AdaptivePolicy::Discrete { set, .. } => {
                let m = set.sizes()[self.region(i)];
                let bits = if m == 0 { 0.0 } else { (m as f64).log2() };
                (bits, discrete_power(i, m, policy))
            }
        }
    }
}

/// Rate, power and region occupancy from one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEstimate {
    pub ase: Estimate,
    pub power: Estimate,
    /// Empirical probability of each discrete region (one entry for the
    /// continuous policy).
    pub occupancy: Vec<f64>,
}

/// Samples `I` and averages the policy's rate and power.
pub fn simulate_policy(
    adaptive: &AdaptivePolicy,
    policy: &BerPolicy,
    m: &ChannelModel,
    cfg: &McConfig,
) -> Result<PolicyEstimate> {
    let sampler = IrradianceSampler::new(m)?;
    let n_regions = match adaptive {
        AdaptivePolicy::Continuous { .. } => 1,
        AdaptivePolicy::Discrete { set, .. } => set.sizes().len(),
    };
    let parts = run_workers(cfg, |rng, n| {
        let (mut rate, mut power) = (Moments::default(), Moments::default());
        let mut counts = vec![0u64; n_regions];
        for _ in 0..n {
            let i = sampler.sample(rng);
            let (r, p) = adaptive.rate_and_power(i, policy);
            rate.push(r);
            power.push(p);
            counts[adaptive.region(i)] += 1;
        }
        (rate, power, counts)
    });
    let mut rate = Moments::default();
    let mut power = Moments::default();
    let mut counts = vec![0u64; n_regions];
    for (r, p, c) in parts {
        rate = rate.merge(r);
        power = power.merge(p);
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    Ok(PolicyEstimate {
        ase: rate.estimate(),
        power: power.estimate(),
        occupancy: counts.iter().map(|&k| k as f64 / cfg.n_samples as f64).collect(),
    })
}

/// Mean of `(log2(I / c))^+` at the continuous cutoff.
pub fn estimate_ase_mc(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, cfg: &McConfig) -> Result<Estimate> {
    let p = AdaptivePolicy::continuous(snr, policy, m)?;
    Ok(simulate_policy(&p, policy, m, cfg)?.ase)
}

/// Sampled discrete-rate ASE, power and region occupancy.
pub fn estimate_discrete_ase_mc(
    snr: SnrSpec,
    policy: &BerPolicy,
    m: &ChannelModel,
    set: &ConstellationSet,
    cfg: &McConfig,
) -> Result<PolicyEstimate> {
    let p = AdaptivePolicy::discrete(snr, policy, m, set)?;
    simulate_policy(&p, policy, m, cfg)
}

/// Empirical average transmit power against the SNR budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAudit {
    pub snr_linear: f64,
    pub empirical: Estimate,
    pub z_score: f64,
    pub passed: bool,
}

/// Passing threshold of [`audit_power_constraint`], in standard errors.
pub const AUDIT_Z_LIMIT: f64 = 5.0;

/// Checks `E[P(I)] / sigma^2 = SNR` by sampling.
pub fn audit_power_constraint(
    snr: SnrSpec,
    policy: &BerPolicy,
    m: &ChannelModel,
    solution: &AdaptivePolicy,
    cfg: &McConfig,
) -> Result<PowerAudit> {
    let empirical = simulate_policy(solution, policy, m, cfg)?.power;
    let z = empirical.z_score(snr.snr_linear);
    Ok(PowerAudit {
        snr_linear: snr.snr_linear,
        empirical,
        z_score: z,
        passed: z.abs() <= AUDIT_Z_LIMIT,
    })
}

/// `max_k |F_n(x_k) - F(x_k)|` over `grid`, with `F_n` the empirical CDF of
/// `cfg.n_samples` draws.
pub fn cdf_sup_distance(m: &ChannelModel, grid: &[f64], cfg: &McConfig) -> Result<f64> {
    let sampler = IrradianceSampler::new(m)?;
    let mut draws: Vec<f64> = run_workers(cfg, |rng, n| (0..n).map(|_| sampler.sample(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect();
    draws.sort_by(f64::total_cmp);
    let series = SeriesConfig::default();
    let mut worst = 0.0f64;
    for &x in grid {
        let below = draws.partition_point(|&d| d <= x) as f64 / draws.len() as f64;
        worst = worst.max((below - composite_cdf(x, m, &series)?).abs());
    }
    Ok(worst)
}

/// Region boundaries of a discrete policy, for reporting.
pub fn policy_regions(adaptive: &AdaptivePolicy) -> Option<Vec<crate::adapt::Region>> {
    match adaptive {
        AdaptivePolicy::Continuous { .. } => None,
        AdaptivePolicy::Discrete { cutoff, set } => Some(discrete_regions(set, *cutoff)),
    }
}
