//! Gray-coded square M-QAM over AWGN with minimum-distance detection.
//!
//! Unit average symbol energy; per-axis levels `(2k + 1 - L) d` with
//! `L = sqrt(M)` and `d = sqrt(3 / (2 (M - 1)))`; complex noise with
//! `E|w|^2 = 1 / gamma`. Each axis carries `log2 L` reflected-binary bits.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{run_workers, McConfig, Moments};
use crate::error::{Error, Result};
use crate::numerics::{brent, RootConfig};
use crate::specfun::erfc;

/// One simulation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamSimConfig {
    pub m: u64,
    pub inst_snr_db: f64,
    pub n_symbols: u64,
}

impl QamSimConfig {
    pub fn new(m: u64, inst_snr_db: f64, n_symbols: u64) -> Result<Self> {
        if !((4..=1 << 20).contains(&m) && m.is_power_of_two() && m.trailing_zeros().is_multiple_of(2)) {
            return Err(Error::invalid("m", format!("{m} is not a power of 4 in [4, 2^20]")));
        }
        if !inst_snr_db.is_finite() {
            return Err(Error::invalid("inst_snr_db", "must be finite"));
        }
        if n_symbols == 0 {
            return Err(Error::invalid("n_symbols", "must be positive"));
        }
        Ok(QamSimConfig {
            m,
            inst_snr_db,
            n_symbols,
        })
    }

    fn side(&self) -> u32 {
        1 << (self.m.trailing_zeros() / 2)
    }
}

/// Simulated bit and symbol error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamEstimate {
    pub ber: f64,
    /// From the spread of per-symbol bit-error counts.
    pub std_err: f64,
    pub ser: f64,
    pub n_symbols: u64,
}

struct Axis {
    side: u32,
    d: f64,
}

impl Axis {
    fn new(m: u64, side: u32) -> Self {
        Axis {
            side,
            d: (3.0 / (2.0 * (m as f64 - 1.0))).sqrt(),
        }
    }

    #[inline]
    fn level(&self, k: u32) -> f64 {
        (2.0 * k as f64 + 1.0 - self.side as f64) * self.d
    }

    #[inline]
    fn detect(&self, y: f64) -> u32 {
        let k = ((y / self.d + self.side as f64 - 1.0) * 0.5).round();
        k.clamp(0.0, (self.side - 1) as f64) as u32
    }
}

#[inline]
fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

#[derive(Default)]
struct Tally {
    bits: Moments,
    symbol_errors: u64,
}

fn simulate_into<R: Rng + ?Sized>(cfg: &QamSimConfig, n: u64, rng: &mut R) -> Tally {
    let side = cfg.side();
    let axis = Axis::new(cfg.m, side);
    let gamma = 10f64.powf(cfg.inst_snr_db / 10.0);
    let sigma = (0.5 / gamma).sqrt();
    let mut t = Tally::default();
    for _ in 0..n {
        let (ki, kq) = (rng.random_range(0..side), rng.random_range(0..side));
        let x = Complex64::new(axis.level(ki), axis.level(kq));
        let w = Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sigma;
        let y = x + w;
        let (di, dq) = (axis.detect(y.re), axis.detect(y.im));
        let e = (gray(ki) ^ gray(di)).count_ones() + (gray(kq) ^ gray(dq)).count_ones();
        t.bits.push(e as f64);
        t.symbol_errors += u64::from(di != ki || dq != kq);
    }
    t
}

fn finish(t: Tally, m: u64) -> QamEstimate {
    let bps = (m as f64).log2();
    let e = t.bits.estimate();
    QamEstimate {
        ber: e.mean / bps,
        std_err: e.std_err / bps,
        ser: t.symbol_errors as f64 / e.n as f64,
        n_symbols: e.n,
    }
}

/// Simulates `cfg.n_symbols` symbols from `rng`.
pub fn simulate_qam_ber<R: Rng + ?Sized>(cfg: &QamSimConfig, rng: &mut R) -> QamEstimate {
    finish(simulate_into(cfg, cfg.n_symbols, rng), cfg.m)
}

/// [`simulate_qam_ber`] split over `workers` streams of `seed`.
pub fn simulate_qam_ber_parallel(cfg: &QamSimConfig, seed: u64, workers: usize) -> Result<QamEstimate> {
    let mc = McConfig::new(cfg.n_symbols, seed, workers)?;
    let parts = run_workers(&mc, |rng, n| simulate_into(cfg, n, rng));
    let mut total = Tally::default();
    for p in parts {
        total.bits = total.bits.merge(p.bits);
        total.symbol_errors += p.symbol_errors;
    }
    Ok(finish(total, cfg.m))
}

fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact bit-error rate of the same modem, summing transition
/// probabilities between per-axis decision intervals.
pub fn gray_qam_ber_exact(m: u64, inst_snr: f64) -> Result<f64> {
    let cfg = QamSimConfig::new(m, 0.0, 1)?;
    if !(inst_snr > 0.0) {
        return Err(Error::domain("gray_qam_ber_exact", format!("SNR {inst_snr} must be positive")));
    }
    let side = cfg.side();
    let axis = Axis::new(m, side);
    let sigma = (0.5 / inst_snr).sqrt();
    // Distance from level i to the boundary between j-1 and j, in noise units.
    let tail = |i: u32, j: u32| -> f64 {
        let b = axis.level(j) - axis.d;
        q_func((b - axis.level(i)).abs() / sigma)
    };
    let mut total = 0.0;
    for i in 0..side {
        for j in 0..side {
            if i == j {
                continue;
            }
            let p = if j > i {
                tail(i, j) - if j + 1 < side { tail(i, j + 1) } else { 0.0 }
            } else {
                tail(i, j + 1) - if j > 0 { tail(i, j) } else { 0.0 }
            };
            total += p * (gray(i) ^ gray(j)).count_ones() as f64;
        }
    }
    Ok(total / (side as f64 * (side as f64).log2()))
}

/// SNR in dB at which the simulated BER of `m`-QAM equals `target_ber`.
///
/// Every evaluation reuses the same streams, so the simulated curve is a
/// fixed function of SNR for the root finder.
pub fn qam_crossing_snr_db(m: u64, target_ber: f64, n_symbols: u64, seed: u64, workers: usize) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(Error::invalid("target_ber", format!("{target_ber} must lie in (0, 0.5)")));
    }
    let f = |db: f64| -> Result<f64> {
        let cfg = QamSimConfig::new(m, db, n_symbols)?;
        Ok(simulate_qam_ber_parallel(&cfg, seed, workers)?.ber - target_ber)
    };
    let cfg = RootConfig {
        x_tol: 1e-3,
        rel_tol: 0.0,
        max_iter: 100,
    };
    Ok(brent(f, -10.0, 70.0, &cfg, "QAM BER crossing")?.x)
}
