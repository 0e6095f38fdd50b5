//! BER-constrained rate and power adaptation.
//!
//! All public entry points take SNR in dB through [`SnrSpec`]; the math runs
//! on the linear value.

use crate::error::{Error, Result};
use crate::numerics::{brent, Root, RootConfig};

mod continuous;
mod discrete;
mod required;

pub use continuous::{
    ase_limit, ase_limit_quadrature, ase_limit_series, high_snr_ase, optimal_power, pointing_penalty, solve_cutoff_continuous,
};
pub use discrete::{
    discrete_ase, discrete_power, discrete_regions, solve_cutoff_discrete, ConstellationSet, Region,
};
pub use required::{adaptive_required_snr, adaptive_required_snr_with_config, fixed_required_snr};

/// Target bit-error rate and the derived margin `K = -1.5 / ln(5 P_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPolicy {
    target_ber: f64,
    k_margin: f64,
}

impl BerPolicy {
    /// `target_ber` must keep `K` inside `(0, 1)`: `0 < P_B < exp(-1.5) / 5`.
    pub fn new(target_ber: f64) -> Result<Self> {
        let upper = (-1.5f64).exp() / 5.0;
        if !(target_ber > 0.0 && target_ber < upper) {
            return Err(Error::invalid(
                "target_ber",
                format!("{target_ber} must lie in (0, {upper:.6}) so that the margin is below 1"),
            ));
        }
        Ok(BerPolicy {
            target_ber,
            k_margin: Self::margin_for(target_ber),
        })
    }

    pub fn margin_for(target_ber: f64) -> f64 {
        -1.5 / (5.0 * target_ber).ln()
    }

    pub fn target_ber(&self) -> f64 {
        self.target_ber
    }

    pub fn k_margin(&self) -> f64 {
        self.k_margin
    }
}

/// Average transmit SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub snr_db: f64,
    pub snr_linear: f64,
}

impl SnrSpec {
    pub fn from_db(snr_db: f64) -> Self {
        SnrSpec {
            snr_db,
            snr_linear: 10f64.powf(snr_db / 10.0),
        }
    }

    pub fn from_linear(snr_linear: f64) -> Self {
        SnrSpec {
            snr_db: 10.0 * snr_linear.log10(),
            snr_linear,
        }
    }
}

/// A solved cutoff and the residual of the constraint that defines it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub cutoff: f64,
    /// Constraint left-hand side minus `K * SNR` at `cutoff`.
    pub constraint_residual: f64,
    pub iterations: usize,
}

/// How an ASE value was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Series { terms: usize },
    Quadrature,
}

/// Cutoff plus the spectral efficiency it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSolution {
    pub cutoff: f64,
    /// R/B in bits/s/Hz.
    pub ase_bits: f64,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub evaluation: Evaluation,
}

/// `0.2 exp(-1.5 gamma / (M - 1))`.
pub fn ber_bound(m: u64, inst_snr: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain("ber_bound", format!("constellation size {m} < 2")));
    }
    if !(inst_snr >= 0.0) {
        return Err(Error::domain("ber_bound", format!("instantaneous SNR {inst_snr} < 0")));
    }
    Ok(0.2 * (-1.5 * inst_snr / (m as f64 - 1.0)).exp())
}

/// `M(I) = 1 + K I P(I) / sigma^2`, with `tx_power_norm = P(I) / sigma^2`.
pub fn constellation_size_law(i: f64, tx_power_norm: f64, policy: &BerPolicy) -> f64 {
    1.0 + policy.k_margin * i * tx_power_norm
}

const LN_C_MIN: f64 = -27.631_021_115_928_547; // ln 1e-12
const LN_GROWTH: f64 = std::f64::consts::LN_2 * 2.0; // x4 per expansion

/// Root of a constraint `g(c)` that decreases from positive at `c = 1e-12`
/// to negative for large `c`, solved in `ln c`.
pub(crate) fn solve_cutoff<G>(mut g: G, what: &'static str) -> Result<Cutoff>
where
    G: FnMut(f64) -> Result<f64>,
{
    let g_lo = g(LN_C_MIN.exp())?;
    if !(g_lo > 0.0) {
        return Err(Error::BracketFailure { what, attempts: 0 });
    }
    let mut hi = 0.0;
    let mut attempts = 0;
    while g(f64::exp(hi))? >= 0.0 {
        attempts += 1;
        if attempts > 60 {
            return Err(Error::BracketFailure { what, attempts });
        }
        hi += LN_GROWTH;
    }
    let cfg = RootConfig {
        x_tol: 1e-13,
        rel_tol: 1e-13,
        max_iter: 200,
    };
    let Root { x, fx, iterations } = brent(|lc| g(lc.exp()), LN_C_MIN, hi, &cfg, what)?;
    Ok(Cutoff {
        cutoff: x.exp(),
        constraint_residual: fx,
        iterations,
    })
}
