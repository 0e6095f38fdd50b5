//! Continuous-rate adaptation: optimal cutoff, the exact ASE limit and its
//! high-SNR asymptote.

use std::f64::consts::LN_2;

use super::{solve_cutoff, AdaptiveSolution, BerPolicy, Cutoff, Evaluation, SnrSpec};
use crate::channel::{power_series, ChannelModel};
use crate::error::{Error, Result};
use crate::specfun::{digamma, SeriesConfig};

/// Absolute error, in bits/s/Hz, beyond which the truncated series is
/// replaced by quadrature.
const ASE_SERIES_TOL: f64 = 1e-9;

/// `P(I) / sigma^2 = (1/c - 1/I)^+ / K`.
pub fn optimal_power(i: f64, cutoff: f64, policy: &BerPolicy) -> f64 {
    if i <= cutoff {
        0.0
    } else {
        (1.0 / cutoff - 1.0 / i) / policy.k_margin()
    }
}

/// Solves `E[(1/c - 1/I)^+] = K * SNR` for the cutoff `c`.
pub fn solve_cutoff_continuous(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel) -> Result<Cutoff> {
    check_snr(snr)?;
    let target = policy.k_margin() * snr.snr_linear;
    let cfg = SeriesConfig::default();
    solve_cutoff(|c| Ok(m.mean_inv_excess(c, &cfg)? - target), "continuous cutoff")
}

fn check_snr(snr: SnrSpec) -> Result<()> {
    if !(snr.snr_linear > 0.0 && snr.snr_linear.is_finite()) {
        return Err(Error::domain("snr", format!("linear SNR {} must be positive", snr.snr_linear)));
    }
    Ok(())
}

/// `ln(A0 / (αβ)) + ψ(α) + ψ(β) - 1/xi2 = E[ln I]`.
fn mean_ln_irradiance(m: &ChannelModel) -> Result<f64> {
    let t = &m.turbulence;
    let pe = m.pointing.map_or(0.0, |p| p.a0.ln() - 1.0 / p.xi2);
    Ok(digamma(t.alpha)? + digamma(t.beta)? - (t.alpha * t.beta).ln() + pe)
}

/// Maximum ASE of adaptive unconstrained MQAM.
///
/// `R/B = [E[ln I] - ln c + Q_2(c/A0)] / ln 2`, with `Q_2` the doubly
/// integrated density series truncated per `cfg`. When the truncation or
/// cancellation error of `Q_2` exceeds 1e-9 bits/s/Hz, `E[(ln(I/c))^+]` is
/// integrated numerically instead.
pub fn ase_limit(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, cfg: &SeriesConfig) -> Result<AdaptiveSolution> {
    m.check_series(cfg)?;
    let cut = solve_cutoff_continuous(snr, policy, m)?;
    let c = cut.cutoff;
    let s = power_series(m, c / m.a0(), 2, cfg)?;
    let (nats, evaluation) = if s.value.is_finite() && s.error_estimate() <= ASE_SERIES_TOL * LN_2 {
        (mean_ln_irradiance(m)? - c.ln() + s.value, Evaluation::Series { terms: s.terms })
    } else {
        (m.mean_ln_excess(c, cfg)?, Evaluation::Quadrature)
    };
    Ok(solution(cut, nats, evaluation))
}

/// [`ase_limit`] with the truncated series used unconditionally.
pub fn ase_limit_series(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, cfg: &SeriesConfig) -> Result<AdaptiveSolution> {
    m.check_series(cfg)?;
    let cut = solve_cutoff_continuous(snr, policy, m)?;
    let c = cut.cutoff;
    let s = power_series(m, c / m.a0(), 2, cfg)?;
    Ok(solution(cut, mean_ln_irradiance(m)? - c.ln() + s.value, Evaluation::Series { terms: s.terms }))
}

/// [`ase_limit`] with `E[(ln(I/c))^+]` always evaluated by quadrature.
pub fn ase_limit_quadrature(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel) -> Result<AdaptiveSolution> {
    let cut = solve_cutoff_continuous(snr, policy, m)?;
    let nats = m.mean_ln_excess(cut.cutoff, &SeriesConfig::default())?;
    Ok(solution(cut, nats, Evaluation::Quadrature))
}

fn solution(cut: Cutoff, nats: f64, evaluation: Evaluation) -> AdaptiveSolution {
    AdaptiveSolution {
        cutoff: cut.cutoff,
        ase_bits: (nats / LN_2).max(0.0),
        constraint_residual: cut.constraint_residual,
        iterations: cut.iterations,
        evaluation,
    }
}

/// `[ln(K A0 / (αβ)) + ψ(α) + ψ(β) - 1/xi2 + ln SNR] / ln 2`.
pub fn high_snr_ase(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel) -> Result<f64> {
    check_snr(snr)?;
    Ok((mean_ln_irradiance(m)? + policy.k_margin().ln() + snr.snr_linear.ln()) / LN_2)
}

/// High-SNR loss from pointing errors, `(1/xi2 - ln A0) / ln 2`.
pub fn pointing_penalty(m: &ChannelModel) -> Result<f64> {
    let p = m
        .pointing
        .ok_or_else(|| Error::invalid("model", "pointing penalty needs a model with pointing errors"))?;
    Ok((1.0 / p.xi2 - p.a0.ln()) / LN_2)
}
