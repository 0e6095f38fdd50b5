//! Transmit SNR needed to reach a target spectral efficiency.

use super::{ase_limit, BerPolicy, SnrSpec};
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::numerics::{brent, expand_bracket_up, RootConfig};
use crate::specfun::SeriesConfig;

const DB_LO: f64 = -20.0;
const DB_HI: f64 = 40.0;

fn root_cfg() -> RootConfig {
    RootConfig {
        x_tol: 1e-9,
        rel_tol: 0.0,
        max_iter: 200,
    }
}

fn check_rb(target_rb: f64) -> Result<()> {
    if !(target_rb > 0.0 && target_rb.is_finite()) {
        return Err(Error::invalid("target_rb", format!("{target_rb} must be positive")));
    }
    Ok(())
}

fn solve_db<F>(mut g: F, what: &'static str) -> Result<SnrSpec>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi) = expand_bracket_up(&mut g, DB_LO, DB_HI, 4.0 / 3.0, 8, what)?;
    let r = brent(&mut g, lo, hi, &root_cfg(), what)?;
    Ok(SnrSpec::from_db(r.x))
}

/// SNR at which a fixed `M = 2^target_rb` constellation at constant power
/// has fading-averaged BER bound `E[0.2 exp(-1.5 I SNR / (M - 1))] = target_ber`.
pub fn fixed_required_snr(target_rb: f64, target_ber: f64, m: &ChannelModel) -> Result<SnrSpec> {
    check_rb(target_rb)?;
    if !(target_ber > 0.0 && target_ber < 0.2) {
        return Err(Error::invalid("target_ber", format!("{target_ber} must lie in (0, 0.2)")));
    }
    let cfg = SeriesConfig::default();
    let order = target_rb.exp2();
    let ln_target = target_ber.ln();
    solve_db(
        |db| {
            let s = 1.5 * SnrSpec::from_db(db).snr_linear / (order - 1.0);
            Ok((0.2 * m.mean_exp(s, &cfg)?).ln() - ln_target)
        },
        "fixed required SNR",
    )
}

/// Inverts [`ase_limit`] in SNR with the default series configuration.
pub fn adaptive_required_snr(target_rb: f64, policy: &BerPolicy, m: &ChannelModel) -> Result<SnrSpec> {
    adaptive_required_snr_with_config(target_rb, policy, m, &SeriesConfig::default())
}

pub fn adaptive_required_snr_with_config(
    target_rb: f64,
    policy: &BerPolicy,
    m: &ChannelModel,
    cfg: &SeriesConfig,
) -> Result<SnrSpec> {
    check_rb(target_rb)?;
    solve_db(
        |db| Ok(target_rb - ase_limit(SnrSpec::from_db(db), policy, m, cfg)?.ase_bits),
        "adaptive required SNR",
    )
}
