//! Expectations over `I` by iterated integration: closed form over the
//! pointing factor, adaptive quadrature over the turbulence factor.

use super::conditional::{inv_excess, laplace, ln_excess, region_inv, region_prob};
use super::density::GgDensity;
use super::ChannelModel;
use crate::error::Result;
use crate::specfun::SeriesConfig;

impl ChannelModel {
    /// `E[g(I)]` where `g` has kinks at `kinks` (in units of `I`).
    ///
    /// `gg` is `g` itself, used without pointing errors; `pe(ia, a0, xi2)`
    /// is `E[g(ia I_p)]`.
    pub(crate) fn expect_iterated<G, P>(&self, gg: G, pe: P, kinks: &[f64], cfg: &SeriesConfig) -> Result<f64>
    where
        G: Fn(f64) -> f64,
        P: Fn(f64, f64, f64) -> f64,
    {
        let d = GgDensity::new(&self.turbulence, cfg)?;
        match self.pointing {
            None => d.expect(gg, kinks),
            Some(p) => {
                let scaled: Vec<f64> = kinks.iter().map(|k| k / p.a0).collect();
                d.expect(|ia| pe(ia, p.a0, p.xi2), &scaled)
            }
        }
    }

    /// `E[(1/c - 1/I)^+]`.
    pub(crate) fn mean_inv_excess(&self, c: f64, cfg: &SeriesConfig) -> Result<f64> {
        self.expect_iterated(
            |i| (1.0 / c - 1.0 / i).max(0.0),
            |ia, a0, xi2| inv_excess(c, ia, a0, xi2),
            &[c],
            cfg,
        )
    }

    /// `E[(ln(I/c))^+]` in nats.
    pub(crate) fn mean_ln_excess(&self, c: f64, cfg: &SeriesConfig) -> Result<f64> {
        self.expect_iterated(
            |i| (i / c).ln().max(0.0),
            |ia, a0, xi2| ln_excess(c, ia, a0, xi2),
            &[c],
            cfg,
        )
    }

    /// `Σ_r w_r E[1{lo_r <= I < hi_r} / I]` over disjoint regions with `lo_r > 0`.
    pub(crate) fn mean_weighted_region_inv(&self, regions: &[(f64, f64, f64)], cfg: &SeriesConfig) -> Result<f64> {
        let kinks: Vec<f64> = regions.iter().map(|r| r.0).collect();
        self.expect_iterated(
            |i| {
                regions
                    .iter()
                    .find(|r| i >= r.0 && i < r.1)
                    .map_or(0.0, |r| r.2 / i)
            },
            |ia, a0, xi2| regions.iter().map(|r| r.2 * region_inv(r.0, r.1, ia, a0, xi2)).sum(),
            &kinks,
            cfg,
        )
    }

    /// `Σ_r w_r Pr[lo_r <= I < hi_r]` over disjoint regions.
    pub(crate) fn mean_weighted_region_prob(&self, regions: &[(f64, f64, f64)], cfg: &SeriesConfig) -> Result<f64> {
        let kinks: Vec<f64> = regions.iter().map(|r| r.0).collect();
        self.expect_iterated(
            |i| regions.iter().find(|r| i >= r.0 && i < r.1).map_or(0.0, |r| r.2),
            |ia, a0, xi2| regions.iter().map(|r| r.2 * region_prob(r.0, r.1, ia, a0, xi2)).sum(),
            &kinks,
            cfg,
        )
    }

    /// `E[exp(-s I)]`.
    pub(crate) fn mean_exp(&self, s: f64, cfg: &SeriesConfig) -> Result<f64> {
        let scale = 1.0 / s;
        self.expect_iterated(
            |i| (-s * i).exp(),
            |ia, a0, xi2| laplace(s * ia * a0, xi2),
            &[scale, 4.0 * scale, 16.0 * scale],
            cfg,
        )
    }
}
