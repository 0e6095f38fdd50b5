//! Discrete-rate adaptation over a finite set of square constellations.

use super::{solve_cutoff, AdaptiveSolution, BerPolicy, Cutoff, Evaluation, SnrSpec};
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::specfun::SeriesConfig;

/// Admissible constellation sizes. `sizes[0] = 0` is the silent region;
/// every other entry is a square-QAM order `4^i`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstellationSet {
    sizes: Vec<u64>,
}

impl Default for ConstellationSet {
    fn default() -> Self {
        ConstellationSet {
            sizes: vec![0, 4, 16, 64, 256, 1024],
        }
    }
}

impl ConstellationSet {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.len() < 2 || sizes[0] != 0 {
            return Err(Error::invalid(
                "constellations",
                "expected 0 followed by at least one square-QAM order",
            ));
        }
        for w in sizes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("constellations", format!("{} does not exceed {}", w[1], w[0])));
            }
        }
        for &m in &sizes[1..] {
            if !is_power_of_four(m) {
                return Err(Error::invalid("constellations", format!("{m} is not a power of 4")));
            }
        }
        Ok(ConstellationSet { sizes })
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// The nonzero sizes.
    pub fn orders(&self) -> &[u64] {
        &self.sizes[1..]
    }
}

fn is_power_of_four(m: u64) -> bool {
    m >= 4 && m.is_power_of_two() && m.trailing_zeros().is_multiple_of(2)
}

/// `[lo, hi)` in irradiance, served with constellation `m` (0 = silent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub m: u64,
}

/// `[M_i c, M_{i+1} c)` for each size, with `[0, M_1 c)` silent and the last
/// region unbounded.
pub fn discrete_regions(set: &ConstellationSet, cutoff_star: f64) -> Vec<Region> {
    let orders = set.orders();
    let mut out = Vec::with_capacity(orders.len() + 1);
    out.push(Region {
        lo: 0.0,
        hi: orders[0] as f64 * cutoff_star,
        m: 0,
    });
    for (k, &m) in orders.iter().enumerate() {
        let hi = orders.get(k + 1).map_or(f64::INFINITY, |&n| n as f64 * cutoff_star);
        out.push(Region {
            lo: m as f64 * cutoff_star,
            hi,
            m,
        });
    }
    out
}

/// `P_i(I) / sigma^2 = (M_i - 1) / (K I)`; zero in the silent region.
pub fn discrete_power(i: f64, region_m: u64, policy: &BerPolicy) -> f64 {
    if region_m < 2 {
        0.0
    } else {
        (region_m as f64 - 1.0) / (policy.k_margin() * i)
    }
}

fn weighted(set: &ConstellationSet, c: f64, weight: impl Fn(u64) -> f64) -> Vec<(f64, f64, f64)> {
    discrete_regions(set, c)
        .into_iter()
        .filter(|r| r.m > 0)
        .map(|r| (r.lo, r.hi, weight(r.m)))
        .collect()
}

/// Solves `Σ_i (M_i - 1) E[1{M_i c <= I < M_{i+1} c} / I] = K * SNR`.
///
/// Fails with a bracket error when the budget exceeds what the largest
/// constellation can spend even with `c -> 0`.
pub fn solve_cutoff_discrete(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, set: &ConstellationSet) -> Result<Cutoff> {
    if !(snr.snr_linear > 0.0 && snr.snr_linear.is_finite()) {
        return Err(Error::domain("snr", format!("linear SNR {} must be positive", snr.snr_linear)));
    }
    let target = policy.k_margin() * snr.snr_linear;
    let cfg = SeriesConfig::default();
    solve_cutoff(
        |c| Ok(m.mean_weighted_region_inv(&weighted(set, c, |k| k as f64 - 1.0), &cfg)? - target),
        "discrete cutoff",
    )
}

/// `Σ_i log2(M_i) Pr[M_i c <= I < M_{i+1} c]` at the discrete cutoff.
pub fn discrete_ase(snr: SnrSpec, policy: &BerPolicy, m: &ChannelModel, set: &ConstellationSet) -> Result<AdaptiveSolution> {
    let cut = solve_cutoff_discrete(snr, policy, m, set)?;
    let regions = weighted(set, cut.cutoff, |k| (k as f64).log2());
    let ase = m.mean_weighted_region_prob(&regions, &SeriesConfig::default())?;
    Ok(AdaptiveSolution {
        cutoff: cut.cutoff,
        ase_bits: ase.max(0.0),
        constraint_residual: cut.constraint_residual,
        iterations: cut.iterations,
        evaluation: Evaluation::Quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::{ase_limit, ber_bound};
    use crate::channel::{composite_cdf, gg_params, PointingParams};

    fn policy() -> BerPolicy {
        BerPolicy::new(1e-3).unwrap()
    }

    fn models() -> Vec<ChannelModel> {
        let mut v = Vec::new();
        for (s, a0, xi) in [(0.4, 0.7180, 1.7808), (2.0, 0.3025, 2.5848)] {
            let t = gg_params(s).unwrap();
            v.push(ChannelModel::gamma_gamma(t));
            v.push(ChannelModel::with_pointing(t, PointingParams::new(a0, xi * xi).unwrap()));
        }
        v
    }

    #[test]
    fn set_validation() {
        assert!(ConstellationSet::new(vec![0, 4, 16]).is_ok());
        assert!(ConstellationSet::new(vec![4, 16]).is_err());
        assert!(ConstellationSet::new(vec![0, 16, 4]).is_err());
        assert!(ConstellationSet::new(vec![0, 8]).is_err());
        assert!(ConstellationSet::new(vec![0, 2]).is_err());
        assert!(ConstellationSet::new(vec![0]).is_err());
        assert_eq!(ConstellationSet::default().sizes(), &[0, 4, 16, 64, 256, 1024]);
    }

    #[test]
    fn regions_partition_the_half_line() {
        let r = discrete_regions(&ConstellationSet::default(), 1.0);
        assert_eq!(r.len(), 6);
        assert_eq!(r[0], Region { lo: 0.0, hi: 4.0, m: 0 });
        assert_eq!(r[1], Region { lo: 4.0, hi: 16.0, m: 4 });
        assert_eq!(r[5], Region { lo: 1024.0, hi: f64::INFINITY, m: 1024 });
        for w in r.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }

    #[test]
    fn power_meets_target_ber_exactly() {
        let p = policy();
        let k = p.k_margin();
        assert!((discrete_power(2.0, 4, &p) - 3.0 / (k * 2.0)).abs() < 1e-15);
        assert!((discrete_power(2.0, 1024, &p) - 1023.0 / (k * 2.0)).abs() < 1e-12);
        assert_eq!(discrete_power(2.0, 0, &p), 0.0);
        for &m in ConstellationSet::default().orders() {
            for i in [0.01, 0.3, 5.0] {
                let b = ber_bound(m, i * discrete_power(i, m, &p)).unwrap();
                assert!((b - 1e-3).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cutoff_solution_contract() {
        let p = policy();
        let set = ConstellationSet::default();
        for m in models() {
            let mut prev = f64::INFINITY;
            for db in (0..=30).step_by(5) {
                let snr = SnrSpec::from_db(db as f64);
                let c = solve_cutoff_discrete(snr, &p, &m, &set).unwrap();
                assert!(c.constraint_residual.abs() <= 1e-8 * p.k_margin() * snr.snr_linear);
                assert!(c.cutoff < prev);
                prev = c.cutoff;
            }
        }
    }

    #[test]
    fn gap_to_continuous_limit_is_small_and_nonnegative() {
        let p = policy();
        let set = ConstellationSet::default();
        let cfg = SeriesConfig::default();
        for m in models() {
            let mut prev = 0.0;
            for db in (0..=30).step_by(3) {
                let snr = SnrSpec::from_db(db as f64);
                let d = discrete_ase(snr, &p, &m, &set).unwrap().ase_bits;
                let c = ase_limit(snr, &p, &m, &cfg).unwrap().ase_bits;
                assert!(d <= c && c - d <= 0.2, "{db} dB: {d} vs {c}");
                assert!(d >= prev);
                prev = d;
            }
        }
    }

    #[test]
    fn matches_cdf_difference_form() {
        let p = policy();
        let set = ConstellationSet::default();
        let cfg = SeriesConfig::default();
        for m in models() {
            let snr = SnrSpec::from_db(15.0);
            let sol = discrete_ase(snr, &p, &m, &set).unwrap();
            let mut v = 0.0;
            for r in discrete_regions(&set, sol.cutoff).into_iter().filter(|r| r.m > 0) {
                let hi = composite_cdf(r.hi, &m, &cfg).unwrap();
                v += (r.m as f64).log2() * (hi - composite_cdf(r.lo, &m, &cfg).unwrap());
            }
            assert!((v - sol.ase_bits).abs() < 1e-8, "{v} vs {}", sol.ase_bits);
        }
    }

    #[test]
    fn vanishes_at_low_snr() {
        let p = policy();
        let set = ConstellationSet::default();
        for m in models() {
            let mut prev = f64::INFINITY;
            for db in [-20.0, -40.0, -60.0] {
                let d = discrete_ase(SnrSpec::from_db(db), &p, &m, &set).unwrap().ase_bits;
                assert!(d < prev);
                prev = d;
            }
            assert!(prev < 1e-3, "{prev}");
        }
    }
}
