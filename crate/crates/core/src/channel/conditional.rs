//! Expectations over the pointing factor for a fixed turbulence draw.
//!
//! With `I = ia * A0 * u` and `u` distributed as `xi2 * u^(xi2-1)` on
//! `[0, 1]`, every quantity the adaptation engine needs integrates in closed
//! form over `u`.

use crate::specfun::{gamma_p, ln_gamma, lower_gamma_series};

/// `∫_t^1 u^(p-1) du` for `t` in `[0, 1]`.
pub(crate) fn power_integral(t: f64, p: f64) -> f64 {
    if t <= 0.0 {
        return if p > 0.0 { 1.0 / p } else { f64::INFINITY };
    }
    if t >= 1.0 {
        return 0.0;
    }
    let lt = t.ln();
    if p == 0.0 {
        -lt
    } else {
        -(p * lt).exp_m1() / p
    }
}

/// `E[(1/c - 1/(ia A0 u))^+]`.
pub(crate) fn inv_excess(c: f64, ia: f64, a0: f64, xi2: f64) -> f64 {
    let scale = ia * a0;
    let t = c / scale;
    if t >= 1.0 {
        return 0.0;
    }
    let v = -(xi2 * t.ln()).exp_m1() / c - xi2 / scale * power_integral(t, xi2 - 1.0);
    v.max(0.0)
}

/// `E[(ln(ia A0 u / c))^+]`.
pub(crate) fn ln_excess(c: f64, ia: f64, a0: f64, xi2: f64) -> f64 {
    let t = c / (ia * a0);
    if t >= 1.0 {
        return 0.0;
    }
    let lt = t.ln();
    (-lt + (xi2 * lt).exp_m1() / xi2).max(0.0)
}

fn region_bounds(lo: f64, hi: f64, scale: f64) -> (f64, f64) {
    ((lo / scale).min(1.0), (hi / scale).min(1.0))
}

/// `E[1{lo <= I < hi} / I]` with `lo > 0`.
pub(crate) fn region_inv(lo: f64, hi: f64, ia: f64, a0: f64, xi2: f64) -> f64 {
    let scale = ia * a0;
    let (ul, uh) = region_bounds(lo, hi, scale);
    if uh <= ul {
        return 0.0;
    }
    let p = xi2 - 1.0;
    xi2 / scale * (power_integral(ul, p) - power_integral(uh, p))
}

/// `Pr[lo <= I < hi]`.
pub(crate) fn region_prob(lo: f64, hi: f64, ia: f64, a0: f64, xi2: f64) -> f64 {
    let (ul, uh) = region_bounds(lo, hi, ia * a0);
    if uh <= ul {
        return 0.0;
    }
    uh.powf(xi2) - ul.powf(xi2)
}

/// `E[exp(-z u)]`.
pub(crate) fn laplace(z: f64, xi2: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < xi2 + 1.0 {
        (-z).exp() * xi2 * lower_gamma_series(xi2, z)
    } else {
        let lg = ln_gamma(xi2 + 1.0).unwrap_or(f64::NAN);
        (lg - xi2 * z.ln()).exp() * gamma_p(xi2, z).unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::numerics::{integrate_pieces, QuadConfig};

    fn over_u(f: impl Fn(f64) -> f64, xi2: f64, kinks: &[f64]) -> f64 {
        let mut pts = vec![0.0];
        pts.extend(kinks.iter().copied().filter(|&k| k > 0.0 && k < 1.0));
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        let q = QuadConfig {
            abs_tol: 0.0,
            ..QuadConfig::default()
        };
        integrate_pieces(|u| xi2 * u.powf(xi2 - 1.0) * f(u), &pts, &q)
            .unwrap()
            .value
    }

    const CASES: [(f64, f64, f64); 5] = [
        (0.7180, 1.7808 * 1.7808, 1.3),
        (0.3025, 2.5848 * 2.5848, 0.8),
        (0.5, 1.0, 2.0),
        (0.5, 1.0 + 1e-9, 2.0),
        (0.9, 0.6, 1.7),
    ];

    #[test]
    fn power_integral_limits() {
        assert!((power_integral(0.5, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((power_integral(0.5, 1e-12) - 2f64.ln()).abs() < 1e-11);
        assert!((power_integral(0.25, 2.0) - (1.0 - 0.0625) / 2.0).abs() < 1e-15);
        assert_eq!(power_integral(1.0, 3.0), 0.0);
        assert_eq!(power_integral(0.0, 2.0), 0.5);
        assert!(power_integral(0.0, -0.5).is_infinite());
    }

    #[test]
    fn inverse_excess_matches_quadrature() {
        for (a0, xi2, ia) in CASES {
            for c in [0.05, 0.3, 0.9] {
                let t = c / (ia * a0);
                let q = over_u(|u| (1.0 / c - 1.0 / (ia * a0 * u)).max(0.0), xi2, &[t]);
                let v = inv_excess(c, ia, a0, xi2);
                assert!((v - q).abs() <= 1e-10 * q.max(1e-12), "a0={a0} xi2={xi2} ia={ia} c={c}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn log_excess_matches_quadrature() {
        for (a0, xi2, ia) in CASES {
            for c in [0.05, 0.3, 0.9] {
                let t = c / (ia * a0);
                let q = over_u(|u| (ia * a0 * u / c).ln().max(0.0), xi2, &[t]);
                let v = ln_excess(c, ia, a0, xi2);
                assert!((v - q).abs() <= 1e-10 * q.max(1e-12), "{v} vs {q}");
            }
        }
    }

    #[test]
    fn region_terms_match_quadrature() {
        for (a0, xi2, ia) in CASES {
            for (lo, hi) in [(0.04, 0.16), (0.1, 0.4), (0.3, f64::INFINITY), (2.0, 8.0)] {
                let s = ia * a0;
                let ind = |u: f64| {
                    let i = s * u;
                    i >= lo && i < hi
                };
                let kinks = [lo / s, hi / s];
                let qp = over_u(|u| if ind(u) { 1.0 } else { 0.0 }, xi2, &kinks);
                let qi = over_u(|u| if ind(u) { 1.0 / (s * u) } else { 0.0 }, xi2, &kinks);
                assert!((region_prob(lo, hi, ia, a0, xi2) - qp).abs() < 1e-10);
                let ri = region_inv(lo, hi, ia, a0, xi2);
                assert!((ri - qi).abs() <= 1e-10 * qi.max(1e-10), "{ri} vs {qi}");
            }
        }
    }

    #[test]
    fn laplace_matches_quadrature_on_both_branches() {
        for (_, xi2, _) in CASES {
            for z in [0.0, 1e-3, 0.7, xi2 + 0.99, xi2 + 1.01, 30.0, 400.0] {
                let q = over_u(|u| (-z * u).exp(), xi2, &[]);
                let v = laplace(z, xi2);
                assert!((v - q).abs() <= 1e-10 * q, "xi2={xi2} z={z}: {v} vs {q}");
            }
        }
    }

    proptest! {
        #[test]
        fn region_probabilities_partition_unity(
            ia in 0.01f64..10.0,
            a0 in 0.05f64..1.0,
            xi2 in 0.3f64..12.0,
            c in 1e-3f64..2.0,
        ) {
            let edges = [0.0, c, 4.0 * c, 16.0 * c, f64::INFINITY];
            let total: f64 = edges.windows(2).map(|w| region_prob(w[0], w[1], ia, a0, xi2)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn excess_terms_are_monotone_in_cutoff(
            ia in 0.01f64..10.0,
            a0 in 0.05f64..1.0,
            xi2 in 0.3f64..12.0,
            c in 1e-3f64..2.0,
        ) {
            prop_assert!(ln_excess(1.1 * c, ia, a0, xi2) <= ln_excess(c, ia, a0, xi2));
            let l = laplace(c * 10.0, xi2);
            prop_assert!((0.0..=1.0).contains(&l));
            prop_assert!(laplace(c * 20.0, xi2) <= l);
        }
    }
}
