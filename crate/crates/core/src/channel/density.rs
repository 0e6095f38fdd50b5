//! Densities, distribution functions and moments of `I_a` and `I`.

use std::f64::consts::PI;

use super::{ln_gamma_pair, ChannelModel, TurbulenceParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_pieces, integrate_to_infinity, QuadConfig};
use crate::specfun::{ln_bessel_k_frac, ln_gamma, ln_gamma_signed, SeriesConfig};

/// Gamma-gamma density with its normalising constant computed once.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GgDensity {
    alpha: f64,
    beta: f64,
    ln_c: f64,
    cfg: SeriesConfig,
}

const TURBULENCE_POINTS: [f64; 7] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

impl GgDensity {
    pub(crate) fn new(t: &TurbulenceParams, cfg: &SeriesConfig) -> Result<Self> {
        let nu = t.alpha - t.beta;
        if (nu - nu.round()).abs() < cfg.singularity_eps {
            return Err(Error::domain(
                "gg_pdf",
                format!("alpha - beta = {nu} is within {} of an integer", cfg.singularity_eps),
            ));
        }
        let s = 0.5 * (t.alpha + t.beta);
        let ln_c = 2f64.ln() + s * (t.alpha * t.beta).ln() - ln_gamma_pair(t)?;
        Ok(GgDensity {
            alpha: t.alpha,
            beta: t.beta,
            ln_c,
            cfg: *cfg,
        })
    }

    /// `f(ia)`; the right limit at `ia = 0`.
    pub(crate) fn pdf(&self, ia: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if ia <= 0.0 {
            let lo = a.min(b);
            return if lo > 1.0 {
                0.0
            } else if lo < 1.0 {
                f64::INFINITY
            } else {
                // C Γ(|nu|) / 2 (αβ)^(-|nu|/2)
                let nu = (a - b).abs();
                (self.ln_c + ln_gamma(nu).unwrap_or(f64::NAN) - 2f64.ln() - 0.5 * nu * (a * b).ln()).exp()
            };
        }
        let z = 2.0 * (a * b * ia).sqrt();
        match ln_bessel_k_frac(a - b, z, &self.cfg) {
            Ok(lk) => (self.ln_c + (0.5 * (a + b) - 1.0) * ia.ln() + lk).exp(),
            Err(_) => f64::NAN,
        }
    }

    /// `E[h(I_a)]` by adaptive quadrature; `kinks` are extra breakpoints
    /// where `h` is not smooth.
    pub(crate) fn expect<H: Fn(f64) -> f64>(&self, h: H, kinks: &[f64]) -> Result<f64> {
        let mut pts: Vec<f64> = TURBULENCE_POINTS.to_vec();
        pts.extend(kinks.iter().copied().filter(|k| *k > 0.0 && k.is_finite()));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let r = integrate_to_infinity(
            |x| {
                let p = self.pdf(x);
                if p == 0.0 {
                    0.0
                } else {
                    h(x) * p
                }
            },
            &pts,
            &QuadConfig::default(),
        )?;
        Ok(r.value)
    }
}

/// A truncated power series and whether its stopping rule fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    pub converged: bool,
    /// Sum of the magnitudes of every added term.
    pub magnitude: f64,
    /// Geometric estimate of the omitted tail.
    pub tail: f64,
}

/// Relative rounding error tolerated before a series value is replaced by
/// quadrature.
pub(crate) const SERIES_ROUNDING_TOL: f64 = 1e-9;

impl SeriesSum {
    /// Rounding-error bound from cancellation among the terms.
    pub(crate) fn rounding_bound(&self) -> f64 {
        64.0 * f64::EPSILON * self.magnitude
    }

    /// Truncation plus rounding error.
    pub(crate) fn error_estimate(&self) -> f64 {
        self.tail + self.rounding_bound()
    }

    /// Finite and accurate to `SERIES_ROUNDING_TOL` relative.
    pub(crate) fn usable(&self) -> bool {
        self.value.is_finite() && self.error_estimate() <= SERIES_ROUNDING_TOL * self.value.abs()
    }
}

/// Term-wise integrated power series of the density in `y = I / A0`.
///
/// With pointing errors this is
/// `xi2 [ Σ_k Σ_x S_k y^(k+x̄) / (k+x̄)^j + T y^xi2 / xi2^j ]`, where `T` is the
/// residue of the `xi2` pole. Without, it is `Σ_k Σ_x a_k y^(k+x̄) / (k+x̄)^j`.
/// `j = 0` gives `y A0 f(I)`, `j = 1` the CDF, `j = 2` the log-excess kernel.
pub(crate) fn power_series(m: &ChannelModel, y: f64, j: i32, cfg: &SeriesConfig) -> Result<SeriesSum> {
    m.check_series(cfg)?;
    if !(y >= 0.0) {
        return Err(Error::domain("power_series", format!("y = {y}")));
    }
    if y == 0.0 {
        return Ok(SeriesSum {
            value: 0.0,
            terms: 0,
            converged: true,
            magnitude: 0.0,
            tail: 0.0,
        });
    }
    let TurbulenceParams { alpha, beta, .. } = m.turbulence;
    let ab = alpha * beta;
    let ln_y = y.ln();
    let ln_gg = ln_gamma_pair(&m.turbulence)?;
    let xi2 = m.pointing.map(|p| p.xi2);

    // base_k = π / sin(π(x̄ - x)) (x x̄ y)^(k+x̄) / (Γ(x) Γ(x̄) Γ(k - x + x̄ + 1) k!)
    let mut bases = [0.0_f64; 2];
    let pairs = [(alpha, beta), (beta, alpha)];
    for (slot, &(x, xb)) in bases.iter_mut().zip(pairs.iter()) {
        let s = PI / (PI * (xb - x)).sin();
        let (lg, sg) = ln_gamma_signed(1.0 - x + xb)
            .ok_or_else(|| Error::singularity("power_series", format!("Gamma({}) pole", 1.0 - x + xb)))?;
        let ln_mag = s.abs().ln() + xb * (ab.ln() + ln_y) - ln_gg - lg;
        *slot = s.signum() * sg * ln_mag.exp();
    }

    let mut sum = 0.0;
    let mut magnitude = 0.0;
    if let Some(xi2) = xi2 {
        // T = Γ(α - xi2) Γ(β - xi2) (αβ)^xi2 / (Γ(α) Γ(β))
        let (la, sa) = ln_gamma_signed(alpha - xi2)
            .ok_or_else(|| Error::singularity("power_series", "Gamma(alpha - xi2) pole"))?;
        let (lb, sb) = ln_gamma_signed(beta - xi2)
            .ok_or_else(|| Error::singularity("power_series", "Gamma(beta - xi2) pole"))?;
        let ln_t = la + lb + xi2 * ab.ln() - ln_gg + xi2 * ln_y - f64::from(j) * xi2.ln();
        let t = sa * sb * xi2 * ln_t.exp();
        sum += t;
        magnitude += t.abs();
    }

    let mut prev = f64::INFINITY;
    let mut before = f64::INFINITY;
    let mut last = f64::INFINITY;
    let mut terms = cfg.max_terms;
    let mut converged = false;
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        let mut combined = 0.0;
        for (base, &(x, xb)) in bases.iter_mut().zip(pairs.iter()) {
            let e = kf + xb;
            let weight = match xi2 {
                Some(xi2) => xi2 / (e - xi2),
                None => -1.0,
            };
            let term = *base * weight / e.powi(j);
            combined += term;
            magnitude += term.abs();
            *base *= ab * y / ((kf + 1.0) * (kf + 1.0 - x + xb));
        }
        sum += combined;
        let mag = combined.abs();
        last = mag;
        if k > 0 && mag <= prev && mag < cfg.convergence_tol * sum.abs() {
            terms = k + 1;
            converged = true;
            break;
        }
        before = prev;
        prev = mag;
    }
    if !sum.is_finite() {
        converged = false;
    }
    // The stopped term bounds the tail once the ratio is below one.
    let tail = if converged {
        last
    } else {
        let ratio = if before.is_finite() && before > 0.0 { last / before } else { f64::INFINITY };
        if ratio < 0.5 {
            last * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        }
    };
    Ok(SeriesSum {
        value: sum,
        terms,
        converged,
        magnitude,
        tail,
    })
}

/// Gamma-gamma density of `I_a`.
pub fn gg_pdf(ia: f64, t: &TurbulenceParams, cfg: &SeriesConfig) -> Result<f64> {
    if !(ia >= 0.0) {
        return Err(Error::domain("gg_pdf", format!("ia = {ia} must be nonnegative")));
    }
    Ok(GgDensity::new(t, cfg)?.pdf(ia))
}

/// Gamma-gamma CDF: the power series below 1 when it converges accurately,
/// quadrature otherwise.
pub fn gg_cdf(ia: f64, t: &TurbulenceParams, cfg: &SeriesConfig) -> Result<f64> {
    if !(ia >= 0.0) {
        return Err(Error::domain("gg_cdf", format!("ia = {ia} must be nonnegative")));
    }
    if ia == 0.0 {
        return Ok(0.0);
    }
    if ia.is_infinite() {
        return Ok(1.0);
    }
    let d = GgDensity::new(t, cfg)?;
    if ia <= 1.0 {
        let s = power_series(&ChannelModel::gamma_gamma(*t), ia, 1, cfg)?;
        if s.usable() {
            return Ok(s.value.clamp(0.0, 1.0));
        }
    }
    Ok(gg_cdf_quadrature(&d, ia)?.clamp(0.0, 1.0))
}

fn gg_cdf_quadrature(d: &GgDensity, ia: f64) -> Result<f64> {
    let q = QuadConfig::default();
    if ia <= 1.0 {
        let pts: Vec<f64> = [0.0, 0.25 * ia, 0.5 * ia, ia].to_vec();
        Ok(integrate_pieces(|x| d.pdf(x), &pts, &q)?.value)
    } else {
        let pts = [ia, 2.0 * ia, 4.0 * ia, 8.0 * ia];
        Ok(1.0 - integrate_to_infinity(|x| d.pdf(x), &pts, &q)?.value)
    }
}

/// Breakpoints in `u` at `I_a = y 2^n`, where `I_a(u) = y u^(-1/xi2)`.
fn tail_points(xi2: f64) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    for n in 1..64 {
        let u = (-(n as f64) * xi2 * 2f64.ln()).exp();
        if u < 1e-250 {
            break;
        }
        pts.push(u);
    }
    pts.sort_by(f64::total_cmp);
    pts
}

// f_I(I) = (1/A0) ∫_0^1 u^(-1/xi2) f_a(y u^(-1/xi2)) du
fn composite_pdf_quadrature(d: &GgDensity, y: f64, a0: f64, xi2: f64) -> Result<f64> {
    let inv = 1.0 / xi2;
    let g = |u: f64| {
        let s = u.powf(-inv);
        let p = d.pdf(y * s);
        if p == 0.0 {
            0.0
        } else {
            s * p
        }
    };
    Ok(integrate_pieces(g, &tail_points(xi2), &QuadConfig::default())?.value / a0)
}

// F_I(I) = F_a(y) + (1/xi2) ∫_0^1 I_a(u) f_a(I_a(u)) du
fn composite_cdf_quadrature(m: &ChannelModel, d: &GgDensity, y: f64, xi2: f64, cfg: &SeriesConfig) -> Result<f64> {
    let inv = 1.0 / xi2;
    let g = |u: f64| {
        let ia = y * u.powf(-inv);
        let p = d.pdf(ia);
        if p == 0.0 {
            0.0
        } else {
            ia * p
        }
    };
    let tail = integrate_pieces(g, &tail_points(xi2), &QuadConfig::default())?.value;
    Ok(gg_cdf(y, &m.turbulence, cfg)? + inv * tail)
}

/// Density of `I`.
///
/// For the composite model the series in `I / A0` is used up to `A0` when
/// it converges within `cfg.max_terms` and its cancellation error stays
/// below `1e-9` relative; otherwise the density is the one-dimensional
/// integral over the turbulence factor.
pub fn composite_pdf(i: f64, m: &ChannelModel, cfg: &SeriesConfig) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::domain("composite_pdf", format!("i = {i} must be nonnegative")));
    }
    let Some(p) = m.pointing else {
        return gg_pdf(i, &m.turbulence, cfg);
    };
    m.check_series(cfg)?;
    let d = GgDensity::new(&m.turbulence, cfg)?;
    if i.is_infinite() {
        return Ok(0.0);
    }
    if i == 0.0 {
        let lo = m.turbulence.alpha.min(m.turbulence.beta).min(p.xi2);
        if lo > 1.0 {
            return Ok(0.0);
        }
        if lo < 1.0 {
            return Ok(f64::INFINITY);
        }
        return composite_pdf(f64::MIN_POSITIVE, m, cfg);
    }
    let y = i / p.a0;
    if y <= 1.0 {
        let s = power_series(m, y, 0, cfg)?;
        if s.usable() {
            return Ok((s.value / (p.a0 * y)).max(0.0));
        }
    }
    composite_pdf_quadrature(&d, y, p.a0, p.xi2)
}

/// Distribution function of `I`, with the same series/quadrature split as
/// [`composite_pdf`].
pub fn composite_cdf(i: f64, m: &ChannelModel, cfg: &SeriesConfig) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::domain("composite_cdf", format!("i = {i} must be nonnegative")));
    }
    let Some(p) = m.pointing else {
        return gg_cdf(i, &m.turbulence, cfg);
    };
    m.check_series(cfg)?;
    if i == 0.0 {
        return Ok(0.0);
    }
    if i.is_infinite() {
        return Ok(1.0);
    }
    let y = i / p.a0;
    if y <= 1.0 {
        let s = power_series(m, y, 1, cfg)?;
        if s.usable() {
            return Ok(s.value.clamp(0.0, 1.0));
        }
    }
    let d = GgDensity::new(&m.turbulence, cfg)?;
    Ok(composite_cdf_quadrature(m, &d, y, p.xi2, cfg)?.clamp(0.0, 1.0))
}

/// `E[I^n] = Γ(α+n) Γ(β+n) / ((αβ)^n Γ(α) Γ(β)) * A0^n xi2 / (n + xi2)`.
pub fn moment(n: f64, m: &ChannelModel) -> Result<f64> {
    let TurbulenceParams { alpha, beta, .. } = m.turbulence;
    let floor = -alpha.min(beta).min(m.pointing.map_or(f64::INFINITY, |p| p.xi2));
    if !(n > floor) || !n.is_finite() {
        return Err(Error::domain("moment", format!("order {n} must exceed {floor}")));
    }
    let ln_t = ln_gamma(alpha + n)? + ln_gamma(beta + n)? - n * (alpha * beta).ln() - ln_gamma_pair(&m.turbulence)?;
    let pe = match m.pointing {
        None => 1.0,
        Some(p) => p.a0.powf(n) * p.xi2 / (n + p.xi2),
    };
    Ok(ln_t.exp() * pe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        cn2_for_rytov_variance, gg_params, pointing_from_geometry, IrradianceSampler, LinkGeometry, PointingModel,
        PointingParams,
    };
    use rand::SeedableRng;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SeriesConfig {
        SeriesConfig::default()
    }

    fn row(sigma_r2: f64) -> (ChannelModel, ChannelModel) {
        let base = LinkGeometry::reference(1e-14).unwrap();
        let g = base.with_cn2(cn2_for_rytov_variance(sigma_r2, &base).unwrap()).unwrap();
        let t = gg_params(sigma_r2).unwrap();
        let p = pointing_from_geometry(&g, PointingModel::FaridHranilovic).unwrap();
        (ChannelModel::gamma_gamma(t), ChannelModel::with_pointing(t, p))
    }

    fn all_models() -> Vec<ChannelModel> {
        [0.4, 1.0, 2.0]
            .iter()
            .flat_map(|&s| {
                let (a, b) = row(s);
                [a, b]
            })
            .collect()
    }

    fn integrate_pdf<F: Fn(f64) -> f64>(f: F, split: f64) -> f64 {
        let pts = [0.0, 0.25 * split, 0.5 * split, split, 2.0 * split, 4.0 * split, 8.0 * split];
        integrate_to_infinity(f, &pts, &QuadConfig::default()).unwrap().value
    }

    #[test]
    fn gg_pdf_normalized_with_unit_mean() {
        for s in [0.4, 1.0, 2.0] {
            let t = gg_params(s).unwrap();
            let mass = integrate_pdf(|x| gg_pdf(x, &t, &cfg()).unwrap(), 1.0);
            let mean = integrate_pdf(|x| x * gg_pdf(x, &t, &cfg()).unwrap(), 1.0);
            assert!((mass - 1.0).abs() < 1e-8, "mass {mass} at {s}");
            assert!((mean - 1.0).abs() < 1e-8, "mean {mean} at {s}");
        }
    }

    #[test]
    fn gg_pdf_matches_frozen_values() {
        let strong = TurbulenceParams::new(3.9929, 1.7018).unwrap();
        let v = gg_pdf(1.0, &strong, &cfg()).unwrap();
        assert!((v - 0.40031395995207813).abs() < 1e-12);
        let weak = TurbulenceParams::new(6.8755, 5.3384).unwrap();
        let v = gg_pdf(0.3, &weak, &cfg()).unwrap();
        assert!((v - 0.49208373694016695).abs() < 1e-12);
        assert_eq!(gg_pdf(0.0, &weak, &cfg()).unwrap(), 0.0);
        assert!(gg_pdf(-1.0, &weak, &cfg()).is_err());
        let integer = TurbulenceParams::new(4.0, 2.0).unwrap();
        assert!(gg_pdf(1.0, &integer, &cfg()).is_err());
    }

    #[test]
    fn gg_cdf_series_and_quadrature_agree() {
        for s in [0.4, 1.0, 2.0] {
            let t = gg_params(s).unwrap();
            let d = GgDensity::new(&t, &cfg()).unwrap();
            for ia in [0.05, 0.3, 0.7, 1.0] {
                let series = power_series(&ChannelModel::gamma_gamma(t), ia, 1, &SeriesConfig::high_accuracy()).unwrap();
                let q = gg_cdf_quadrature(&d, ia).unwrap();
                assert!(series.converged);
                let err = (series.value - q).abs();
                assert!(err <= series.rounding_bound() + 1e-12, "{s} {ia}: {} vs {q}", series.value);
                if series.usable() {
                    assert!(err <= 1e-9 * q);
                }
            }
            assert!(gg_cdf(50.0, &t, &cfg()).unwrap() > 0.999_999);
        }
    }

    #[test]
    fn series_is_usable_away_from_the_aperture_edge() {
        for m in all_models() {
            for y in [0.01, 0.1, 0.2] {
                for j in 0..3 {
                    assert!(power_series(&m, y, j, &cfg()).unwrap().usable(), "y={y} j={j}");
                }
            }
        }
    }

    // Nested-quadrature values of the integral form, computed to 40 digits.
    const WEAK_ORACLE: [(f64, f64, f64); 5] = [
        (0.1, 0.36877039808471372, 0.0094206161456905829),
        (0.5, 1.4886730476658044, 0.35647901434850297),
        (1.0, 0.71473085251906273, 0.75645134721797709),
        (1.5, 0.25116881229627123, 0.91705611623018439),
        (3.0, 0.0098234036349626514, 0.9965252364319263),
    ];
    const STRONG_ORACLE: [(f64, f64, f64); 5] = [
        (0.1, 2.9803527079100791, 0.063311502876692618),
        (0.5, 2.4898401030160321, 0.42766854912984912),
        (1.0, 1.2503413548306744, 0.70082750872431822),
        (1.5, 0.63541528145339009, 0.83781656750204807),
        (3.0, 0.10530522612852744, 0.96824141711176843),
    ];

    #[test]
    fn composite_matches_integral_form() {
        for (s, table) in [(0.4, WEAK_ORACLE), (2.0, STRONG_ORACLE)] {
            let (_, m) = row(s);
            let a0 = m.pointing.unwrap().a0;
            for (r, pdf, cdf) in table {
                let f = composite_pdf(r * a0, &m, &cfg()).unwrap();
                let c = composite_cdf(r * a0, &m, &cfg()).unwrap();
                assert!((f - pdf).abs() <= 1e-6 * pdf, "pdf {s} {r}: {f} vs {pdf}");
                assert!((c - cdf).abs() <= 1e-6 * cdf, "cdf {s} {r}: {c} vs {cdf}");
            }
        }
    }

    #[test]
    fn series_and_quadrature_paths_agree() {
        for m in all_models().into_iter().filter(|m| m.pointing.is_some()) {
            let p = m.pointing.unwrap();
            let d = GgDensity::new(&m.turbulence, &cfg()).unwrap();
            for y in [0.05, 0.2, 0.5, 0.8, 1.0] {
                let s = power_series(&m, y, 0, &SeriesConfig::high_accuracy()).unwrap();
                let q = composite_pdf_quadrature(&d, y, p.a0, p.xi2).unwrap() * p.a0 * y;
                let err = (s.value - q).abs();
                assert!(err <= s.rounding_bound() + 1e-12 * q, "y={y}: {} vs {q}", s.value);
                if s.usable() {
                    assert!(err <= 1e-9 * q);
                }
            }
        }
    }

    #[test]
    fn composite_pdf_normalized() {
        for m in all_models() {
            let a0 = m.a0();
            let mass = integrate_pdf(|x| composite_pdf(x, &m, &cfg()).unwrap(), a0);
            assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
        }
    }

    #[test]
    fn moments_match_quadrature() {
        for m in all_models() {
            let a0 = m.a0();
            assert!((moment(0.0, &m).unwrap() - 1.0).abs() < 1e-14);
            if let Some(p) = m.pointing {
                let m1 = moment(1.0, &m).unwrap();
                assert!((m1 - p.a0 * p.xi2 / (p.xi2 + 1.0)).abs() < 1e-13);
            } else {
                assert!((moment(1.0, &m).unwrap() - 1.0).abs() < 1e-13);
            }
            for n in [1, 2, 3] {
                let q = integrate_pdf(|x| x.powi(n) * composite_pdf(x, &m, &cfg()).unwrap(), a0);
                let c = moment(n as f64, &m).unwrap();
                assert!((q - c).abs() <= 1e-5 * c, "n={n}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn cdf_is_derivative_consistent_and_saturates() {
        for m in all_models() {
            let a0 = m.a0();
            let (i, h) = (0.3 * a0, 1e-5);
            let fd = (composite_cdf(i + h, &m, &cfg()).unwrap() - composite_cdf(i - h, &m, &cfg()).unwrap()) / (2.0 * h);
            let f = composite_pdf(i, &m, &cfg()).unwrap();
            assert!((fd - f).abs() < 1e-5, "{fd} vs {f}");
            assert_eq!(composite_cdf(0.0, &m, &cfg()).unwrap(), 0.0);
            let mut prev = 0.0;
            for k in 1..=60 {
                let c = composite_cdf(0.1 * k as f64 * a0, &m, &cfg()).unwrap();
                assert!(c >= prev - 1e-12, "non-monotone at {k}");
                prev = c;
            }
            assert!(composite_cdf(10.0 * a0, &m, &cfg()).unwrap() >= 0.99);
        }
    }

    #[test]
    fn pointing_limit_collapses_to_turbulence_only() {
        for s in [0.4, 2.0] {
            let t = gg_params(s).unwrap();
            let gg = ChannelModel::gamma_gamma(t);
            let pe = ChannelModel::with_pointing(t, PointingParams::new(1.0 - 1e-9, 1e6).unwrap()).regularized(&cfg());
            let mut worst: f64 = 0.0;
            for k in 0..=100 {
                let i = 0.05 * k as f64;
                let d = composite_pdf(i, &pe, &cfg()).unwrap() - composite_pdf(i, &gg, &cfg()).unwrap();
                worst = worst.max(d.abs());
            }
            assert!(worst <= 1e-3, "max-norm {worst}");
            for i in [0.1, 0.5, 1.5] {
                let a = composite_pdf(i, &pe, &cfg()).unwrap();
                let b = composite_pdf(i, &gg, &cfg()).unwrap();
                assert!((a - b).abs() <= 1e-4 * b.max(1e-3));
            }
        }
    }

    #[test]
    fn singular_parameters_are_reported() {
        let t = TurbulenceParams::new(3.5, 2.25).unwrap();
        let m = ChannelModel::with_pointing(t, PointingParams::new(0.5, 5.25).unwrap());
        assert!(matches!(composite_pdf(0.2, &m, &cfg()), Err(Error::Singularity { .. })));
        assert!(composite_pdf(0.2, &m.regularized(&cfg()), &cfg()).is_ok());
    }

    #[test]
    fn sampled_moments_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in all_models() {
            let s = IrradianceSampler::new(&m).unwrap();
            let n = 1_000_000;
            let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
            for _ in 0..n {
                let (ia, ip) = s.sample_parts(&mut rng);
                let i = ia * ip;
                assert!(i <= m.a0() * ia);
                s1 += i;
                s2 += i * i;
                s4 += i.powi(4);
            }
            let nf = n as f64;
            let (m1, m2) = (s1 / nf, s2 / nf);
            let se1 = ((m2 - m1 * m1) / nf).sqrt();
            let se2 = ((s4 / nf - m2 * m2) / nf).sqrt();
            assert!((m1 - moment(1.0, &m).unwrap()).abs() < 5.0 * se1);
            assert!((m2 - moment(2.0, &m).unwrap()).abs() < 5.0 * se2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn cdf_is_monotone_and_pdf_nonnegative(
            row in 0usize..3,
            pe in proptest::bool::ANY,
            x in 1e-3f64..5.0,
            dx in 1e-3f64..1.0,
        ) {
            let s = [0.4, 1.0, 2.0][row];
            let t = gg_params(s).unwrap();
            let m = if pe {
                let base = LinkGeometry::reference(1e-14).unwrap();
                let g = base.with_cn2(cn2_for_rytov_variance(s, &base).unwrap()).unwrap();
                ChannelModel::with_pointing(t, pointing_from_geometry(&g, PointingModel::FaridHranilovic).unwrap())
            } else {
                ChannelModel::gamma_gamma(t)
            };
            let lo = composite_cdf(x, &m, &cfg()).unwrap();
            let hi = composite_cdf(x + dx, &m, &cfg()).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            prop_assert!(hi >= lo - 1e-12);
            prop_assert!(composite_pdf(x, &m, &cfg()).unwrap() >= 0.0);
        }
    }
}
