//! Link geometry, fading parameters and irradiance statistics.
//!
//! The irradiance is `I = I_a * I_p`. `I_a` is gamma-gamma with unit mean,
//! `I_p` has density `xi2 * u^(xi2-1) / A0^xi2` on `[0, A0]`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::specfun::{erf, ln_gamma, GammaSampler, SeriesConfig};

pub(crate) mod conditional;
mod density;
mod expect;

pub use density::{composite_cdf, composite_pdf, gg_cdf, gg_pdf, moment};
pub(crate) use density::power_series;

/// Physical description of a horizontal link. All lengths in metres,
/// `cn2` in m^(-2/3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub length_m: f64,
    pub wavelength_m: f64,
    pub tx_waist_m: f64,
    pub rx_aperture_radius_m: f64,
    pub cn2: f64,
    pub jitter_sigma_m: f64,
}

impl LinkGeometry {
    pub fn new(
        length_m: f64,
        wavelength_m: f64,
        tx_waist_m: f64,
        rx_aperture_radius_m: f64,
        cn2: f64,
        jitter_sigma_m: f64,
    ) -> Result<Self> {
        let fields = [
            ("length_m", length_m),
            ("wavelength_m", wavelength_m),
            ("tx_waist_m", tx_waist_m),
            ("rx_aperture_radius_m", rx_aperture_radius_m),
            ("cn2", cn2),
            ("jitter_sigma_m", jitter_sigma_m),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be positive and finite")));
            }
        }
        if wavelength_m >= 1e-5 {
            return Err(Error::invalid("wavelength_m", format!("{wavelength_m} m is not an optical wavelength")));
        }
        if length_m < 1.0 {
            return Err(Error::invalid("length_m", format!("{length_m} m is below 1 m")));
        }
        Ok(LinkGeometry {
            length_m,
            wavelength_m,
            tx_waist_m,
            rx_aperture_radius_m,
            cn2,
            jitter_sigma_m,
        })
    }

    /// 1/3 km at 1550 nm, 15 mm waist, 20 mm aperture radius, 10 mm jitter.
    pub fn reference(cn2: f64) -> Result<Self> {
        LinkGeometry::new(1000.0 / 3.0, 1550e-9, 0.015, 0.02, cn2, 0.01)
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength_m
    }

    pub fn with_cn2(&self, cn2: f64) -> Result<Self> {
        LinkGeometry::new(
            self.length_m,
            self.wavelength_m,
            self.tx_waist_m,
            self.rx_aperture_radius_m,
            cn2,
            self.jitter_sigma_m,
        )
    }
}

/// `sigma_R^2 = 1.23 Cn2 k^(7/6) L^(11/6)`.
pub fn rytov_variance(geom: &LinkGeometry) -> f64 {
    1.23 * geom.cn2 * geom.wave_number().powf(7.0 / 6.0) * geom.length_m.powf(11.0 / 6.0)
}

/// The `Cn2` giving Rytov variance `sigma_r2` on `geom`'s path and wavelength.
pub fn cn2_for_rytov_variance(sigma_r2: f64, geom: &LinkGeometry) -> Result<f64> {
    if !(sigma_r2 > 0.0 && sigma_r2.is_finite()) {
        return Err(Error::domain("cn2_for_rytov_variance", format!("sigma_R^2 = {sigma_r2}")));
    }
    let unit = rytov_variance(&geom.with_cn2(1.0)?);
    Ok(sigma_r2 / unit)
}

/// Gamma-gamma shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    pub alpha: f64,
    pub beta: f64,
    /// Present when the parameters were derived from a Rytov variance.
    pub rytov_var: Option<f64>,
}

impl TurbulenceParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be positive and finite")));
            }
        }
        Ok(TurbulenceParams {
            alpha,
            beta,
            rytov_var: None,
        })
    }
}

/// Plane-wave gamma-gamma parameters for Rytov variance `sigma_r2`.
pub fn gg_params(sigma_r2: f64) -> Result<TurbulenceParams> {
    if !(sigma_r2 > 0.0 && sigma_r2.is_finite()) {
        return Err(Error::domain("gg_params", format!("sigma_R^2 = {sigma_r2} must be positive")));
    }
    let s12 = sigma_r2.powf(1.2);
    let alpha = 1.0 / (0.49 * sigma_r2 / (1.0 + 1.11 * s12).powf(7.0 / 6.0)).exp_m1();
    let beta = 1.0 / (0.51 * sigma_r2 / (1.0 + 0.69 * s12).powf(5.0 / 6.0)).exp_m1();
    Ok(TurbulenceParams {
        alpha,
        beta,
        rytov_var: Some(sigma_r2),
    })
}

/// Gaussian-beam spread at the receiver plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpread {
    pub w_l: f64,
    pub epsilon: f64,
    pub rho0: f64,
}

/// `w_L = w0 sqrt(1 + eps (lambda L / (pi w0^2))^2)`, `eps = 1 + 2 w0^2 / rho0^2`,
/// `rho0 = (1.46 Cn2 k^2 L)^(-3/5)`.
pub fn beam_spread(geom: &LinkGeometry) -> BeamSpread {
    let k = geom.wave_number();
    let w0 = geom.tx_waist_m;
    let rho0 = (1.46 * geom.cn2 * k * k * geom.length_m).powf(-0.6);
    let epsilon = 1.0 + 2.0 * w0 * w0 / (rho0 * rho0);
    let z = geom.wavelength_m * geom.length_m / (PI * w0 * w0);
    BeamSpread {
        w_l: w0 * (1.0 + epsilon * z * z).sqrt(),
        epsilon,
        rho0,
    }
}

pub fn beam_waist_at_rx(geom: &LinkGeometry) -> f64 {
    beam_spread(geom).w_l
}

/// How `(A0, xi2)` are derived from aperture, beam waist and jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointingModel {
    /// `A0 = 1 - exp(-2 rA^2 / wL^2)`, `xi2 = rA^2 / (2 sigma_e^2 A0)`.
    ModifiedUniform,
    /// `A0 = erf(v)^2`, `xi2 = wLeq^2 / (4 sigma_e^2)` with
    /// `v = sqrt(pi) rA / (sqrt(2) wL)`. Reproduces the reference parameter table.
    #[default]
    FaridHranilovic,
}

/// Pointing-error shaping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointingParams {
    pub a0: f64,
    pub xi2: f64,
    pub rx_beam_waist_wl: Option<f64>,
    pub epsilon: Option<f64>,
    pub rho0: Option<f64>,
}

impl PointingParams {
    /// Parameters given directly. `a0` in `(0, 1]`, `xi2 > 0`.
    pub fn new(a0: f64, xi2: f64) -> Result<Self> {
        if !(a0 > 0.0 && a0 <= 1.0) {
            return Err(Error::invalid("a0", format!("{a0} must lie in (0, 1]")));
        }
        if !(xi2 > 0.0 && xi2.is_finite()) {
            return Err(Error::invalid("xi2", format!("{xi2} must be positive and finite")));
        }
        Ok(PointingParams {
            a0,
            xi2,
            rx_beam_waist_wl: None,
            epsilon: None,
            rho0: None,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi2.sqrt()
    }
}

fn check_positive(pairs: &[(&'static str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("{v} must be positive and finite")));
        }
    }
    Ok(())
}

/// Modified intensity-uniform parameters. `xi2 * a0 = rA^2 / (2 sigma_e^2)`.
pub fn pointing_params(ra: f64, wl: f64, sigma_e: f64) -> Result<PointingParams> {
    check_positive(&[("rx_aperture_radius", ra), ("beam_waist", wl), ("jitter_sigma", sigma_e)])?;
    let a0 = -(-2.0 * ra * ra / (wl * wl)).exp_m1();
    let mut p = PointingParams::new(a0, ra * ra / (2.0 * sigma_e * sigma_e * a0))?;
    p.rx_beam_waist_wl = Some(wl);
    Ok(p)
}

/// Equivalent-beam-width parameters.
pub fn pointing_params_farid_hranilovic(ra: f64, wl: f64, sigma_e: f64) -> Result<PointingParams> {
    check_positive(&[("rx_aperture_radius", ra), ("beam_waist", wl), ("jitter_sigma", sigma_e)])?;
    let v = PI.sqrt() * ra / (2.0_f64.sqrt() * wl);
    let ev = erf(v);
    let wl_eq2 = wl * wl * PI.sqrt() * ev / (2.0 * v * (-v * v).exp());
    let mut p = PointingParams::new(ev * ev, wl_eq2 / (4.0 * sigma_e * sigma_e))?;
    p.rx_beam_waist_wl = Some(wl);
    Ok(p)
}

/// Beam spread followed by the selected pointing model, with `epsilon` and
/// `rho0` recorded.
pub fn pointing_from_geometry(geom: &LinkGeometry, model: PointingModel) -> Result<PointingParams> {
    let spread = beam_spread(geom);
    let (ra, se) = (geom.rx_aperture_radius_m, geom.jitter_sigma_m);
    let mut p = match model {
        PointingModel::ModifiedUniform => pointing_params(ra, spread.w_l, se)?,
        PointingModel::FaridHranilovic => pointing_params_farid_hranilovic(ra, spread.w_l, se)?,
    };
    p.epsilon = Some(spread.epsilon);
    p.rho0 = Some(spread.rho0);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    GgOnly,
    GgPointing,
}

/// Fading law of `I`. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub turbulence: TurbulenceParams,
    pub pointing: Option<PointingParams>,
}

impl ChannelModel {
    pub fn gamma_gamma(turbulence: TurbulenceParams) -> Self {
        ChannelModel {
            turbulence,
            pointing: None,
        }
    }

    pub fn with_pointing(turbulence: TurbulenceParams, pointing: PointingParams) -> Self {
        ChannelModel {
            turbulence,
            pointing: Some(pointing),
        }
    }

    pub fn variant(&self) -> Variant {
        match self.pointing {
            None => Variant::GgOnly,
            Some(_) => Variant::GgPointing,
        }
    }

    /// `A0`, or 1 for the turbulence-only model.
    pub fn a0(&self) -> f64 {
        self.pointing.map_or(1.0, |p| p.a0)
    }

    /// Whether every series denominator stays at least `cfg.singularity_eps`
    /// from zero.
    pub fn check_series(&self, cfg: &SeriesConfig) -> Result<()> {
        let TurbulenceParams { alpha, beta, .. } = self.turbulence;
        let nu = alpha - beta;
        if (nu - nu.round()).abs() < cfg.singularity_eps {
            return Err(Error::singularity(
                "series",
                format!("alpha - beta = {nu} is within {} of an integer", cfg.singularity_eps),
            ));
        }
        if let Some(p) = self.pointing {
            if let Some(why) = pointing_singularity(alpha, beta, p.xi2, cfg) {
                return Err(Error::singularity("series", why));
            }
        }
        Ok(())
    }

    /// Moves `beta` and `xi2` off the measure-zero parameter sets where a
    /// series coefficient has a vanishing denominator.
    pub fn regularized(&self, cfg: &SeriesConfig) -> Self {
        let mut out = *self;
        let eps = cfg.singularity_eps;
        let nu = out.turbulence.alpha - out.turbulence.beta;
        if (nu - nu.round()).abs() < eps {
            out.turbulence.beta += 2.0 * eps;
        }
        if let Some(p) = out.pointing.as_mut() {
            let (a, b) = (out.turbulence.alpha, out.turbulence.beta);
            while pointing_singularity(a, b, p.xi2, cfg).is_some() {
                p.xi2 += eps;
            }
        }
        out
    }
}

fn pointing_singularity(alpha: f64, beta: f64, xi2: f64, cfg: &SeriesConfig) -> Option<String> {
    let eps = cfg.singularity_eps;
    for x in [alpha, beta] {
        // 1 / (k + x - xi2) for retained k.
        for k in 0..cfg.max_terms {
            if (k as f64 + x - xi2).abs() < eps {
                return Some(format!("k + {x} - xi2 vanishes at k = {k} (xi2 = {xi2})"));
            }
        }
        // Gamma(x - xi2) in the residue term.
        let d = xi2 - x;
        if d > -eps && (d - d.round()).abs() < eps {
            return Some(format!("Gamma({x} - xi2) has a pole (xi2 = {xi2})"));
        }
    }
    None
}

/// Draws `I` for one model.
#[derive(Debug, Clone, Copy)]
pub struct IrradianceSampler {
    ga: GammaSampler,
    gb: GammaSampler,
    pointing: Option<(f64, f64)>,
}

impl IrradianceSampler {
    pub fn new(m: &ChannelModel) -> Result<Self> {
        let TurbulenceParams { alpha, beta, .. } = m.turbulence;
        Ok(IrradianceSampler {
            ga: GammaSampler::new(alpha, 1.0 / alpha)?,
            gb: GammaSampler::new(beta, 1.0 / beta)?,
            pointing: m.pointing.map(|p| (p.a0, 1.0 / p.xi2)),
        })
    }

    /// `(I_a, I_p)`; `I_p = 1` for the turbulence-only model.
    #[inline]
    pub fn sample_parts<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let ia = self.ga.sample(rng) * self.gb.sample(rng);
        let ip = match self.pointing {
            None => 1.0,
            Some((a0, inv_xi2)) => a0 * rng.random::<f64>().powf(inv_xi2),
        };
        (ia, ip)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (ia, ip) = self.sample_parts(rng);
        ia * ip
    }
}

pub fn sample_irradiance<R: Rng + ?Sized>(sampler: &IrradianceSampler, rng: &mut R) -> f64 {
    sampler.sample(rng)
}

/// `ln Γ(α) + ln Γ(β)`, shared by several closed forms.
pub(crate) fn ln_gamma_pair(t: &TurbulenceParams) -> Result<f64> {
    Ok(ln_gamma(t.alpha)? + ln_gamma(t.beta)?)
}
