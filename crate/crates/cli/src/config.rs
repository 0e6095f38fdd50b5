//! Flat `key = value` run configuration with dotted section prefixes.

use std::fmt::Write as _;
use std::path::PathBuf;

use fso_adapt::adapt::{BerPolicy, ConstellationSet};
use fso_adapt::channel::{
    cn2_for_rytov_variance, gg_params, pointing_from_geometry, rytov_variance, ChannelModel, LinkGeometry,
    PointingModel,
};
use fso_adapt::mc::McConfig;
use fso_adapt::specfun::SeriesConfig;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    Line {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{key}: {message}")]
    Field { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Turbulence {
    Cn2(f64),
    RytovVariance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub length_m: f64,
    pub wavelength_m: f64,
    pub tx_waist_m: f64,
    pub rx_aperture_radius_m: f64,
    pub turbulence: Turbulence,
    pub pointing_enabled: bool,
    pub sigma_e_m: f64,
    pub pointing_model: PointingModel,
    pub ber_target: f64,
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub constellations: Vec<u64>,
    pub series_max_terms: usize,
    pub series_singularity_eps: f64,
    pub series_convergence_tol: f64,
    pub mc_samples: u64,
    pub mc_seed: u64,
    pub mc_workers: usize,
    pub required_targets: Vec<f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    /// Weak-turbulence row of the reference link, pointing errors on.
    fn default() -> Self {
        let series = SeriesConfig::default();
        RunConfig {
            length_m: 1000.0 / 3.0,
            wavelength_m: 1550e-9,
            tx_waist_m: 0.015,
            rx_aperture_radius_m: 0.02,
            turbulence: Turbulence::RytovVariance(0.4),
            pointing_enabled: true,
            sigma_e_m: 0.01,
            pointing_model: PointingModel::FaridHranilovic,
            ber_target: 1e-3,
            snr_start_db: 0.0,
            snr_stop_db: 30.0,
            snr_step_db: 1.0,
            constellations: ConstellationSet::default().sizes().to_vec(),
            series_max_terms: series.max_terms,
            series_singularity_eps: series.singularity_eps,
            series_convergence_tol: series.convergence_tol,
            mc_samples: McConfig::FIGURE_SAMPLES,
            mc_seed: 1,
            mc_workers: McConfig::DEFAULT_WORKERS,
            required_targets: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            output_path: None,
        }
    }
}

/// Every accepted key, in emission order.
pub const KEYS: [&str; 22] = [
    "geometry.length_m",
    "geometry.wavelength_m",
    "geometry.tx_waist_m",
    "geometry.rx_aperture_radius_m",
    "turbulence.sigma_r2",
    "turbulence.cn2",
    "pointing.enabled",
    "pointing.sigma_e_m",
    "pointing.model",
    "ber.target",
    "snr.start_db",
    "snr.stop_db",
    "snr.step_db",
    "constellations",
    "series.max_terms",
    "series.singularity_eps",
    "series.convergence_tol",
    "mc.samples",
    "mc.seed",
    "mc.workers",
    "required.targets",
    "output.path",
];

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"))
}

fn parse_int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("`{v}` is not a nonnegative integer"))
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

pub fn parse_pointing_model(v: &str) -> Result<PointingModel, String> {
    match v {
        "farid-hranilovic" => Ok(PointingModel::FaridHranilovic),
        "modified-uniform" => Ok(PointingModel::ModifiedUniform),
        _ => Err(format!("`{v}` is not one of farid-hranilovic, modified-uniform")),
    }
}

pub fn pointing_model_name(m: PointingModel) -> &'static str {
    match m {
        PointingModel::FaridHranilovic => "farid-hranilovic",
        PointingModel::ModifiedUniform => "modified-uniform",
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key. Errors carry no location.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "geometry.length_m" => self.length_m = parse_f64(v)?,
            "geometry.wavelength_m" => self.wavelength_m = parse_f64(v)?,
            "geometry.tx_waist_m" => self.tx_waist_m = parse_f64(v)?,
            "geometry.rx_aperture_radius_m" => self.rx_aperture_radius_m = parse_f64(v)?,
            "turbulence.sigma_r2" => self.turbulence = Turbulence::RytovVariance(parse_f64(v)?),
            "turbulence.cn2" => self.turbulence = Turbulence::Cn2(parse_f64(v)?),
            "pointing.enabled" => self.pointing_enabled = parse_bool(v)?,
            "pointing.sigma_e_m" => self.sigma_e_m = parse_f64(v)?,
            "pointing.model" => self.pointing_model = parse_pointing_model(v)?,
            "ber.target" => self.ber_target = parse_f64(v)?,
            "snr.start_db" => self.snr_start_db = parse_f64(v)?,
            "snr.stop_db" => self.snr_stop_db = parse_f64(v)?,
            "snr.step_db" => self.snr_step_db = parse_f64(v)?,
            "constellations" => self.constellations = parse_list(v, parse_int)?,
            "series.max_terms" => self.series_max_terms = parse_int(v)?,
            "series.singularity_eps" => self.series_singularity_eps = parse_f64(v)?,
            "series.convergence_tol" => self.series_convergence_tol = parse_f64(v)?,
            "mc.samples" => self.mc_samples = parse_int(v)?,
            "mc.seed" => self.mc_seed = parse_int(v)?,
            "mc.workers" => self.mc_workers = parse_int(v)?,
            "required.targets" => self.required_targets = parse_list(v, parse_f64)?,
            "output.path" => self.output_path = (!v.is_empty()).then(|| PathBuf::from(v)),
            _ => return Err(format!("unknown key `{key}`; known keys: {}", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Applies `key=value` lines. `#` starts a comment; blank lines are
    /// skipped; a key may appear once per source.
    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        let mut seen: Vec<&str> = Vec::new();
        let mut sources_of_turbulence = 0;
        for (n, raw) in text.lines().enumerate() {
            let err = |message: String| ConfigError::Line {
                source_name: source_name.to_string(),
                line: n + 1,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found `{line}`")))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            if key.starts_with("turbulence.") {
                sources_of_turbulence += 1;
                if sources_of_turbulence > 1 {
                    return Err(err("give only one of turbulence.sigma_r2 and turbulence.cn2".into()));
                }
            }
            seen.push(key);
            self.set(key, value).map_err(|m| err(format!("{key}: {m}")))?;
        }
        Ok(())
    }

    /// Applies a `--set key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (key, value) = kv.split_once('=').ok_or_else(|| ConfigError::Field {
            key: kv.to_string(),
            message: "expected key=value".into(),
        })?;
        self.set(key.trim(), value).map_err(|message| ConfigError::Field {
            key: key.trim().to_string(),
            message,
        })
    }

    /// Canonical text form; parses back to an identical configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("geometry.length_m", self.length_m.to_string());
        put("geometry.wavelength_m", self.wavelength_m.to_string());
        put("geometry.tx_waist_m", self.tx_waist_m.to_string());
        put("geometry.rx_aperture_radius_m", self.rx_aperture_radius_m.to_string());
        match self.turbulence {
            Turbulence::RytovVariance(v) => put("turbulence.sigma_r2", v.to_string()),
            Turbulence::Cn2(v) => put("turbulence.cn2", v.to_string()),
        }
        put("pointing.enabled", self.pointing_enabled.to_string());
        put("pointing.sigma_e_m", self.sigma_e_m.to_string());
        put("pointing.model", pointing_model_name(self.pointing_model).into());
        put("ber.target", self.ber_target.to_string());
        put("snr.start_db", self.snr_start_db.to_string());
        put("snr.stop_db", self.snr_stop_db.to_string());
        put("snr.step_db", self.snr_step_db.to_string());
        put("constellations", join(&self.constellations));
        put("series.max_terms", self.series_max_terms.to_string());
        put("series.singularity_eps", self.series_singularity_eps.to_string());
        put("series.convergence_tol", self.series_convergence_tol.to_string());
        put("mc.samples", self.mc_samples.to_string());
        put("mc.seed", self.mc_seed.to_string());
        put("mc.workers", self.mc_workers.to_string());
        put("required.targets", join(&self.required_targets));
        if let Some(p) = &self.output_path {
            put("output.path", p.display().to_string());
        }
        s
    }

    fn field<T>(key: &str, r: fso_adapt::Result<T>) -> Result<T, ConfigError> {
        r.map_err(|e| ConfigError::Field {
            key: key.to_string(),
            message: e.to_string(),
        })
    }

    /// Checks every field and cross-field invariant.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: String| {
            Err(ConfigError::Field {
                key: key.into(),
                message,
            })
        };
        self.geometry()?;
        self.model()?;
        Self::field("ber.target", BerPolicy::new(self.ber_target))?;
        if !(self.snr_step_db > 0.0 && self.snr_step_db.is_finite()) {
            return bad("snr.step_db", format!("{} must be positive", self.snr_step_db));
        }
        if !(self.snr_start_db.is_finite() && self.snr_stop_db.is_finite() && self.snr_start_db <= self.snr_stop_db) {
            return bad(
                "snr.start_db",
                format!("grid [{}, {}] must be finite with start <= stop", self.snr_start_db, self.snr_stop_db),
            );
        }
        if self.snr_grid().len() > 100_000 {
            return bad("snr.step_db", "grid has more than 100000 points".into());
        }
        Self::field("constellations", ConstellationSet::new(self.constellations.clone()))?;
        Self::field("series", self.series())?;
        Self::field("mc", McConfig::new(self.mc_samples, self.mc_seed, self.mc_workers))?;
        if self.required_targets.is_empty() || self.required_targets.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("required.targets", "targets must be positive".into());
        }
        Ok(())
    }

    /// Link geometry with `C_n^2` resolved from the Rytov variance if needed.
    pub fn geometry(&self) -> Result<LinkGeometry, ConfigError> {
        let probe = Self::field(
            "geometry",
            LinkGeometry::new(
                self.length_m,
                self.wavelength_m,
                self.tx_waist_m,
                self.rx_aperture_radius_m,
                1e-14,
                self.sigma_e_m,
            ),
        )?;
        let cn2 = match self.turbulence {
            Turbulence::Cn2(c) => c,
            Turbulence::RytovVariance(s) => Self::field("turbulence.sigma_r2", cn2_for_rytov_variance(s, &probe))?,
        };
        Self::field("turbulence.cn2", probe.with_cn2(cn2))
    }

    pub fn rytov_variance(&self) -> Result<f64, ConfigError> {
        Ok(match self.turbulence {
            Turbulence::RytovVariance(s) => s,
            Turbulence::Cn2(_) => rytov_variance(&self.geometry()?),
        })
    }

    pub fn model(&self) -> Result<ChannelModel, ConfigError> {
        let t = Self::field("turbulence", gg_params(self.rytov_variance()?))?;
        if !self.pointing_enabled {
            return Ok(ChannelModel::gamma_gamma(t));
        }
        let p = Self::field("pointing", pointing_from_geometry(&self.geometry()?, self.pointing_model))?;
        Ok(ChannelModel::with_pointing(t, p))
    }

    /// The same link with the Rytov variance and pointing flag replaced.
    pub fn variant(&self, sigma_r2: f64, pointing: bool) -> RunConfig {
        RunConfig {
            turbulence: Turbulence::RytovVariance(sigma_r2),
            pointing_enabled: pointing,
            ..self.clone()
        }
    }

    pub fn policy(&self) -> Result<BerPolicy, ConfigError> {
        Self::field("ber.target", BerPolicy::new(self.ber_target))
    }

    pub fn series(&self) -> fso_adapt::Result<SeriesConfig> {
        SeriesConfig::new(self.series_max_terms, self.series_singularity_eps, self.series_convergence_tol)
    }

    pub fn constellation_set(&self) -> Result<ConstellationSet, ConfigError> {
        Self::field("constellations", ConstellationSet::new(self.constellations.clone()))
    }

    pub fn mc(&self) -> Result<McConfig, ConfigError> {
        Self::field("mc", McConfig::new(self.mc_samples, self.mc_seed, self.mc_workers))
    }

    /// `start, start + step, ...` up to `stop` (inclusive within 1e-9 dB).
    pub fn snr_grid(&self) -> Vec<f64> {
        let n = ((self.snr_stop_db - self.snr_start_db) / self.snr_step_db + 1e-9).floor() as usize;
        (0..=n).map(|k| self.snr_start_db + k as f64 * self.snr_step_db).collect()
    }
}
