//! Subcommand bodies. Each returns the tables it produced and whether any
//! numerical evaluation failed.

use rayon::prelude::*;

use fso_adapt::adapt::{
    adaptive_required_snr_with_config, ase_limit, discrete_ase, fixed_required_snr, high_snr_ase, pointing_penalty,
    SnrSpec,
};
use fso_adapt::channel::{beam_spread, ChannelModel};
use fso_adapt::mc::{estimate_ase_mc, simulate_policy, AdaptivePolicy, McConfig, PolicyEstimate};
use fso_adapt::specfun::SeriesConfig;

use crate::config::{pointing_model_name, RunConfig};
use crate::output::{fixed, fixed_or_nan, Table};
use crate::CliError;

/// Turbulence rows of the reference link: label and Rytov variance.
pub const ROWS: [(&str, f64); 3] = [("weak", 0.4), ("moderate", 1.0), ("strong", 2.0)];

pub struct Report {
    pub table: Table,
    pub failed: bool,
}

fn series(cfg: &RunConfig) -> Result<SeriesConfig, CliError> {
    cfg.series().map_err(|e| CliError::Config(crate::config::ConfigError::Field {
        key: "series".into(),
        message: e.to_string(),
    }))
}

pub const PARAMS_COLUMNS: [&str; 2] = ["quantity", "value"];

pub fn params(cfg: &RunConfig) -> Result<Report, CliError> {
    let geom = cfg.geometry()?;
    let model = cfg.model()?;
    let policy = cfg.policy()?;
    let bs = beam_spread(&geom);
    let mut t = Table::new(&PARAMS_COLUMNS);
    let mut row = |k: &str, v: String| t.push(vec![k.to_string(), v]);
    row(
        "model",
        if model.pointing.is_some() { "GG_POINTING" } else { "GG_ONLY" }.into(),
    );
    row("sigma_r2", fixed(cfg.rytov_variance()?, 4));
    row("cn2", format!("{:.4e}", geom.cn2));
    row("alpha", fixed(model.turbulence.alpha, 4));
    row("beta", fixed(model.turbulence.beta, 4));
    row("w_l_cm", fixed(bs.w_l * 100.0, 4));
    if let Some(p) = model.pointing {
        row("pointing_model", pointing_model_name(cfg.pointing_model).into());
        row("a0", fixed(p.a0, 4));
        row("xi", fixed(p.xi(), 4));
        row("pointing_penalty_bits", fixed(pointing_penalty(&model)?, 4));
    }
    row("ber_target", format!("{:e}", policy.target_ber()));
    row("k_margin", fixed(policy.k_margin(), 4));
    Ok(Report { table: t, failed: false })
}

pub const ASE_COLUMNS: [&str; 6] = ["snr_db", "ase_limit", "ase_discrete", "ase_mc", "ase_mc_stderr", "high_snr_approx"];

/// Seed for grid point `k`: independent streams per point, reproducible.
fn point_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn ase_rows(
    model: &ChannelModel,
    cfg: &RunConfig,
    grid: &[f64],
    mc: &McConfig,
    label: Option<&str>,
) -> Result<(Vec<Vec<String>>, bool), CliError> {
    let policy = cfg.policy()?;
    let series = series(cfg)?;
    let set = cfg.constellation_set()?;
    let rows: Vec<(Vec<String>, bool)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &db)| {
            let snr = SnrSpec::from_db(db);
            let limit = ase_limit(snr, &policy, model, &series).map(|s| s.ase_bits);
            let disc = discrete_ase(snr, &policy, model, &set).map(|s| s.ase_bits);
            let mc_k = McConfig {
                seed: point_seed(mc.seed, k),
                ..*mc
            };
            let est = estimate_ase_mc(snr, &policy, model, &mc_k);
            let high = high_snr_ase(snr, &policy, model);
            let failed = limit.is_err() || disc.is_err() || est.is_err() || high.is_err();
            let mut row: Vec<String> = label.map(|l| vec![l.to_string()]).unwrap_or_default();
            row.extend([
                fixed(db, 1),
                fixed_or_nan(&limit, 4),
                fixed_or_nan(&disc, 4),
                fixed_or_nan(&est.as_ref().map(|e| e.mean), 4),
                fixed_or_nan(&est.as_ref().map(|e| e.std_err), 4),
                fixed_or_nan(&high, 4),
            ]);
            (row, failed)
        })
        .collect();
    let failed = rows.iter().any(|r| r.1);
    Ok((rows.into_iter().map(|r| r.0).collect(), failed))
}

pub fn ase(cfg: &RunConfig) -> Result<Report, CliError> {
    let (rows, failed) = ase_rows(&cfg.model()?, cfg, &cfg.snr_grid(), &cfg.mc()?, None)?;
    Ok(Report {
        table: Table {
            columns: ASE_COLUMNS.to_vec(),
            rows,
        },
        failed,
    })
}

pub const REQUIRED_COLUMNS: [&str; 9] = [
    "rb",
    "fixed_weak_gg",
    "adaptive_weak_gg",
    "fixed_strong_gg",
    "adaptive_strong_gg",
    "fixed_weak_pe",
    "adaptive_weak_pe",
    "fixed_strong_pe",
    "adaptive_strong_pe",
];

/// Required SNR for each target on the weak and strong rows, with and
/// without pointing errors, using the configured link and BER target.
pub fn required_snr(cfg: &RunConfig, targets: &[f64]) -> Result<Report, CliError> {
    let policy = cfg.policy()?;
    let series = series(cfg)?;
    let mut models = Vec::new();
    for pe in [false, true] {
        for s in [0.4, 2.0] {
            models.push(cfg.variant(s, pe).model()?);
        }
    }
    let rows: Vec<(Vec<String>, bool)> = targets
        .par_iter()
        .map(|&rb| {
            let mut row = vec![fixed(rb, 1)];
            let mut failed = false;
            for m in &models {
                let f = fixed_required_snr(rb, policy.target_ber(), m).map(|s| s.snr_db);
                let a = adaptive_required_snr_with_config(rb, &policy, m, &series).map(|s| s.snr_db);
                failed |= f.is_err() || a.is_err();
                row.push(fixed_or_nan(&f, 1));
                row.push(fixed_or_nan(&a, 1));
            }
            (row, failed)
        })
        .collect();
    Ok(Report {
        failed: rows.iter().any(|r| r.1),
        table: Table {
            columns: REQUIRED_COLUMNS.to_vec(),
            rows: rows.into_iter().map(|r| r.0).collect(),
        },
    })
}

pub const MC_COLUMNS: [&str; 9] = [
    "snr_db",
    "ase_limit",
    "ase_mc",
    "ase_mc_stderr",
    "ase_discrete",
    "ase_discrete_mc",
    "ase_discrete_mc_stderr",
    "power_z_continuous",
    "power_z_discrete",
];

/// Sampled ASE of both policies and their power-constraint z-scores.
pub fn mc(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let policy = cfg.policy()?;
    let series = series(cfg)?;
    let set = cfg.constellation_set()?;
    let mc = cfg.mc()?;
    let rows: Vec<(Vec<String>, bool)> = cfg
        .snr_grid()
        .par_iter()
        .enumerate()
        .map(|(k, &db)| {
            let snr = SnrSpec::from_db(db);
            let mc_k = McConfig {
                seed: point_seed(mc.seed, k),
                ..mc
            };
            let limit = ase_limit(snr, &policy, &model, &series).map(|s| s.ase_bits);
            let disc = discrete_ase(snr, &policy, &model, &set).map(|s| s.ase_bits);
            let cont_est = AdaptivePolicy::continuous(snr, &policy, &model)
                .and_then(|p| simulate_policy(&p, &policy, &model, &mc_k));
            let disc_est = AdaptivePolicy::discrete(snr, &policy, &model, &set)
                .and_then(|p| simulate_policy(&p, &policy, &model, &mc_k));
            let z = |e: &Result<PolicyEstimate, fso_adapt::Error>| -> Result<f64, ()> {
                e.as_ref().map(|e| e.power.z_score(snr.snr_linear)).map_err(|_| ())
            };
            let failed = limit.is_err() || disc.is_err() || cont_est.is_err() || disc_est.is_err();
            let row = vec![
                fixed(db, 1),
                fixed_or_nan(&limit, 4),
                fixed_or_nan(&cont_est.as_ref().map(|e| e.ase.mean), 4),
                fixed_or_nan(&cont_est.as_ref().map(|e| e.ase.std_err), 4),
                fixed_or_nan(&disc, 4),
                fixed_or_nan(&disc_est.as_ref().map(|e| e.ase.mean), 4),
                fixed_or_nan(&disc_est.as_ref().map(|e| e.ase.std_err), 4),
                fixed_or_nan(&z(&cont_est), 2),
                fixed_or_nan(&z(&disc_est), 2),
            ];
            (row, failed)
        })
        .collect();
    Ok(Report {
        failed: rows.iter().any(|r| r.1),
        table: Table {
            columns: MC_COLUMNS.to_vec(),
            rows: rows.into_iter().map(|r| r.0).collect(),
        },
    })
}

/// Reproducible artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Artifact {
    Table2,
    Table3,
    Fig2,
    Fig3,
    Fig4,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Table2 => "table2",
            Artifact::Table3 => "table3",
            Artifact::Fig2 => "fig2",
            Artifact::Fig3 => "fig3",
            Artifact::Fig4 => "fig4",
        }
    }
}

/// The configuration with the reproduction settings forced: target BER
/// 1e-3, 20-term series, the default constellation set, 0 to 30 dB in 1 dB steps.
pub fn reproduction_config(cfg: &RunConfig) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        ber_target: 1e-3,
        series_max_terms: d.series_max_terms,
        series_singularity_eps: d.series_singularity_eps,
        series_convergence_tol: d.series_convergence_tol,
        constellations: d.constellations,
        snr_start_db: 0.0,
        snr_stop_db: 30.0,
        snr_step_db: 1.0,
        ..cfg.clone()
    }
}

pub const TABLE3_COLUMNS: [&str; 6] = ["turbulence", "sigma_r2", "alpha", "beta", "xi", "a0"];
pub const FIG2_COLUMNS: [&str; 7] = [
    "config",
    "snr_db",
    "ase_limit",
    "ase_discrete",
    "ase_mc",
    "ase_mc_stderr",
    "high_snr_approx",
];
pub const FIG34_COLUMNS: [&str; 5] = ["config", "snr_db", "ase_limit", "ase_discrete", "gap"];

pub fn reproduce(artifact: Artifact, cfg: &RunConfig) -> Result<Report, CliError> {
    let cfg = reproduction_config(cfg);
    match artifact {
        Artifact::Table3 => {
            let mut t = Table::new(&TABLE3_COLUMNS);
            for (label, s) in ROWS {
                let m = cfg.variant(s, true).model()?;
                let p = m.pointing.expect("pointing enabled");
                t.push(vec![
                    label.into(),
                    fixed(s, 1),
                    fixed(m.turbulence.alpha, 4),
                    fixed(m.turbulence.beta, 4),
                    fixed(p.xi(), 4),
                    fixed(p.a0, 4),
                ]);
            }
            Ok(Report { table: t, failed: false })
        }
        Artifact::Table2 => required_snr(&cfg, &[2.0, 4.0, 6.0, 8.0, 10.0]),
        Artifact::Fig2 => {
            let mut t = Table::new(&FIG2_COLUMNS);
            let mut failed = false;
            let grid = cfg.snr_grid();
            let mc = cfg.mc()?;
            for (label, s) in ROWS {
                for pe in [false, true] {
                    let name = format!("{label}_{}", if pe { "pe" } else { "gg" });
                    let m = cfg.variant(s, pe).model()?;
                    let (rows, f) = ase_rows(&m, &cfg, &grid, &mc, Some(&name))?;
                    failed |= f;
                    t.rows.extend(rows);
                }
            }
            Ok(Report { table: t, failed })
        }
        Artifact::Fig3 | Artifact::Fig4 => {
            let s = if artifact == Artifact::Fig3 { 0.4 } else { 2.0 };
            let label = if artifact == Artifact::Fig3 { "weak" } else { "strong" };
            let policy = cfg.policy()?;
            let series = series(&cfg)?;
            let set = cfg.constellation_set()?;
            let mut t = Table::new(&FIG34_COLUMNS);
            let mut failed = false;
            for pe in [false, true] {
                let name = format!("{label}_{}", if pe { "pe" } else { "gg" });
                let m = cfg.variant(s, pe).model()?;
                let rows: Vec<(Vec<String>, bool)> = cfg
                    .snr_grid()
                    .par_iter()
                    .map(|&db| {
                        let snr = SnrSpec::from_db(db);
                        let limit = ase_limit(snr, &policy, &m, &series).map(|x| x.ase_bits);
                        let disc = discrete_ase(snr, &policy, &m, &set).map(|x| x.ase_bits);
                        let gap = match (&limit, &disc) {
                            (Ok(a), Ok(b)) => a - b,
                            _ => f64::NAN,
                        };
                        let row = vec![
                            name.clone(),
                            fixed(db, 1),
                            fixed_or_nan(&limit, 4),
                            fixed_or_nan(&disc, 4),
                            fixed(gap, 4),
                        ];
                        (row, limit.is_err() || disc.is_err())
                    })
                    .collect();
                for (r, f) in rows {
                    failed |= f;
                    t.push(r);
                }
            }
            Ok(Report { table: t, failed })
        }
    }
}
