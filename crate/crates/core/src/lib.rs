//! Average-spectral-efficiency limits of adaptive MQAM transmission over
//! terrestrial coherent free-space optical links.
//!
//! The irradiance model is `I = I_a * I_p`: gamma-gamma turbulence `I_a`
//! composed with a power-law pointing-error factor `I_p` on `[0, A0]`.
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: log-gamma, digamma, fractional-order `K_nu`, incomplete
//!   gamma and gamma variates.
//! - [`numerics`]: adaptive Gauss-Kronrod quadrature and Brent root finding.
//! - [`channel`]: link geometry to distribution parameters, PDFs, CDFs,
//!   moments and sampling.
//! - [`adapt`]: BER-constrained rate/power adaptation, continuous-rate ASE
//!   limits, the discrete square-QAM scheme and required-SNR inversion.
//! - [`mc`]: Monte Carlo estimators, power-constraint audits and a Gray-coded
//!   square-QAM bit-error simulator.
//!
//! ```
//! use fso_adapt::adapt::{ase_limit, BerPolicy, SnrSpec};
//! use fso_adapt::channel::{gg_params, ChannelModel};
//! use fso_adapt::specfun::SeriesConfig;
//!
//! let model = ChannelModel::gamma_gamma(gg_params(0.4).unwrap());
//! let policy = BerPolicy::new(1e-3).unwrap();
//! let sol = ase_limit(SnrSpec::from_db(10.7), &policy, &model, &SeriesConfig::default()).unwrap();
//! assert!((sol.ase_bits - 2.0).abs() < 0.05);
//! ```

pub mod adapt;
pub mod channel;
mod error;
pub mod mc;
pub mod numerics;
pub mod specfun;

pub use error::{Error, Result};
