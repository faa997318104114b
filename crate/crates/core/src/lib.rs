//! Trajectory-ensemble simulation of nonadiabatic spin-boson dynamics.
//!
//! Matrix elements of `σ_z` are propagated by sequential short-time steps:
//! adiabatic mean-surface motion of an Ohmic harmonic bath, interspersed with
//! stochastically sampled momentum-jump transitions between the two adiabatic
//! surfaces. Transitions can be sampled with the primitive probability or with
//! an energy-filtered one that rejects transitions whose approximate momentum
//! shift would cost too much energy.
//!
//! ```no_run
//! use sstp_core::config::FileConfig;
//! use sstp_core::engine::estimate;
//!
//! let cfg = FileConfig::parse("beta = 1\nomega = 0.4\nxi = 0.13\nc_e = 0.1\n").unwrap();
//! let series = estimate(&cfg.run).unwrap();
//! println!("<σ_z(t_max)> = {}", series.mean.last().unwrap());
//! ```

pub mod bath;
pub mod config;
pub mod engine;
pub mod error;
pub mod hopping;
pub mod model;
pub mod output;
pub mod stats;
pub mod trajectory;

pub use engine::{estimate, Engine, RunConfig};
pub use error::{BlowUp, ConfigError, EngineError, StatsError};
pub use stats::EstimatorSeries;
