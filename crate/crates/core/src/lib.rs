//! Monte Carlo simulation of health-related quality of life (HRQoL) over a
//! lifespan.
//!
//! Each individual's HRQoL follows the bounded Itô SDE
//! `dX = X·δ̄(t) dt + s·√((1 − X)X) dB` on `[0, 1]`, integrated with
//! Euler–Maruyama. Age of death is a stopping time driven by the hazard
//! `exp(α + βt)/√X`, and HRQoL is zero afterwards. Integrating a stopped
//! path gives that individual's health-adjusted life years (HALY).
//!
//! ```no_run
//! use hrqol_core::{simulate_population, SimConfig};
//!
//! let result = simulate_population(&SimConfig::default()).unwrap();
//! println!("median age at death {:.2}", result.summary.life_expectancy.median);
//! ```

pub mod error;
pub mod io;
pub mod mortality;
pub mod population;
pub mod sde;
pub mod stream;

pub use error::{ConfigError, Error, StatsError};
pub use io::{parse_config, RunManifest};
pub use mortality::{HazardAccumulator, HazardParams};
pub use population::{
    haly_integral, pointwise_quantiles, quantile, simulate_individual, simulate_population,
    simulate_population_with, Execution, PopulationResult, PopulationSummary, QuantileCurves,
    QuantileTriple, SimConfig, Trajectory,
};
pub use sde::{DiffusionParams, DriftTable};
pub use stream::{IndividualStream, RandomStream};
