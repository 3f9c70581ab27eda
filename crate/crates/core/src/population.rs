//! Population simulation: coupled SDE and stopping-time paths, HALYs and
//! population summaries.

use rayon::prelude::*;

use crate::error::{ConfigError, StatsError};
use crate::mortality::{self, HazardAccumulator, HazardParams};
use crate::sde::{self, DiffusionParams, DriftTable};
use crate::stream::{IndividualStream, RandomStream};

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_OMEGA: f64 = 110.0;
pub const DEFAULT_X0: f64 = 0.95;
pub const DEFAULT_SEED: u64 = 0;

/// Probabilities of the quartile curves.
pub const QUARTILES: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of individuals.
    pub n: usize,
    /// Step size in years.
    pub dt: f64,
    /// Maximum age; anyone still alive at `omega` dies there.
    pub omega: f64,
    /// HRQoL at age 0.
    pub x0: f64,
    pub seed: u64,
    pub hazard: HazardParams,
    pub diffusion: DiffusionParams,
    pub drift: DriftTable,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: DEFAULT_N,
            dt: DEFAULT_DT,
            omega: DEFAULT_OMEGA,
            x0: DEFAULT_X0,
            seed: DEFAULT_SEED,
            hazard: HazardParams::default(),
            diffusion: DiffusionParams::default(),
            drift: DriftTable::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 1 {
            return Err(ConfigError::invalid("n", "must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::invalid("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(ConfigError::invalid(
                "omega",
                format!("must be finite and > 0, got {}", self.omega),
            ));
        }
        let ratio = self.omega / self.dt;
        if ratio > u32::MAX as f64 {
            return Err(ConfigError::invalid("dt", "omega/dt is too large"));
        }
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(ConfigError::invalid(
                "dt",
                format!("omega/dt must be a positive integer, got {ratio}"),
            ));
        }
        if !(self.x0 > 0.0 && self.x0 <= 1.0) {
            return Err(ConfigError::invalid("x0", format!("must lie in (0, 1], got {}", self.x0)));
        }
        Ok(())
    }

    /// Number of steps from age 0 to `omega`.
    pub fn steps(&self) -> usize {
        (self.omega / self.dt).round() as usize
    }

    /// Number of grid points, `0, dt, …, omega`.
    pub fn grid_len(&self) -> usize {
        self.steps() + 1
    }
}

/// One individual's stopped HRQoL path.
///
/// Only the grid values before death are stored; the stopped process is
/// zero at every grid age `≥ tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    grid_len: usize,
    living: Vec<f64>,
    /// Age at death.
    pub tau: f64,
    /// HRQoL at the last grid age before death.
    pub x_at_death: f64,
    pub haly: f64,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Stopped-process value at grid index `k`.
    pub fn value_at(&self, k: usize) -> f64 {
        self.living.get(k).copied().unwrap_or(0.0)
    }

    /// Grid values strictly before death.
    pub fn living_values(&self) -> &[f64] {
        &self.living
    }

    /// Stopped-process values over the whole grid.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid_len).map(move |k| self.value_at(k))
    }
}

/// Simulates one individual from birth to death.
///
/// Each step first accumulates the hazard at the current state over the
/// step and checks the death threshold. A survivor is then advanced with
/// one Euler–Maruyama step. The threshold is the first draw taken from the
/// stream, followed by one normal per survived step.
///
/// The drift factor of each step is read at the step's midpoint age. With a
/// left-endpoint age the deterministic path lags the exact solution by half
/// a step, which shifts HALYs by about `dt/2·(x0 − X_τ)`.
pub fn simulate_individual<S: RandomStream + ?Sized>(config: &SimConfig, stream: &mut S) -> Trajectory {
    debug_assert!(config.validate().is_ok());
    let dt = config.dt;
    let steps = config.steps();
    let threshold = loop {
        if let Ok(e) = mortality::draw_threshold(stream.open_uniform()) {
            break e;
        }
    };

    let mut acc = HazardAccumulator::new(threshold);
    let mut living = Vec::with_capacity(steps + 1);
    let mut x = config.x0;
    for k in 0..steps {
        let t = k as f64 * dt;
        living.push(x);
        let h = mortality::mean_step_hazard(t, dt, x, &config.hazard);
        let before = acc.cumulative_hazard;
        acc = mortality::advance_hazard(acc, h, dt);
        if let Some(tau) = mortality::locate_death(t, dt, before, acc.cumulative_hazard, threshold) {
            // a crossing a hair past t can round onto t, which is a living grid age
            let tau = if tau > t { tau } else { t.next_up() };
            let haly = haly_integral(&living, tau, dt);
            return Trajectory {
                dt,
                grid_len: steps + 1,
                living,
                tau,
                x_at_death: x,
                haly,
            };
        }
        let z = stream.standard_normal();
        x = sde::em_step(t + 0.5 * dt, x, dt, z, &config.drift, &config.diffusion);
    }

    // Alive at omega: censored, treated as death at omega.
    let tau = config.omega;
    let x_at_death = *living.last().unwrap_or(&config.x0);
    living.push(x);
    let haly = haly_integral(&living, tau, dt);
    living.pop();
    Trajectory {
        dt,
        grid_len: steps + 1,
        living,
        tau,
        x_at_death,
        haly,
    }
}

/// Integral of a stopped path up to `tau`.
///
/// `values[k]` is the path at age `k·dt`; points after `tau` are ignored and
/// a point exactly at `tau` is read as the value just before death.
/// Consecutive points are joined by the trapezoidal rule and the remaining
/// piece from the last point to `tau` is a rectangle of the last value.
pub fn haly_integral(values: &[f64], tau: f64, dt: f64) -> f64 {
    if values.is_empty() || tau <= 0.0 {
        return 0.0;
    }
    let on_or_before = ((tau / dt) * (1.0 + 1e-12)).floor() as usize + 1;
    let m = on_or_before.min(values.len());
    let mut total = 0.0;
    for pair in values[..m].windows(2) {
        total += 0.5 * (pair[0] + pair[1]) * dt;
    }
    let last_age = (m - 1) as f64 * dt;
    if tau > last_age {
        total += values[m - 1] * (tau - last_age);
    }
    total.clamp(0.0, tau)
}

/// Type-7 quantile of an ascending sample: linear interpolation between
/// order statistics at rank `(len − 1)·p`.
pub fn quantile(sorted_values: &[f64], p: f64) -> Result<f64, StatsError> {
    if sorted_values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::Probability(p));
    }
    let h = (sorted_values.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let v = sorted_values[lo];
    match sorted_values.get(lo + 1) {
        Some(&next) => Ok(v + (h - lo as f64) * (next - v)),
        None => Ok(v),
    }
}

fn sort_floats(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileTriple {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl QuantileTriple {
    pub fn from_sample(mut values: Vec<f64>) -> Result<Self, StatsError> {
        sort_floats(&mut values);
        Ok(QuantileTriple {
            q25: quantile(&values, 0.25)?,
            median: quantile(&values, 0.5)?,
            q75: quantile(&values, 0.75)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSummary {
    /// Age at death, years.
    pub life_expectancy: QuantileTriple,
    pub hrqol_at_death: QuantileTriple,
    /// Years.
    pub haly: QuantileTriple,
}

impl PopulationSummary {
    pub fn from_trajectories(trajectories: &[Trajectory]) -> Result<Self, StatsError> {
        let collect = |f: fn(&Trajectory) -> f64| trajectories.iter().map(f).collect::<Vec<_>>();
        Ok(PopulationSummary {
            life_expectancy: QuantileTriple::from_sample(collect(|t| t.tau))?,
            hrqol_at_death: QuantileTriple::from_sample(collect(|t| t.x_at_death))?,
            haly: QuantileTriple::from_sample(collect(|t| t.haly))?,
        })
    }
}

/// Pointwise quartiles of the stopped process on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileCurves {
    pub dt: f64,
    pub q25: Vec<f64>,
    pub q50: Vec<f64>,
    pub q75: Vec<f64>,
}

impl QuantileCurves {
    pub fn len(&self) -> usize {
        self.q50.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q50.is_empty()
    }

    pub fn age_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn quantiles_at(trajectories: &[Trajectory], k: usize, probs: &[f64]) -> Vec<f64> {
    let mut column: Vec<f64> = trajectories.iter().map(|t| t.value_at(k)).collect();
    sort_floats(&mut column);
    probs
        .iter()
        .map(|&p| quantile(&column, p).expect("probabilities checked by caller"))
        .collect()
}

/// Quantiles of the stopped-process values at every grid age, one row per
/// age with one entry per requested probability. Trajectories must share a
/// grid.
pub fn pointwise_quantiles(
    trajectories: &[Trajectory],
    probs: &[f64],
    execution: Execution,
) -> Result<Vec<Vec<f64>>, StatsError> {
    let first = trajectories.first().ok_or(StatsError::EmptySample)?;
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::Probability(p));
    }
    debug_assert!(trajectories.iter().all(|t| t.grid_len == first.grid_len));
    let rows = match execution {
        Execution::Serial => (0..first.grid_len)
            .map(|k| quantiles_at(trajectories, k, probs))
            .collect(),
        Execution::Parallel => (0..first.grid_len)
            .into_par_iter()
            .map(|k| quantiles_at(trajectories, k, probs))
            .collect(),
    };
    Ok(rows)
}

impl QuantileCurves {
    pub fn from_trajectories(trajectories: &[Trajectory], execution: Execution) -> Result<Self, StatsError> {
        let rows = pointwise_quantiles(trajectories, &QUARTILES, execution)?;
        let column = |i: usize| rows.iter().map(|r| r[i]).collect();
        Ok(QuantileCurves {
            dt: trajectories[0].dt,
            q25: column(0),
            q50: column(1),
            q75: column(2),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationResult {
    pub config: SimConfig,
    /// Ordered by individual index.
    pub trajectories: Vec<Trajectory>,
    pub summary: PopulationSummary,
    pub quantile_curves: QuantileCurves,
}

/// Simulates the whole population in parallel. See
/// [`simulate_population_with`].
pub fn simulate_population(config: &SimConfig) -> Result<PopulationResult, ConfigError> {
    simulate_population_with(config, Execution::Parallel)
}

/// Simulates `config.n` individuals, individual `i` drawing from
/// [`IndividualStream::new`]`(config.seed, i)`. The result does not depend
/// on `execution`.
pub fn simulate_population_with(config: &SimConfig, execution: Execution) -> Result<PopulationResult, ConfigError> {
    config.validate()?;
    let one = |i: usize| simulate_individual(config, &mut IndividualStream::new(config.seed, i as u64));
    let trajectories: Vec<Trajectory> = match execution {
        Execution::Serial => (0..config.n).map(one).collect(),
        Execution::Parallel => (0..config.n).into_par_iter().map(one).collect(),
    };
    // n >= 1 was validated, so the reductions cannot fail
    let summary = PopulationSummary::from_trajectories(&trajectories).expect("non-empty population");
    let quantile_curves = QuantileCurves::from_trajectories(&trajectories, execution).expect("non-empty population");
    Ok(PopulationResult {
        config: config.clone(),
        trajectories,
        summary,
        quantile_curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replays fixed draws; normals repeat the last value once exhausted.
    struct Scripted {
        uniform: f64,
        normals: Vec<f64>,
        next: usize,
    }

    impl Scripted {
        fn new(uniform: f64, normals: Vec<f64>) -> Self {
            Scripted {
                uniform,
                normals,
                next: 0,
            }
        }
    }

    impl RandomStream for Scripted {
        fn standard_normal(&mut self) -> f64 {
            let z = self.normals.get(self.next).or(self.normals.last()).copied().unwrap_or(0.0);
            self.next += 1;
            z
        }

        fn open_uniform(&mut self) -> f64 {
            self.uniform
        }
    }

    fn frozen_config() -> SimConfig {
        SimConfig {
            x0: 1.0,
            diffusion: DiffusionParams::new(0.0).unwrap(),
            drift: DriftTable::constant(0.0).unwrap(),
            ..SimConfig::default()
        }
    }

    fn path(grid_len: usize, living: Vec<f64>, tau: f64) -> Trajectory {
        Trajectory {
            dt: 1.0,
            grid_len,
            x_at_death: *living.last().unwrap_or(&0.0),
            haly: haly_integral(&living, tau, 1.0),
            living,
            tau,
        }
    }

    #[test]
    fn validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = |f: fn(&mut SimConfig)| {
            let mut c = SimConfig::default();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert!(matches!(bad(|c| c.n = 0), ConfigError::Invalid { field: "n", .. }));
        assert!(matches!(bad(|c| c.dt = 0.0), ConfigError::Invalid { field: "dt", .. }));
        assert!(matches!(bad(|c| c.dt = 0.03), ConfigError::Invalid { field: "dt", .. }));
        assert!(matches!(bad(|c| c.omega = -1.0), ConfigError::Invalid { field: "omega", .. }));
        assert!(matches!(bad(|c| c.x0 = 1.5), ConfigError::Invalid { field: "x0", .. }));
        assert!(matches!(bad(|c| c.x0 = 0.0), ConfigError::Invalid { field: "x0", .. }));

        let coarse = SimConfig {
            dt: 0.5,
            ..SimConfig::default()
        };
        assert!(coarse.validate().is_ok());
        assert_eq!(coarse.steps(), 220);
        assert_eq!(SimConfig::default().grid_len(), 11_001);
    }

    #[test]
    fn flat_path_without_death() {
        let config = frozen_config();
        let t = simulate_individual(&config, &mut Scripted::new(f64::MIN_POSITIVE, vec![0.0]));
        assert_eq!(t.tau, 110.0);
        assert!(t.living_values().iter().all(|&v| v == 1.0));
        assert_eq!(t.living_values().len(), config.steps());
        assert_eq!(t.value_at(config.steps()), 0.0);
        assert_eq!(t.x_at_death, 1.0);
        assert!((t.haly - 110.0).abs() < 1e-9);
    }

    #[test]
    fn negligible_hazard_censors_everyone() {
        let config = SimConfig {
            n: 50,
            hazard: HazardParams::new(-1e9, 0.1).unwrap(),
            ..SimConfig::default()
        };
        let result = simulate_population(&config).unwrap();
        assert!(result.trajectories.iter().all(|t| t.tau == config.omega));
        assert!(result.trajectories.iter().all(|t| t.haly <= t.tau));
    }

    #[test]
    fn death_step_bookkeeping() {
        // threshold 1.0; under the frozen regime Λ(τ) = 1 has a closed form
        let config = frozen_config();
        let t = simulate_individual(&config, &mut Scripted::new((-1.0f64).exp(), vec![0.0]));
        let p = config.hazard;
        let exact = (1.0 + p.beta() * (-p.alpha()).exp()).ln() / p.beta();
        // linear interpolation of a convex Λ inside the step: error ≈ β·dt²/8
        assert!((t.tau - exact).abs() < 1e-5, "{} vs {exact}", t.tau);
        let k = t.living_values().len();
        assert!(t.time_at(k - 1) < t.tau && t.tau <= t.time_at(k) + 1e-12);
        assert_eq!(t.value_at(k), 0.0);
        assert!((t.haly - t.tau).abs() < 1e-9);
    }

    #[test]
    fn haly_examples() {
        assert_eq!(haly_integral(&[1.0; 11], 10.0, 1.0), 10.0);
        assert_eq!(haly_integral(&[0.5; 21], 20.0, 1.0), 10.0);
        let linear: Vec<f64> = (0..=10).map(|k| 1.0 - k as f64 / 10.0).collect();
        assert!((haly_integral(&linear, 10.0, 1.0) - 5.0).abs() < 1e-15);
        let dyadic: Vec<f64> = (0..=8).map(|k| 1.0 - k as f64 / 8.0).collect();
        assert_eq!(haly_integral(&dyadic, 8.0, 1.0), 4.0);
    }

    #[test]
    fn haly_partial_interval_is_a_rectangle() {
        // living points at 0, 1, 2; death at 2.5
        assert_eq!(haly_integral(&[1.0, 0.5, 0.25], 2.5, 1.0), 0.75 + 0.375 + 0.125);
        // stopped zeros beyond tau are ignored
        assert_eq!(haly_integral(&[1.0, 0.5, 0.25, 0.0, 0.0], 2.5, 1.0), 1.25);
        assert_eq!(haly_integral(&[], 3.0, 1.0), 0.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[-3.0, 0.5, 9.0], 0.0).unwrap(), -3.0);
        assert_eq!(quantile(&[-3.0, 0.5, 9.0], 1.0).unwrap(), 9.0);
        assert_eq!(quantile(&[], 0.5), Err(StatsError::EmptySample));
        assert_eq!(quantile(&[1.0], 1.5), Err(StatsError::Probability(1.5)));
    }

    #[test]
    fn curves_of_identical_paths() {
        let paths = vec![path(4, vec![0.9, 0.7, 0.4], 2.5); 5];
        let curves = QuantileCurves::from_trajectories(&paths, Execution::Serial).unwrap();
        assert_eq!(curves.q50, vec![0.9, 0.7, 0.4, 0.0]);
        assert_eq!(curves.q25, curves.q50);
        assert_eq!(curves.q75, curves.q50);
    }

    #[test]
    fn curves_vanish_after_last_death() {
        let paths = vec![path(6, vec![1.0, 0.9], 1.5), path(6, vec![1.0, 0.8, 0.6], 2.2)];
        let curves = QuantileCurves::from_trajectories(&paths, Execution::Serial).unwrap();
        for k in 3..6 {
            assert_eq!((curves.q25[k], curves.q50[k], curves.q75[k]), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn curves_of_four_constant_paths() {
        let paths: Vec<_> = [0.2, 0.4, 0.6, 0.8].iter().map(|&v| path(5, vec![v; 5], 5.0)).collect();
        let curves = QuantileCurves::from_trajectories(&paths, Execution::Parallel).unwrap();
        for k in 0..5 {
            assert!((curves.q50[k] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn pointwise_quantiles_checks_inputs() {
        assert_eq!(pointwise_quantiles(&[], &QUARTILES, Execution::Serial), Err(StatsError::EmptySample));
        let one = vec![path(2, vec![1.0], 1.0)];
        assert!(pointwise_quantiles(&one, &[0.5, 2.0], Execution::Serial).is_err());
    }

    #[test]
    fn singleton_population_matches_individual() {
        let config = SimConfig {
            n: 1,
            seed: 99,
            ..SimConfig::default()
        };
        let result = simulate_population(&config).unwrap();
        let alone = simulate_individual(&config, &mut IndividualStream::new(99, 0));
        assert_eq!(result.trajectories, vec![alone.clone()]);
        let s = result.summary;
        assert_eq!((s.life_expectancy.q25, s.life_expectancy.median, s.life_expectancy.q75), (alone.tau, alone.tau, alone.tau));
        assert_eq!(s.haly.median, alone.haly);
        assert_eq!(s.hrqol_at_death.q75, alone.x_at_death);
    }

    #[test]
    fn same_seed_same_result() {
        let config = SimConfig {
            n: 64,
            seed: 5,
            ..SimConfig::default()
        };
        let a = simulate_population_with(&config, Execution::Parallel).unwrap();
        let b = simulate_population_with(&config, Execution::Serial).unwrap();
        assert_eq!(a, b);
        let other = simulate_population(&SimConfig { seed: 6, ..config }).unwrap();
        assert_ne!(a.trajectories, other.trajectories);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let config = SimConfig {
            x0: 0.0,
            ..SimConfig::default()
        };
        assert!(simulate_population(&config).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trajectory_invariants(seed in any::<u64>(), index in 0u64..1_000_000, x0 in 0.05..=1.0f64) {
            let config = SimConfig { x0, dt: 0.05, ..SimConfig::default() };
            let t = simulate_individual(&config, &mut IndividualStream::new(seed, index));
            prop_assert!(t.tau > 0.0 && t.tau <= config.omega);
            prop_assert!(t.haly >= 0.0 && t.haly <= t.tau);
            for (k, v) in t.values().enumerate() {
                prop_assert!((0.0..=1.0).contains(&v));
                if t.time_at(k) >= t.tau {
                    prop_assert_eq!(v, 0.0);
                }
            }
            prop_assert_eq!(t.x_at_death, t.value_at(t.living_values().len() - 1));
        }

        #[test]
        fn haly_bounded_by_tau(values in proptest::collection::vec(0.0..=1.0f64, 1..200), tau_frac in 0.0..1.0f64) {
            let dt = 0.1;
            let tau = tau_frac * values.len() as f64 * dt;
            let h = haly_integral(&values, tau, dt);
            prop_assert!(h >= 0.0 && h <= tau);
        }

        #[test]
        fn quantile_is_monotone_in_p(mut values in proptest::collection::vec(-1e3..1e3f64, 1..100), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            values.sort_unstable_by(f64::total_cmp);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantile(&values, lo).unwrap() <= quantile(&values, hi).unwrap());
        }
    }
}
