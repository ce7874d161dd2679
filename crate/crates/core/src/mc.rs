//! Monte Carlo oracle for threshold exercise rules.
//!
//! Jump epochs and jump sizes are drawn exactly; only the Brownian part
//! between jumps is discretized on a grid of width `dt`. An optional
//! Brownian-bridge test catches crossings that happen inside a grid step.
//! In direct mode, with the bridge on, the return above `h` after exercise
//! needs no crossing time and is tested once per inter-jump segment.
//!
//! Every path owns its random streams: a ChaCha8 generator whose stream id
//! is the path index. Results are therefore independent of how paths are
//! spread over worker threads, and the same path index sees the same noise
//! for every threshold (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{PricingError, Result};
use crate::model::ModelParams;
use crate::pricer::{g_payoff, Contract, Pricer};

/// Key offset separating the bridge-uniform streams from the main streams.
const BRIDGE_STREAM_KEY: u64 = 0x9e37_79b9_7f4a_7c15;
/// Bridge exponents beyond this are treated as "no crossing" without a draw.
const BRIDGE_EXPONENT_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMode {
    /// Weight the stopped payoff by the conditional survival probability.
    SurvivalWeighted,
    /// Simulate the last passage above `h` directly, up to the horizon.
    DirectLastPassage,
}

impl McMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            McMode::SurvivalWeighted => "survival",
            McMode::DirectLastPassage => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    pub mode: McMode,
}

impl McConfig {
    /// Defaults: 1e5 paths, `dt = 1e-3`, horizon 200, bridge on, survival mode.
    pub fn new(seed: u64) -> Self {
        McConfig {
            n_paths: 100_000,
            dt: 1e-3,
            horizon: 200.0,
            seed,
            bridge_correction: true,
            mode: McMode::SurvivalWeighted,
        }
    }

    pub fn validate(&self, m: &ModelParams) -> Result<()> {
        if self.n_paths < 100 {
            return Err(PricingError::ConfigError(format!(
                "n_paths must be >= 100, got {}",
                self.n_paths
            )));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(PricingError::ConfigError(format!(
                "dt must lie in (0, 0.01], got {}",
                self.dt
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= 10.0 / m.r()) {
            return Err(PricingError::ConfigError(format!(
                "horizon must be >= 10/r = {}, got {}",
                10.0 / m.r(),
                self.horizon
            )));
        }
        Ok(())
    }

    fn note(&self) -> String {
        format!(
            "mode={} dt={} horizon={} bridge={} exact jumps, Euler diffusion",
            self.mode.as_str(),
            self.dt,
            self.horizon,
            if self.bridge_correction { "on" } else { "off" }
        )
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Upper bound on the contribution lost to horizon truncation.
    pub truncation_bound: f64,
    pub discretization_note: String,
}

impl McEstimate {
    fn from_samples(samples: &[f64], truncation_bound: f64, note: String) -> Self {
        let (mean, stderr) = mean_and_stderr(samples);
        McEstimate {
            mean,
            stderr,
            n_paths: samples.len(),
            truncation_bound,
            discretization_note: note,
        }
    }
}

/// How a path got to or below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingType {
    /// Started at or below the threshold.
    Immediate,
    /// Continuous crossing, detected on the grid or by the bridge test.
    Diffusive,
    Jump,
}

impl CrossingType {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrossingType::Immediate => "immediate",
            CrossingType::Diffusive => "diffusive",
            CrossingType::Jump => "jump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passage {
    pub tau: f64,
    /// Price at `tau`: the threshold itself for continuous crossings.
    pub s_tau: f64,
    pub crossing: CrossingType,
}

/// One simulated path, for traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub path_index: u64,
    pub passage: Option<Passage>,
}

/// Log-price dynamics `dX = drift dt + sigma dB - dJ`, jumps `Exp(rho)` at rate `lambda`.
///
/// Usually derived from a [`ModelParams`]; arbitrary drifts are allowed so the
/// simulator can be checked against deterministic limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDynamics {
    pub drift: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub rho: f64,
}

impl From<&ModelParams> for LogDynamics {
    fn from(m: &ModelParams) -> Self {
        LogDynamics {
            drift: m.mu(),
            sigma: m.sigma(),
            lambda: m.lambda(),
            rho: m.rho(),
        }
    }
}

#[derive(Clone, Copy)]
enum Watch {
    Below(f64),
    Above(f64),
    Nothing,
}

struct Walker {
    dynamics: LogDynamics,
    dt: f64,
    bridge: bool,
    t: f64,
    x: f64,
    next_jump: f64,
    main: ChaCha8Rng,
    aux: ChaCha8Rng,
}

impl Walker {
    fn new(dynamics: LogDynamics, x0: f64, dt: f64, bridge: bool, seed: u64, path: u64) -> Self {
        let mut main = ChaCha8Rng::seed_from_u64(seed);
        main.set_stream(path);
        let mut aux = ChaCha8Rng::seed_from_u64(seed ^ BRIDGE_STREAM_KEY);
        aux.set_stream(path);
        let mut walker = Walker {
            dynamics,
            dt,
            bridge,
            t: 0.0,
            x: x0,
            next_jump: f64::INFINITY,
            main,
            aux,
        };
        walker.next_jump = walker.draw_interarrival();
        walker
    }

    fn draw_interarrival(&mut self) -> f64 {
        if self.dynamics.lambda > 0.0 {
            let e: f64 = Exp1.sample(&mut self.main);
            self.t + e / self.dynamics.lambda
        } else {
            f64::INFINITY
        }
    }

    /// Bridge test for a step whose endpoints lie at distances `d0, d1 > 0`
    /// on the same side of the level.
    fn bridge_crossed(&mut self, d0: f64, d1: f64, step: f64) -> bool {
        if !self.bridge {
            return false;
        }
        let s2 = self.dynamics.sigma * self.dynamics.sigma;
        let exponent = 2.0 * d0 * d1 / (s2 * step);
        if exponent.is_nan() || exponent >= BRIDGE_EXPONENT_CUTOFF {
            return false;
        }
        let u: f64 = self.aux.random();
        u < (-exponent).exp()
    }

    /// Advances until the watched level is crossed or `horizon` is reached.
    fn run(&mut self, horizon: f64, watch: Watch) -> Option<CrossingType> {
        let LogDynamics {
            drift, sigma, rho, ..
        } = self.dynamics;
        while self.t < horizon {
            let grid_end = (self.t + self.dt).min(horizon);
            let jump_now = self.next_jump <= grid_end;
            let t_next = if jump_now { self.next_jump } else { grid_end };
            let step = t_next - self.t;
            if step > 0.0 {
                let z: f64 = StandardNormal.sample(&mut self.main);
                let x_new = self.x + drift * step + sigma * step.sqrt() * z;
                match watch {
                    Watch::Below(level) => {
                        if x_new <= level
                            || self.bridge_crossed(self.x - level, x_new - level, step)
                        {
                            self.t = t_next;
                            self.x = level;
                            return Some(CrossingType::Diffusive);
                        }
                    }
                    Watch::Above(level) => {
                        if x_new >= level
                            || self.bridge_crossed(level - self.x, level - x_new, step)
                        {
                            self.t = t_next;
                            self.x = level;
                            return Some(CrossingType::Diffusive);
                        }
                    }
                    Watch::Nothing => {}
                }
                self.x = x_new;
            }
            self.t = t_next;
            if jump_now {
                let e: f64 = Exp1.sample(&mut self.main);
                self.x -= e / rho;
                self.next_jump = self.draw_interarrival();
                if let Watch::Below(level) = watch {
                    if self.x <= level {
                        return Some(CrossingType::Jump);
                    }
                }
            }
        }
        None
    }

    /// Whether the path reaches `level` from below before `horizon`, testing
    /// each whole inter-jump segment with the exact Brownian-bridge maximum
    /// law. No crossing time is produced, so no time grid is needed.
    fn reaches_above_exact(&mut self, level: f64, horizon: f64) -> bool {
        let LogDynamics {
            drift, sigma, rho, ..
        } = self.dynamics;
        while self.t < horizon {
            let jump_now = self.next_jump <= horizon;
            let t_next = if jump_now { self.next_jump } else { horizon };
            let step = t_next - self.t;
            if step > 0.0 {
                let z: f64 = StandardNormal.sample(&mut self.main);
                let x_new = self.x + drift * step + sigma * step.sqrt() * z;
                if x_new >= level || self.bridge_crossed(level - self.x, level - x_new, step) {
                    return true;
                }
                self.x = x_new;
            }
            self.t = t_next;
            if jump_now {
                let e: f64 = Exp1.sample(&mut self.main);
                self.x -= e / rho;
                self.next_jump = self.draw_interarrival();
            }
        }
        false
    }
}

/// First passage of the price below `a` for one path, simulated from
/// explicit log dynamics. `None` when the horizon is reached first.
pub fn simulate_passage(
    dynamics: LogDynamics,
    s0: f64,
    a: f64,
    cfg: &McConfig,
    path_index: u64,
) -> Option<Passage> {
    if a >= s0 {
        return Some(Passage {
            tau: 0.0,
            s_tau: s0,
            crossing: CrossingType::Immediate,
        });
    }
    let mut w = Walker::new(
        dynamics,
        s0.ln(),
        cfg.dt,
        cfg.bridge_correction,
        cfg.seed,
        path_index,
    );
    let level = a.ln();
    w.run(cfg.horizon, Watch::Below(level))
        .map(|crossing| Passage {
            tau: w.t,
            s_tau: if crossing == CrossingType::Jump {
                w.x.exp()
            } else {
                a
            },
            crossing,
        })
}

/// First passage below `a` from the contract spot, under the model's dynamics.
pub fn simulate_to_threshold(
    m: &ModelParams,
    c: &Contract,
    a: f64,
    cfg: &McConfig,
    path_index: u64,
) -> Option<Passage> {
    simulate_passage(LogDynamics::from(m), c.spot(), a, cfg, path_index)
}

/// All passages for `cfg.n_paths` paths, in path order.
pub fn simulate_paths(m: &ModelParams, c: &Contract, a: f64, cfg: &McConfig) -> Vec<PathRecord> {
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| PathRecord {
            path_index: i,
            passage: simulate_to_threshold(m, c, a, cfg, i),
        })
        .collect()
}

fn check_threshold(m: &ModelParams, c: &Contract, a: f64, cfg: &McConfig) -> Result<()> {
    cfg.validate(m)?;
    if !(a > 0.0 && a < c.strike().min(c.spot())) {
        return Err(PricingError::ConfigError(format!(
            "threshold must lie in (0, min(K, s0)) = (0, {}), got {a}",
            c.strike().min(c.spot())
        )));
    }
    Ok(())
}

fn path_value(m: &ModelParams, c: &Contract, a: f64, cfg: &McConfig, path: u64) -> f64 {
    let dynamics = LogDynamics::from(m);
    let mut w = Walker::new(
        dynamics,
        c.spot().ln(),
        cfg.dt,
        cfg.bridge_correction,
        cfg.seed,
        path,
    );
    let Some(crossing) = w.run(cfg.horizon, Watch::Below(a.ln())) else {
        return 0.0;
    };
    let s_tau = if crossing == CrossingType::Jump {
        w.x.exp()
    } else {
        a
    };
    let discount = (-m.r() * w.t).exp();
    match cfg.mode {
        McMode::SurvivalWeighted => discount * g_payoff(m, c, s_tau),
        McMode::DirectLastPassage => {
            let intrinsic = (c.strike() - s_tau).max(0.0);
            if intrinsic == 0.0 {
                return 0.0;
            }
            // tau < theta iff the price gets back to h after tau
            let level = c.barrier().ln();
            let survives = if cfg.bridge_correction {
                w.reaches_above_exact(level, cfg.horizon)
            } else {
                w.run(cfg.horizon, Watch::Above(level)).is_some()
            };
            if survives {
                discount * intrinsic
            } else {
                0.0
            }
        }
    }
}

/// Value of the rule "stop at the first passage below `a`".
pub fn estimate_value(m: &ModelParams, c: &Contract, a: f64, cfg: &McConfig) -> Result<McEstimate> {
    check_threshold(m, c, a, cfg)?;
    let samples: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| path_value(m, c, a, cfg, i))
        .collect();
    Ok(McEstimate::from_samples(
        &samples,
        (-m.r() * cfg.horizon).exp() * c.strike(),
        cfg.note(),
    ))
}

/// Discounted creeping and undershoot probabilities at threshold `a`.
pub fn estimate_passage_factors(
    m: &ModelParams,
    c: &Contract,
    a: f64,
    cfg: &McConfig,
) -> Result<(McEstimate, McEstimate)> {
    check_threshold(m, c, a, cfg)?;
    let records = simulate_paths(m, c, a, cfg);
    let r = m.r();
    let weight = |rec: &PathRecord, want_jump: bool| match rec.passage {
        Some(p) if (p.crossing == CrossingType::Jump) == want_jump => (-r * p.tau).exp(),
        _ => 0.0,
    };
    let creep: Vec<f64> = records.iter().map(|rec| weight(rec, false)).collect();
    let under: Vec<f64> = records.iter().map(|rec| weight(rec, true)).collect();
    let bound = (-r * cfg.horizon).exp();
    Ok((
        McEstimate::from_samples(&creep, bound, cfg.note()),
        McEstimate::from_samples(&under, bound, cfg.note()),
    ))
}

/// Sample statistics of `log(a) - X_tau` over jump crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndershootStats {
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

pub fn undershoot_stats(records: &[PathRecord], a: f64) -> UndershootStats {
    let samples: Vec<f64> = records
        .iter()
        .filter_map(|rec| rec.passage)
        .filter(|p| p.crossing == CrossingType::Jump)
        .map(|p| a.ln() - p.s_tau.ln())
        .collect();
    let (mean, stderr) = mean_and_stderr(&samples);
    UndershootStats {
        count: samples.len(),
        mean,
        stderr,
    }
}

/// `E[e^{-rT} S_T]` at a fixed time; equals `s0` under the martingale measure.
pub fn discounted_terminal_price(
    m: &ModelParams,
    c: &Contract,
    t_end: f64,
    cfg: &McConfig,
) -> McEstimate {
    let dynamics = LogDynamics::from(m);
    let x0 = c.spot().ln();
    let samples: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut w = Walker::new(dynamics, x0, cfg.dt, false, cfg.seed, i);
            w.run(t_end, Watch::Nothing);
            (w.x - m.r() * t_end).exp()
        })
        .collect();
    McEstimate::from_samples(&samples, 0.0, cfg.note())
}

/// Where grid-search values come from.
#[derive(Debug, Clone, Copy)]
pub enum GridMethod<'a> {
    ClosedForm,
    MonteCarlo(&'a McConfig),
}

/// Best threshold on `grid` and the value at every grid point.
///
/// Monte Carlo evaluation reuses the same path streams for every threshold.
pub fn grid_search_threshold(
    m: &ModelParams,
    c: &Contract,
    grid: &[f64],
    method: GridMethod<'_>,
) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(PricingError::ConfigError("empty threshold grid".into()));
    }
    if grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(PricingError::ConfigError(
            "threshold grid must be increasing".into(),
        ));
    }
    if !(grid[0] > 0.0 && grid[grid.len() - 1] < c.strike()) {
        return Err(PricingError::ConfigError(format!(
            "threshold grid must lie in (0, {})",
            c.strike()
        )));
    }
    let values = match method {
        GridMethod::ClosedForm => {
            let pricer = Pricer::new(*m, *c)?;
            grid.iter()
                .map(|&a| pricer.value_with_threshold(c.spot(), a))
                .collect::<Result<Vec<_>>>()?
        }
        GridMethod::MonteCarlo(cfg) => grid
            .iter()
            .map(|&a| estimate_value(m, c, a, cfg).map(|e| e.mean))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok((grid[best], values))
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(samples) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = compensated_sum(&squares) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs() -> (ModelParams, Contract) {
        (
            ModelParams::new(0.05, 0.2, 0.0, 1.0).unwrap(),
            Contract::new(100.0, 120.0, 110.0).unwrap(),
        )
    }

    fn jump() -> (ModelParams, Contract) {
        (
            ModelParams::new(0.05, 0.2, 5.0, 2.0).unwrap(),
            Contract::new(100.0, 120.0, 110.0).unwrap(),
        )
    }

    fn small(seed: u64) -> McConfig {
        McConfig {
            n_paths: 2_000,
            ..McConfig::new(seed)
        }
    }

    #[test]
    fn config_validation() {
        let (m, c) = bs();
        let mut cfg = small(1);
        assert!(cfg.validate(&m).is_ok());
        cfg.n_paths = 99;
        assert!(cfg.validate(&m).is_err());
        cfg = small(1);
        cfg.dt = 0.02;
        assert!(cfg.validate(&m).is_err());
        cfg = small(1);
        cfg.horizon = 199.0;
        assert!(cfg.validate(&m).is_err());
        assert!(matches!(
            estimate_value(&m, &c, 100.0, &small(1)),
            Err(PricingError::ConfigError(_))
        ));
    }

    #[test]
    fn at_or_below_threshold_stops_immediately() {
        let (m, c) = bs();
        let p = simulate_to_threshold(&m, &c, 110.0, &small(3), 0).unwrap();
        assert_eq!(p.tau, 0.0);
        assert_eq!(p.s_tau, 110.0);
    }

    #[test]
    fn deterministic_drift_limit() {
        let dynamics = LogDynamics {
            drift: -0.05,
            sigma: 1e-6,
            lambda: 0.0,
            rho: 1.0,
        };
        let cfg = small(9);
        let p = simulate_passage(dynamics, 110.0, 50.0, &cfg, 4).unwrap();
        let expected = (110.0f64 / 50.0).ln() / 0.05;
        assert!(
            (p.tau - expected).abs() <= 2.0 * cfg.dt,
            "{} vs {expected}",
            p.tau
        );
        assert_eq!(p.crossing, CrossingType::Diffusive);
    }

    #[test]
    fn no_jumps_means_no_undershoot() {
        let (m, c) = bs();
        let cfg = McConfig {
            n_paths: 200,
            dt: 0.01,
            ..McConfig::new(5)
        };
        let (_, under) = estimate_passage_factors(&m, &c, 50.0, &cfg).unwrap();
        assert_eq!(under.mean, 0.0);
    }

    #[test]
    fn stop_just_below_spot_pays_payoff() {
        let (m, c) = jump();
        let c = c.with_spot(60.0).unwrap();
        for mode in [McMode::SurvivalWeighted, McMode::DirectLastPassage] {
            let cfg = McConfig {
                n_paths: 400,
                mode,
                ..McConfig::new(11)
            };
            let est = estimate_value(&m, &c, 59.999, &cfg).unwrap();
            let g = g_payoff(&m, &c, 60.0);
            assert!(
                (est.mean - g).abs() < 0.05 * g + 3.0 * est.stderr,
                "{mode:?}"
            );
        }
    }

    #[test]
    fn grid_search_edge_cases() {
        let (m, c) = bs();
        assert!(grid_search_threshold(&m, &c, &[], GridMethod::ClosedForm).is_err());
        assert!(grid_search_threshold(&m, &c, &[3.0, 2.0], GridMethod::ClosedForm).is_err());
        let (a, values) = grid_search_threshold(&m, &c, &[42.0], GridMethod::ClosedForm).unwrap();
        assert_eq!(a, 42.0);
        assert_eq!(values.len(), 1);
        let grid: Vec<f64> = (1..200).map(|k| 0.5 * k as f64).collect();
        let (a, _) = grid_search_threshold(&m, &c, &grid, GridMethod::ClosedForm).unwrap();
        assert_eq!(a, 50.0);
    }

    #[test]
    fn bridge_only_brings_crossings_forward() {
        let (m, c) = jump();
        let on = McConfig {
            n_paths: 500,
            dt: 0.01,
            ..McConfig::new(21)
        };
        let off = McConfig {
            bridge_correction: false,
            ..on
        };
        let mut strictly_earlier = 0;
        for i in 0..on.n_paths as u64 {
            let t_on =
                simulate_to_threshold(&m, &c, 63.18, &on, i).map_or(f64::INFINITY, |p| p.tau);
            let t_off =
                simulate_to_threshold(&m, &c, 63.18, &off, i).map_or(f64::INFINITY, |p| p.tau);
            assert!(t_on <= t_off, "path {i}: {t_on} > {t_off}");
            if t_on < t_off {
                strictly_earlier += 1;
            }
        }
        assert!(strictly_earlier > 0);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&v), 2.0);
        let (mean, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
