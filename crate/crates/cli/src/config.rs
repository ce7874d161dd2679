//! Run configuration: a flat `key = value` file overlaid with command-line flags.

use std::fs;
use std::path::Path;

use cancelput_core::{Contract, McConfig, McMode, ModelParams};

use crate::args::{McArgs, ModelArgs};
use crate::error::{CliError, CliResult};

/// Every value a run can take, before validation by the core constructors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub r: Option<f64>,
    pub sigma2: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub strike: Option<f64>,
    pub barrier: Option<f64>,
    pub spot: Option<f64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub bridge: Option<bool>,
    pub mode: Option<McMode>,
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    value
        .parse()
        .map_err(|_| CliError::input(format!("{key}: not a number: {value:?}")))
}

pub fn parse_mode(value: &str) -> Result<McMode, String> {
    match value {
        "survival" => Ok(McMode::SurvivalWeighted),
        "direct" => Ok(McMode::DirectLastPassage),
        other => Err(format!("mode must be survival or direct, got {other:?}")),
    }
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(CliError::input(format!("{key}: not a boolean: {value:?}"))),
    }
}

impl RunConfig {
    /// Parses the `key = value` format. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut sigma = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "line {}: expected key = value, got {raw:?}",
                    n + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "r" => cfg.r = Some(parse_f64(key, value)?),
                "sigma2" => cfg.sigma2 = Some(parse_f64(key, value)?),
                "sigma" => sigma = Some(parse_f64(key, value)?),
                "lambda" => cfg.lambda = Some(parse_f64(key, value)?),
                "rho" => cfg.rho = Some(parse_f64(key, value)?),
                "strike" => cfg.strike = Some(parse_f64(key, value)?),
                "barrier" => cfg.barrier = Some(parse_f64(key, value)?),
                "spot" => cfg.spot = Some(parse_f64(key, value)?),
                "paths" => {
                    cfg.paths =
                        Some(value.parse().map_err(|_| {
                            CliError::input(format!("paths: not a count: {value:?}"))
                        })?)
                }
                "dt" => cfg.dt = Some(parse_f64(key, value)?),
                "horizon" => cfg.horizon = Some(parse_f64(key, value)?),
                "seed" => {
                    cfg.seed = Some(value.parse().map_err(|_| {
                        CliError::input(format!("seed: not a 64-bit integer: {value:?}"))
                    })?)
                }
                "bridge" => cfg.bridge = Some(parse_bool(key, value)?),
                "mode" => cfg.mode = Some(parse_mode(value).map_err(CliError::input)?),
                other => {
                    return Err(CliError::input(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        cfg.sigma2 = merge_vol(cfg.sigma2, sigma, None)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// File values (if any) overridden by flags.
    pub fn resolve(model: &ModelArgs, mc: Option<&McArgs>) -> CliResult<Self> {
        let mut cfg = match &model.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        cfg.r = model.r.or(cfg.r);
        cfg.sigma2 = merge_vol(model.sigma2, model.sigma, cfg.sigma2)?;
        cfg.lambda = model.lambda.or(cfg.lambda);
        cfg.rho = model.rho.or(cfg.rho);
        cfg.strike = model.strike.or(cfg.strike);
        cfg.barrier = model.barrier.or(cfg.barrier);
        cfg.spot = model.spot.or(cfg.spot);
        if let Some(mc) = mc {
            cfg.paths = mc.paths.or(cfg.paths);
            cfg.dt = mc.dt.or(cfg.dt);
            cfg.horizon = mc.horizon.or(cfg.horizon);
            cfg.seed = mc.seed.or(cfg.seed);
            cfg.bridge = mc.bridge().or(cfg.bridge);
            cfg.mode = mc.mode.or(cfg.mode);
        }
        Ok(cfg)
    }

    pub fn model(&self) -> CliResult<ModelParams> {
        let r = require(self.r, "r")?;
        let sigma2 = require(self.sigma2, "sigma2 (or sigma)")?;
        let lambda = self.lambda.unwrap_or(0.0);
        let rho = match self.rho {
            Some(rho) => rho,
            None if lambda > 0.0 => return Err(missing("rho")),
            None => f64::NAN,
        };
        ModelParams::new(r, sigma2, lambda, rho).map_err(CliError::from)
    }

    /// Contract at the configured spot, or at `fallback_spot` when the
    /// command does not need one.
    pub fn contract(&self, fallback_spot: Option<f64>) -> CliResult<Contract> {
        let strike = require(self.strike, "strike")?;
        let barrier = require(self.barrier, "barrier")?;
        let spot = match (self.spot, fallback_spot) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) => return Err(missing("spot")),
        };
        Contract::new(strike, barrier, spot).map_err(CliError::from)
    }

    /// Monte Carlo settings. The seed is mandatory.
    pub fn mc(&self) -> CliResult<McConfig> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::input("randomized commands need an explicit --seed"))?;
        let base = McConfig::new(seed);
        Ok(McConfig {
            n_paths: self.paths.unwrap_or(base.n_paths),
            dt: self.dt.unwrap_or(base.dt),
            horizon: self.horizon.unwrap_or(base.horizon),
            seed,
            bridge_correction: self.bridge.unwrap_or(base.bridge_correction),
            mode: self.mode.unwrap_or(base.mode),
        })
    }
}

fn require(v: Option<f64>, name: &str) -> CliResult<f64> {
    v.ok_or_else(|| missing(name))
}

fn missing(name: &str) -> CliError {
    CliError::input(format!("missing required value: {name}"))
}

/// Variance from one layer's `sigma2`/`sigma`, falling back to `lower`.
fn merge_vol(
    sigma2: Option<f64>,
    sigma: Option<f64>,
    lower: Option<f64>,
) -> CliResult<Option<f64>> {
    match (sigma2, sigma) {
        (Some(_), Some(_)) => Err(CliError::input("give either sigma2 or sigma, not both")),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(s)) => Ok(Some(s * s)),
        (None, None) => Ok(lower),
    }
}
