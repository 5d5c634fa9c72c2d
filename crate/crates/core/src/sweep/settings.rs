//! Flat `key = value` run settings shared by the config file and the CLI.
//!
//! Keys mirror the long flag names (`gamma-s` or `gamma_s`). `#` starts a
//! comment. Values given on the command line override the file.

use std::path::PathBuf;

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::operators::SystemParams;
use crate::states::StateFamily;
use crate::sweep::{linspace, load_raw_state, InitialSource, RateUnit, SweepConfig, DEFAULT_ESD_THRESHOLD};

pub const DEFAULT_T_MAX: f64 = 200.0;
pub const DEFAULT_STEPS: usize = 2000;

/// Every field is optional so that file and flag layers can be merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub state: Option<StateFamily>,
    pub alpha2: Option<Vec<f64>>,
    pub alpha2_grid: Option<(f64, f64, usize)>,
    pub theta: Option<f64>,
    pub r: Option<f64>,
    pub omega: Option<f64>,
    pub gamma_cavity: Option<f64>,
    pub gamma0: Option<f64>,
    pub gamma_s: Option<Vec<f64>>,
    pub rate_unit: Option<RateUnit>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub fock_cutoff: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_grid: Option<PathBuf>,
    pub esd_threshold: Option<f64>,
    pub dt: Option<f64>,
    pub adaptive_atol: Option<f64>,
    pub workers: Option<usize>,
    pub initial_state: Option<PathBuf>,
}

/// Settings after merging, ready to run.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub sweep: SweepConfig,
    pub out: Option<PathBuf>,
    pub emit_grid: Option<PathBuf>,
    pub esd_threshold: f64,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{v}'")))
}

/// Comma- or whitespace-separated list of numbers.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::InvalidParameter(format!("{key}: empty list")));
    }
    Ok(items)
}

/// `lo:hi:n` linspace triple.
pub fn parse_grid(key: &str, v: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!("{key}: expected lo:hi:n, got '{v}'")));
    }
    let n: usize = parse_num(key, parts[2])?;
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{key}: n must be >= 1")));
    }
    Ok((parse_num(key, parts[0])?, parse_num(key, parts[1])?, n))
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got '{line}'"),
            })?;
            s.set(key.trim(), value.trim()).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "state" => self.state = Some(v.parse()?),
            "alpha2" => self.alpha2 = Some(parse_list(&key, v)?),
            "alpha2_grid" => self.alpha2_grid = Some(parse_grid(&key, v)?),
            "theta" => self.theta = Some(parse_num(&key, v)?),
            "r" => self.r = Some(parse_num(&key, v)?),
            "omega" => self.omega = Some(parse_num(&key, v)?),
            "gamma_cavity" => self.gamma_cavity = Some(parse_num(&key, v)?),
            "gamma0" => self.gamma0 = Some(parse_num(&key, v)?),
            "gamma_s" => self.gamma_s = Some(parse_list(&key, v)?),
            "rate_unit" => self.rate_unit = Some(v.parse()?),
            "t_max" => self.t_max = Some(parse_num(&key, v)?),
            "steps" => self.steps = Some(parse_num(&key, v)?),
            "fock_cutoff" => self.fock_cutoff = Some(parse_num(&key, v)?),
            "out" => self.out = Some(v.into()),
            "emit_grid" => self.emit_grid = Some(v.into()),
            "esd_threshold" => self.esd_threshold = Some(parse_num(&key, v)?),
            "dt" => self.dt = Some(parse_num(&key, v)?),
            "adaptive_atol" => self.adaptive_atol = Some(parse_num(&key, v)?),
            "workers" => self.workers = Some(parse_num(&key, v)?),
            "initial_state" => self.initial_state = Some(v.into()),
            other => return Err(Error::InvalidParameter(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: Settings) -> Settings {
        // an explicit list or grid on the upper layer replaces either form below
        let (alpha2, alpha2_grid) = if over.alpha2.is_some() || over.alpha2_grid.is_some() {
            (over.alpha2, over.alpha2_grid)
        } else {
            (self.alpha2, self.alpha2_grid)
        };
        Settings {
            state: over.state.or(self.state),
            alpha2,
            alpha2_grid,
            theta: over.theta.or(self.theta),
            r: over.r.or(self.r),
            omega: over.omega.or(self.omega),
            gamma_cavity: over.gamma_cavity.or(self.gamma_cavity),
            gamma0: over.gamma0.or(self.gamma0),
            gamma_s: over.gamma_s.or(self.gamma_s),
            rate_unit: over.rate_unit.or(self.rate_unit),
            t_max: over.t_max.or(self.t_max),
            steps: over.steps.or(self.steps),
            fock_cutoff: over.fock_cutoff.or(self.fock_cutoff),
            out: over.out.or(self.out),
            emit_grid: over.emit_grid.or(self.emit_grid),
            esd_threshold: over.esd_threshold.or(self.esd_threshold),
            dt: over.dt.or(self.dt),
            adaptive_atol: over.adaptive_atol.or(self.adaptive_atol),
            workers: over.workers.or(self.workers),
            initial_state: over.initial_state.or(self.initial_state),
        }
    }

    pub fn into_plan(self) -> Result<RunPlan> {
        let bad = |m: &str| Error::InvalidParameter(m.to_string());
        let rate_unit = self.rate_unit.ok_or_else(|| bad("rate-unit is required (gamma0 or omega)"))?;
        let gamma_s = self.gamma_s.ok_or_else(|| bad("gamma-s is required"))?;
        if self.alpha2.is_some() && self.alpha2_grid.is_some() {
            return Err(bad("give either alpha2 or alpha2-grid, not both"));
        }
        let defaults = SystemParams::default();
        let n_fock = self.fock_cutoff.unwrap_or(defaults.n_fock);
        let initial = match &self.initial_state {
            Some(path) => {
                if self.state.is_some() || self.alpha2.is_some() || self.alpha2_grid.is_some() {
                    return Err(bad("initial-state excludes state / alpha2 / alpha2-grid"));
                }
                InitialSource::Raw(load_raw_state(path)?)
            }
            None => InitialSource::Family {
                family: self.state.unwrap_or(StateFamily::Psi),
                theta: self.theta.unwrap_or(0.0),
                r: self.r.unwrap_or(1.0),
            },
        };
        let alpha2 = match (self.alpha2, self.alpha2_grid) {
            (Some(list), _) => list,
            (None, Some((lo, hi, n))) => linspace(lo, hi, n),
            (None, None) if matches!(initial, InitialSource::Raw(_)) => Vec::new(),
            (None, None) => return Err(bad("alpha2 or alpha2-grid is required")),
        };
        let method = match (self.dt, self.adaptive_atol) {
            (Some(_), Some(_)) => return Err(bad("give either dt or adaptive-atol, not both")),
            (Some(dt), None) => Method::FixedRk4 { dt },
            (None, Some(atol)) => Method::AdaptiveDopri { atol },
            (None, None) => Method::default(),
        };
        let esd_threshold = self.esd_threshold.unwrap_or(DEFAULT_ESD_THRESHOLD);
        if !(esd_threshold.is_finite() && esd_threshold >= 0.0) {
            return Err(bad("esd-threshold must be >= 0"));
        }
        let sweep = SweepConfig {
            initial,
            alpha2,
            gamma_s,
            rate_unit,
            omega: self.omega.unwrap_or(defaults.omega),
            gamma_cavity: self.gamma_cavity.unwrap_or(defaults.gamma_cavity),
            gamma0: self.gamma0.unwrap_or(defaults.gamma0),
            n_fock,
            t_max: self.t_max.unwrap_or(DEFAULT_T_MAX),
            steps: self.steps.unwrap_or(DEFAULT_STEPS),
            method,
            keep_full: false,
            workers: self.workers,
        };
        sweep.validate()?;
        Ok(RunPlan { sweep, out: self.out, emit_grid: self.emit_grid, esd_threshold })
    }
}
