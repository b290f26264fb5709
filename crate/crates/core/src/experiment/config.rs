//! Experiment configuration and its flat `key = value` file format.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::diagnostics::{PlateauConfig, DEFAULT_DELTA};
use crate::gas::StateBounds;
use crate::reference::NoiseModel;
use crate::scheme::InitialMomentum;
use crate::{Error, Result};

/// Deepest refinement level available without `deep`.
pub const DEFAULT_MAX_LEVEL: u32 = 2;
/// Deepest refinement level available at all.
pub const DEEP_MAX_LEVEL: u32 = 4;

/// Inclusive range of refinement levels `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Levels {
    pub first: u32,
    pub last: u32,
}

impl Levels {
    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

impl FromStr for Levels {
    type Err = Error;

    /// `k`, `k0..k1` or `k0..=k1` (both ends inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid level range `{s}`"));
        let s = s.trim();
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a, b.trim_start_matches('=')),
            None => (s, s),
        };
        let first: u32 = a.trim().parse().map_err(|_| bad())?;
        let last: u32 = b.trim().parse().map_err(|_| bad())?;
        if first > last {
            return Err(bad());
        }
        Ok(Self { first, last })
    }
}

impl std::fmt::Display for Levels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub levels: Levels,
    /// Cells at level 0; level `k` uses `base_cells * 2^k`.
    pub base_cells: usize,
    /// Steps at level 0. `None` picks `tau = h`.
    pub base_steps: Option<usize>,
    pub t_final: f64,
    pub length: f64,
    pub mu: f64,
    pub gamma: f64,
    pub rho_init: f64,
    pub m_init: InitialMomentum,
    pub noise: NoiseModel<f64>,
    /// Weight of `G` in the modified relative energy.
    pub delta: f64,
    pub bounds: StateBounds<f64>,
    pub plateau: PlateauConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub emit_plots: bool,
    pub deep: bool,
    pub jacobian_check_every: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            levels: Levels { first: 0, last: 2 },
            base_cells: 30,
            base_steps: None,
            t_final: 40.0,
            length: 1.0,
            mu: 1.0,
            gamma: 0.1,
            rho_init: 2.5,
            m_init: InitialMomentum::Measured,
            noise: NoiseModel::none(),
            delta: DEFAULT_DELTA,
            bounds: StateBounds {
                rho_lower: 0.5,
                rho_upper: 4.0,
                v_bound: 1.0,
            },
            // the reference solution is 2-periodic in time, and so is the error floor
            plateau: PlateauConfig {
                smoothing_window: 2.0,
                ..PlateauConfig::default()
            },
            out_dir: PathBuf::from("out"),
            workers: 1,
            emit_plots: false,
            deep: false,
            jacobian_check_every: None,
        }
    }
}

impl ExperimentConfig {
    pub fn cells(&self, k: u32) -> usize {
        self.base_cells << k
    }

    pub fn steps(&self, k: u32) -> usize {
        self.effective_base_steps() << k
    }

    fn effective_base_steps(&self) -> usize {
        self.base_steps
            .unwrap_or_else(|| ((self.t_final * self.base_cells as f64 / self.length).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let max = if self.deep { DEEP_MAX_LEVEL } else { DEFAULT_MAX_LEVEL };
        if self.levels.last > max {
            return Err(Error::Config(format!(
                "level {} exceeds the maximum {max}{}",
                self.levels.last,
                if self.deep { "" } else { " (pass --deep for up to 4)" }
            )));
        }
        if self.base_cells == 0 || self.base_steps == Some(0) {
            return Err(Error::Config("base cells and steps must be positive".into()));
        }
        for (name, v) in [("t_final", self.t_final), ("length", self.length), ("rho_init", self.rho_init)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        for (name, v) in [("mu", self.mu), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be >= 0")));
            }
        }
        if (self.length - 1.0).abs() > 0.0 {
            return Err(Error::Config("the reference solution is defined on the unit interval".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        StateBounds::new(self.bounds.rho_lower, self.bounds.rho_upper, self.bounds.v_bound)?;
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        }
        let v = value.trim();
        match key.trim() {
            "levels" => self.levels = v.parse()?,
            "base_cells" => self.base_cells = num(key, v)?,
            "base_steps" => self.base_steps = Some(num(key, v)?),
            "t_final" => self.t_final = num(key, v)?,
            "length" => self.length = num(key, v)?,
            "mu" => self.mu = num(key, v)?,
            "gamma" => self.gamma = num(key, v)?,
            "rho_init" => self.rho_init = num(key, v)?,
            "m_init" => self.m_init = v.parse()?,
            "noise" => self.noise = v.parse()?,
            "delta" => self.delta = num(key, v)?,
            "rho_min" => self.bounds.rho_lower = num(key, v)?,
            "rho_max" => self.bounds.rho_upper = num(key, v)?,
            "v_max" => self.bounds.v_bound = num(key, v)?,
            "plateau_band" => self.plateau.band = num(key, v)?,
            "plateau_onset_factor" => self.plateau.onset_factor = num(key, v)?,
            "plateau_min_tail" => self.plateau.min_tail_fraction = num(key, v)?,
            "plateau_fit_fraction" => self.plateau.fit_fraction = num(key, v)?,
            "plateau_window" => self.plateau.smoothing_window = num(key, v)?,
            "out" => self.out_dir = PathBuf::from(v),
            "workers" => self.workers = num(key, v)?,
            "emit_plots" => self.emit_plots = num(key, v)?,
            "deep" => self.deep = num(key, v)?,
            "jacobian_check_every" => self.jacobian_check_every = Some(num(key, v)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                file: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, found `{line}`")))?;
            cfg.set(key, value).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Renders the configuration in the file format accepted by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("levels", self.levels.to_string());
        kv("base_cells", self.base_cells.to_string());
        kv("base_steps", self.effective_base_steps().to_string());
        kv("t_final", self.t_final.to_string());
        kv("length", self.length.to_string());
        kv("mu", self.mu.to_string());
        kv("gamma", self.gamma.to_string());
        kv("rho_init", self.rho_init.to_string());
        kv("m_init", self.m_init.to_string());
        kv("noise", self.noise.to_string());
        kv("delta", self.delta.to_string());
        kv("rho_min", self.bounds.rho_lower.to_string());
        kv("rho_max", self.bounds.rho_upper.to_string());
        kv("v_max", self.bounds.v_bound.to_string());
        kv("plateau_band", self.plateau.band.to_string());
        kv("plateau_onset_factor", self.plateau.onset_factor.to_string());
        kv("plateau_min_tail", self.plateau.min_tail_fraction.to_string());
        kv("plateau_fit_fraction", self.plateau.fit_fraction.to_string());
        kv("plateau_window", self.plateau.smoothing_window.to_string());
        kv("out", self.out_dir.display().to_string());
        kv("workers", self.workers.to_string());
        kv("emit_plots", self.emit_plots.to_string());
        kv("deep", self.deep.to_string());
        if let Some(n) = self.jacobian_check_every {
            kv("jacobian_check_every", n.to_string());
        }
        s
    }
}
