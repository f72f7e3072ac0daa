//! Run configuration as a flat `key = value` file mirroring the CLI flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::{ChannelFamily, ReportFormat};
use crate::reconstruct::Sanitization;
use crate::simulate::EfficiencyModel;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QCAPWIT_OUT_DIR";

/// `start:stop:step`, inclusive of `stop` up to rounding. A bare number is
/// a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid `{s}` is not start:stop:step"));
        let nums: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let g = match nums[..] {
            [v] => Grid {
                start: v,
                stop: v,
                step: 1.0,
            },
            [start, stop, step] => Grid { start, stop, step },
            _ => return Err(bad()),
        };
        if !(g.step > 0.0 && g.stop >= g.start && g.start.is_finite() && g.stop.is_finite()) {
            return Err(bad());
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelFamily,
    pub grid: Grid,
    pub fidelity: f64,
    /// Entangled pairs per second.
    pub flux: f64,
    /// Seconds per measurement setting.
    pub integration_time: f64,
    pub efficiency: EfficiencyModel,
    pub sanitization: Sanitization,
    pub trials: usize,
    pub seed: u64,
    /// Waveplate-angle uncertainty for amplitude damping, degrees.
    pub delta_omega: f64,
    pub out_dir: PathBuf,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            channel: ChannelFamily::D,
            grid: Grid {
                start: 0.0,
                stop: 0.2,
                step: 0.05,
            },
            fidelity: 0.979,
            // ≈ 4×10⁵ coincidences per axis with the default efficiencies.
            flux: 2.65e5,
            integration_time: 10.0,
            efficiency: EfficiencyModel::default(),
            sanitization: Sanitization::PaperAbs,
            trials: 100,
            seed: 1,
            delta_omega: crate::uncertainty::DEFAULT_DELTA_OMEGA,
            out_dir: default_out_dir(),
            format: ReportFormat::Csv,
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.channel.range();
        for p in self.grid.values() {
            if !(lo..=hi).contains(&p) {
                return Err(Error::Config(format!(
                    "{} = {p} outside [{lo}, {hi}]",
                    self.channel.param_name()
                )));
            }
        }
        let positive = [("flux", self.flux), ("integration_time", self.integration_time)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.fidelity) || (4.0 * self.fidelity - 1.0).abs() <= 1e-6 {
            return Err(Error::Config(format!(
                "fidelity {} outside [0, 1] or singular",
                self.fidelity
            )));
        }
        if self.trials < crate::uncertainty::MIN_TRIALS {
            return Err(Error::Config(format!(
                "trials must be at least {}, got {}",
                crate::uncertainty::MIN_TRIALS,
                self.trials
            )));
        }
        if !(self.delta_omega >= 0.0) {
            return Err(Error::Config(format!(
                "delta_omega must be ≥ 0, got {}",
                self.delta_omega
            )));
        }
        self.efficiency.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
        }
        let e = &mut self.efficiency;
        match key {
            "channel" => self.channel = value.parse()?,
            "grid" => self.grid = value.parse()?,
            "fidelity" => self.fidelity = num(key, value)?,
            "flux" => self.flux = num(key, value)?,
            "integration_time" => self.integration_time = num(key, value)?,
            "eps_opt" => e.eps_opt = num(key, value)?,
            "eps_smf" => e.eps_smf = num(key, value)?,
            "eps_spad" => e.eps_spad = num(key, value)?,
            "eps_channel" => e.eps_channel = num(key, value)?,
            "sanitization" => self.sanitization = value.parse().map_err(Error::Config)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "delta_omega" => self.delta_omega = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.efficiency;
        writeln!(f, "channel = {}", self.channel)?;
        writeln!(f, "grid = {}", self.grid)?;
        writeln!(f, "fidelity = {}", self.fidelity)?;
        writeln!(f, "flux = {}", self.flux)?;
        writeln!(f, "integration_time = {}", self.integration_time)?;
        writeln!(f, "eps_opt = {}", e.eps_opt)?;
        writeln!(f, "eps_smf = {}", e.eps_smf)?;
        writeln!(f, "eps_spad = {}", e.eps_spad)?;
        writeln!(f, "eps_channel = {}", e.eps_channel)?;
        writeln!(f, "sanitization = {}", self.sanitization)?;
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "delta_omega = {}", self.delta_omega)?;
        writeln!(f, "out_dir = {}", self.out_dir.display())?;
        writeln!(f, "format = {}", self.format)
    }
}
