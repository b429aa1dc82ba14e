//! Flat key=value configuration with documented defaults.
//!
//! Precedence: built-in defaults, then the `--config` file, then command-line
//! flags. Time-valued keys and flags are in nanoseconds; rates in hertz;
//! durations in seconds. The fully resolved configuration (seed included) is
//! echoed as `# key=value` comment lines at the top of every output file, so
//! any artifact can be reproduced from its own header.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;

use antibunch_core::{DetectorModel, RunConfig, SourceSpec};

const NS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub alpha: f64,
    pub pair_amp: f64,
    pub phi: f64,
    pub overlap_v: f64,
    pub hom_delay_ns: f64,
    pub coherence_time_ns: f64,
    pub cutoff: u8,
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub dead_time_ns: f64,
    pub rep_rate_hz: f64,
    pub duration_s: f64,
    pub bin_ns: f64,
    pub window_ns: f64,
    pub seed: u64,
    pub shards: u32,
    pub side_peaks: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alpha: 0.1,
            pair_amp: 0.01,
            phi: std::f64::consts::PI,
            overlap_v: 1.0,
            hom_delay_ns: 0.0,
            coherence_time_ns: antibunch_core::DEFAULT_COHERENCE_TIME / NS,
            cutoff: antibunch_core::DEFAULT_CUTOFF,
            efficiency: 1.0,
            dark_rate_hz: 0.0,
            dead_time_ns: 0.0,
            rep_rate_hz: 76e6,
            duration_s: 60.0,
            bin_ns: 1.0,
            window_ns: 2.0,
            seed: 1,
            shards: 1,
            side_peaks: 10,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| {
        anyhow!("malformed value `{value}` for key `{key}` at line {line}")
    })
}

impl Config {
    /// Parse a `key=value` file (`#` starts a comment). Unknown keys are
    /// rejected with the offending key and line number.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut config = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value at line {line_no}: `{raw}`"))?;
            config.set(key.trim(), value, line_no)?;
        }
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "alpha" => self.alpha = parse_num(key, value, line)?,
            "pair_amp" => self.pair_amp = parse_num(key, value, line)?,
            "phi" => self.phi = parse_num(key, value, line)?,
            "overlap_v" => self.overlap_v = parse_num(key, value, line)?,
            "hom_delay_ns" => self.hom_delay_ns = parse_num(key, value, line)?,
            "coherence_time_ns" => self.coherence_time_ns = parse_num(key, value, line)?,
            "cutoff" => self.cutoff = parse_num(key, value, line)?,
            "efficiency" => self.efficiency = parse_num(key, value, line)?,
            "dark_rate_hz" => self.dark_rate_hz = parse_num(key, value, line)?,
            "dead_time_ns" => self.dead_time_ns = parse_num(key, value, line)?,
            "rep_rate_hz" => self.rep_rate_hz = parse_num(key, value, line)?,
            "duration_s" => self.duration_s = parse_num(key, value, line)?,
            "bin_ns" => self.bin_ns = parse_num(key, value, line)?,
            "window_ns" => self.window_ns = parse_num(key, value, line)?,
            "seed" => self.seed = parse_num(key, value, line)?,
            "shards" => self.shards = parse_num(key, value, line)?,
            "side_peaks" => self.side_peaks = parse_num(key, value, line)?,
            _ => bail!("unknown key `{key}` at line {line}"),
        }
        Ok(())
    }

    /// Canonical `# key=value` header echoed into every output file.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "# {k}={v}");
        };
        kv("alpha", self.alpha.to_string());
        kv("pair_amp", self.pair_amp.to_string());
        kv("phi", self.phi.to_string());
        kv("overlap_v", self.overlap_v.to_string());
        kv("hom_delay_ns", self.hom_delay_ns.to_string());
        kv("coherence_time_ns", self.coherence_time_ns.to_string());
        kv("cutoff", self.cutoff.to_string());
        kv("efficiency", self.efficiency.to_string());
        kv("dark_rate_hz", self.dark_rate_hz.to_string());
        kv("dead_time_ns", self.dead_time_ns.to_string());
        kv("rep_rate_hz", self.rep_rate_hz.to_string());
        kv("duration_s", self.duration_s.to_string());
        kv("bin_ns", self.bin_ns.to_string());
        kv("window_ns", self.window_ns.to_string());
        kv("seed", self.seed.to_string());
        kv("shards", self.shards.to_string());
        kv("side_peaks", self.side_peaks.to_string());
        out
    }

    pub fn source_spec(&self) -> Result<SourceSpec> {
        let spec = SourceSpec {
            alpha: Complex64::new(self.alpha, 0.0),
            pair_amp: Complex64::new(self.pair_amp, 0.0),
            phi: self.phi,
            overlap_v: self.overlap_v,
            hom_delay: self.hom_delay_ns * NS,
            coherence_time: self.coherence_time_ns * NS,
            cutoff: self.cutoff,
        };
        spec.validate()
            .map_err(|e| anyhow!("config constraint violated: {e}"))?;
        Ok(spec)
    }

    pub fn detector_model(&self) -> Result<DetectorModel> {
        let det = DetectorModel {
            efficiency: self.efficiency,
            dark_rate: self.dark_rate_hz,
            dead_time: self.dead_time_ns * NS,
        };
        det.validate()
            .map_err(|e| anyhow!("config constraint violated: {e}"))?;
        Ok(det)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            rep_rate: self.rep_rate_hz,
            duration: self.duration_s,
            bin_width: self.bin_ns * NS,
            window_halfwidth: self.window_ns * NS,
            seed: self.seed,
            shards: self.shards,
            n_side_peaks: self.side_peaks,
        };
        cfg.validate()
            .map_err(|e| anyhow!("config constraint violated: {e}"))?;
        Ok(cfg)
    }
}
