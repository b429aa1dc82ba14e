//! Event-driven Monte Carlo of the pulsed intensity-correlation measurement:
//! two detectors behind a balanced splitter, a histogram of inter-detector
//! time differences on the pulse grid, and peak-ratio statistics.
//!
//! The per-pulse physics collapses to a four-outcome click-pattern
//! distribution (no click / detector 1 / detector 2 / both) computed exactly
//! from the engine's output photon-number distribution, the detector
//! efficiency and the dark rate. Pulses are then independent draws, and the
//! simulation skips between active pulses with geometric jumps so empty
//! pulses cost nothing.
//!
//! Determinism: the pulse range is split into shards over disjoint index
//! ranges, each with its own counter-derived ChaCha stream, and shard
//! histograms merge by addition. A given `(seed, shards)` pair always
//! reproduces the same histogram bit for bit. Pairs and dead-time state do
//! not cross shard boundaries; with per-pulse activity around 1e-3 the
//! missing boundary pairs are a vanishing fraction of each side peak.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::pipeline::{self, build_output_state, RatioFit};
use crate::sources::SourceSpec;

/// Threshold single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Detection probability per photon.
    pub efficiency: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
    /// Dead time after a click, seconds. Zero disables the filter.
    pub dead_time: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_rate: 0.0,
            dead_time: 0.0,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(Error::invalid("dark_rate must be non-negative"));
        }
        if !(self.dead_time >= 0.0) {
            return Err(Error::invalid("dead_time must be non-negative"));
        }
        Ok(())
    }
}

/// Counting-run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Pulse repetition rate, Hz.
    pub rep_rate: f64,
    /// Run duration, seconds.
    pub duration: f64,
    /// Histogram bin width, seconds.
    pub bin_width: f64,
    /// Half-width of the integration window around each peak, seconds.
    pub window_halfwidth: f64,
    /// Stream seed.
    pub seed: u64,
    /// Number of independent simulation shards.
    pub shards: u32,
    /// Side peaks integrated on each side of zero delay; also sets the
    /// histogram span (never less than 6 periods).
    pub n_side_peaks: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rep_rate: 76e6,
            duration: 60.0,
            bin_width: 1e-9,
            window_halfwidth: 2e-9,
            seed: 1,
            shards: 1,
            n_side_peaks: 10,
        }
    }
}

impl RunConfig {
    pub fn period(&self) -> f64 {
        1.0 / self.rep_rate
    }

    pub fn total_pulses(&self) -> u64 {
        (self.duration * self.rep_rate).round() as u64
    }

    /// Histogram span in pulse periods on each side of zero.
    pub fn max_lag_periods(&self) -> u32 {
        self.n_side_peaks.max(6)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate > 0.0) {
            return Err(Error::invalid("rep_rate must be positive"));
        }
        if !(self.duration >= 0.0) {
            return Err(Error::invalid("duration must be non-negative"));
        }
        if !(self.bin_width > 0.0) || self.bin_width >= self.period() {
            return Err(Error::invalid(
                "bin_width must be positive and smaller than the pulse period",
            ));
        }
        if !(self.window_halfwidth >= 0.0) || self.window_halfwidth > self.period() / 2.0 {
            return Err(Error::invalid(
                "window_halfwidth must lie in [0, period/2]",
            ));
        }
        if self.shards == 0 {
            return Err(Error::invalid("shards must be at least 1"));
        }
        if self.n_side_peaks == 0 {
            return Err(Error::invalid("n_side_peaks must be at least 1"));
        }
        Ok(())
    }
}

/// Uniform histogram of inter-detector time differences, centered on zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bin_width: f64,
    half_bins: usize,
    counts: Vec<u64>,
    total_pulses: u64,
}

impl Histogram {
    pub fn new(bin_width: f64, half_span: f64, total_pulses: u64) -> Result<Self> {
        if !(bin_width > 0.0) || !(half_span >= 0.0) {
            return Err(Error::invalid("histogram needs positive bin width and span"));
        }
        let half_bins = (half_span / bin_width).ceil() as usize;
        Ok(Histogram {
            bin_width,
            half_bins,
            counts: vec![0; 2 * half_bins + 1],
            total_pulses,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn total_pulses(&self) -> u64 {
        self.total_pulses
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, index: usize) -> f64 {
        (index as f64 - self.half_bins as f64) * self.bin_width
    }

    /// Largest |time difference| the histogram can hold.
    pub fn half_span(&self) -> f64 {
        self.half_bins as f64 * self.bin_width
    }

    fn record(&mut self, dt: f64) {
        let idx = (dt / self.bin_width).round() as i64 + self.half_bins as i64;
        if (0..self.counts.len() as i64).contains(&idx) {
            self.counts[idx as usize] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Total counts in bins whose centers lie within `window` of `t0`.
    pub fn integrate_window(&self, t0: f64, window: f64) -> u64 {
        let slack = self.bin_width * 1e-9;
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| (self.bin_center(*i) - t0).abs() <= window + slack)
            .map(|(_, c)| c)
            .sum()
    }

    /// CSV export: one `bin_center_ns,counts` row per bin, centers in
    /// fixed-point nanoseconds with three decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center_ns,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{:.3},{}\n", self.bin_center(i) * 1e9, c));
        }
        out
    }
}

/// Integrated peak statistics of one histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    /// Counts in the window around zero delay.
    pub central_counts: u64,
    /// Mean of the side-peak totals.
    pub side_mean: f64,
    /// Standard error of the side-peak mean.
    pub side_stderr: f64,
    /// central / side_mean.
    pub ratio: f64,
    /// Side peaks integrated on each side.
    pub n_side_peaks: u32,
}

impl RatioReport {
    /// Flat `key=value` export.
    pub fn to_key_values(&self) -> String {
        format!(
            "central_counts={}\nside_mean={}\nside_stderr={}\nratio={}\n",
            self.central_counts, self.side_mean, self.side_stderr, self.ratio
        )
    }
}

/// Exact per-pulse click-pattern probabilities for a photon-number
/// distribution seen by two detectors behind a balanced splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbs {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl ClickProbs {
    /// Routing is 50/50 per photon, detection is Bernoulli(`efficiency`),
    /// darks are Poisson with the per-pulse mean `dark_rate/rep_rate`.
    pub fn from_distribution(
        dist: &[f64],
        detectors: &DetectorModel,
        rep_rate: f64,
    ) -> Result<ClickProbs> {
        detectors.validate()?;
        if !(rep_rate > 0.0) {
            return Err(Error::invalid("rep_rate must be positive"));
        }
        let total: f64 = dist.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("empty photon-number distribution"));
        }
        let eta = detectors.efficiency;
        // P(no click on one detector | n) = (1 − η/2)^n,
        // P(no click on either | n) = (1 − η)^n.
        let mut q_one = 0.0;
        let mut q_both = 0.0;
        for (n, p) in dist.iter().enumerate() {
            let p = p / total;
            q_one += p * (1.0 - eta / 2.0).powi(n as i32);
            q_both += p * (1.0 - eta).powi(n as i32);
        }
        let dark_survival = (-detectors.dark_rate / rep_rate).exp();
        let q_one = q_one * dark_survival;
        let q_both = q_both * dark_survival * dark_survival;
        let p01 = (q_one - q_both).max(0.0);
        Ok(ClickProbs {
            p00: q_both,
            p01,
            p10: p01,
            p11: (1.0 - 2.0 * q_one + q_both).max(0.0),
        })
    }

    pub fn p_active(&self) -> f64 {
        (self.p01 + self.p10 + self.p11).min(1.0)
    }

    /// Probability that a given detector clicks in a pulse.
    pub fn p_click_one(&self) -> f64 {
        self.p01 + self.p11
    }
}

/// Photon-number distribution of the source's output beam, computed once per
/// run and reused for every pulse.
pub fn per_pulse_distribution(spec: &SourceSpec) -> Result<Vec<f64>> {
    Ok(build_output_state(spec)?.output_distribution())
}

const CLICK_1: u8 = 0b01;
const CLICK_2: u8 = 0b10;

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shard_stream(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut word = seed;
    let mut key = [0u8; 32];
    word = mix64(word ^ mix64(shard.wrapping_add(1)));
    for chunk in key.chunks_mut(8) {
        word = mix64(word);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Independent substream seed for run `index` under a shared base seed.
pub fn run_substream_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x5EED)))
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Simulate one counting run and histogram all inter-detector time
/// differences within the configured lag window.
pub fn simulate_run(
    spec: &SourceSpec,
    detectors: &DetectorModel,
    config: &RunConfig,
) -> Result<Histogram> {
    config.validate()?;
    let dist = per_pulse_distribution(spec)?;
    simulate_run_with_distribution(&dist, detectors, config)
}

/// Same as [`simulate_run`] for callers that already hold the per-pulse
/// distribution (e.g. paired runs that share the engine state).
pub fn simulate_run_with_distribution(
    dist: &[f64],
    detectors: &DetectorModel,
    config: &RunConfig,
) -> Result<Histogram> {
    config.validate()?;
    let probs = ClickProbs::from_distribution(dist, detectors, config.rep_rate)?;
    let period = config.period();
    let max_lag = config.max_lag_periods() as u64;
    let half_span = (max_lag as f64 + 0.5) * period;
    let total_pulses = config.total_pulses();
    let mut histogram = Histogram::new(config.bin_width, half_span, total_pulses)?;

    let p_active = probs.p_active();
    if p_active <= 0.0 || total_pulses == 0 {
        return Ok(histogram);
    }
    let thresh_01 = probs.p01 / p_active;
    let thresh_10 = thresh_01 + probs.p10 / p_active;
    let log_skip = (1.0 - p_active).ln();
    let dead_pulses = if detectors.dead_time > 0.0 {
        (detectors.dead_time / period).ceil() as u64
    } else {
        0
    };

    let shards = config.shards as u64;
    for shard in 0..shards {
        let start = total_pulses * shard / shards;
        let end = total_pulses * (shard + 1) / shards;
        if start == end {
            continue;
        }
        let mut rng = shard_stream(config.seed, shard);
        let mut local = Histogram::new(config.bin_width, half_span, 0)?;
        let mut recent: VecDeque<(u64, u8)> = VecDeque::new();
        let mut last_click: [Option<u64>; 2] = [None, None];
        let mut pulse = start;
        loop {
            // Geometric jump to the next pulse with any click.
            let gap = if p_active >= 1.0 {
                1.0
            } else {
                ((1.0 - uniform(&mut rng)).ln() / log_skip).floor() + 1.0
            };
            if gap >= (end - pulse) as f64 {
                break;
            }
            pulse += gap as u64;

            let u = uniform(&mut rng);
            let mut pattern = if u < thresh_01 {
                CLICK_2
            } else if u < thresh_10 {
                CLICK_1
            } else {
                CLICK_1 | CLICK_2
            };

            if dead_pulses > 0 {
                for (det, bit) in [(0usize, CLICK_1), (1usize, CLICK_2)] {
                    if pattern & bit == 0 {
                        continue;
                    }
                    match last_click[det] {
                        Some(prev) if pulse - prev < dead_pulses => pattern &= !bit,
                        _ => last_click[det] = Some(pulse),
                    }
                }
                if pattern == 0 {
                    continue;
                }
            }

            while let Some(&(old, _)) = recent.front() {
                if pulse - old > max_lag {
                    recent.pop_front();
                } else {
                    break;
                }
            }
            for &(earlier, earlier_pattern) in &recent {
                let lag = (pulse - earlier) as f64 * period;
                if earlier_pattern & CLICK_1 != 0 && pattern & CLICK_2 != 0 {
                    local.record(lag);
                }
                if earlier_pattern & CLICK_2 != 0 && pattern & CLICK_1 != 0 {
                    local.record(-lag);
                }
            }
            if pattern == CLICK_1 | CLICK_2 {
                local.record(0.0);
            }
            recent.push_back((pulse, pattern));
        }
        histogram.merge(&local);
    }
    Ok(histogram)
}

/// Integrate the central and side peaks of a histogram.
///
/// Side peaks at `±k·rep_period` for `k = 1..=n_side_peaks` are integrated
/// separately (2·n_side_peaks totals); `side_stderr` is the standard error of
/// their mean.
pub fn integrate_peaks(
    hist: &Histogram,
    rep_period: f64,
    window_halfwidth: f64,
    n_side_peaks: u32,
) -> Result<RatioReport> {
    if !(rep_period > 0.0) || !(window_halfwidth >= 0.0) {
        return Err(Error::invalid("bad period or window"));
    }
    if n_side_peaks == 0 {
        return Err(Error::invalid("n_side_peaks must be at least 1"));
    }
    let needed = n_side_peaks as f64 * rep_period + window_halfwidth;
    if hist.half_span() + hist.bin_width() / 2.0 < needed {
        return Err(Error::invalid(format!(
            "histogram spans {:.3e} s but {needed:.3e} s are needed for {n_side_peaks} side peaks",
            hist.half_span()
        )));
    }
    let central_counts = hist.integrate_window(0.0, window_halfwidth);
    let mut totals = Vec::with_capacity(2 * n_side_peaks as usize);
    for k in 1..=n_side_peaks as i64 {
        for sign in [-1.0, 1.0] {
            totals.push(hist.integrate_window(sign * k as f64 * rep_period, window_halfwidth) as f64);
        }
    }
    let m = totals.len() as f64;
    let side_mean = totals.iter().sum::<f64>() / m;
    if side_mean == 0.0 {
        return Err(Error::undefined("side peaks are empty"));
    }
    let variance = totals
        .iter()
        .map(|t| (t - side_mean) * (t - side_mean))
        .sum::<f64>()
        / (m - 1.0);
    Ok(RatioReport {
        central_counts,
        side_mean,
        side_stderr: (variance / m).sqrt(),
        ratio: central_counts as f64 / side_mean,
        n_side_peaks,
    })
}

/// Combined result of the destructive/constructive run pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairReport {
    /// Destructive-interference run (φ = π).
    pub antibunched: RatioReport,
    /// Constructive-interference run (φ = 0).
    pub bunched: RatioReport,
    pub visibility: f64,
    pub suppression_factor: f64,
    pub fit: RatioFit,
}

impl PairReport {
    /// Flat `key=value` export. The first four keys describe the
    /// destructive-interference run; the bunched run follows.
    pub fn to_key_values(&self) -> String {
        let mut out = self.antibunched.to_key_values();
        out.push_str(&format!(
            "visibility={}\nsuppression_factor={}\nrho_fit={}\nv_fit={}\n",
            self.visibility, self.suppression_factor, self.fit.rho, self.fit.v
        ));
        out.push_str(&format!(
            "bunched_central_counts={}\nbunched_side_mean={}\nbunched_side_stderr={}\nbunched_ratio={}\n",
            self.bunched.central_counts,
            self.bunched.side_mean,
            self.bunched.side_stderr,
            self.bunched.ratio
        ));
        out
    }
}

/// Run the φ = π and φ = 0 measurements back to back under a shared seed
/// discipline (independent substreams), integrate both histograms, and apply
/// the ratio analysis.
pub fn run_pair_and_report(
    spec: &SourceSpec,
    detectors: &DetectorModel,
    config: &RunConfig,
) -> Result<(PairReport, Histogram, Histogram)> {
    let anti_spec = SourceSpec {
        phi: std::f64::consts::PI,
        ..spec.clone()
    };
    let bun_spec = SourceSpec { phi: 0.0, ..spec.clone() };
    let anti_cfg = RunConfig {
        seed: run_substream_seed(config.seed, 0),
        ..*config
    };
    let bun_cfg = RunConfig {
        seed: run_substream_seed(config.seed, 1),
        ..*config
    };
    let anti_hist = simulate_run(&anti_spec, detectors, &anti_cfg)?;
    let bun_hist = simulate_run(&bun_spec, detectors, &bun_cfg)?;
    let window = config.window_halfwidth;
    let anti = integrate_peaks(&anti_hist, config.period(), window, config.n_side_peaks)?;
    let bun = integrate_peaks(&bun_hist, config.period(), window, config.n_side_peaks)?;
    // Sampled ratios can invert their nominal order when the interference
    // contrast is near zero; the visibility is then signed noise around zero
    // and the fit consumes the ordered pair.
    let report = PairReport {
        antibunched: anti,
        bunched: bun,
        visibility: (bun.ratio - anti.ratio) / (bun.ratio + anti.ratio),
        suppression_factor: pipeline::suppression_factor(anti.ratio)?,
        fit: pipeline::fit_ratio_model(anti.ratio.min(bun.ratio), anti.ratio.max(bun.ratio))?,
    };
    Ok((report, anti_hist, bun_hist))
}

/// Expected side-peak mean for a spec under a run configuration, from the
/// exact click probabilities (the accidental-coincidence level).
pub fn expected_side_mean(
    spec: &SourceSpec,
    detectors: &DetectorModel,
    config: &RunConfig,
) -> Result<f64> {
    config.validate()?;
    let dist = per_pulse_distribution(spec)?;
    let probs = ClickProbs::from_distribution(&dist, detectors, config.rep_rate)?;
    let n = config.total_pulses() as f64;
    let k = config.n_side_peaks as f64;
    // E[side at ±k] = (N − k)·p1·p2; averaged over k = 1..K.
    Ok(probs.p_click_one() * probs.p_click_one() * (n - (k + 1.0) / 2.0))
}

/// Solve for the coherent amplitude that calibrates the expected side-peak
/// mean to `target`, holding the amplitude ratio ρ, overlap, phases and
/// detector model fixed.
pub fn calibrate_alpha(
    template: &SourceSpec,
    detectors: &DetectorModel,
    config: &RunConfig,
    target_side_mean: f64,
) -> Result<f64> {
    if !(target_side_mean > 0.0) {
        return Err(Error::invalid("target side mean must be positive"));
    }
    let rho = template
        .rho()
        .ok_or_else(|| Error::invalid("calibration template needs alpha != 0"))?;
    let pair_phase = template.pair_amp.arg();
    let with_alpha = |a: f64| SourceSpec {
        alpha: num_complex::Complex64::new(a, 0.0),
        pair_amp: num_complex::Complex64::from_polar(rho * a * a, pair_phase),
        ..template.clone()
    };
    let objective = |a: f64| -> Result<f64> {
        Ok(expected_side_mean(&with_alpha(a), detectors, config)? - target_side_mean)
    };
    let mut lo = 1e-6;
    let mut hi = 0.8;
    if objective(hi)? < 0.0 {
        return Err(Error::no_solution(
            "target side mean is unreachable below the amplitude validity bound",
        ));
    }
    if objective(lo)? > 0.0 {
        return Err(Error::no_solution("target side mean is below the floor"));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if objective(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
