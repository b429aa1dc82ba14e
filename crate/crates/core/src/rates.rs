//! Data-rate and contamination analysis for feeding coincidence-basis logic
//! gates from matched interference sources.
//!
//! A matched source (|γ|² = |α|²) emits single photons at a per-pulse rate
//! ∝ |α|², so two sources driving a two-photon coincidence gate produce data
//! at ∝ |γ|⁴ — against ∝ |γ|⁸ for two heralded pair sources. The gate itself
//! is a black box consuming one photon per input; its success probability
//! multiplies both compared rates and cancels from the advantage ratio.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hbt::per_pulse_distribution;
use crate::sources::SourceSpec;

/// Rate comparison between matched interference sources and heralded pair
/// sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Engine P(1) per pulse in one source's output beam.
    pub single_photon_prob_per_pulse: f64,
    /// Two-source coincidence-feed rate, (P1)² — the |γ|⁴ scale.
    pub kmh_two_source_rate: f64,
    /// Two heralded sources, c·|γ|⁸.
    pub heralded_two_source_rate: f64,
    /// kmh / heralded.
    pub advantage_ratio: f64,
    /// Model prefactor of the interference-source rate: (P1/|γ|²)².
    pub kmh_prefactor: f64,
    /// Heralding/collection prefactor of the compared source (model choice).
    pub heralded_prefactor: f64,
}

impl RateReport {
    /// Flat `key=value` export.
    pub fn to_key_values(&self) -> String {
        format!(
            "kmh_rate={}\nheralded_rate={}\nadvantage_ratio={}\n",
            self.kmh_two_source_rate, self.heralded_two_source_rate, self.advantage_ratio
        )
    }
}

/// Three-source contamination budget for a three-photon coincidence gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminationReport {
    /// (P1)³: all three sources deliver exactly one photon.
    pub desired_rate: f64,
    /// 3·P(n ≥ 3) + 3·P(2)·P(1): one source delivering a triple, or a
    /// surviving pair alongside a single.
    pub contamination_rate: f64,
    /// contamination / desired.
    pub ratio: f64,
    /// The triple-driven part alone, 3·P(n ≥ 3)/(P1)³.
    pub three_photon_part: f64,
    /// The residual-pair part alone, 3·P(2)·P(1)/(P1)³.
    pub residual_pair_part: f64,
}

impl ContaminationReport {
    pub fn to_key_values(&self) -> String {
        format!("contamination_ratio={}\n", self.ratio)
    }
}

/// Matched source spec for an amplitude α: pair amplitude |α|², destructive
/// phase, the given overlap.
fn matched_spec(alpha: Complex64, overlap_v: f64) -> SourceSpec {
    SourceSpec {
        alpha,
        pair_amp: Complex64::new(alpha.norm_sqr(), 0.0),
        phi: std::f64::consts::PI,
        overlap_v,
        ..SourceSpec::default()
    }
}

/// Per-pulse single-photon probability of a matched source's output beam.
///
/// Leading order this is |α|²/2: the primary splitter routes half the light
/// away from the beam of interest.
pub fn source_single_rate(alpha: Complex64) -> Result<f64> {
    if alpha.norm_sqr() == 0.0 {
        return Ok(0.0);
    }
    let dist = per_pulse_distribution(&matched_spec(alpha, 1.0))?;
    Ok(dist[1])
}

/// Compare two matched interference sources against two heralded pair
/// sources with unit heralding prefactor.
pub fn two_source_rates(alpha: Complex64, gamma: Complex64) -> Result<RateReport> {
    two_source_rates_with_prefactor(alpha, gamma, 1.0)
}

/// Same with an explicit heralding/collection prefactor on the compared
/// heralded source.
pub fn two_source_rates_with_prefactor(
    alpha: Complex64,
    gamma: Complex64,
    heralded_prefactor: f64,
) -> Result<RateReport> {
    if !(heralded_prefactor > 0.0) {
        return Err(Error::invalid("heralded prefactor must be positive"));
    }
    let gamma_sq = gamma.norm_sqr();
    if gamma_sq == 0.0 {
        return Err(Error::undefined(
            "advantage ratio is undefined for a zero pair amplitude",
        ));
    }
    let mismatch = (alpha.norm_sqr() - gamma_sq).abs() / gamma_sq;
    if mismatch > 1e-9 {
        return Err(Error::invalid(
            "matched operation requires |alpha|^2 = |gamma|^2",
        ));
    }
    let p1 = source_single_rate(alpha)?;
    let kmh = p1 * p1;
    let heralded = heralded_prefactor * gamma_sq.powi(4);
    Ok(RateReport {
        single_photon_prob_per_pulse: p1,
        kmh_two_source_rate: kmh,
        heralded_two_source_rate: heralded,
        advantage_ratio: kmh / heralded,
        kmh_prefactor: (p1 / gamma_sq) * (p1 / gamma_sq),
        heralded_prefactor,
    })
}

/// Contamination analysis of three matched sources feeding a three-photon
/// coincidence gate. The triple-driven part of the ratio has no |α|
/// dependence at leading order, so shrinking the sources never removes it.
pub fn three_photon_contamination(alpha: Complex64, overlap_v: f64) -> Result<ContaminationReport> {
    let dist = per_pulse_distribution(&matched_spec(alpha, overlap_v))?;
    let p1 = dist[1];
    if p1 == 0.0 {
        return Err(Error::undefined(
            "contamination ratio is undefined for an empty source",
        ));
    }
    let p2 = dist[2];
    let p3_plus: f64 = dist.iter().skip(3).sum();
    let desired = p1 * p1 * p1;
    let three_photon = 3.0 * p3_plus;
    let residual_pair = 3.0 * p2 * p1;
    let contamination = three_photon + residual_pair;
    Ok(ContaminationReport {
        desired_rate: desired,
        contamination_rate: contamination,
        ratio: contamination / desired,
        three_photon_part: three_photon / desired,
        residual_pair_part: residual_pair / desired,
    })
}
