//! Input-state builders: weak coherent state, parametric pair source, the
//! Hong-Ou-Mandel combining stage, and the partial-distinguishability
//! (temporal submode) model.
//!
//! Every spatial mode that can carry partially distinguishable photons is
//! represented by a pair of orthogonal temporal submodes `(matched,
//! unmatched)`. A photon with probability-weight overlap `v` against the
//! reference mode is written as `√v·(matched) + √(1−v)·(unmatched)`, which is
//! a transmission-`√v` beam splitter between the two submodes. Coherent-state
//! photons always occupy the matched submode.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{BeamSplitter, FockState};

/// Speed of light, m/s.
const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Default per-mode truncation. For input amplitudes at or below 0.3 the
/// neglected probability mass is under 1e-9.
pub const DEFAULT_CUTOFF: u8 = 6;

/// Coherence time of photons behind a 3 nm bandpass at 780 nm, seconds.
pub const DEFAULT_COHERENCE_TIME: f64 = 6.76e-13;

/// All physical parameters of one quantum-interference source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// Coherent amplitude α (dimensionless, |α| < 1).
    pub alpha: Complex64,
    /// Pair amplitude g = γ² of the down-conversion source (|g| < 1).
    pub pair_amp: Complex64,
    /// Relative phase between the pair amplitude and the coherent
    /// two-photon amplitude, radians. π is maximum destructive interference.
    pub phi: f64,
    /// Mode overlap v ∈ [0, 1] between pair photons and the coherent beam.
    pub overlap_v: f64,
    /// Signal–idler delay at the combining stage, seconds.
    pub hom_delay: f64,
    /// Coherence time of the filtered photons, seconds.
    pub coherence_time: f64,
    /// Per-mode photon cutoff.
    pub cutoff: u8,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            alpha: Complex64::new(0.1, 0.0),
            pair_amp: Complex64::new(0.01, 0.0),
            phi: std::f64::consts::PI,
            overlap_v: 1.0,
            hom_delay: 0.0,
            coherence_time: DEFAULT_COHERENCE_TIME,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.norm() < 1.0) {
            return Err(Error::invalid("alpha must satisfy |alpha| < 1"));
        }
        if !(self.pair_amp.norm() < 1.0) {
            return Err(Error::invalid("pair_amp must satisfy |pair_amp| < 1"));
        }
        if !(0.0..=1.0).contains(&self.overlap_v) {
            return Err(Error::invalid(format!(
                "overlap_v {} outside [0, 1]",
                self.overlap_v
            )));
        }
        if !(self.coherence_time > 0.0) {
            return Err(Error::invalid("coherence_time must be positive"));
        }
        if !self.phi.is_finite() || !self.hom_delay.is_finite() {
            return Err(Error::invalid("phi and hom_delay must be finite"));
        }
        Ok(())
    }

    /// Amplitude ratio ρ = |g| / |α|² (None when α = 0).
    pub fn rho(&self) -> Option<f64> {
        let a2 = self.alpha.norm_sqr();
        (a2 > 0.0).then(|| self.pair_amp.norm() / a2)
    }

    /// Phase offset that makes the closed-form interference argument exact
    /// for complex inputs: φ_eff = φ + arg g − 2·arg α.
    pub fn effective_phi(&self) -> f64 {
        self.phi + self.pair_amp.arg() - 2.0 * self.alpha.arg()
    }
}

/// Truncated coherent state: amplitude `e^{−|α|²/2} αⁿ/√n!` at `|n⟩`.
///
/// The state keeps its exact truncated amplitudes (no renormalization); the
/// Poisson tail beyond the cutoff is recorded as truncation loss.
pub fn coherent_state(alpha: Complex64, cutoff: u8) -> Result<FockState> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::invalid("alpha must satisfy |alpha| < 1"));
    }
    let envelope = (-alpha.norm_sqr() / 2.0).exp();
    let mut terms = Vec::with_capacity(cutoff as usize + 1);
    let mut amp = Complex64::new(envelope, 0.0);
    terms.push((vec![0u8], amp));
    for n in 1..=cutoff {
        amp = amp * alpha / (n as f64).sqrt();
        terms.push((vec![n], amp));
    }
    let mut state = FockState::from_terms(1, cutoff, terms)?;
    state.set_truncation_loss((1.0 - state.norm_sqr()).max(0.0));
    Ok(state)
}

/// Two-mode pair source: `Σₙ gⁿ |n,n⟩` over kept terms, normalized.
/// Mode order is (signal, idler); signal and idler occupations are perfectly
/// correlated.
pub fn pdc_two_mode_state(pair_amp: Complex64, cutoff: u8) -> Result<FockState> {
    if !(pair_amp.norm() < 1.0) {
        return Err(Error::invalid("pair_amp must satisfy |pair_amp| < 1"));
    }
    let mut terms = Vec::with_capacity(cutoff as usize + 1);
    let mut amp = Complex64::new(1.0, 0.0);
    let mut norm_sqr = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            amp *= pair_amp;
        }
        norm_sqr += amp.norm_sqr();
        terms.push((vec![n, n], amp));
    }
    let scale = 1.0 / norm_sqr.sqrt();
    FockState::from_terms(
        2,
        cutoff,
        terms.into_iter().map(|(occ, a)| (occ, a * scale)),
    )
}

/// Gaussian delay-to-overlap map for filtered pulses:
/// `v = exp(−τ² / (2·τ_c²))`.
pub fn hom_overlap_from_delay(delay: f64, coherence_time: f64) -> f64 {
    let x = delay / coherence_time;
    (-0.5 * x * x).exp()
}

/// Coherence time of spectrally filtered photons, `τ_c = λ² / (c·Δλ)`.
pub fn coherence_time_from_filter(center_wavelength: f64, bandwidth: f64) -> f64 {
    center_wavelength * center_wavelength / (SPEED_OF_LIGHT * bandwidth)
}

/// Result of the pair-combining stage.
///
/// Mode order of `state`: `[kept_matched, kept_unmatched, discard_matched,
/// discard_unmatched]`. The discard arm is retained as a traced mode and is
/// never conditioned on.
#[derive(Debug, Clone)]
pub struct HomOutput {
    pub state: FockState,
    /// Temporal overlap actually used for the signal–idler pair.
    pub v_hom: f64,
}

impl HomOutput {
    pub const KEPT: [usize; 2] = [0, 1];
    pub const DISCARD: [usize; 2] = [2, 3];
}

/// Mix signal and idler of a pair source on a balanced splitter, with the
/// signal–idler temporal overlap derived from `hom_delay` via the Gaussian
/// map. At zero delay and leading order the kept arm carries
/// `|0⟩ + (g/√2)|2⟩ + …`.
pub fn hom_combine(
    pdc: &FockState,
    hom_delay: f64,
    coherence_time: f64,
) -> Result<HomOutput> {
    if !(coherence_time > 0.0) {
        return Err(Error::invalid("coherence_time must be positive"));
    }
    hom_combine_with_overlap(pdc, hom_overlap_from_delay(hom_delay, coherence_time))
}

/// Same as [`hom_combine`] but with the overlap supplied directly, for
/// callers that want a different delay model.
pub fn hom_combine_with_overlap(pdc: &FockState, v_hom: f64) -> Result<HomOutput> {
    if pdc.mode_count() != 2 {
        return Err(Error::invalid(
            "pair-combining stage expects a two-mode (signal, idler) state",
        ));
    }
    if !(0.0..=1.0).contains(&v_hom) {
        return Err(Error::invalid(format!("overlap {v_hom} outside [0, 1]")));
    }
    // Expand to submode layout (s_m, s_u, i_m, i_u).
    let state = pdc.insert_vacuum_mode(1)?.insert_vacuum_mode(3)?;
    // Rotate the idler into (matched, unmatched) according to the overlap.
    let state = state.apply_beamsplitter(2, 3, &BeamSplitter::from_transmission(v_hom.sqrt())?)?;
    // Balanced mixing, submode by submode. Slots (0, 1) become the kept arm.
    let bs = BeamSplitter::fifty_fifty();
    let state = state.apply_beamsplitter(0, 2, &bs)?;
    let state = state.apply_beamsplitter(1, 3, &bs)?;
    Ok(HomOutput { state, v_hom })
}

/// Rewrite each photon in the given `(matched, unmatched)` submode pairs as
/// `√v·(matched) + √(1−v)·(unmatched)`.
///
/// This is a unitary rotation inside each spatial mode: the total norm and
/// every spatial-mode photon-number marginal are preserved, while two-photon
/// interference cross terms against matched-only light scale by exactly `v`.
pub fn distinguishability_embed(
    state: &FockState,
    submode_pairs: &[(usize, usize)],
    overlap_v: f64,
) -> Result<FockState> {
    if !(0.0..=1.0).contains(&overlap_v) {
        return Err(Error::invalid(format!(
            "overlap_v {overlap_v} outside [0, 1]"
        )));
    }
    let bs = BeamSplitter::from_transmission(overlap_v.sqrt())?;
    let mut out = state.clone();
    for &(matched, unmatched) in submode_pairs {
        out = out.apply_beamsplitter(matched, unmatched, &bs)?;
    }
    Ok(out)
}
