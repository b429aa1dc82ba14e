//! End-to-end construction of the interference source's output beam, the
//! closed-form leading-order predictions, and the inversion that extracts
//! (amplitude ratio, overlap) from a measured ratio pair.
//!
//! The output beam's two-photon amplitude is the coherent `|2⟩` term plus the
//! pair-source term; with amplitude ratio `ρ = |γ|²/|α|²`, overlap `v` and
//! relative phase `φ` the normalized second-order correlation of the beam is,
//! to leading order,
//!
//! ```text
//! g2(0) = 1 + ρ² + 2ρv·cos φ
//! ```
//!
//! so `φ = π` with matched amplitudes (ρ = 1) and perfect overlap removes
//! photon pairs entirely.

use crate::error::{Error, Result};
use crate::fock::{g2_from_distribution, BeamSplitter, FockState};
use crate::sources::{
    coherent_state, distinguishability_embed, hom_combine, pdc_two_mode_state, SourceSpec,
};

/// Mode layout of the assembled network state.
///
/// Six modes: the output beam and the unused port of the primary splitter
/// (each as a matched/unmatched submode pair), plus the traced discard arm of
/// the pair-combining stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmhModes;

impl KmhModes {
    /// Submodes of the beam of interest.
    pub const OUTPUT: [usize; 2] = [0, 1];
    /// Submodes of the unused output port.
    pub const OTHER: [usize; 2] = [2, 3];
    /// Submodes of the combining-stage discard arm.
    pub const DISCARD: [usize; 2] = [4, 5];
}

/// Attach a warning to pipelines whose accumulated truncation loss exceeds
/// this bound.
pub const TRUNCATION_WARN_THRESHOLD: f64 = 1e-6;

/// Full network state plus bookkeeping.
#[derive(Debug, Clone)]
pub struct KmhOutput {
    pub state: FockState,
}

impl KmhOutput {
    /// Photon-number distribution of the beam of interest (both temporal
    /// submodes summed, every other mode traced out).
    pub fn output_distribution(&self) -> Vec<f64> {
        self.state
            .total_number_distribution(&KmhModes::OUTPUT)
            .expect("output modes are always present")
    }

    /// g2(0) of the beam of interest.
    pub fn g2(&self) -> Result<f64> {
        g2_from_distribution(&self.output_distribution())
    }

    /// Mean photon number per pulse in the beam of interest.
    pub fn mean_photon_number(&self) -> f64 {
        self.output_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Per-pulse probability of exactly two photons in the beam of interest.
    pub fn p2(&self) -> f64 {
        self.output_distribution()[2]
    }

    pub fn truncation_loss(&self) -> f64 {
        self.state.truncation_loss()
    }

    /// Some(loss) when the accumulated truncation loss is large enough to
    /// matter for the documented tolerances.
    pub fn truncation_warning(&self) -> Option<f64> {
        let loss = self.truncation_loss();
        (loss > TRUNCATION_WARN_THRESHOLD).then_some(loss)
    }
}

/// Closed-form leading-order prediction for one source configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmhPrediction {
    pub g2: f64,
    pub p2: f64,
    pub mean_n: f64,
    pub rho: f64,
    pub v: f64,
    pub phi: f64,
}

/// Build the full output state of the interference network:
/// coherent source and pair source (through the combining stage, the
/// distinguishability embedding and the relative phase) mixed on the primary
/// balanced splitter.
pub fn build_output_state(spec: &SourceSpec) -> Result<KmhOutput> {
    spec.validate()?;

    // Coherent input occupies the matched submode of its port.
    let coh = coherent_state(spec.alpha, spec.cutoff)?.insert_vacuum_mode(1)?;

    let pdc = pdc_two_mode_state(spec.pair_amp, spec.cutoff)?;
    let hom = hom_combine(&pdc, spec.hom_delay, spec.coherence_time)?;
    let mut pair_arm = distinguishability_embed(&hom.state, &[(0, 1), (2, 3)], spec.overlap_v)?;

    // The scanned phase is the relative phase between the pair amplitude and
    // the coherent two-photon amplitude, so each pair photon carries half of
    // it; a kept pair then interferes with the coherent |2⟩ term at exactly
    // e^{iφ}.
    let half_phase = spec.phi / 2.0;
    for mode in 0..pair_arm.mode_count() {
        pair_arm = pair_arm.apply_phase(mode, half_phase)?;
    }

    // Mode order: (a_m, a_u, b_m, b_u, discard_m, discard_u).
    let full = coh.tensor(&pair_arm)?;
    let bs = BeamSplitter::fifty_fifty();
    let full = full.apply_beamsplitter(0, 2, &bs)?;
    let full = full.apply_beamsplitter(1, 3, &bs)?;

    Ok(KmhOutput { state: full })
}

/// Leading-order closed form `g2 = 1 + ρ² + 2ρv·cos φ`.
///
/// Callers are expected to pass `ρ ≥ 0` and `v ∈ [0, 1]`; the suppression
/// factor relative to a weak coherent beam is `1/g2`.
pub fn predicted_g2(rho: f64, v: f64, phi: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    debug_assert!((0.0..=1.0).contains(&v));
    1.0 + rho * rho + 2.0 * rho * v * phi.cos()
}

/// Full closed-form prediction for a spec (per-pulse quantities use the
/// leading-order mean `|α|²/2` in the output beam).
pub fn predict(spec: &SourceSpec) -> Option<KmhPrediction> {
    let rho = spec.rho()?;
    let phi = spec.effective_phi();
    let g2 = predicted_g2(rho, spec.overlap_v, phi);
    let mean_n = spec.alpha.norm_sqr() / 2.0;
    KmhPrediction {
        g2,
        p2: g2 * mean_n * mean_n / 2.0,
        mean_n,
        rho,
        v: spec.overlap_v,
        phi,
    }
    .into()
}

/// Result of inverting the closed form against a measured ratio pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioFit {
    pub rho: f64,
    pub v: f64,
    /// True when the raw overlap fell outside [0, 1] and was clamped.
    pub clamped: bool,
}

/// Invert `g2(φ=π) = g2_min`, `g2(φ=0) = g2_max` for `(ρ, v)`:
/// `ρ = √((g2_min+g2_max)/2 − 1)`, `v = (g2_max − g2_min)/(4ρ)`.
pub fn fit_ratio_model(g2_min: f64, g2_max: f64) -> Result<RatioFit> {
    if !(g2_min >= 0.0) || !(g2_max >= g2_min) {
        return Err(Error::invalid(
            "fit requires 0 <= g2_min <= g2_max",
        ));
    }
    let mean = 0.5 * (g2_min + g2_max);
    if mean < 1.0 {
        return Err(Error::no_solution(format!(
            "mean ratio {mean} is below the coherent level; no real amplitude ratio"
        )));
    }
    let rho = (mean - 1.0).sqrt();
    if rho == 0.0 {
        return Err(Error::no_solution(
            "amplitude ratio is zero; overlap is undefined",
        ));
    }
    let raw_v = (g2_max - g2_min) / (4.0 * rho);
    let clamped = raw_v > 1.0;
    Ok(RatioFit {
        rho,
        v: raw_v.clamp(0.0, 1.0),
        clamped,
    })
}

/// Interference visibility `(g2_max − g2_min)/(g2_max + g2_min)`.
pub fn visibility(g2_min: f64, g2_max: f64) -> Result<f64> {
    if !(g2_min >= 0.0) || !(g2_max >= g2_min) {
        return Err(Error::invalid(
            "visibility requires 0 <= g2_min <= g2_max",
        ));
    }
    if g2_max == 0.0 {
        return Err(Error::undefined("visibility of an all-zero ratio pair"));
    }
    Ok((g2_max - g2_min) / (g2_max + g2_min))
}

/// Two-photon suppression relative to a weak coherent beam (`g2 = 1`):
/// `1/g2_min`, infinite for complete suppression.
pub fn suppression_factor(g2_min: f64) -> Result<f64> {
    if g2_min < 0.0 {
        return Err(Error::invalid("g2 cannot be negative"));
    }
    if g2_min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / g2_min)
}

/// One row of a phase scan.
#[derive(Debug, Clone, Copy)]
pub struct PhaseScanRow {
    pub phi: f64,
    pub g2_engine: f64,
    pub g2_closed_form: f64,
    pub p2: f64,
    pub mean_n: f64,
}

/// Evaluate the engine and the closed form over a grid of relative phases.
/// Rows are returned in grid order.
pub fn phase_scan(spec: &SourceSpec, phi_grid: &[f64]) -> Result<Vec<PhaseScanRow>> {
    if phi_grid.is_empty() {
        return Err(Error::invalid("empty phase grid"));
    }
    let rho = spec.rho();
    phi_grid
        .iter()
        .map(|&phi| {
            let point = SourceSpec { phi, ..spec.clone() };
            let out = build_output_state(&point)?;
            let g2_engine = match out.g2() {
                Ok(v) => v,
                Err(Error::UndefinedStatistic(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            let g2_closed_form = match rho {
                Some(r) => predicted_g2(r, point.overlap_v, point.effective_phi()),
                None => f64::NAN,
            };
            Ok(PhaseScanRow {
                phi,
                g2_engine,
                g2_closed_form,
                p2: out.p2(),
                mean_n: out.mean_photon_number(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn spec(alpha: f64, pair: f64, v: f64, phi: f64) -> SourceSpec {
        SourceSpec {
            alpha: Complex64::new(alpha, 0.0),
            pair_amp: Complex64::new(pair, 0.0),
            phi,
            overlap_v: v,
            ..SourceSpec::default()
        }
    }

    #[test]
    fn empty_sources_yield_vacuum() {
        let out = build_output_state(&spec(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(out.state.term_count(), 1);
        let dist = out.output_distribution();
        assert!((dist[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_only_output_is_poissonian_at_half_power() {
        let out = build_output_state(&spec(0.1, 0.0, 1.0, 0.3)).unwrap();
        let dist = out.output_distribution();
        // Independent oracle: Poisson pmf with mean |α|²/2.
        let lambda: f64 = 0.01 / 2.0;
        let mut fact = 1.0;
        for (n, &p) in dist.iter().enumerate().take(4) {
            if n > 0 {
                fact *= n as f64;
            }
            let poisson = (-lambda).exp() * lambda.powi(n as i32) / fact;
            assert!((p - poisson).abs() < 1e-12, "P({n}) = {p}, Poisson {poisson}");
        }
        let g2 = out.g2().unwrap();
        assert!((g2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matched_source_cancels_pairs_to_higher_order() {
        // g = α² (two-photon amplitudes matched at leading order): the
        // residual pair probability comes only from higher-order terms and
        // is bounded by 10|α|⁶.
        for &alpha in &[0.01, 0.05, 0.1] {
            let out = build_output_state(&spec(alpha, alpha * alpha, 1.0, PI)).unwrap();
            let p2 = out.p2();
            let bound = 10.0 * alpha.powi(6);
            assert!(p2 <= bound, "alpha={alpha}: P(2)={p2} > {bound}");
        }
    }

    #[test]
    fn exactly_matched_amplitudes_cancel_within_arithmetic() {
        // At g = α² the two interfering pair amplitudes share every
        // normalization prefactor, so the two-photon component of the output
        // beam (all other modes empty) vanishes to machine precision.
        let alpha = 0.1f64;
        let g = alpha * alpha;
        let out = build_output_state(&spec(alpha, g, 1.0, PI)).unwrap();
        let two_photon = out.state.amplitude(&[2, 0, 0, 0, 0, 0]).norm_sqr()
            + out.state.amplitude(&[1, 1, 0, 0, 0, 0]).norm_sqr()
            + out.state.amplitude(&[0, 2, 0, 0, 0, 0]).norm_sqr();
        assert!(two_photon <= 1e-12, "leading-order pair term {two_photon}");

        // At small amplitudes the higher-order sectors are negligible too and
        // the full g2 collapses.
        let alpha = 1e-7;
        let out = build_output_state(&spec(alpha, alpha * alpha, 1.0, PI)).unwrap();
        let g2 = out.g2().unwrap();
        assert!(g2 <= 1e-12, "g2 = {g2}");
    }

    #[test]
    fn prediction_summarizes_the_closed_form() {
        let s = spec(0.1, 0.01, 1.0, PI);
        let p = predict(&s).unwrap();
        assert_eq!(p.g2, 0.0);
        assert!((p.rho - 1.0).abs() < 1e-12);
        assert!((p.mean_n - 0.005).abs() < 1e-12);
        assert_eq!(p.p2, 0.0);
        assert!(predict(&spec(0.0, 0.01, 1.0, PI)).is_none());
    }

    #[test]
    fn closed_form_reference_points() {
        assert_eq!(predicted_g2(1.0, 1.0, PI).max(0.0), 0.0);
        assert!((predicted_g2(1.0, 1.0, 0.0) - 4.0).abs() < 1e-15);
        assert!((predicted_g2(1.0, 1.0, PI / 2.0) - 2.0).abs() < 1e-12);
        assert!((predicted_g2(0.9246, 0.8053, PI) - 0.3657).abs() < 5e-5);
        assert!((predicted_g2(0.9246, 0.8053, 0.0) - 3.3440).abs() < 5e-5);
    }

    #[test]
    fn fit_inverts_the_forward_model() {
        let fit = fit_ratio_model(0.365, 3.343).unwrap();
        // Forward model must reproduce both inputs exactly.
        let fwd_min = predicted_g2(fit.rho, fit.v, PI);
        let fwd_max = predicted_g2(fit.rho, fit.v, 0.0);
        assert!((fwd_min - 0.365).abs() < 1e-12);
        assert!((fwd_max - 3.343).abs() < 1e-12);
        assert!((fit.rho - 0.9246).abs() < 1e-3);
        assert!((fit.v - 0.8053).abs() < 1e-3);
        assert!(!fit.clamped);

        let ideal = fit_ratio_model(0.0, 4.0).unwrap();
        assert!((ideal.rho - 1.0).abs() < 1e-12);
        assert!((ideal.v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        assert!(matches!(
            fit_ratio_model(1.0, 1.0),
            Err(Error::NoSolution(_))
        ));
        assert!(matches!(
            fit_ratio_model(0.2, 0.4),
            Err(Error::NoSolution(_))
        ));
        assert!(fit_ratio_model(2.0, 1.0).is_err());
    }

    #[test]
    fn visibility_reference_points() {
        assert!((visibility(0.365, 3.343).unwrap() - 0.8031).abs() < 5e-5);
        assert_eq!(visibility(0.0, 2.5).unwrap(), 1.0);
        assert_eq!(visibility(1.7, 1.7).unwrap(), 0.0);
        assert!(visibility(0.0, 0.0).is_err());
    }

    #[test]
    fn suppression_reference_points() {
        assert!((suppression_factor(0.365).unwrap() - 2.7397).abs() < 1e-4);
        assert_eq!(suppression_factor(1.0).unwrap(), 1.0);
        assert_eq!(suppression_factor(0.5).unwrap(), 2.0);
        assert_eq!(suppression_factor(0.0).unwrap(), f64::INFINITY);
        assert!(suppression_factor(-0.1).is_err());
    }

    #[test]
    fn phase_scan_is_periodic() {
        let s = spec(0.05, 0.0025, 0.9, 0.0);
        let rows = phase_scan(&s, &[0.7, 0.7 + 2.0 * PI]).unwrap();
        assert!((rows[0].g2_engine - rows[1].g2_engine).abs() < 1e-12);
        assert!((rows[0].p2 - rows[1].p2).abs() < 1e-16);
        assert!(phase_scan(&s, &[]).is_err());
    }

    #[test]
    fn phase_scan_closed_form_hits_reference_grid() {
        let s = spec(0.01, 1e-4, 1.0, 0.0);
        let rows = phase_scan(&s, &[0.0, PI / 2.0, PI]).unwrap();
        let expected = [4.0, 2.0, 0.0];
        for (row, want) in rows.iter().zip(expected) {
            assert!((row.g2_closed_form - want).abs() < 1e-12);
            assert!((row.g2_engine - want).abs() < 0.05 * want.max(0.1));
        }
    }

    #[test]
    fn truncation_warning_fires_only_when_loss_matters() {
        let out = build_output_state(&spec(0.1, 0.01, 1.0, PI)).unwrap();
        assert!(out.truncation_warning().is_none());
        let lossy = build_output_state(&SourceSpec {
            cutoff: 2,
            ..spec(0.6, 0.36, 1.0, PI)
        })
        .unwrap();
        assert!(lossy.truncation_warning().is_some());
    }
}
