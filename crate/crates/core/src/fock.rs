//! Sparse truncated Fock-space engine for multimode optical states.
//!
//! A [`FockState`] is a map from per-mode occupation tuples to complex
//! amplitudes, with a hard per-mode photon cutoff. Amplitude maps are kept in
//! a `BTreeMap` so iteration (and therefore floating-point summation order)
//! is deterministic. All operations are pure: they borrow their inputs and
//! return freshly built states, so parallel callers need no synchronization.
//!
//! Truncation is explicit: any amplitude an operation would place above the
//! cutoff is dropped and its probability mass is accumulated in
//! [`FockState::truncation_loss`], so perturbative error stays measurable.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped after every operation.
/// Pruned mass (< 1e-30 in probability per entry) is numerical noise and is
/// not counted as truncation loss.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Largest per-mode cutoff the engine accepts.
pub const MAX_CUTOFF: u8 = 16;

/// Slack allowed on the squared-norm-at-most-one invariant.
const NORM_SLACK: f64 = 1e-12;

/// Occupation tuple: one entry per mode, each in `0..=cutoff`.
pub type Occupation = Vec<u8>;

/// Two-mode mixing element.
///
/// `theta` is the mixing angle (transmission amplitude `cos θ`), with
/// `θ = π/4` the balanced 50/50 case. Under the convention used throughout
/// this crate the creation operators of the two mixed modes `(a, b)` map to
/// the output pair `(c, d)` as
///
/// ```text
/// a† → cos θ · c† + sin θ · e^{iφ} d†
/// b† → sin θ · c† − cos θ · e^{iφ} d†
/// ```
///
/// i.e. `phase` is carried by every photon leaving through the reflected
/// output arm `d`. With `phase = 0` the matrix is real and symmetric, and the
/// antisymmetric two-photon state `(|2,0⟩ − |0,2⟩)/√2` maps to `|1,1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    theta: f64,
    phase: f64,
}

impl BeamSplitter {
    /// New splitter with mixing angle `theta` in `[0, π/2]`.
    pub fn new(theta: f64, phase: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::invalid(format!(
                "beam splitter angle {theta} outside [0, pi/2]"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::invalid("beam splitter phase must be finite"));
        }
        Ok(BeamSplitter { theta, phase })
    }

    /// Balanced 50/50 splitter (`θ = π/4`, zero phase).
    pub fn fifty_fifty() -> Self {
        BeamSplitter {
            theta: std::f64::consts::FRAC_PI_4,
            phase: 0.0,
        }
    }

    /// Splitter with transmission amplitude `t = cos θ`, `t ∈ [0, 1]`.
    pub fn from_transmission(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!(
                "transmission amplitude {t} outside [0, 1]"
            )));
        }
        Ok(BeamSplitter {
            theta: t.acos(),
            phase: 0.0,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Pure multimode state over a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockState {
    mode_count: usize,
    cutoff: u8,
    amplitudes: BTreeMap<Occupation, Complex64>,
    truncation_loss: f64,
}

impl FockState {
    /// Vacuum in `mode_count` modes: a single unit amplitude on the
    /// all-zeros tuple.
    pub fn vacuum(mode_count: usize, cutoff: u8) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::invalid("mode_count must be at least 1"));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::invalid(format!(
                "cutoff {cutoff} exceeds supported maximum {MAX_CUTOFF}"
            )));
        }
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vec![0u8; mode_count], Complex64::new(1.0, 0.0));
        Ok(FockState {
            mode_count,
            cutoff,
            amplitudes,
            truncation_loss: 0.0,
        })
    }

    /// Build a state from explicit (occupation, amplitude) terms.
    ///
    /// Validates tuple lengths, the per-mode cutoff, and the squared-norm
    /// bound; sub-threshold amplitudes are pruned on entry.
    pub fn from_terms<I>(mode_count: usize, cutoff: u8, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        if mode_count == 0 {
            return Err(Error::invalid("mode_count must be at least 1"));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::invalid(format!(
                "cutoff {cutoff} exceeds supported maximum {MAX_CUTOFF}"
            )));
        }
        let mut amplitudes: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != mode_count {
                return Err(Error::invalid(format!(
                    "occupation tuple of length {} in a {}-mode state",
                    occ.len(),
                    mode_count
                )));
            }
            if let Some(&n) = occ.iter().find(|&&n| n > cutoff) {
                return Err(Error::invalid(format!(
                    "occupation {n} exceeds cutoff {cutoff}"
                )));
            }
            if amp.norm() < PRUNE_THRESHOLD {
                continue;
            }
            *amplitudes.entry(occ).or_insert(Complex64::ZERO) += amp;
        }
        let state = FockState {
            mode_count,
            cutoff,
            amplitudes,
            truncation_loss: 0.0,
        };
        let norm = state.norm_sqr();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::invalid(format!(
                "squared norm {norm} exceeds 1"
            )));
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> u8 {
        self.cutoff
    }

    /// Probability mass dropped by cutoff truncation while constructing this
    /// state, accumulated across all operations in its history.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub(crate) fn set_truncation_loss(&mut self, loss: f64) {
        self.truncation_loss = loss;
    }

    /// Number of stored (non-pruned) amplitudes.
    pub fn term_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude at an occupation tuple, zero if absent.
    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.amplitudes
            .get(occ)
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    /// Iterate stored terms in deterministic (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn overlap(&self, other: &FockState) -> Result<Complex64> {
        if self.mode_count != other.mode_count || self.cutoff != other.cutoff {
            return Err(Error::invalid("overlap of states with different shapes"));
        }
        let mut acc = Complex64::ZERO;
        for (occ, amp) in &self.amplitudes {
            acc += amp.conj() * other.amplitude(occ);
        }
        Ok(acc)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::invalid(format!(
                "mode index {} out of range for {} modes",
                mode, self.mode_count
            )));
        }
        Ok(())
    }

    /// Tensor product; `other`'s modes are appended after `self`'s.
    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        if self.cutoff != other.cutoff {
            return Err(Error::invalid(format!(
                "cutoff mismatch in tensor product: {} vs {}",
                self.cutoff, other.cutoff
            )));
        }
        let mut amplitudes = BTreeMap::new();
        for (occ_a, amp_a) in &self.amplitudes {
            for (occ_b, amp_b) in &other.amplitudes {
                let amp = amp_a * amp_b;
                if amp.norm() < PRUNE_THRESHOLD {
                    continue;
                }
                let mut occ = Vec::with_capacity(self.mode_count + other.mode_count);
                occ.extend_from_slice(occ_a);
                occ.extend_from_slice(occ_b);
                amplitudes.insert(occ, amp);
            }
        }
        let loss =
            1.0 - (1.0 - self.truncation_loss) * (1.0 - other.truncation_loss);
        Ok(FockState {
            mode_count: self.mode_count + other.mode_count,
            cutoff: self.cutoff,
            amplitudes,
            truncation_loss: loss,
        })
    }

    /// Insert a fresh vacuum mode at position `at` (existing modes at and
    /// after `at` shift up by one).
    pub fn insert_vacuum_mode(&self, at: usize) -> Result<FockState> {
        if at > self.mode_count {
            return Err(Error::invalid(format!(
                "insert position {} beyond {} modes",
                at, self.mode_count
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, amp)| {
                let mut new_occ = Vec::with_capacity(self.mode_count + 1);
                new_occ.extend_from_slice(&occ[..at]);
                new_occ.push(0);
                new_occ.extend_from_slice(&occ[at..]);
                (new_occ, *amp)
            })
            .collect();
        Ok(FockState {
            mode_count: self.mode_count + 1,
            cutoff: self.cutoff,
            amplitudes,
            truncation_loss: self.truncation_loss,
        })
    }

    /// Mix modes `mode_i` and `mode_j` on a beam splitter.
    ///
    /// Photon number across the pair is conserved term by term; expansion
    /// components that would exceed the cutoff are dropped and their summed
    /// probability is added to the returned state's truncation loss.
    pub fn apply_beamsplitter(
        &self,
        mode_i: usize,
        mode_j: usize,
        bs: &BeamSplitter,
    ) -> Result<FockState> {
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        if mode_i == mode_j {
            return Err(Error::invalid("beam splitter needs two distinct modes"));
        }
        let cos = bs.theta.cos();
        let sin = bs.theta.sin();
        let d_phase = Complex64::from_polar(1.0, bs.phase);
        let max_n = 2 * self.cutoff as usize;
        let sqrt_fact = sqrt_factorials(max_n);

        let mut kept: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        // Dropped components are summed coherently per target tuple before
        // squaring, so interference among them is not double counted.
        let mut dropped: BTreeMap<Occupation, Complex64> = BTreeMap::new();

        for (occ, &amp) in &self.amplitudes {
            let na = occ[mode_i] as usize;
            let nb = occ[mode_j] as usize;
            let pre = amp / (sqrt_fact[na] * sqrt_fact[nb]);
            for k in 0..=na {
                for l in 0..=nb {
                    let nc = k + l;
                    let nd = na + nb - nc;
                    let mag = binomial(na, k)
                        * binomial(nb, l)
                        * cos.powi(k as i32)
                        * sin.powi((na - k) as i32)
                        * sin.powi(l as i32)
                        * (-cos).powi((nb - l) as i32)
                        * sqrt_fact[nc]
                        * sqrt_fact[nd];
                    let term = pre * mag * d_phase.powu(nd as u32);
                    if term.norm() < PRUNE_THRESHOLD {
                        continue;
                    }
                    let mut new_occ = occ.clone();
                    let target = if nc > self.cutoff as usize || nd > self.cutoff as usize {
                        // Record the would-be tuple (clamped) so coincident
                        // dropped terms still interfere before being counted.
                        new_occ[mode_i] = nc.min(255) as u8;
                        new_occ[mode_j] = nd.min(255) as u8;
                        &mut dropped
                    } else {
                        new_occ[mode_i] = nc as u8;
                        new_occ[mode_j] = nd as u8;
                        &mut kept
                    };
                    *target.entry(new_occ).or_insert(Complex64::ZERO) += term;
                }
            }
        }

        kept.retain(|_, amp| amp.norm() >= PRUNE_THRESHOLD);
        let lost: f64 = dropped.values().map(|a| a.norm_sqr()).sum();
        Ok(FockState {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amplitudes: kept,
            truncation_loss: self.truncation_loss + lost,
        })
    }

    /// Phase shift on one mode: each amplitude picks up `e^{i·n·phi}` where
    /// `n` is that mode's occupation.
    pub fn apply_phase(&self, mode: usize, phi: f64) -> Result<FockState> {
        self.check_mode(mode)?;
        if !phi.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, amp)| {
                let rot = Complex64::from_polar(1.0, phi * occ[mode] as f64);
                (occ.clone(), amp * rot)
            })
            .collect();
        Ok(FockState {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amplitudes,
            truncation_loss: self.truncation_loss,
        })
    }

    /// Photon-number distribution of one mode, all other modes traced out.
    ///
    /// The returned vector has `cutoff + 1` entries and sums to the state's
    /// squared norm.
    pub fn number_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let mut dist = vec![0.0; self.cutoff as usize + 1];
        for (occ, amp) in &self.amplitudes {
            dist[occ[mode] as usize] += amp.norm_sqr();
        }
        Ok(dist)
    }

    /// Distribution of the total photon number summed over `modes`
    /// (the marginal a detector blind to submode structure sees).
    pub fn total_number_distribution(&self, modes: &[usize]) -> Result<Vec<f64>> {
        if modes.is_empty() {
            return Err(Error::invalid("empty mode set"));
        }
        for &m in modes {
            self.check_mode(m)?;
        }
        let mut dist = vec![0.0; modes.len() * self.cutoff as usize + 1];
        for (occ, amp) in &self.amplitudes {
            let n: usize = modes.iter().map(|&m| occ[m] as usize).sum();
            dist[n] += amp.norm_sqr();
        }
        Ok(dist)
    }

    /// Second-order correlation at zero delay for one mode:
    /// `⟨n(n−1)⟩ / ⟨n⟩²` on the traced-out marginal.
    pub fn g2_zero(&self, mode: usize) -> Result<f64> {
        g2_from_distribution(&self.number_distribution(mode)?)
    }

    /// Project `mode` onto occupation `n`; the mode is removed from the
    /// returned (renormalized) state. A zero-probability outcome returns the
    /// empty state with probability 0 rather than an error.
    pub fn project(&self, mode: usize, n: u8) -> Result<(FockState, f64)> {
        self.check_mode(mode)?;
        if n > self.cutoff {
            return Err(Error::invalid(format!(
                "projection occupation {n} exceeds cutoff {}",
                self.cutoff
            )));
        }
        if self.mode_count == 1 {
            return Err(Error::invalid("cannot remove the last mode"));
        }
        let mut amplitudes: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        let mut prob = 0.0;
        for (occ, amp) in &self.amplitudes {
            if occ[mode] != n {
                continue;
            }
            prob += amp.norm_sqr();
            let mut new_occ = occ.clone();
            new_occ.remove(mode);
            amplitudes.insert(new_occ, *amp);
        }
        if prob > 0.0 {
            let scale = 1.0 / prob.sqrt();
            for amp in amplitudes.values_mut() {
                *amp *= scale;
            }
        } else {
            amplitudes.clear();
        }
        Ok((
            FockState {
                mode_count: self.mode_count - 1,
                cutoff: self.cutoff,
                amplitudes,
                truncation_loss: self.truncation_loss,
            },
            prob,
        ))
    }
}

/// `⟨n(n−1)⟩ / ⟨n⟩²` for an arbitrary photon-number distribution.
pub fn g2_from_distribution(dist: &[f64]) -> Result<f64> {
    let mean: f64 = dist
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum();
    if mean <= 0.0 {
        return Err(Error::undefined(
            "g2 requires a nonzero mean photon number",
        ));
    }
    let pairs: f64 = dist
        .iter()
        .enumerate()
        .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
        .sum();
    Ok(pairs / (mean * mean))
}

fn sqrt_factorials(max_n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max_n + 1);
    let mut fact = 1.0f64;
    table.push(1.0);
    for n in 1..=max_n {
        fact *= n as f64;
        table.push(fact.sqrt());
    }
    table
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut num = 1.0f64;
    for i in 0..k {
        num = num * (n - i) as f64 / (i + 1) as f64;
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const C1: Complex64 = Complex64::new(1.0, 0.0);

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vacuum_is_a_single_unit_amplitude() {
        let v = FockState::vacuum(1, 4).unwrap();
        assert_eq!(v.amplitude(&[0]), C1);
        assert_eq!(v.term_count(), 1);
        let v3 = FockState::vacuum(3, 2).unwrap();
        assert_eq!(v3.amplitude(&[0, 0, 0]), C1);
        assert!((v3.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_rejects_zero_modes() {
        assert!(matches!(
            FockState::vacuum(0, 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn from_terms_rejects_norm_above_one() {
        let err = FockState::from_terms(1, 2, vec![(vec![0], c(1.0)), (vec![1], c(0.1))]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tensor_concatenates_occupations() {
        let one = FockState::from_terms(1, 2, vec![(vec![1], c(1.0))]).unwrap();
        let zero = FockState::vacuum(1, 2).unwrap();
        let joint = one.tensor(&zero).unwrap();
        assert_eq!(joint.amplitude(&[1, 0]), C1);

        let sup = FockState::from_terms(
            1,
            2,
            vec![(vec![0], c(1.0 / 2f64.sqrt())), (vec![1], c(1.0 / 2f64.sqrt()))],
        )
        .unwrap();
        let joint = sup.tensor(&one).unwrap();
        assert!((joint.amplitude(&[0, 1]).re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((joint.amplitude(&[1, 1]).re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tensor_norm_is_multiplicative() {
        let a = FockState::from_terms(1, 2, vec![(vec![0], c(0.99f64.sqrt()))]).unwrap();
        let b = FockState::from_terms(1, 2, vec![(vec![1], c(0.98f64.sqrt()))]).unwrap();
        let joint = a.tensor(&b).unwrap();
        assert!((joint.norm_sqr() - 0.9702).abs() < 1e-12);
    }

    #[test]
    fn tensor_rejects_cutoff_mismatch() {
        let a = FockState::vacuum(1, 2).unwrap();
        let b = FockState::vacuum(1, 3).unwrap();
        assert!(matches!(a.tensor(&b), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_photon_splits_evenly() {
        let state = FockState::from_terms(2, 2, vec![(vec![1, 0], c(1.0))]).unwrap();
        let out = state
            .apply_beamsplitter(0, 1, &BeamSplitter::fifty_fifty())
            .unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((out.amplitude(&[1, 0]).re - r).abs() < 1e-14);
        assert!((out.amplitude(&[0, 1]).re - r).abs() < 1e-14);
    }

    #[test]
    fn hom_dip_is_exact() {
        let state = FockState::from_terms(2, 2, vec![(vec![1, 1], c(1.0))]).unwrap();
        let out = state
            .apply_beamsplitter(0, 1, &BeamSplitter::fifty_fifty())
            .unwrap();
        assert!(out.amplitude(&[1, 1]).norm() <= 1e-14);
        let r = 1.0 / 2f64.sqrt();
        assert!((out.amplitude(&[2, 0]).re - r).abs() < 1e-14);
        assert!((out.amplitude(&[0, 2]).re + r).abs() < 1e-14);
    }

    #[test]
    fn reverse_hom_restores_the_pair() {
        let r = 1.0 / 2f64.sqrt();
        let state =
            FockState::from_terms(2, 2, vec![(vec![2, 0], c(r)), (vec![0, 2], c(-r))])
                .unwrap();
        let out = state
            .apply_beamsplitter(0, 1, &BeamSplitter::fifty_fifty())
            .unwrap();
        let p11 = out.amplitude(&[1, 1]).norm_sqr();
        assert!((p11 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn beamsplitter_rejects_bad_modes() {
        let state = FockState::vacuum(2, 2).unwrap();
        let bs = BeamSplitter::fifty_fifty();
        assert!(state.apply_beamsplitter(0, 2, &bs).is_err());
        assert!(state.apply_beamsplitter(1, 1, &bs).is_err());
        assert!(BeamSplitter::new(FRAC_PI_2 + 0.1, 0.0).is_err());
    }

    #[test]
    fn phase_rotates_by_occupation() {
        let state = FockState::from_terms(1, 2, vec![(vec![2], c(1.0))]).unwrap();
        let out = state.apply_phase(0, PI).unwrap();
        assert!((out.amplitude(&[2]) - C1).norm() < 1e-14);

        let one = FockState::from_terms(1, 2, vec![(vec![1], c(1.0))]).unwrap();
        let out = one.apply_phase(0, PI).unwrap();
        assert!((out.amplitude(&[1]) + C1).norm() < 1e-14);

        let r = 1.0 / 2f64.sqrt();
        let sup = FockState::from_terms(1, 2, vec![(vec![0], c(r)), (vec![2], c(r))])
            .unwrap();
        let out = sup.apply_phase(0, FRAC_PI_2).unwrap();
        assert!((out.amplitude(&[0]).re - r).abs() < 1e-14);
        assert!((out.amplitude(&[2]).re + r).abs() < 1e-14);
        assert!(sup.apply_phase(1, 0.1).is_err());
    }

    #[test]
    fn number_distribution_traces_other_modes() {
        let state = FockState::from_terms(2, 2, vec![(vec![1, 1], c(1.0))]).unwrap();
        let dist = state.number_distribution(0).unwrap();
        assert_eq!(dist.len(), 3);
        assert!((dist[1] - 1.0).abs() < 1e-15);

        let r = 1.0 / 2f64.sqrt();
        let pair =
            FockState::from_terms(2, 2, vec![(vec![2, 0], c(r)), (vec![0, 2], c(-r))])
                .unwrap();
        let dist = pair.number_distribution(0).unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-15);
        assert!((dist[2] - 0.5).abs() < 1e-15);
        assert!(pair.number_distribution(2).is_err());
    }

    #[test]
    fn g2_of_a_single_photon_is_zero() {
        let one = FockState::from_terms(1, 3, vec![(vec![1], c(1.0))]).unwrap();
        assert_eq!(one.g2_zero(0).unwrap(), 0.0);
    }

    #[test]
    fn g2_of_vacuum_is_undefined() {
        let v = FockState::vacuum(1, 3).unwrap();
        assert!(matches!(
            v.g2_zero(0),
            Err(Error::UndefinedStatistic(_))
        ));
    }

    #[test]
    fn projection_post_selects_and_renormalizes() {
        let r = 1.0 / 2f64.sqrt();
        let split =
            FockState::from_terms(2, 2, vec![(vec![1, 0], c(r)), (vec![0, 1], c(r))])
                .unwrap();
        let (state, p) = split.project(1, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(state.mode_count(), 1);
        assert!((state.amplitude(&[1]).re - 1.0).abs() < 1e-12);

        let pair = FockState::from_terms(2, 2, vec![(vec![1, 1], c(1.0))]).unwrap();
        let (state, p) = pair.project(1, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!((state.amplitude(&[1]).re - 1.0).abs() < 1e-15);

        let vac = FockState::vacuum(2, 2).unwrap();
        let (state, p) = vac.project(1, 2).unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(state.term_count(), 0);
    }

    #[test]
    fn insert_vacuum_mode_shifts_occupations() {
        let state = FockState::from_terms(2, 2, vec![(vec![1, 2], c(1.0))]).unwrap();
        let out = state.insert_vacuum_mode(1).unwrap();
        assert_eq!(out.mode_count(), 3);
        assert_eq!(out.amplitude(&[1, 0, 2]), C1);
    }

    #[test]
    fn truncation_loss_is_accounted() {
        // Two photons per input port at cutoff 2: the |4,0⟩ and |0,4⟩
        // components of the output cannot be represented.
        let state = FockState::from_terms(2, 2, vec![(vec![2, 2], c(1.0))]).unwrap();
        let out = state
            .apply_beamsplitter(0, 1, &BeamSplitter::fifty_fifty())
            .unwrap();
        assert!(out.truncation_loss() > 0.0);
        assert!((out.norm_sqr() + out.truncation_loss() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fifty_fifty_applied_twice_is_identity() {
        let r = 1.0 / 3f64.sqrt();
        let state = FockState::from_terms(
            2,
            3,
            vec![
                (vec![1, 0], c(r)),
                (vec![0, 1], Complex64::new(0.0, r)),
                (vec![1, 1], c(r)),
            ],
        )
        .unwrap();
        let bs = BeamSplitter::fifty_fifty();
        let out = state
            .apply_beamsplitter(0, 1, &bs)
            .unwrap()
            .apply_beamsplitter(0, 1, &bs)
            .unwrap();
        let fidelity = state.overlap(&out).unwrap().norm_sqr();
        assert!((fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_zero_beamsplitter_is_identity_with_phase_on_second_mode() {
        let state = FockState::from_terms(2, 3, vec![(vec![1, 2], c(1.0))]).unwrap();
        let bs = BeamSplitter::new(0.0, FRAC_PI_4).unwrap();
        let out = state.apply_beamsplitter(0, 1, &bs).unwrap();
        // θ = 0: mode j passes straight into the reflected arm and its two
        // photons pick up the arm phase twice; the sign comes from (−cos θ)².
        let expected = Complex64::from_polar(1.0, 2.0 * FRAC_PI_4);
        assert!((out.amplitude(&[1, 2]) - expected).norm() < 1e-14);
    }
}
