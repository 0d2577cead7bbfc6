//! Separable estimation protocols and their Monte Carlo averages.
//!
//! The one-step adaptive protocol spends `N₀ = round(N^α)` copies on
//! three-axis tomography, estimates the direction `n̂` from the outcome
//! frequencies, and measures the remaining `N₁ = N − N₀` copies along the
//! estimate. The purity guess is `R = 2N₊/N₁ − 1`, clamped to `[0, 1]`.
//!
//! The greedy protocol measures every copy along one fixed axis and reads
//! the purity off as `|2N₊/N − 1|`. It does not converge to fidelity one.

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::prior::PurityPrior;
use crate::rng::trial_stream;
use crate::simkit::{measure_axis, tomography_counts, AxisCounts};
use crate::state::{fidelity_unchecked, BlochVector, PurityEstimate, UnitVector};

#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    total_copies: u64,
    alpha: f64,
    prior: PurityPrior,
    tomography_copies: u64,
}

impl AdaptiveConfig {
    pub fn new(total_copies: u64, alpha: f64, prior: PurityPrior) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha = {alpha} not in (0, 1)")));
        }
        let tomography_copies = ((total_copies as f64).powf(alpha).round() as u64).max(3);
        if total_copies < tomography_copies + 1 {
            return Err(Error::InvalidConfig(format!(
                "N = {total_copies} leaves no copies after {tomography_copies} tomography shots"
            )));
        }
        Ok(Self {
            total_copies,
            alpha,
            prior,
            tomography_copies,
        })
    }

    pub fn total_copies(&self) -> u64 {
        self.total_copies
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn prior(&self) -> &PurityPrior {
        &self.prior
    }

    /// `N₀`, copies spent on tomography.
    pub fn tomography_copies(&self) -> u64 {
        self.tomography_copies
    }

    /// `N₁ = N − N₀`, copies measured along the estimated direction.
    pub fn measured_copies(&self) -> u64 {
        self.total_copies - self.tomography_copies
    }

    /// Open interval of `α` for which the joint bound is reached under a
    /// prior with exponent `λ`: `(max{1/2, 1/(2 − λ)}, 1)`.
    pub fn alpha_window(lambda: f64) -> (f64, f64) {
        (0.5f64.max(1.0 / (2.0 - lambda)), 1.0)
    }

    pub fn alpha_in_window(&self) -> bool {
        let (lo, hi) = Self::alpha_window(self.prior.lambda());
        self.alpha > lo && self.alpha < hi
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyConfig {
    pub copies: u64,
    pub axis: UnitVector,
}

/// Three-axis tomography alone: direction from the frequency vector `v`,
/// purity guessed as `|v|`.
#[derive(Debug, Clone, Copy)]
pub struct TomographyConfig {
    pub copies: u64,
}

#[derive(Debug, Clone)]
pub enum Protocol {
    Adaptive(AdaptiveConfig),
    Greedy(GreedyConfig),
    Tomography(TomographyConfig),
}

impl Protocol {
    pub fn run<R: Rng + ?Sized>(&self, state: &BlochVector, rng: &mut R) -> Result<ProtocolTrial> {
        match self {
            Protocol::Adaptive(cfg) => run_adaptive(state, cfg, rng),
            Protocol::Greedy(g) => run_greedy(state, g.copies, &g.axis, rng),
            Protocol::Tomography(t) => run_tomography(state, t.copies, rng),
        }
    }
}

/// Where trial states come from.
#[derive(Debug, Clone)]
pub enum StateSource {
    /// Radius from the prior, isotropic direction.
    Prior(PurityPrior),
    /// Fixed radius, isotropic direction.
    FixedPurity(f64),
}

impl StateSource {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BlochVector> {
        match self {
            StateSource::Prior(prior) => Ok(prior.sample_state(rng)),
            StateSource::FixedPurity(r) => {
                let n: [f64; 3] = UnitSphere.sample(rng);
                BlochVector::from_purity(*r, UnitVector::normalize(n)?)
            }
        }
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolTrial {
    pub true_state: BlochVector,
    pub estimated_axis: UnitVector,
    /// `n̂·m̂`; `None` for the maximally mixed state, which has no direction.
    pub cos_theta: Option<f64>,
    /// Angle between `n̂` and the estimated axis.
    pub theta: Option<f64>,
    pub estimate: PurityEstimate,
    pub fidelity: f64,
}

impl ProtocolTrial {
    fn new(state: &BlochVector, axis: UnitVector, estimate: PurityEstimate) -> Self {
        let direction = state.direction();
        Self {
            true_state: *state,
            estimated_axis: axis,
            cos_theta: direction.map(|n| n.dot(&axis).clamp(-1.0, 1.0)),
            theta: direction.map(|n| n.angle_to(&axis)),
            estimate,
            fidelity: fidelity_unchecked(state.purity(), estimate.value),
        }
    }
}

/// Direction from tomography frequencies: `v_i = 2·plus_i/shots_i − 1`,
/// normalized; `ẑ` when `v = 0`.
pub fn estimate_direction(counts: &AxisCounts) -> Result<UnitVector> {
    let axes = counts.axes();
    if let Some(empty) = axes.iter().find(|c| c.shots() == 0) {
        return Err(Error::TooFewShots {
            needed: 1,
            got: empty.shots(),
        });
    }
    let v = axes.map(|c| c.mean_outcome());
    Ok(UnitVector::normalize(v).unwrap_or(UnitVector::Z))
}

/// Second step of the adaptive protocol on its own: `shots` copies along
/// `axis`, purity read off as `2N₊/shots − 1`.
pub fn measure_purity_along<R: Rng + ?Sized>(
    state: &BlochVector,
    axis: UnitVector,
    shots: u64,
    rng: &mut R,
) -> Result<ProtocolTrial> {
    if shots == 0 {
        return Err(Error::TooFewShots { needed: 1, got: 0 });
    }
    let counts = measure_axis(state, &axis, shots, rng);
    let estimate = PurityEstimate::from_raw(counts.mean_outcome());
    Ok(ProtocolTrial::new(state, axis, estimate))
}

pub fn run_adaptive<R: Rng + ?Sized>(
    state: &BlochVector,
    cfg: &AdaptiveConfig,
    rng: &mut R,
) -> Result<ProtocolTrial> {
    let counts = tomography_counts(state, cfg.tomography_copies(), rng)?;
    let axis = estimate_direction(&counts)?;
    measure_purity_along(state, axis, cfg.measured_copies(), rng)
}

pub fn run_greedy<R: Rng + ?Sized>(
    state: &BlochVector,
    copies: u64,
    axis: &UnitVector,
    rng: &mut R,
) -> Result<ProtocolTrial> {
    if copies == 0 {
        return Err(Error::TooFewShots { needed: 1, got: 0 });
    }
    let counts = measure_axis(state, axis, copies, rng);
    let estimate = PurityEstimate::from_raw(counts.mean_outcome().abs());
    Ok(ProtocolTrial::new(state, *axis, estimate))
}

pub fn run_tomography<R: Rng + ?Sized>(
    state: &BlochVector,
    copies: u64,
    rng: &mut R,
) -> Result<ProtocolTrial> {
    let counts = tomography_counts(state, copies, rng)?;
    let v = counts.axes().map(|c| c.mean_outcome());
    let length = v[0].hypot(v[1]).hypot(v[2]);
    let axis = estimate_direction(&counts)?;
    Ok(ProtocolTrial::new(state, axis, PurityEstimate::from_raw(length)))
}

/// Runs `trials` independent trials. Trial `i` uses only the stream
/// `(master_seed, i)`; output order is trial order.
pub fn simulate_trials(
    protocol: &Protocol,
    source: &StateSource,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<ProtocolTrial>> {
    if let StateSource::FixedPurity(r) = source {
        crate::state::check_purity("r", *r)?;
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_stream(master_seed, i);
            let state = source.draw(&mut rng)?;
            protocol.run(&state, &mut rng)
        })
        .collect()
}

/// Sample mean and its standard error, summed in slice order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values<I: IntoIterator<Item = f64> + Clone>(values: I) -> Self {
        let mut sum = CompensatedSum::new();
        let mut count = 0usize;
        for v in values.clone() {
            sum.add(v);
            count += 1;
        }
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                count,
            };
        }
        let mean = sum.value() / count as f64;
        let mut sq = CompensatedSum::new();
        for v in values {
            sq.add((v - mean) * (v - mean));
        }
        let std_error = if count > 1 {
            (sq.value() / (count - 1) as f64 / count as f64).sqrt()
        } else {
            f64::NAN
        };
        Self {
            mean,
            std_error,
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub trials: u64,
    pub master_seed: u64,
    /// `⟨Θ²⟩` over trials whose state has a direction.
    pub mean_theta2: f64,
    pub theta2_std_error: f64,
    pub mean_theta4: f64,
    pub theta4_std_error: f64,
    pub mean_cos_theta: f64,
    pub mean_raw_estimate: f64,
    pub raw_estimate_std_error: f64,
    pub mean_estimate: f64,
    pub estimate_std_error: f64,
}

impl McSummary {
    pub fn from_trials(trials: &[ProtocolTrial], master_seed: u64) -> Result<Self> {
        if trials.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: trials.len(),
            });
        }
        let fid = MeanEstimate::from_values(trials.iter().map(|t| t.fidelity));
        let theta2 = MeanEstimate::from_values(trials.iter().filter_map(|t| t.theta).map(|a| a * a));
        let theta4 =
            MeanEstimate::from_values(trials.iter().filter_map(|t| t.theta).map(|a| a.powi(4)));
        let cos = MeanEstimate::from_values(trials.iter().filter_map(|t| t.cos_theta));
        let raw = MeanEstimate::from_values(trials.iter().map(|t| t.estimate.raw));
        let est = MeanEstimate::from_values(trials.iter().map(|t| t.estimate.value));
        Ok(Self {
            mean_fidelity: fid.mean,
            std_error: fid.std_error,
            trials: trials.len() as u64,
            master_seed,
            mean_theta2: theta2.mean,
            theta2_std_error: theta2.std_error,
            mean_theta4: theta4.mean,
            theta4_std_error: theta4.std_error,
            mean_cos_theta: cos.mean,
            mean_raw_estimate: raw.mean,
            raw_estimate_std_error: raw.std_error,
            mean_estimate: est.mean,
            estimate_std_error: est.std_error,
        })
    }
}

/// Monte Carlo average of `protocol` over states from `source`.
pub fn mc_average(
    protocol: &Protocol,
    source: &StateSource,
    trials: u64,
    master_seed: u64,
) -> Result<McSummary> {
    if trials < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: trials as usize,
        });
    }
    let outcomes = simulate_trials(protocol, source, trials, master_seed)?;
    McSummary::from_trials(&outcomes, master_seed)
}

/// Leading-order fixed-`r` fidelity of the adaptive protocol:
/// `1 − 1/(2N₁) + r²/(1 − r²)·(⟨Θ²⟩/(4N₁) − ⟨Θ⁴⟩/8)`.
pub fn predicted_fixed_r_fidelity(r: f64, n1: u64, theta2: f64, theta4: f64) -> Result<f64> {
    crate::state::check_purity("r", r)?;
    if r == 1.0 {
        return Err(Error::Singular("fixed-r fidelity expansion"));
    }
    if n1 == 0 || !(theta2 >= 0.0 && theta4 >= 0.0) {
        return Err(Error::InvalidConfig(
            "need N1 >= 1 and non-negative angular moments".into(),
        ));
    }
    let n1 = n1 as f64;
    let base = 1.0 - 0.5 / n1;
    if r == 0.0 {
        return Ok(base);
    }
    let ratio = r * r / ((1.0 - r) * (1.0 + r));
    Ok(base + ratio * (theta2 / (4.0 * n1) - theta4 / 8.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::CountPair;

    fn counts(freqs: [(u64, u64); 3]) -> AxisCounts {
        let pair = |(plus, shots): (u64, u64)| CountPair {
            plus,
            minus: shots - plus,
        };
        AxisCounts {
            x: pair(freqs[0]),
            y: pair(freqs[1]),
            z: pair(freqs[2]),
        }
    }

    #[test]
    fn direction_from_frequencies() {
        let d = estimate_direction(&counts([(4, 4), (2, 4), (2, 4)])).unwrap();
        assert_eq!(d, UnitVector::X);
        let d = estimate_direction(&counts([(2, 4), (3, 6), (1, 2)])).unwrap();
        assert_eq!(d, UnitVector::Z);
        assert!(estimate_direction(&counts([(0, 0), (1, 2), (1, 2)])).is_err());
    }

    #[test]
    fn config_copy_split() {
        let cfg = AdaptiveConfig::new(1_000_000, 0.8, PurityPrior::bures()).unwrap();
        assert_eq!(cfg.tomography_copies(), 63_096);
        assert_eq!(cfg.measured_copies(), 936_904);
        assert!(cfg.alpha_in_window());
        let cfg = AdaptiveConfig::new(10, 0.1, PurityPrior::bures()).unwrap();
        assert_eq!(cfg.tomography_copies(), 3);
        assert!(!cfg.alpha_in_window());
        assert!(AdaptiveConfig::new(3, 0.5, PurityPrior::bures()).is_err());
        assert!(AdaptiveConfig::new(100, 1.0, PurityPrior::bures()).is_err());
    }

    #[test]
    fn alpha_window_bounds() {
        assert_eq!(AdaptiveConfig::alpha_window(0.0), (0.5, 1.0));
        let (lo, _) = AdaptiveConfig::alpha_window(0.5);
        assert!((lo - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(AdaptiveConfig::alpha_window(-1.0).0, 0.5);
    }

    #[test]
    fn aligned_pure_state_is_estimated_exactly() {
        let state = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let mut rng = trial_stream(9, 0);
        let t = measure_purity_along(&state, UnitVector::Z, 5000, &mut rng).unwrap();
        assert_eq!(t.estimate.value, 1.0);
        assert_eq!(t.fidelity, 1.0);
        assert_eq!(t.cos_theta, Some(1.0));
    }

    #[test]
    fn greedy_orthogonal_and_aligned() {
        let mut rng = trial_stream(10, 0);
        let aligned = BlochVector::new(0.0, 0.0, 0.9).unwrap();
        let t = run_greedy(&aligned, 1_000_000, &UnitVector::Z, &mut rng).unwrap();
        assert!((t.estimate.value - 0.9).abs() < 0.003);
        let orthogonal = BlochVector::new(0.9, 0.0, 0.0).unwrap();
        let t = run_greedy(&orthogonal, 1_000_000, &UnitVector::Z, &mut rng).unwrap();
        assert!(t.estimate.value < 0.005);
        assert!((t.fidelity - 0.19f64.sqrt()).abs() < 0.01);
        assert_eq!(t.cos_theta, Some(0.0));
    }

    #[test]
    fn fixed_r_prediction_limits() {
        let n1 = 1000;
        assert_eq!(predicted_fixed_r_fidelity(0.7, n1, 0.0, 0.0).unwrap(), 1.0 - 0.0005);
        assert_eq!(predicted_fixed_r_fidelity(0.0, n1, 0.3, 0.2).unwrap(), 1.0 - 0.0005);
        assert_eq!(
            predicted_fixed_r_fidelity(1.0, n1, 0.0, 0.0),
            Err(Error::Singular("fixed-r fidelity expansion"))
        );
    }

    #[test]
    fn summary_needs_two_trials() {
        let cfg = AdaptiveConfig::new(100, 0.5, PurityPrior::bures()).unwrap();
        let err = mc_average(&Protocol::Adaptive(cfg), &StateSource::FixedPurity(0.5), 1, 1);
        assert!(matches!(err, Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn mean_estimate_basic() {
        let m = MeanEstimate::from_values([1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std_error - 1.0).abs() < 1e-15);
    }
}
