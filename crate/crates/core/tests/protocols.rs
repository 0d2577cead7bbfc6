use purity_core::protocols::{
    mc_average, predicted_fixed_r_fidelity, simulate_trials, AdaptiveConfig, GreedyConfig,
    Protocol, StateSource, TomographyConfig,
};
use purity_core::rng::trial_stream;
use purity_core::simkit::{measure_axis, tomography_counts};
use purity_core::{BlochVector, PurityPrior, UnitVector};
use rand::Rng;

fn tomography(n0: u64) -> Protocol {
    Protocol::Tomography(TomographyConfig { copies: n0 })
}

#[test]
fn measured_projection_is_unbiased() {
    let mut pick = trial_stream(500, 0);
    for s in 0..5 {
        let r: f64 = pick.random_range(0.0..1.0);
        let state = StateSource::FixedPurity(r).draw(&mut pick).unwrap();
        for axis in [UnitVector::X, UnitVector::Y, UnitVector::Z] {
            let mut rng = trial_stream(501, s * 3);
            let reps = 10_000;
            let vals: Vec<f64> = (0..reps)
                .map(|_| measure_axis(&state, &axis, 1000, &mut rng).mean_outcome())
                .collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let want = state.projection(&axis);
            assert!((mean - want).abs() < 4.0 * se, "{mean} vs {want} ± {se}");
        }
    }
}

#[test]
fn tomography_of_pure_z_state() {
    let state = BlochVector::new(0.0, 0.0, 1.0).unwrap();
    let mut rng = trial_stream(502, 0);
    let c = tomography_counts(&state, 30_000, &mut rng).unwrap();
    assert_eq!(c.z.plus, 10_000);
    let se = (0.25f64 / 10_000.0).sqrt();
    for pair in [c.x, c.y] {
        assert!((pair.plus as f64 / 1e4 - 0.5).abs() < 3.0 * se);
    }
}

#[test]
fn identical_seeds_identical_results_across_pools() {
    let cfg = AdaptiveConfig::new(100_000, 0.8, PurityPrior::bures()).unwrap();
    let protocol = Protocol::Adaptive(cfg);
    let source = StateSource::Prior(PurityPrior::bures());
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_average(&protocol, &source, 3000, 42).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, run(3));
    let again = mc_average(&protocol, &source, 2, 42).unwrap();
    assert_eq!(again, mc_average(&protocol, &source, 2, 42).unwrap());
}

#[test]
fn tomography_angle_law() {
    let trials = 20_000;
    let mut theta4 = Vec::new();
    for &n0 in &[3_000u64, 30_000] {
        let mut row = Vec::new();
        for &r in &[0.3, 0.5, 0.8, 1.0] {
            let s = mc_average(&tomography(n0), &StateSource::FixedPurity(r), trials, 7).unwrap();
            let want = 3.0 / n0 as f64 * (1.0 / (r * r) - 0.2);
            let got = s.mean_theta2 / 2.0;
            let se = s.theta2_std_error / 2.0;
            assert!(
                (got - want).abs() <= 0.05 * want + 3.0 * se,
                "N0={n0} r={r}: {got} vs {want} (se {se})"
            );
            row.push(s.mean_theta4);
        }
        theta4.push(row);
    }
    for i in 0..4 {
        let slope = (theta4[1][i] / theta4[0][i]).ln() / 10f64.ln();
        assert!((slope + 2.0).abs() < 0.15, "Θ⁴ slope {slope}");
    }
}

#[test]
fn adaptive_estimate_tracks_projected_purity() {
    // R ~ N(r·cosΘ, ·) for a fixed state.
    let cfg = AdaptiveConfig::new(20_000, 0.6, PurityPrior::bures()).unwrap();
    let state = BlochVector::new(0.3, -0.4, 0.2).unwrap();
    let r = state.purity();
    let trials = 20_000u64;
    let outcomes: Vec<_> = (0..trials)
        .map(|i| {
            let mut rng = trial_stream(900, i);
            purity_core::protocols::run_adaptive(&state, &cfg, &mut rng).unwrap()
        })
        .collect();
    let n = trials as f64;
    let diffs: Vec<f64> = outcomes
        .iter()
        .map(|t| t.estimate.value - r * t.cos_theta.unwrap())
        .collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 3.0 * (var / n).sqrt(), "bias {mean}");
}

#[test]
fn maximally_mixed_estimates_centre_on_zero() {
    let cfg = AdaptiveConfig::new(10_000, 0.8, PurityPrior::bures()).unwrap();
    let s = mc_average(&Protocol::Adaptive(cfg), &StateSource::FixedPurity(0.0), 100_000, 3).unwrap();
    assert!(s.mean_raw_estimate.abs() < 3.0 * s.raw_estimate_std_error);
    assert!(s.mean_theta2.is_nan());
}

#[test]
fn pure_states_are_accepted_in_fixed_r_mode() {
    let cfg = AdaptiveConfig::new(10_000, 0.8, PurityPrior::bures()).unwrap();
    let trials = simulate_trials(&Protocol::Adaptive(cfg), &StateSource::FixedPurity(1.0), 50, 4).unwrap();
    assert!(trials.iter().all(|t| t.true_state.purity() > 1.0 - 1e-15 && t.fidelity > 0.99));
    assert!(simulate_trials(&tomography(30), &StateSource::FixedPurity(1.5), 5, 1).is_err());
}

#[test]
fn greedy_fidelity_plateaus() {
    let greedy = |n: u64| {
        let p = Protocol::Greedy(GreedyConfig { copies: n, axis: UnitVector::Z });
        mc_average(&p, &StateSource::Prior(PurityPrior::bures()), 20_000, 5).unwrap()
    };
    let low = greedy(10_000);
    let high = greedy(1_000_000);
    assert!((low.mean_fidelity - high.mean_fidelity).abs() < 0.01);
    assert!(low.mean_fidelity < 0.95 && high.mean_fidelity < 0.95);
}

#[test]
fn small_alpha_loses_to_window_alpha() {
    let prior = PurityPrior::bures();
    let gap = |alpha: f64| {
        let cfg = AdaptiveConfig::new(1_000_000, alpha, prior.clone()).unwrap();
        let s = mc_average(&Protocol::Adaptive(cfg), &StateSource::Prior(prior.clone()), 20_000, 6)
            .unwrap();
        1e6 * (1.0 - s.mean_fidelity)
    };
    let outside = gap(0.45);
    let inside = gap(0.8);
    assert!(outside > inside, "α=0.45: {outside}, α=0.8: {inside}");
}

#[test]
fn fixed_r_fidelity_follows_expansion() {
    let cfg = AdaptiveConfig::new(1_000_000, 0.8, PurityPrior::bures()).unwrap();
    let n1 = cfg.measured_copies();
    let s = mc_average(&Protocol::Adaptive(cfg), &StateSource::FixedPurity(0.7), 100_000, 8).unwrap();
    let predicted = predicted_fixed_r_fidelity(0.7, n1, s.mean_theta2, s.mean_theta4).unwrap();
    assert!(
        (s.mean_fidelity - predicted).abs() < 3.0 * s.std_error,
        "{} vs {predicted} (se {})",
        s.mean_fidelity,
        s.std_error
    );
}
