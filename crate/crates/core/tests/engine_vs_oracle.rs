//! The stochastic engine against the analytic moments: ensemble moment
//! curves must agree with the frequency-quadrature oracle within Monte
//! Carlo error, for quantum and classical noise and at strong coupling.

use quasim::bath::{BathSpec, NoiseKind, OscillatorParams, SpectralDensity};
use quasim::engine::{self, InitialState, Integrator, SimConfig};
use quasim::oracle;

fn config(n_traj: usize, seed: u64) -> SimConfig {
    SimConfig {
        dt: 0.05,
        t_final: 40.0,
        n_traj,
        master_seed: seed,
        initial: InitialState {
            mean_x: 0.0,
            mean_p: 0.0,
            cov_xx: 0.5,
            cov_xp: 0.0,
            cov_pp: 0.5,
        },
        integrator: Integrator::Embedded,
        sample_every: 80,
    }
}

fn check_against_oracle(coupling: f64, kind: NoiseKind, n_traj: usize, seed: u64) {
    let j = SpectralDensity::lorentzian(coupling, 0.5, 0.1).unwrap();
    let bath = BathSpec::new(j.clone(), 0.1, kind).unwrap();
    let params = OscillatorParams::default();
    let cfg = config(n_traj, seed);

    let stats = engine::run_ensemble(&cfg, &params, &bath).unwrap();
    let g = oracle::g_functions(&params, &j).unwrap();

    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (k, &t) in stats.times.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let (oxx, oxp, opp) =
            oracle::covariance_evolution(&g, &bath, (0.5, 0.0, 0.5), t).unwrap();
        for (label, got, se, want) in [
            ("xx", stats.cov_xx[k], stats.se_cov_xx[k], oxx),
            ("xp", stats.cov_xp[k], stats.se_cov_xp[k], oxp),
            ("pp", stats.cov_pp[k], stats.se_cov_pp[k], opp),
        ] {
            let pull = (got - want).abs() / se;
            worst = worst.max(pull);
            assert!(
                pull <= 3.5,
                "sigma_{label} at t={t}: {got} vs {want} ({pull:.2} se)"
            );
        }
        checked += 1;
    }
    assert!(checked >= 8, "only {checked} checkpoints");
    // if all pulls were tiny the error bars would be suspect
    assert!(worst > 0.05, "suspiciously small worst pull {worst}");
}

#[test]
fn quantum_ensemble_tracks_oracle() {
    check_against_oracle(0.3, NoiseKind::Quantum, 3000, 2024);
}

#[test]
fn classical_ensemble_tracks_oracle() {
    check_against_oracle(0.3, NoiseKind::Classical, 3000, 99);
}

#[test]
fn strong_coupling_ensemble_tracks_oracle() {
    check_against_oracle(2.0, NoiseKind::Quantum, 3000, 512);
}

#[test]
fn means_follow_response_functions() {
    // nonzero initial means, zero initial spread: mu(t) = (g1, g3) mu0
    let j = SpectralDensity::lorentzian(0.3, 0.5, 0.1).unwrap();
    let bath = BathSpec::new(j.clone(), 0.1, NoiseKind::Quantum).unwrap();
    let params = OscillatorParams::default();
    let cfg = SimConfig {
        initial: InitialState {
            mean_x: 1.0,
            mean_p: -0.5,
            cov_xx: 0.0,
            cov_xp: 0.0,
            cov_pp: 0.0,
        },
        n_traj: 400,
        t_final: 30.0,
        ..config(400, 7)
    };
    let stats = engine::run_ensemble(&cfg, &params, &bath).unwrap();
    let g = oracle::g_functions(&params, &j).unwrap();
    for (k, &t) in stats.times.iter().enumerate() {
        let (mx, mp) = oracle::mean_evolution(&g, (1.0, -0.5), t).unwrap();
        let pull_x = (stats.mean_x[k] - mx).abs() / stats.se_mean_x[k].max(1e-9);
        let pull_p = (stats.mean_p[k] - mp).abs() / stats.se_mean_p[k].max(1e-9);
        assert!(pull_x <= 4.0, "mean_x at t={t}: pull {pull_x:.2}");
        assert!(pull_p <= 4.0, "mean_p at t={t}: pull {pull_p:.2}");
    }
}

#[test]
fn convolution_ensemble_agrees_with_embedded() {
    // same seeds, different integrators: moments agree to O(dt^2), far
    // below the statistical spread
    let j = SpectralDensity::lorentzian(0.3, 0.5, 0.1).unwrap();
    let bath = BathSpec::new(j, 0.1, NoiseKind::Quantum).unwrap();
    let params = OscillatorParams::default();
    let mut cfg = SimConfig {
        dt: 0.02,
        t_final: 10.0,
        n_traj: 64,
        sample_every: 100,
        ..config(64, 31)
    };
    let a = engine::run_ensemble(&cfg, &params, &bath).unwrap();
    cfg.integrator = Integrator::Convolution;
    let b = engine::run_ensemble(&cfg, &params, &bath).unwrap();
    for k in 0..a.times.len() {
        // the convolution scheme is O(dt^2); 0.02^2 * O(1) constants
        assert!(
            (a.cov_xx[k] - b.cov_xx[k]).abs() < 1e-3,
            "t={}: {} vs {}",
            a.times[k],
            a.cov_xx[k],
            b.cov_xx[k]
        );
        assert!((a.mean_x[k] - b.mean_x[k]).abs() < 1e-3);
    }
}

#[test]
fn classical_uncertainty_product_collapses() {
    // at T = 0.1 the classical ensemble sinks below the quantum bound
    let j = SpectralDensity::lorentzian(0.3, 0.5, 0.1).unwrap();
    let bath = BathSpec::new(j, 0.1, NoiseKind::Classical).unwrap();
    let cfg = SimConfig {
        t_final: 120.0,
        ..config(2000, 5)
    };
    let stats = engine::run_ensemble(&cfg, &OscillatorParams::default(), &bath).unwrap();
    let min_product = stats
        .times
        .iter()
        .enumerate()
        .map(|(k, _)| stats.cov_xx[k] * stats.cov_pp[k] - stats.cov_xp[k].powi(2))
        .fold(f64::INFINITY, f64::min);
    assert!(min_product < 0.25, "min uncertainty product {min_product}");
}
