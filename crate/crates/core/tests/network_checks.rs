//! Network module against the single-oscillator machinery and against its
//! own stochastic route: reduction invariants, energy balance, and the
//! two-oscillator transport setup.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use quasim::bath::{BathSpec, NoiseKind, OscillatorParams, SpectralDensity};
use quasim::engine::{self, InitialState, Integrator, SimConfig};
use quasim::network::{self, Attachment, NetworkSpec};
use quasim::oracle;

fn lorentzian(coupling: f64, width: f64) -> SpectralDensity {
    SpectralDensity::lorentzian(coupling, 0.5, width).unwrap()
}

fn single_osc_network(params: &OscillatorParams, bath: BathSpec) -> NetworkSpec {
    NetworkSpec {
        masses: DMatrix::from_element(1, 1, params.mass),
        potential: DMatrix::from_element(
            1,
            1,
            params.mass * params.frequency * params.frequency,
        ),
        attachments: vec![Attachment {
            oscillators: vec![0],
            bath,
        }],
        counter_term: params.counter_term,
    }
}

#[test]
fn one_oscillator_network_matches_single_oscillator_steady_state() {
    let params = OscillatorParams::default();
    let bath = BathSpec::new(lorentzian(0.3, 0.1), 0.1, NoiseKind::Quantum).unwrap();
    let net = network::build_network(&single_osc_network(&params, bath.clone())).unwrap();
    let ss = network::network_steady_covariances(&net).unwrap();
    let single = oracle::steady_covariances_quadrature(&params, &bath).unwrap();
    assert_relative_eq!(ss.c_xx[(0, 0)], single.sigma_xx, max_relative = 1e-8);
    assert_relative_eq!(ss.c_pp[(0, 0)], single.sigma_pp, max_relative = 1e-8);
    assert!(ss.c_xp[(0, 0)].abs() < 1e-10);
}

#[test]
fn one_oscillator_network_ensemble_reproduces_engine_bitwise() {
    let params = OscillatorParams::default();
    let bath = BathSpec::new(lorentzian(0.3, 0.1), 0.1, NoiseKind::Quantum).unwrap();
    let cfg = SimConfig {
        dt: 0.05,
        t_final: 20.0,
        n_traj: 300,
        master_seed: 424242,
        initial: InitialState::default(),
        integrator: Integrator::Embedded,
        sample_every: 20,
    };
    let engine_stats = engine::run_ensemble(&cfg, &params, &bath).unwrap();
    let net = network::build_network(&single_osc_network(&params, bath)).unwrap();
    let net_out = network::run_network_ensemble(&net, &cfg, 0.25).unwrap();
    let coord = &net_out.coords[0];
    assert_eq!(engine_stats.times, coord.times);
    // identical seed layout and identical arithmetic path: bit-for-bit
    for k in 0..engine_stats.times.len() {
        assert_eq!(engine_stats.mean_x[k].to_bits(), coord.mean_x[k].to_bits());
        assert_eq!(engine_stats.cov_xx[k].to_bits(), coord.cov_xx[k].to_bits());
        assert_eq!(engine_stats.cov_xp[k].to_bits(), coord.cov_xp[k].to_bits());
        assert_eq!(engine_stats.cov_pp[k].to_bits(), coord.cov_pp[k].to_bits());
        assert_eq!(
            engine_stats.se_cov_pp[k].to_bits(),
            coord.se_cov_pp[k].to_bits()
        );
    }
}

#[test]
fn one_oscillator_network_heat_current_vanishes() {
    // a single bath in its own steady state exchanges no net heat
    let params = OscillatorParams::default();
    let bath = BathSpec::new(lorentzian(0.3, 0.8), 0.5, NoiseKind::Quantum).unwrap();
    let net = network::build_network(&single_osc_network(&params, bath)).unwrap();
    let ss = network::network_steady_covariances(&net).unwrap();
    let q = network::heat_currents_opensystems(&net, &ss);
    assert!(q[0].abs() < 1e-9, "{q:?}");
}

fn fig4_spec(t_cold: f64, kind: NoiseKind) -> NetworkSpec {
    let bath = |t| BathSpec::new(lorentzian(0.3, 0.8), t, kind).unwrap();
    network::two_oscillator_chain(1.0, 1.0, 0.1, bath(10.0 * t_cold), bath(t_cold), true)
}

#[test]
fn stochastic_currents_match_trace_formula() {
    let t_cold = 1.0;
    let net = network::build_network(&fig4_spec(t_cold, NoiseKind::Quantum)).unwrap();
    let ss = network::network_steady_covariances(&net).unwrap();
    let q_open = network::heat_currents_opensystems(&net, &ss);

    let cfg = SimConfig {
        dt: 0.05,
        t_final: 250.0,
        n_traj: 1500,
        master_seed: 77,
        initial: InitialState::default(),
        integrator: Integrator::Embedded,
        sample_every: 50,
    };
    let out = network::run_network_ensemble(&net, &cfg, 0.25).unwrap();
    for b in 0..2 {
        let (val, se) = out.steady_currents[b];
        let pull = (val - q_open[b]).abs() / se;
        assert!(
            pull <= 3.0,
            "bath {b}: stochastic {val} +/- {se} vs open-systems {} ({pull:.2} se)",
            q_open[b]
        );
    }
    // energy balance of the stochastic run
    let (qh, seh) = out.steady_currents[0];
    let (qc, sec) = out.steady_currents[1];
    let imbalance = (qh + qc).abs();
    assert!(
        imbalance <= 3.0 * (seh * seh + sec * sec).sqrt() + 1e-3 * qh.abs(),
        "imbalance {imbalance}"
    );
    assert!(qh > 0.0, "hot current must flow into the network");
}

#[test]
fn network_covariance_matrices_match_quadrature() {
    // ensemble covariance matrices at the end of a long run against the
    // stationary resolvent quadrature
    let net = network::build_network(&fig4_spec(0.3, NoiseKind::Quantum)).unwrap();
    let ss = network::network_steady_covariances(&net).unwrap();
    let cfg = SimConfig {
        dt: 0.05,
        t_final: 300.0,
        n_traj: 800,
        master_seed: 3141,
        initial: InitialState::default(),
        integrator: Integrator::Embedded,
        sample_every: 120,
    };
    let out = network::run_network_ensemble(&net, &cfg, 0.25).unwrap();
    let last = out.times.len() - 1;
    for i in 0..2 {
        let pull = (out.c_xx[last][(i, i)] - ss.c_xx[(i, i)]).abs()
            / out.coords[i].se_cov_xx[last];
        assert!(pull <= 3.5, "c_xx[{i}{i}] pull {pull:.2}");
        let pull = (out.c_pp[last][(i, i)] - ss.c_pp[(i, i)]).abs()
            / out.coords[i].se_cov_pp[last];
        assert!(pull <= 3.5, "c_pp[{i}{i}] pull {pull:.2}");
    }
    // cross correlation: compare within a rough SE estimate from the
    // diagonal entries
    let se_cross = (out.coords[0].se_cov_xx[last] * out.coords[1].se_cov_xx[last]).sqrt();
    assert!(
        (out.c_xx[last][(0, 1)] - ss.c_xx[(0, 1)]).abs() <= 4.0 * se_cross,
        "cross c_xx {} vs {}",
        out.c_xx[last][(0, 1)],
        ss.c_xx[(0, 1)]
    );
}

#[test]
fn classical_network_ensemble_and_quadrature_agree() {
    let net = network::build_network(&fig4_spec(0.5, NoiseKind::Classical)).unwrap();
    let ss = network::network_steady_covariances(&net).unwrap();
    let q_open = network::heat_currents_opensystems(&net, &ss);
    let cfg = SimConfig {
        dt: 0.05,
        t_final: 250.0,
        n_traj: 1200,
        master_seed: 999,
        initial: InitialState::default(),
        integrator: Integrator::Embedded,
        sample_every: 50,
    };
    let out = network::run_network_ensemble(&net, &cfg, 0.25).unwrap();
    for b in 0..2 {
        let (val, se) = out.steady_currents[b];
        let pull = (val - q_open[b]).abs() / se;
        assert!(pull <= 3.0, "bath {b}: pull {pull:.2}");
    }
}
