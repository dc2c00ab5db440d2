//! `quasim verify`: the fast cross-check battery. Every check pits one
//! implementation path against an independent reference (closed form,
//! alternative series, direct quadrature, or a bitwise reduction) and the
//! report records how far apart they landed.

use super::create_out_file;
use crate::report::{CheckResult, Report};
use crate::CommandOutcome;
use nalgebra::DMatrix;
use num_complex::Complex64;
use quasim::bath::{BathSpec, NoiseKind, OscillatorParams, SpectralDensity};
use quasim::engine::{self, InitialState, Integrator, SimConfig};
use quasim::network::{self, Attachment, NetworkSpec};
use quasim::noise;
use quasim::oracle;
use quasim::quad::{self, QuadOptions};
use std::path::Path;

/// Scale every tolerance (1.0 = nominal; 0.0 demonstrates the failure
/// reporting path since nothing can pass a zero tolerance).
pub fn run(out_dir: &Path, tolerance_scale: f64) -> CommandOutcome {
    let mut report = Report::default();
    let tol = |t: f64| t * tolerance_scale;
    let fig_j = SpectralDensity::lorentzian(0.3, 0.5, 0.1).unwrap();
    let params = OscillatorParams::default();

    // memory kernel: closed form vs direct quadrature of the defining
    // integral, truncated where the w^-3 tail is negligible
    for tau in [0.5, 5.0] {
        let closed = fig_j.memory_kernel(tau)?;
        let window = 60.0_f64.max(130.0 / tau.powf(2.0 / 3.0));
        let direct = quad::integrate_with_breakpoints(
            |w| 2.0 * fig_j.evaluate(w).unwrap_or(0.0) * (w * tau).sin(),
            0.0,
            window,
            &[0.5],
            &QuadOptions {
                rel_tol: 1e-11,
                abs_tol: 1e-15,
                max_intervals: 20_000,
            },
        )?
        .value;
        report.push(CheckResult::new(
            &format!("kernel-quadrature[tau={tau}]"),
            "Lorentzian kernel closed form against direct frequency quadrature",
            "2 int J(w) sin(w tau) dw",
            closed / direct - 1.0,
            tol(1e-7),
        ));
    }

    // Kramers-Kronig: Im Ktilde = pi J
    for w in [0.3, 0.7, 2.0] {
        let k = fig_j.kernel_fourier(w)?;
        let target = std::f64::consts::PI * fig_j.evaluate(w)?;
        report.push(CheckResult::new(
            &format!("kramers-kronig[w={w}]"),
            "imaginary part of the kernel Fourier transform against pi J(w)",
            "spectral density closed form",
            k.im / target - 1.0,
            tol(1e-10),
        ));
    }

    // frequency renormalization closed form
    report.push(CheckResult::new(
        "renormalization",
        "counter-term shift against coupling^2/resonance^2",
        "kernel Laplace transform at s = 0",
        params.renormalized_frequency_sq(&fig_j) - 1.0 - 0.36
            + (fig_j.kernel_laplace(Complex64::new(0.0, 0.0))?.re - 0.36),
        tol(1e-12),
    ));

    // Gibbs covariances vs a truncated number-state sum
    let gibbs = oracle::gibbs_covariances(&params, 1.0)?;
    let nbar = {
        let beta_omega: f64 = 1.0;
        1.0 / (beta_omega.exp() - 1.0)
    };
    report.push(CheckResult::new(
        "gibbs-number-state",
        "thermal variance against the occupation-number form",
        "(2 nbar + 1)/(2 m Omega)",
        gibbs.sigma_xx / ((2.0 * nbar + 1.0) / 2.0) - 1.0,
        tol(1e-12),
    ));

    // steady-state triangle
    for (coupling, t) in [(0.3, 0.1), (2.0, 1.0)] {
        let j = SpectralDensity::lorentzian(coupling, 0.5, 0.1)?;
        let bath = BathSpec::new(j.clone(), t, NoiseKind::Quantum)?;
        let q = oracle::steady_covariances_quadrature(&params, &bath)?;
        let m = oracle::steady_covariances_matsubara(&params, &j, t)?;
        let mf = oracle::mean_force_covariances(&params, &j, t)?;
        report.push(CheckResult::new(
            &format!("matsubara[coupling={coupling},T={t}]"),
            "steady covariances: quadrature vs Matsubara series",
            "independent summation route",
            (q.sigma_xx / m.sigma_xx - 1.0)
                .abs()
                .max((q.sigma_pp / m.sigma_pp - 1.0).abs()),
            tol(1e-6),
        ));
        report.push(CheckResult::new(
            &format!("mean-force[coupling={coupling},T={t}]"),
            "steady covariances: quadrature vs principal-value route",
            "mean-force response integrals",
            (q.sigma_xx / mf.sigma_xx - 1.0)
                .abs()
                .max((q.sigma_pp / mf.sigma_pp - 1.0).abs()),
            tol(1e-5),
        ));
    }

    // classical exactness, with and without the counter-term
    {
        let j = SpectralDensity::lorentzian(0.45, 0.5, 0.1)?;
        let bath = BathSpec::new(j.clone(), 0.7, NoiseKind::Classical)?;
        let q = oracle::steady_covariances_quadrature(&params, &bath)?;
        report.push(CheckResult::new(
            "classical-thermal",
            "classical steady state against the equipartition values",
            "T/(m Omega^2) and m T",
            (q.sigma_xx / 0.7 - 1.0).abs().max((q.sigma_pp / 0.7 - 1.0).abs()),
            tol(1e-8),
        ));
        let off = OscillatorParams {
            counter_term: false,
            ..params
        };
        let q = oracle::steady_covariances_quadrature(&off, &bath)?;
        let softened = 1.0 - 0.45 * 0.45 / 0.25;
        report.push(CheckResult::new(
            "classical-softened",
            "counter-term-free steady state at the softened frequency",
            "thermal state at sqrt(Omega^2 - Khat(0)/m)",
            q.sigma_xx / (0.7 / softened) - 1.0,
            tol(1e-8),
        ));
    }

    // engine: noise-free trajectory against the response functions
    let quiet = BathSpec::new(fig_j.clone(), 0.0, NoiseKind::Classical)?;
    let g = oracle::g_functions(&params, &fig_j)?;
    {
        let cfg = SimConfig {
            dt: 1e-3,
            t_final: 20.0,
            n_traj: 1,
            master_seed: 1,
            initial: InitialState {
                mean_x: 1.0,
                mean_p: 0.0,
                cov_xx: 0.0,
                cov_xp: 0.0,
                cov_pp: 0.0,
            },
            integrator: Integrator::Embedded,
            sample_every: 1000,
        };
        let rec = engine::integrate_trajectory(&cfg, &params, &quiet, 0)?;
        let t = (rec.x.len() - 1) as f64 * cfg.dt;
        report.push(CheckResult::new(
            "trajectory-response",
            "noise-free trajectory endpoint against g1(t)",
            "pole-sum response function",
            rec.x.last().unwrap() - g.g1(t),
            tol(1e-6),
        ));
    }

    // step-halving convergence order (bound check: 4/ratio <= 1)
    {
        let mut errs = Vec::new();
        for &dt in &[0.04, 0.02, 0.01] {
            let cfg = SimConfig {
                dt,
                t_final: 10.0,
                n_traj: 1,
                master_seed: 1,
                initial: InitialState {
                    mean_x: 1.0,
                    mean_p: 0.0,
                    cov_xx: 0.0,
                    cov_xp: 0.0,
                    cov_pp: 0.0,
                },
                integrator: Integrator::Embedded,
                sample_every: 1,
            };
            let rec = engine::integrate_trajectory(&cfg, &params, &quiet, 0)?;
            let t = (rec.x.len() - 1) as f64 * dt;
            errs.push((rec.x.last().unwrap() - g.g1(t)).abs());
        }
        let min_ratio = (errs[0] / errs[1]).min(errs[1] / errs[2]);
        report.push(CheckResult::new(
            "step-halving",
            "endpoint error contraction under dt halving (4/ratio)",
            "second-order convergence bound",
            4.0 / min_ratio,
            tol(1.0),
        ));
    }

    // residue identities
    {
        let sum_r: Complex64 = g.residues().iter().sum();
        let sum_rp: Complex64 = g.poles().iter().zip(g.residues()).map(|(p, r)| p * r).sum();
        report.push(CheckResult::new(
            "residue-identities",
            "pole-residue sum rules of the response function",
            "partial-fraction structure",
            sum_r.norm().max((sum_rp - 1.0).norm()),
            tol(1e-12),
        ));
    }

    // random-parameter pole stability
    {
        let mut state = 0x9e37_79b9_7f4a_7c15_u64;
        let mut rand01 = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut unstable = 0;
        let mut tried = 0;
        while tried < 50 {
            let j = SpectralDensity::lorentzian(
                0.05 + 2.95 * rand01(),
                0.1 + 1.9 * rand01(),
                0.02 + 1.48 * rand01(),
            )?;
            let p = OscillatorParams {
                mass: 0.2 + 4.8 * rand01(),
                frequency: 0.2 + 2.8 * rand01(),
                counter_term: true,
            };
            match oracle::g_functions(&p, &j) {
                Ok(g) => {
                    tried += 1;
                    if !g.is_stable() {
                        unstable += 1;
                    }
                }
                Err(quasim::Error::DegeneratePoles { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        report.push(CheckResult::new(
            "pole-stability-sweep",
            "unstable pole configurations over a random parameter sweep",
            "counter-term stability argument",
            unstable as f64,
            tol(0.5),
        ));
    }

    // small ensemble against the analytic moments
    {
        let bath = BathSpec::new(fig_j.clone(), 0.1, NoiseKind::Quantum)?;
        let cfg = SimConfig {
            dt: 0.05,
            t_final: 20.0,
            n_traj: 600,
            master_seed: 20_26,
            initial: InitialState::default(),
            integrator: Integrator::Embedded,
            sample_every: 80,
        };
        let stats = engine::run_ensemble(&cfg, &params, &bath)?;
        let mut worst: f64 = 0.0;
        for (k, &t) in stats.times.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let (oxx, oxp, opp) = oracle::covariance_evolution(&g, &bath, (0.5, 0.0, 0.5), t)?;
            worst = worst
                .max((stats.cov_xx[k] - oxx).abs() / stats.se_cov_xx[k])
                .max((stats.cov_xp[k] - oxp).abs() / stats.se_cov_xp[k])
                .max((stats.cov_pp[k] - opp).abs() / stats.se_cov_pp[k]);
        }
        report.push(CheckResult::new(
            "ensemble-vs-analytic",
            "worst moment pull of a 600-trajectory ensemble, in standard errors",
            "frequency-quadrature moment evolution",
            worst,
            tol(4.0),
        ));
    }

    // one-oscillator network reduces to the scalar engine bit for bit
    {
        let bath = BathSpec::new(fig_j.clone(), 0.1, NoiseKind::Quantum)?;
        let cfg = SimConfig {
            dt: 0.05,
            t_final: 10.0,
            n_traj: 100,
            master_seed: 555,
            initial: InitialState::default(),
            integrator: Integrator::Embedded,
            sample_every: 40,
        };
        let stats = engine::run_ensemble(&cfg, &params, &bath)?;
        let spec = NetworkSpec {
            masses: DMatrix::from_element(1, 1, 1.0),
            potential: DMatrix::from_element(1, 1, 1.0),
            attachments: vec![Attachment {
                oscillators: vec![0],
                bath,
            }],
            counter_term: true,
        };
        let net = network::build_network(&spec)?;
        let out = network::run_network_ensemble(&net, &cfg, 0.25)?;
        let max_diff = stats
            .cov_xx
            .iter()
            .zip(&out.coords[0].cov_xx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        report.push(CheckResult::new(
            "network-reduction",
            "one-oscillator network moments against the scalar engine",
            "bitwise reduction invariant",
            max_diff,
            tol(0.0),
        ));
    }

    // equal temperatures carry no heat
    {
        let bath = |t: f64| {
            BathSpec::new(
                SpectralDensity::lorentzian(0.3, 0.5, 0.8).unwrap(),
                t,
                NoiseKind::Quantum,
            )
            .unwrap()
        };
        let spec = network::two_oscillator_chain(1.0, 1.0, 0.1, bath(0.5), bath(0.5), true);
        let net = network::build_network(&spec)?;
        let q = network::heat_currents_opensystems(&net, &network::network_steady_covariances(&net)?);
        report.push(CheckResult::new(
            "equal-temperature-currents",
            "steady heat currents of an unbiased network",
            "equilibrium carries no net heat",
            q[0].abs().max(q[1].abs()),
            tol(1e-9),
        ));
    }

    // noise determinism and spectral content
    {
        let bath = BathSpec::new(fig_j.clone(), 0.1, NoiseKind::Quantum)?;
        let a = noise::synthesize_trace(&bath, 0.1, 4096, 11)?;
        let b = noise::synthesize_trace(&bath, 0.1, 4096, 11)?;
        let max_diff = a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max);
        report.push(CheckResult::new(
            "noise-determinism",
            "same seed, same trace",
            "bitwise reproducibility contract",
            max_diff,
            tol(0.0),
        ));

        let traces: Vec<_> = (0..12)
            .map(|k| noise::synthesize_trace(&bath, 0.1, 1 << 13, 600 + k))
            .collect::<Result<_, _>>()?;
        let est = noise::estimate_psd(&traces, Some(2048))?;
        let (mut e, mut t) = (0.0, 0.0);
        for (f, p) in est.freq.iter().zip(&est.psd) {
            if *f >= 0.2 && *f <= 0.8 {
                e += p;
                t += bath.force_psd(*f)?;
            }
        }
        report.push(CheckResult::new(
            "noise-spectrum-band",
            "band-averaged periodogram of a small ensemble",
            "target force spectrum",
            e / t - 1.0,
            tol(0.05),
        ));
    }

    let mut f = create_out_file(out_dir, "verify_report.json")?;
    report.write_json(&mut f)?;
    report.write_table(&mut std::io::stdout())?;
    Ok(report.all_pass())
}
