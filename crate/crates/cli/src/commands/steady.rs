//! `quasim steady`: steady-state covariance sweeps over temperature and
//! coupling, with every analytic route side by side.

use super::{config_echo, create_out_file, write_meta, CommonOpts};
use crate::config::{bath_spec, oscillator_params, Config};
use crate::report::{CheckResult, Report};
use crate::CommandOutcome;
use quasim::bath::{BathSpec, NoiseKind, SpectralDensity};
use quasim::export;
use quasim::oracle::{self, SteadyCovariances};

pub fn run(opts: &CommonOpts) -> CommandOutcome {
    let cfg = Config::load(&opts.config)?;
    let params = oscillator_params(&cfg)?;
    let bath_template = bath_spec(&cfg, "bath")?;
    let temperatures = cfg.get_f64_list("sweep", "temperatures")?;
    let base_coupling = match &bath_template.spectral {
        SpectralDensity::Lorentzian { coupling, .. } => *coupling,
        _ => f64::NAN,
    };
    let couplings = cfg.get_f64_list_or("sweep", "couplings", &[base_coupling])?;
    cfg.ensure_fully_consumed()?;
    // fully deterministic command: no seed in the provenance block
    let meta = config_echo(&cfg);

    let mut report = Report::default();
    for &coupling in &couplings {
        let spectral = match &bath_template.spectral {
            SpectralDensity::Lorentzian {
                resonance, width, ..
            } => SpectralDensity::lorentzian(coupling, *resonance, *width)?,
            other => other.clone(),
        };
        let mut rows: Vec<(f64, SteadyCovariances)> = Vec::new();
        for &t in &temperatures {
            let bath = BathSpec::new(spectral.clone(), t, bath_template.kind)?;
            let quad = oracle::steady_covariances_quadrature(&params, &bath)?;
            rows.push((t, quad));
            rows.push((t, oracle::gibbs_covariances(&params, t)?));
            match bath_template.kind {
                NoiseKind::Quantum => {
                    let mf = oracle::mean_force_covariances(&params, &spectral, t)?;
                    report.push(CheckResult::new(
                        &format!("mean-force[coupling={coupling},T={t}]"),
                        "relative gap between quadrature and mean-force covariances",
                        "principal-value route",
                        rel_gap(&quad, &mf),
                        1e-5,
                    ));
                    rows.push((t, mf));
                    let nondim = params.mass == 1.0 && params.frequency == 1.0;
                    if nondim && params.counter_term && t > 0.0 {
                        if let SpectralDensity::Lorentzian { .. } = spectral {
                            let mats =
                                oracle::steady_covariances_matsubara(&params, &spectral, t)?;
                            report.push(CheckResult::new(
                                &format!("matsubara[coupling={coupling},T={t}]"),
                                "relative gap between quadrature and Matsubara covariances",
                                "Matsubara series with analytic tail",
                                rel_gap(&quad, &mats),
                                1e-6,
                            ));
                            rows.push((t, mats));
                        }
                    }
                }
                NoiseKind::Classical => {
                    let exact = oracle::classical_exact_covariances(&params, &spectral, t)?;
                    report.push(CheckResult::new(
                        &format!("classical-exact[coupling={coupling},T={t}]"),
                        "relative gap between quadrature and the exact thermal state",
                        "equipartition closed form",
                        rel_gap(&quad, &exact),
                        1e-8,
                    ));
                    rows.push((t, exact));
                }
            }
        }
        let name = format!("steady_coupling_{coupling}.csv");
        let mut f = create_out_file(&opts.out, &name)?;
        write_meta(&mut f, &meta)?;
        export::write_steady_sweep(&mut f, &rows)?;
    }

    let mut f = create_out_file(&opts.out, "checks.json")?;
    report.write_json(&mut f)?;
    report.write_table(&mut std::io::stdout())?;
    Ok(report.all_pass())
}

fn rel_gap(a: &SteadyCovariances, b: &SteadyCovariances) -> f64 {
    let gx = (a.sigma_xx - b.sigma_xx).abs() / a.sigma_xx.abs().max(1e-300);
    let gp = (a.sigma_pp - b.sigma_pp).abs() / a.sigma_pp.abs().max(1e-300);
    gx.max(gp)
}
